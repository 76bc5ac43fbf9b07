//! One-parameter sweeps with a constancy summary per rate column.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;
use stagelab_core::kraus::rates;
use stagelab_core::C64;

use crate::cli::{Format, SweepArgs};
use crate::model::{parse_assignment, Family, Failure, Outcome};
use crate::output::{self, RowOut};

/// Columns whose spread is at most this are reported constant.
pub const CONSTANT_TOL: f64 = 1e-12;

#[derive(Debug, Serialize)]
pub struct PointOut {
    pub index: usize,
    pub value: f64,
    /// Values of the coupled parameters at this point.
    pub coupled: BTreeMap<String, [f64; 2]>,
    pub rows: Vec<RowOut>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub signature: String,
    pub min: f64,
    pub max: f64,
    pub variation: f64,
    pub constant: bool,
}

#[derive(Debug, Serialize)]
pub struct SweepOut {
    pub param: String,
    pub points: Vec<PointOut>,
    pub summary: Vec<SummaryRow>,
}

pub fn grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![from],
        n => (0..n).map(|k| from + (to - from) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn evaluate_point(family: &Family, args: &SweepArgs, couples: &[(String, String)], index: usize, value: f64) -> Outcome<PointOut> {
    let mut overrides = family.sets().to_vec();
    overrides.push((args.param.clone(), C64::new(value, 0.0)));
    let mut coupled = BTreeMap::new();
    for (name, expr) in couples {
        let v = family.eval(expr, &overrides)?;
        overrides.push((name.clone(), v));
        coupled.insert(name.clone(), [v.re, v.im]);
    }
    let extra = &overrides[family.sets().len()..];
    let model = family.build(extra)?;
    let table = rates(&model.net).map_err(|e| Failure::invalid(anyhow!("at {}={value}: {e}", args.param)))?;
    let mut rows = output::rows(&table);
    rows.extend(output::marginals(&table));
    Ok(PointOut { index, value, coupled, rows })
}

pub fn summarize(points: &[PointOut]) -> Vec<SummaryRow> {
    let mut order: Vec<String> = Vec::new();
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (k, p) in points.iter().enumerate() {
        for r in &p.rows {
            let col = values.entry(r.signature.clone()).or_insert_with(|| {
                order.push(r.signature.clone());
                Vec::new()
            });
            // signatures absent at earlier points had rate 0 there
            col.resize(k, 0.0);
            col.push(r.normalized_rate);
        }
    }
    order
        .into_iter()
        .map(|sig| {
            let mut col = values.remove(&sig).unwrap_or_default();
            col.resize(points.len(), 0.0);
            let min = col.iter().copied().fold(f64::INFINITY, f64::min);
            let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let variation = max - min;
            SummaryRow { signature: sig, min, max, variation, constant: variation <= CONSTANT_TOL }
        })
        .collect()
}

pub fn run(args: &SweepArgs) -> Outcome<()> {
    if args.points == 0 {
        return Err(Failure::usage(anyhow!("--points must be at least 1")));
    }
    let family = Family::new(&args.model)?;
    family.check_param(&args.param)?;
    let couples = args.couple.iter().map(|c| parse_assignment(c)).collect::<Outcome<Vec<_>>>()?;
    for (name, _) in &couples {
        family.check_param(name)?;
    }
    let xs = grid(args.from, args.to, args.points);

    // points are independent; evaluate them on scoped threads and keep grid order
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(xs.len());
    let mut results: Vec<Option<Outcome<PointOut>>> = (0..xs.len()).map(|_| None).collect();
    let chunk_len = xs.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (c, slots) in results.chunks_mut(chunk_len).enumerate() {
            let (family, couples, xs) = (&family, &couples, &xs);
            scope.spawn(move || {
                for (j, slot) in slots.iter_mut().enumerate() {
                    let k = c * chunk_len + j;
                    *slot = Some(evaluate_point(family, args, couples, k, xs[k]));
                }
            });
        }
    });
    let points = results.into_iter().map(|r| r.expect("every point evaluated")).collect::<Outcome<Vec<_>>>()?;
    let summary = summarize(&points);
    let out = SweepOut { param: args.param.clone(), points, summary };

    match output::format_for(&args.output) {
        Format::Json => output::emit(&args.output.out, &output::json_bytes(&out).map_err(Failure::usage)?),
        Format::Csv if args.output.out == "-" => output::emit("-", &output::csv_bytes(&out.summary).map_err(Failure::usage)?),
        Format::Csv => write_dir(Path::new(&args.output.out), &out),
    }
    .map_err(Failure::usage)
}

#[derive(Serialize)]
struct PointIndex<'a> {
    point: usize,
    file: &'a str,
    value: f64,
}

fn write_dir(dir: &Path, out: &SweepOut) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut index = Vec::new();
    let names: Vec<String> = out.points.iter().map(|p| format!("point_{:03}.csv", p.index)).collect();
    for (p, name) in out.points.iter().zip(&names) {
        std::fs::write(dir.join(name), output::csv_bytes(&p.rows)?)?;
        index.push(PointIndex { point: p.index, file: name, value: p.value });
    }
    std::fs::write(dir.join("points.csv"), output::csv_bytes(&index)?)?;
    std::fs::write(dir.join("summary.csv"), output::csv_bytes(&out.summary)?)?;
    Ok(())
}
