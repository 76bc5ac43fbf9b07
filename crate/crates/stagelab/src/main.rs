mod cli;
mod model;
mod output;
mod sweep;

use std::process::ExitCode;

use anyhow::anyhow;
use clap::Parser;
use serde::Serialize;
use stagelab_core::kraus::{completeness_defect, povms, rates};
use stagelab_core::network::validate_semi_unitarity;
use stagelab_core::oracle::{oracle_run, Completion, OracleError};
use stagelab_core::whichpath::which_path_table;
use stagelab_core::{compose, Network};

use cli::{Cli, Command, Format, ModelArgs, RunArgs, ValidateArgs, WhichpathArgs};
use model::{Failure, Family, Outcome};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Validate(a) => validate(a),
        Command::Whichpath(a) => whichpath(a),
        Command::OracleCheck(a) => oracle_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}

struct Checks {
    lines: Vec<String>,
    pass: bool,
}

fn check(net: &Network, tol: f64) -> Outcome<Checks> {
    let mut lines = Vec::new();
    let mut pass = true;
    for t in net.transitions() {
        let rep = validate_semi_unitarity(t, tol);
        pass &= rep.pass;
        lines.push(rep.to_string());
    }
    if pass {
        let u = compose(net).map_err(Failure::invalid)?;
        let defect = completeness_defect(&povms(&u), u.dim());
        let ok = defect <= tol;
        pass &= ok;
        lines.push(format!("POVM completeness defect {defect:.3e} (tol {tol:.1e}): {}", verdict(ok)));
        let table = rates(net).map_err(Failure::invalid)?;
        let drift = (table.total() - table.source_norm_sqr()).abs();
        let ok = drift <= tol;
        pass &= ok;
        lines.push(format!(
            "rate conservation |Σ rates − ‖Ψ0‖²| = {drift:.3e} (tol {tol:.1e}): {}",
            verdict(ok)
        ));
    }
    Ok(Checks { lines, pass })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn run(args: &RunArgs) -> Outcome<()> {
    let tol = model::tolerance()?;
    let model = Family::new(&args.model)?.build(&[])?;
    let checks = check(&model.net, tol)?;
    if !checks.pass {
        for l in &checks.lines {
            eprintln!("{l}");
        }
        if !args.warn_only {
            return Err(Failure::invalid(anyhow!("network failed validation")));
        }
    }
    let table = rates(&model.net).map_err(Failure::invalid)?;
    let bytes = match output::format_for(&args.output) {
        Format::Csv => output::table_csv(&table),
        Format::Json => output::json_bytes(&output::table_out(&table)),
    }
    .map_err(Failure::usage)?;
    output::emit(&args.output.out, &bytes).map_err(Failure::usage)
}

fn validate(args: &ValidateArgs) -> Outcome<()> {
    let tol = model::tolerance()?;
    let model = Family::new(&args.model)?.build(&[])?;
    let checks = check(&model.net, tol)?;
    for l in &checks.lines {
        println!("{l}");
    }
    println!("{}", if checks.pass { "valid" } else { "INVALID" });
    if checks.pass || args.warn_only {
        Ok(())
    } else {
        Err(Failure::invalid(anyhow!("network failed validation")))
    }
}

#[derive(Serialize)]
struct Contribution {
    kind: &'static str,
    signature: String,
    value: f64,
}

#[derive(Serialize)]
struct WhichPathOut {
    phi: f64,
    revealing: Vec<Vec<String>>,
    contributions: Vec<Contribution>,
}

fn whichpath(args: &WhichpathArgs) -> Outcome<()> {
    let model = Family::new(&args.model)?.build(&[])?;
    let table = rates(&model.net).map_err(Failure::invalid)?;
    let res = which_path_table(&table, &model.reveal).map_err(Failure::usage)?;
    let mut rows: Vec<Contribution> = res
        .contributions
        .into_iter()
        .map(|(signature, value)| Contribution { kind: "contribution", signature, value })
        .collect();
    let bytes = match output::format_for(&args.output) {
        Format::Json => output::json_bytes(&WhichPathOut {
            phi: res.phi,
            revealing: model.reveal.patterns().to_vec(),
            contributions: rows,
        }),
        Format::Csv => {
            rows.push(Contribution { kind: "phi", signature: String::new(), value: res.phi });
            output::csv_bytes(&rows)
        }
    }
    .map_err(Failure::usage)?;
    output::emit(&args.output.out, &bytes).map_err(Failure::usage)
}

#[derive(Serialize)]
struct DiffRow {
    signature: String,
    engine: f64,
    oracle: f64,
    diff: f64,
}

fn oracle_check(args: &ModelArgs) -> Outcome<()> {
    let tol = model::tolerance()?;
    let model = Family::new(args)?.build(&[])?;
    let engine = rates(&model.net).map_err(Failure::invalid)?;
    let runs = Completion::ALL
        .iter()
        .map(|c| oracle_run(&model.net, *c))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| match e {
            OracleError::TooLarge { .. } => Failure::usage(e),
            _ => Failure::invalid(e),
        })?;
    let oracle = &runs[0].rates;
    let by_label = |t: &stagelab_core::RateTable| -> Vec<(String, f64)> {
        t.rows().iter().map(|r| (t.label(r), r.rate)).collect()
    };
    let (e_rows, o_rows) = (by_label(&engine), by_label(oracle));
    let mut labels: Vec<&String> = e_rows.iter().map(|(l, _)| l).collect();
    labels.extend(o_rows.iter().map(|(l, _)| l).filter(|l| !e_rows.iter().any(|(x, _)| x == *l)));
    let lookup = |rows: &[(String, f64)], l: &str| rows.iter().find(|(x, _)| x == l).map_or(0.0, |(_, r)| *r);
    let rows: Vec<DiffRow> = labels
        .into_iter()
        .map(|l| {
            let (e, o) = (lookup(&e_rows, l), lookup(&o_rows, l));
            DiffRow { signature: l.clone(), engine: e, oracle: o, diff: (e - o).abs() }
        })
        .collect();
    output::emit("-", &output::csv_bytes(&rows).map_err(Failure::usage)?).map_err(Failure::usage)?;
    let max_diff = engine.max_discrepancy(oracle);
    let completion_diff = runs[0].rates.max_discrepancy(&runs[1].rates);
    let drift = runs.iter().map(|r| r.norm_drift()).fold(0.0, f64::max);
    eprintln!("max engine/oracle difference {max_diff:.3e}");
    eprintln!("max difference between completions {completion_diff:.3e}");
    eprintln!("max stage norm drift {drift:.3e}");
    if max_diff <= tol && completion_diff <= tol && drift <= tol {
        eprintln!("oracle check passed (tol {tol:.1e})");
        Ok(())
    } else {
        Err(Failure::invalid(anyhow!("oracle check failed (tol {tol:.1e})")))
    }
}
