//! Shared helpers: a generator of random hand-written style `.sn` networks.

#![allow(dead_code)]

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use stagelab_core::{TransferMatrix, C64};

pub const NETWORKS_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/networks");

pub fn shipped(name: &str) -> String {
    std::fs::read_to_string(format!("{NETWORKS_DIR}/{name}.sn")).expect("shipped network")
}

fn lit(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("w*({:?}{sign}{:?}i)", z.re, z.im.abs())
}

fn quote(label: &str) -> String {
    if label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        label.to_string()
    } else {
        format!("\"{label}\"")
    }
}

fn term(labels: &[String], config: &[usize]) -> String {
    config.iter().map(|&d| quote(&labels[d])).collect::<Vec<_>>().join(" ")
}

const BASES: [[char; 2]; 3] = [['H', 'V'], ['L', 'R'], ['+', '-']];

/// Every product ket of `slots` slots, each slot in its own random basis.
fn product_kets<R: Rng>(rng: &mut R, slots: usize) -> Vec<String> {
    let bases: Vec<[char; 2]> = (0..slots).map(|_| *BASES.choose(rng).unwrap()).collect();
    (0..1usize << slots)
        .map(|k| (0..slots).map(|s| bases[s][(k >> (slots - 1 - s)) & 1]).collect())
        .collect()
}

/// Random configurations of one or two detectors out of `n`.
fn random_configs<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (0..n).map(|a| vec![a]).collect();
    for a in 0..n {
        for b in a + 1..n {
            all.push(vec![a, b]);
        }
    }
    all.shuffle(rng);
    all.truncate(count.min(all.len()));
    all.sort();
    all
}

/// A random valid network: stage dimensions never shrink, every transition
/// is a random isometry on the configurations reached so far, and spin is
/// either carried inertly or acted on through rules in random product
/// bases.
pub fn random_sn<R: Rng>(rng: &mut R) -> String {
    let slots = rng.gen_range(1..=2usize);
    let n_stages = rng.gen_range(2..=4usize);
    let mut out = String::from("stagelab-network v1\n# generated\nparam w = 1;\nconstraint w*conj(w) == 1;\n");
    let mut stage_labels: Vec<Vec<String>> = vec![vec!["src".into()]];
    let mut detectors = 1usize;
    for n in 1..n_stages {
        detectors = (detectors + rng.gen_range(1..=2)).clamp(2, 6);
        let labels: Vec<String> = (0..detectors)
            .map(|d| if rng.gen_bool(0.3) { format!("D{n}+{d}") } else { format!("D{n}_{d}") })
            .collect();
        stage_labels.push(labels);
    }
    for (n, labels) in stage_labels.iter().enumerate() {
        let s = if n == 0 { 1 } else { slots };
        let quoted: Vec<String> = labels.iter().map(|l| quote(l)).collect();
        let _ = writeln!(out, "stage {n} slots {s} {{ {} }}", quoted.join(", "));
    }

    // stage 0 → 1: both source polarizations go to a random isometric image
    let kets1 = product_kets(rng, slots);
    let configs1 = { let n = rng.gen_range(1..=3); random_configs(rng, stage_labels[1].len(), n) };
    let mut targets: Vec<(usize, usize)> = Vec::new();
    for c in 0..configs1.len() {
        for k in 0..kets1.len() {
            targets.push((c, k));
        }
    }
    targets.shuffle(rng);
    targets.truncate(rng.gen_range(2..=targets.len().max(2)));
    let v = TransferMatrix::random(rng, targets.len(), 2).unwrap();
    let _ = writeln!(out, "transition 0 -> 1 {{");
    for (j, input) in ['H', 'V'].iter().enumerate() {
        let rhs: Vec<String> = targets
            .iter()
            .enumerate()
            .map(|(i, (c, k))| format!("{} * |{}> @ {}", lit(v.get(i, j)), kets1[*k], term(&stage_labels[1], &configs1[*c])))
            .collect();
        let _ = writeln!(out, "    |{input}> @ src -> {};", rhs.join(" + "));
    }
    let _ = writeln!(out, "}}");
    let mut reached: Vec<Vec<usize>> = {
        let mut r: Vec<Vec<usize>> = targets.iter().map(|(c, _)| configs1[*c].clone()).collect();
        r.sort();
        r.dedup();
        r
    };

    for n in 1..n_stages - 1 {
        let to = &stage_labels[n + 1];
        let _ = writeln!(out, "transition {n} -> {} {{", n + 1);
        if rng.gen_bool(0.5) {
            // spin carried through
            let outs = { let n = reached.len() + rng.gen_range(0..=2); random_configs(rng, to.len(), n) };
            let v = TransferMatrix::random(rng, outs.len(), reached.len()).unwrap();
            for (j, c) in reached.iter().enumerate() {
                let rhs: Vec<String> =
                    outs.iter().enumerate().map(|(i, o)| format!("{} * {}", lit(v.get(i, j)), term(to, o))).collect();
                let _ = writeln!(out, "    {} -> {};", term(&stage_labels[n], c), rhs.join(" + "));
            }
            reached = outs;
        } else {
            // spin-active: each reached configuration splits by product ket
            let kin = product_kets(rng, slots);
            let kout = product_kets(rng, slots);
            let inputs: Vec<(usize, usize)> = (0..reached.len()).flat_map(|c| (0..kin.len()).map(move |k| (c, k))).collect();
            let outs_c = { let n = reached.len() + rng.gen_range(0..=1); random_configs(rng, to.len(), n) };
            let outs: Vec<(usize, usize)> = (0..outs_c.len()).flat_map(|c| (0..kout.len()).map(move |k| (c, k))).collect();
            let v = TransferMatrix::random(rng, outs.len(), inputs.len()).unwrap();
            for (j, (c, k)) in inputs.iter().enumerate() {
                let rhs: Vec<String> = outs
                    .iter()
                    .enumerate()
                    .map(|(i, (oc, ok))| format!("{} * |{}> @ {}", lit(v.get(i, j)), kout[*ok], term(to, &outs_c[*oc])))
                    .collect();
                let _ = writeln!(out, "    |{}> @ {} -> {};", kin[*k], term(&stage_labels[n], &reached[*c]), rhs.join(" + "));
            }
            reached = outs_c;
        }
        let _ = writeln!(out, "}}");
    }
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let a = C64::from_polar(theta.cos(), 0.0);
    let b = C64::from_polar(theta.sin(), phase);
    let _ = writeln!(out, "source = {} * |H> @ src + {} * |V> @ src;", lit(a), lit(b));
    out
}
