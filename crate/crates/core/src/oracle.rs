//! Brute-force verifier working in the full Hilbert space of every stage.
//!
//! Stage `n` with `d` detectors and spin dimension `k` is represented by a
//! dense vector of length `k · 2^d`. Amplitude index is
//! `mask · k + spin`, where bit `j` of `mask` is set when detector `j` (in
//! declaration order) carries a signal; `spin` is the canonical `HV` index.
//!
//! Each transition is known only on its effective basis `d_a ↦ y_a`. The
//! oracle extends it to an isometry of the whole stage space as
//! `V = R Π`, where `Π` is a fixed embedding chosen by [`Completion`] and
//! `R` is a product of rank-one phase corrections and Householder
//! reflections sending `Π d_a` to `y_a` one basis vector at a time. Every
//! such extension agrees on reachable states, so two completions must give
//! the same rates.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::config::SignalConfig;
use crate::kraus::{RateRow, RateTable};
use crate::labstate::LabState;
use crate::network::{Network, Stage, StageTransition};
use crate::{c64, C64};

/// Largest stage dimension the oracle will materialize.
pub const MAX_DIM: usize = 1 << 24;

/// Gram-matrix tolerance on the declared effective basis.
pub const GRAM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum OracleError {
    #[error("stage {stage}: dimension {dim} exceeds the oracle limit of 2^24")]
    TooLarge { stage: usize, dim: u128 },
    #[error("transition {from}: stage dimension shrinks from {from_dim} to {to_dim}, no full-space isometry exists")]
    NotExtendable { from: usize, from_dim: usize, to_dim: usize },
    #[error("transition {from}: effective basis is not semi-unitary (Gram defect {defect:.3e})")]
    NotSemiUnitary { from: usize, defect: f64 },
}

/// How effective-basis rules are embedded before the completing reflections.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Completion {
    /// `Π e_k = e_k`.
    Identity,
    /// `Π e_k = e^{0.37 i k} e_{N'-1-k}`.
    Reversed,
}

impl Completion {
    pub const ALL: [Completion; 2] = [Completion::Identity, Completion::Reversed];

    fn embed(self, k: usize, to_dim: usize) -> (usize, C64) {
        match self {
            Completion::Identity => (k, c64(1.0, 0.0)),
            Completion::Reversed => (to_dim - 1 - k, C64::from_polar(1.0, 0.37 * k as f64)),
        }
    }
}

/// Dense amplitudes of one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct FullStateVector {
    pub stage: usize,
    pub spin_dim: usize,
    pub amplitudes: Vec<C64>,
}

impl FullStateVector {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability mass with exactly the detectors in `mask` firing.
    pub fn mask_weight(&self, mask: usize) -> f64 {
        let base = mask * self.spin_dim;
        self.amplitudes[base..base + self.spin_dim].iter().map(|a| a.norm_sqr()).sum()
    }
}

fn stage_dim(stage: &Stage) -> Result<usize, OracleError> {
    let d = stage.detectors().len() as u32;
    let dim = if d >= 64 {
        u128::MAX
    } else {
        (stage.spin_dim() as u128) << d
    };
    if dim > MAX_DIM as u128 {
        return Err(OracleError::TooLarge { stage: stage.index(), dim });
    }
    Ok(dim as usize)
}

fn config_mask(config: &SignalConfig) -> usize {
    config.detectors().fold(0, |m, d| m | (1 << d))
}

type Sparse = BTreeMap<usize, C64>;

fn sparse_of(state: &LabState) -> Sparse {
    let sd = state.spin_dim();
    let mut v = Sparse::new();
    for (config, k, c) in state.terms() {
        *v.entry(config_mask(config) * sd + k as usize).or_insert(c64(0.0, 0.0)) += c;
    }
    v
}

fn sparse_inner(a: &Sparse, b: &Sparse) -> C64 {
    let (small, large, swap) = if a.len() <= b.len() { (a, b, false) } else { (b, a, true) };
    let mut acc = c64(0.0, 0.0);
    for (k, x) in small {
        if let Some(y) = large.get(k) {
            acc += if swap { y.conj() * x } else { x.conj() * y };
        }
    }
    acc
}

fn sparse_norm_sqr(a: &Sparse) -> f64 {
    a.values().map(|x| x.norm_sqr()).sum()
}

/// `v ↦ v + f · x (x† v)`.
#[derive(Clone, Debug)]
struct RankOne {
    x: Sparse,
    f: C64,
}

impl RankOne {
    fn apply_sparse(&self, v: &mut Sparse) {
        let c = sparse_inner(&self.x, v);
        if c == c64(0.0, 0.0) {
            return;
        }
        let s = self.f * c;
        for (k, x) in &self.x {
            *v.entry(*k).or_insert(c64(0.0, 0.0)) += s * x;
        }
    }

    fn apply_dense(&self, v: &mut [C64]) {
        let c: C64 = self.x.iter().map(|(k, x)| x.conj() * v[*k]).sum();
        if c == c64(0.0, 0.0) {
            return;
        }
        let s = self.f * c;
        for (k, x) in &self.x {
            v[*k] += s * x;
        }
    }
}

/// Full-space extension of one transition.
struct Extension {
    from_dim: usize,
    to_dim: usize,
    completion: Completion,
    ops: Vec<RankOne>,
}

impl Extension {
    fn embed_sparse(&self, v: &Sparse) -> Sparse {
        v.iter()
            .map(|(k, a)| {
                let (j, p) = self.completion.embed(*k, self.to_dim);
                (j, p * a)
            })
            .collect()
    }

    fn apply(&self, input: &[C64]) -> Vec<C64> {
        debug_assert_eq!(input.len(), self.from_dim);
        let mut out = vec![c64(0.0, 0.0); self.to_dim];
        for (k, a) in input.iter().enumerate() {
            if *a != c64(0.0, 0.0) {
                let (j, p) = self.completion.embed(k, self.to_dim);
                out[j] = p * a;
            }
        }
        for op in &self.ops {
            op.apply_dense(&mut out);
        }
        out
    }
}

fn gram_defect(vs: &[Sparse]) -> f64 {
    let mut worst = 0.0f64;
    for (a, va) in vs.iter().enumerate() {
        for (b, vb) in vs.iter().enumerate().skip(a) {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((sparse_inner(va, vb) - c64(target, 0.0)).norm());
        }
    }
    worst
}

fn extend(
    t: &StageTransition,
    from: &Stage,
    to: &Stage,
    completion: Completion,
) -> Result<Extension, OracleError> {
    let from_dim = stage_dim(from)?;
    let to_dim = stage_dim(to)?;
    if from_dim > to_dim {
        return Err(OracleError::NotExtendable { from: from.index(), from_dim, to_dim });
    }
    let pairs = t.effective_basis();
    let ds: Vec<Sparse> = pairs.iter().map(|(d, _)| sparse_of(d)).collect();
    let ys: Vec<Sparse> = pairs.iter().map(|(_, y)| sparse_of(y)).collect();
    let defect = gram_defect(&ds).max(gram_defect(&ys));
    if !(defect <= GRAM_TOL) {
        return Err(OracleError::NotSemiUnitary { from: from.index(), defect });
    }
    let mut ext = Extension { from_dim, to_dim, completion, ops: Vec::new() };
    for (d, y) in ds.iter().zip(&ys) {
        let mut x = ext.embed_sparse(d);
        for op in &ext.ops {
            op.apply_sparse(&mut x);
        }
        // rotate the phase of x so that ⟨x, y⟩ is real, then reflect x onto y
        let overlap = sparse_inner(&x, y);
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c64(1.0, 0.0) };
        let xn = sparse_norm_sqr(&x);
        if (phase - c64(1.0, 0.0)).norm() > 0.0 && xn > 0.0 {
            ext.ops.push(RankOne { x: x.clone(), f: (phase - c64(1.0, 0.0)) / xn });
            for v in x.values_mut() {
                *v *= phase;
            }
        }
        let mut w = x;
        for (k, b) in y {
            *w.entry(*k).or_insert(c64(0.0, 0.0)) -= b;
        }
        w.retain(|_, v| *v != c64(0.0, 0.0));
        let wn = sparse_norm_sqr(&w);
        if wn > 1e-28 {
            ext.ops.push(RankOne { x: w, f: c64(-2.0 / wn, 0.0) });
        }
    }
    Ok(ext)
}

fn dense_of(state: &LabState, dim: usize) -> Vec<C64> {
    let mut v = vec![c64(0.0, 0.0); dim];
    for (k, a) in sparse_of(state) {
        v[k] += a;
    }
    v
}

/// Per-stage states and final rates of one oracle evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRun {
    pub rates: RateTable,
    /// `‖Ψ_n‖²` for every stage.
    pub stage_norms: Vec<f64>,
    pub final_state: FullStateVector,
}

impl OracleRun {
    /// Largest deviation of any stage norm from the source norm.
    pub fn norm_drift(&self) -> f64 {
        let n0 = self.stage_norms[0];
        self.stage_norms.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max)
    }
}

pub fn oracle_run(net: &Network, completion: Completion) -> Result<OracleRun, OracleError> {
    let stages = net.stages();
    for s in stages {
        stage_dim(s)?;
    }
    let mut psi = FullStateVector {
        stage: 0,
        spin_dim: stages[0].spin_dim(),
        amplitudes: dense_of(net.source(), stage_dim(&stages[0])?),
    };
    let mut stage_norms = vec![psi.norm_sqr()];
    for (n, t) in net.transitions().iter().enumerate() {
        let ext = extend(t, &stages[n], &stages[n + 1], completion)?;
        psi = FullStateVector {
            stage: n + 1,
            spin_dim: stages[n + 1].spin_dim(),
            amplitudes: ext.apply(&psi.amplitudes),
        };
        stage_norms.push(psi.norm_sqr());
    }
    let last = net.final_stage();
    let masks = 1usize << last.detectors().len();
    let rows = (0..masks)
        .filter_map(|mask| {
            let rate = psi.mask_weight(mask);
            if rate == 0.0 {
                return None;
            }
            let config = SignalConfig::new((0..last.detectors().len()).filter(|j| mask >> j & 1 == 1))
                .expect("bits are distinct");
            Some(RateRow { signature: config, rate })
        })
        .collect();
    let rates = RateTable::new(last.detectors().to_vec(), rows, stage_norms[0]);
    Ok(OracleRun { rates, stage_norms, final_state: psi })
}

/// Rate table recomputed in the full Hilbert space.
pub fn oracle_rates(net: &Network) -> Result<RateTable, OracleError> {
    Ok(oracle_run(net, Completion::Identity)?.rates)
}
