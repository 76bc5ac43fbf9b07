//! Stages, semi-unitary stage transitions, and their composition into the
//! total effective evolution operator.
//!
//! A transition is defined only on its effective input basis: the signal
//! configurations (and, for spin-active optics, the spin kets) that the
//! network actually reaches. Directions of the full stage Hilbert space that
//! are never reached are not represented; see [`crate::oracle`] for the
//! full-space construction.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::config::SignalConfig;
use crate::labstate::{LabError, LabState};
use crate::spin::{ket_canonical, SpinLabel, MAX_SLOTS};
use crate::{C64, PRUNE_EPS};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum NetworkError {
    #[error("transition chain has a gap: expected stage {expected}, found {found}")]
    GapInChain { expected: usize, found: usize },
    #[error("stage {stage}: no rule matches configuration {config:?}")]
    UnmatchedTerm { stage: usize, config: SignalConfig },
    #[error("stage {stage}: unknown detector `{label}`")]
    UnknownDetector { stage: usize, label: String },
    #[error("stage {stage}: detector index {index} out of range")]
    DetectorOutOfRange { stage: usize, index: usize },
    #[error("stage {stage}: duplicate detector label `{label}`")]
    DuplicateLabel { stage: usize, label: String },
    #[error("stage {stage}: more than one rule for configuration {config:?}")]
    DuplicateRule { stage: usize, config: SignalConfig },
    #[error("stage {stage}: expected {expected} spin slots, found {found}")]
    SpinSlots { stage: usize, expected: usize, found: usize },
    #[error("network has no transitions")]
    NoTransitions,
    #[error("{0}")]
    Lab(#[from] LabError),
}

/// One stage: an ordered list of elementary detectors and the number of
/// photon spin slots in flight.
#[derive(Clone, Debug, PartialEq)]
pub struct Stage {
    index: usize,
    slots: usize,
    detectors: Vec<String>,
}

impl Stage {
    pub fn new<S: Into<String>>(
        index: usize,
        slots: usize,
        detectors: impl IntoIterator<Item = S>,
    ) -> Result<Self, NetworkError> {
        if slots == 0 || slots > MAX_SLOTS {
            return Err(LabError::TooManySlots(slots).into());
        }
        let detectors: Vec<String> = detectors.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for d in &detectors {
            if !seen.insert(d.as_str()) {
                return Err(NetworkError::DuplicateLabel { stage: index, label: d.clone() });
            }
        }
        Ok(Self { index, slots, detectors })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn spin_dim(&self) -> usize {
        1 << self.slots
    }

    pub fn detectors(&self) -> &[String] {
        &self.detectors
    }

    pub fn detector(&self, label: &str) -> Option<usize> {
        self.detectors.iter().position(|d| d == label)
    }

    pub fn config<S: AsRef<str>>(&self, labels: &[S]) -> Result<SignalConfig, NetworkError> {
        let mut idx = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            idx.push(self.detector(l).ok_or_else(|| NetworkError::UnknownDetector {
                stage: self.index,
                label: String::from(l),
            })?);
        }
        Ok(SignalConfig::new(idx)?)
    }

    pub fn label(&self, config: &SignalConfig) -> String {
        config.label(&self.detectors)
    }

    fn check_config(&self, config: &SignalConfig) -> Result<(), NetworkError> {
        match config.max_detector() {
            Some(d) if d >= self.detectors.len() => {
                Err(NetworkError::DetectorOutOfRange { stage: self.index, index: d })
            }
            _ => Ok(()),
        }
    }
}

/// A rule acting on one spin ket of an input configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct JointRule {
    pub input: Vec<SpinLabel>,
    pub output: LabState,
}

/// All rules for one input signal configuration.
#[derive(Clone, Debug, PartialEq)]
pub enum RuleEntry {
    /// Spin is carried through unchanged; only the signal configuration moves.
    Signal(Vec<(SignalConfig, C64)>),
    /// Spin and signal transform jointly, one rule per input spin ket.
    Joint(Vec<JointRule>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageTransition {
    from: usize,
    to: usize,
    from_slots: usize,
    to_slots: usize,
    rules: BTreeMap<SignalConfig, RuleEntry>,
}

impl StageTransition {
    pub fn new(from: &Stage, to: &Stage) -> Self {
        Self {
            from: from.index,
            to: to.index,
            from_slots: from.slots,
            to_slots: to.slots,
            rules: BTreeMap::new(),
        }
    }

    pub fn from_stage(&self) -> usize {
        self.from
    }

    pub fn to_stage(&self) -> usize {
        self.to
    }

    pub fn from_slots(&self) -> usize {
        self.from_slots
    }

    pub fn to_slots(&self) -> usize {
        self.to_slots
    }

    pub fn rules(&self) -> impl Iterator<Item = (&SignalConfig, &RuleEntry)> + '_ {
        self.rules.iter()
    }

    pub fn rule(&self, config: &SignalConfig) -> Option<&RuleEntry> {
        self.rules.get(config)
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// `input ↦ Σ c · output`, spin carried through. Repeated output
    /// configurations are summed.
    pub fn add_signal_rule(
        &mut self,
        input: SignalConfig,
        output: impl IntoIterator<Item = (SignalConfig, C64)>,
    ) -> Result<(), NetworkError> {
        if self.from_slots != self.to_slots {
            return Err(NetworkError::SpinSlots {
                stage: self.to,
                expected: self.from_slots,
                found: self.to_slots,
            });
        }
        if self.rules.contains_key(&input) {
            return Err(NetworkError::DuplicateRule { stage: self.from, config: input });
        }
        let mut merged: BTreeMap<SignalConfig, C64> = BTreeMap::new();
        for (c, w) in output {
            *merged.entry(c).or_insert(C64::new(0.0, 0.0)) += w;
        }
        let out = merged.into_iter().filter(|(_, w)| w.norm() >= PRUNE_EPS).collect();
        self.rules.insert(input, RuleEntry::Signal(out));
        Ok(())
    }

    /// `|ket⟩ ⊗ input ↦ output`.
    pub fn add_joint_rule(
        &mut self,
        ket: Vec<SpinLabel>,
        input: SignalConfig,
        output: LabState,
    ) -> Result<(), NetworkError> {
        if ket.len() != self.from_slots {
            return Err(NetworkError::SpinSlots {
                stage: self.from,
                expected: self.from_slots,
                found: ket.len(),
            });
        }
        if output.stage() != self.to {
            return Err(LabError::StageMismatch { left: self.to, right: output.stage() }.into());
        }
        if !output.is_zero() && output.slots() != self.to_slots {
            return Err(NetworkError::SpinSlots {
                stage: self.to,
                expected: self.to_slots,
                found: output.slots(),
            });
        }
        let entry = self
            .rules
            .entry(input.clone())
            .or_insert_with(|| RuleEntry::Joint(Vec::new()));
        match entry {
            RuleEntry::Signal(_) => Err(NetworkError::DuplicateRule { stage: self.from, config: input }),
            RuleEntry::Joint(list) => {
                if list.iter().any(|r| r.input == ket) {
                    return Err(NetworkError::DuplicateRule { stage: self.from, config: input });
                }
                list.push(JointRule { input: ket, output });
                Ok(())
            }
        }
    }

    /// Effective input basis with its images, spin expanded: a signal rule
    /// contributes one pair per canonical spin component.
    pub fn effective_basis(&self) -> Vec<(LabState, LabState)> {
        let mut out = Vec::new();
        let one = C64::new(1.0, 0.0);
        for (config, entry) in &self.rules {
            match entry {
                RuleEntry::Signal(targets) => {
                    for k in 0..(1u8 << self.from_slots) {
                        let input = LabState::basis_term(self.from, self.from_slots, config.clone(), k, one);
                        let mut image = LabState::zero(self.to, self.to_slots);
                        for (c, w) in targets {
                            image.accumulate(c.clone(), k, *w);
                        }
                        image.prune();
                        out.push((input, image));
                    }
                }
                RuleEntry::Joint(rules) => {
                    for r in rules {
                        let mut input = LabState::zero(self.from, self.from_slots);
                        for (k, a) in ket_canonical(&r.input).into_iter().enumerate() {
                            input.accumulate(config.clone(), k as u8, a);
                        }
                        input.prune();
                        out.push((input, r.output.clone()));
                    }
                }
            }
        }
        out
    }

    /// Linear extension of the rules to `psi`.
    pub fn apply(&self, psi: &LabState) -> Result<LabState, NetworkError> {
        if psi.stage() != self.from {
            return Err(LabError::StageMismatch { left: self.from, right: psi.stage() }.into());
        }
        let mut out = LabState::zero(self.to, self.to_slots);
        if psi.is_zero() {
            return Ok(out);
        }
        if psi.slots() != self.from_slots {
            return Err(NetworkError::SpinSlots {
                stage: self.from,
                expected: self.from_slots,
                found: psi.slots(),
            });
        }
        for config in psi.configs() {
            let v = psi.spin_at(&config);
            match self.rules.get(&config) {
                None => return Err(NetworkError::UnmatchedTerm { stage: self.from, config }),
                Some(RuleEntry::Signal(targets)) => {
                    for (k, a) in v.iter().enumerate() {
                        if *a == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for (c, w) in targets {
                            out.accumulate(c.clone(), k as u8, a * w);
                        }
                    }
                }
                Some(RuleEntry::Joint(rules)) => {
                    let mut residual = v.clone();
                    for r in rules {
                        let sigma = ket_canonical(&r.input);
                        let d: C64 = sigma.iter().zip(&v).map(|(s, x)| s.conj() * x).sum();
                        for (res, s) in residual.iter_mut().zip(&sigma) {
                            *res -= d * s;
                        }
                        for (c, k, w) in r.output.terms() {
                            out.accumulate(c.clone(), k, d * w);
                        }
                    }
                    let res: f64 = residual.iter().map(|x| x.norm_sqr()).sum();
                    let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum();
                    if res > 1e-20 * norm.max(1.0) {
                        return Err(NetworkError::UnmatchedTerm { stage: self.from, config });
                    }
                }
            }
        }
        out.prune();
        Ok(out)
    }
}

/// Outcome of a semi-unitarity check on one transition.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub from: usize,
    pub to: usize,
    /// Size of the effective input basis.
    pub dimension: usize,
    /// `max |⟨U e_a, U e_b⟩ − δ_ab|`.
    pub defect: f64,
    /// `max |⟨e_a, e_b⟩ − δ_ab|` over the declared inputs.
    pub input_defect: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub tol: f64,
    pub pass: bool,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "transition {} -> {}: dim {}, semi-unitarity defect {:.3e}, input defect {:.3e} ({})",
            self.from,
            self.to,
            self.dimension,
            self.defect,
            self.input_defect,
            if self.pass { "ok" } else { "FAIL" }
        )
    }
}

/// Gram-matrix defect of a list of sparse vectors against the identity.
/// Only pairs that share a term are visited.
fn gram_defect(vectors: &[&LabState]) -> (f64, Option<(usize, usize)>) {
    let mut by_key: BTreeMap<(SignalConfig, u8), Vec<(usize, C64)>> = BTreeMap::new();
    for (a, v) in vectors.iter().enumerate() {
        for (c, k, x) in v.terms() {
            by_key.entry((c.clone(), k)).or_default().push((a, x));
        }
    }
    let mut gram: BTreeMap<(usize, usize), C64> = BTreeMap::new();
    for hits in by_key.values() {
        for &(a, xa) in hits {
            for &(b, xb) in hits {
                if a <= b {
                    *gram.entry((a, b)).or_insert(C64::new(0.0, 0.0)) += xa.conj() * xb;
                }
            }
        }
    }
    let mut worst = 0.0;
    let mut at = None;
    for a in 0..vectors.len() {
        let g = gram.get(&(a, a)).copied().unwrap_or(C64::new(0.0, 0.0));
        let d = (g - C64::new(1.0, 0.0)).norm();
        if d > worst {
            worst = d;
            at = Some((a, a));
        }
    }
    for (&(a, b), g) in &gram {
        if a != b && g.norm() > worst {
            worst = g.norm();
            at = Some((a, b));
        }
    }
    (worst, at)
}

/// Check `⟨U e_a, U e_b⟩ = δ_ab` over the effective input basis.
pub fn validate_semi_unitarity(t: &StageTransition, tol: f64) -> ValidationReport {
    let pairs = t.effective_basis();
    let inputs: Vec<&LabState> = pairs.iter().map(|(i, _)| i).collect();
    let images: Vec<&LabState> = pairs.iter().map(|(_, o)| o).collect();
    let (input_defect, _) = gram_defect(&inputs);
    let (defect, worst_pair) = gram_defect(&images);
    ValidationReport {
        from: t.from,
        to: t.to,
        dimension: pairs.len(),
        defect,
        input_defect,
        worst_pair,
        tol,
        pass: !pairs.is_empty() && defect <= tol && input_defect <= tol,
    }
}

/// A validated chain of stages from a source at stage 0 to the final stage.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    stages: Vec<Stage>,
    transitions: Vec<StageTransition>,
    source: LabState,
    params: Vec<(String, C64)>,
}

impl Network {
    pub fn new(
        stages: Vec<Stage>,
        transitions: Vec<StageTransition>,
        source: LabState,
    ) -> Result<Self, NetworkError> {
        if transitions.is_empty() {
            return Err(NetworkError::NoTransitions);
        }
        for (n, s) in stages.iter().enumerate() {
            if s.index != n {
                return Err(NetworkError::GapInChain { expected: n, found: s.index });
            }
        }
        if stages.len() != transitions.len() + 1 {
            return Err(NetworkError::GapInChain {
                expected: transitions.len() + 1,
                found: stages.len(),
            });
        }
        for (n, t) in transitions.iter().enumerate() {
            if t.from != n {
                return Err(NetworkError::GapInChain { expected: n, found: t.from });
            }
            if t.to != n + 1 {
                return Err(NetworkError::GapInChain { expected: n + 1, found: t.to });
            }
            let (from, to) = (&stages[n], &stages[n + 1]);
            if t.from_slots != from.slots || t.to_slots != to.slots {
                return Err(NetworkError::SpinSlots {
                    stage: n,
                    expected: from.slots,
                    found: t.from_slots,
                });
            }
            for (c, entry) in &t.rules {
                from.check_config(c)?;
                match entry {
                    RuleEntry::Signal(targets) => {
                        for (c, _) in targets {
                            to.check_config(c)?;
                        }
                    }
                    RuleEntry::Joint(rules) => {
                        for r in rules {
                            for (c, _, _) in r.output.terms() {
                                to.check_config(c)?;
                            }
                        }
                    }
                }
            }
        }
        if source.stage() != 0 {
            return Err(LabError::StageMismatch { left: 0, right: source.stage() }.into());
        }
        if !source.is_zero() && source.slots() != stages[0].slots {
            return Err(NetworkError::SpinSlots {
                stage: 0,
                expected: stages[0].slots,
                found: source.slots(),
            });
        }
        for c in source.configs() {
            stages[0].check_config(&c)?;
        }
        Ok(Self { stages, transitions, source, params: Vec::new() })
    }

    /// Attach named parameter values (for reporting and serialization).
    pub fn with_params(mut self, params: Vec<(String, C64)>) -> Self {
        self.params = params;
        self
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn transitions(&self) -> &[StageTransition] {
        &self.transitions
    }

    pub fn source(&self) -> &LabState {
        &self.source
    }

    pub fn params(&self) -> &[(String, C64)] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<C64> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn final_stage(&self) -> &Stage {
        self.stages.last().expect("network has at least two stages")
    }

    /// Replace the source labstate.
    pub fn with_source(&self, source: LabState) -> Result<Self, NetworkError> {
        let mut net = Self::new(self.stages.clone(), self.transitions.clone(), source)?;
        net.params = self.params.clone();
        Ok(net)
    }

    /// Semi-unitarity report for every transition.
    pub fn validate(&self, tol: f64) -> Vec<ValidationReport> {
        self.transitions.iter().map(|t| validate_semi_unitarity(t, tol)).collect()
    }

    /// `U_{n,0} Ψ_0` by applying every transition in turn.
    pub fn evolve(&self) -> Result<LabState, NetworkError> {
        self.transitions.iter().try_fold(self.source.clone(), |psi, t| t.apply(&psi))
    }

    /// Final-stage configurations reachable through the rules from the
    /// effective input basis of the first transition, ignoring numerical
    /// cancellation.
    pub fn reachable_signatures(&self) -> Vec<SignalConfig> {
        let mut reach: BTreeSet<SignalConfig> = self.transitions[0].rules.keys().cloned().collect();
        for t in &self.transitions {
            let mut next = BTreeSet::new();
            for c in &reach {
                match t.rules.get(c) {
                    Some(RuleEntry::Signal(targets)) => {
                        next.extend(targets.iter().map(|(c, _)| c.clone()));
                    }
                    Some(RuleEntry::Joint(rules)) => {
                        for r in rules {
                            next.extend(r.output.configs());
                        }
                    }
                    None => {}
                }
            }
            reach = next;
        }
        reach.into_iter().collect()
    }
}

/// Total effective evolution operator `U_{n,0}` on the stage-0 effective
/// basis.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveOperator {
    basis: Vec<LabState>,
    images: Vec<LabState>,
    final_stage: Stage,
    signatures: Vec<SignalConfig>,
}

impl EffectiveOperator {
    /// Orthonormal stage-0 effective basis.
    pub fn basis(&self) -> &[LabState] {
        &self.basis
    }

    /// `U_{n,0} e_a`, aligned with [`basis`](Self::basis).
    pub fn images(&self) -> &[LabState] {
        &self.images
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn final_stage(&self) -> &Stage {
        &self.final_stage
    }

    /// Candidate outcome signatures, in order.
    pub fn signatures(&self) -> &[SignalConfig] {
        &self.signatures
    }

    /// Coordinates of `psi` in the effective basis.
    pub fn decompose(&self, psi: &LabState) -> Result<Vec<C64>, NetworkError> {
        let mut coords = Vec::with_capacity(self.basis.len());
        let mut rebuilt = LabState::zero(0, psi.slots());
        for e in &self.basis {
            let c = e.inner(psi)?;
            rebuilt = rebuilt.try_add(&e.scale(c))?;
            coords.push(c);
        }
        let residual = psi.try_add(&rebuilt.scale(C64::new(-1.0, 0.0)))?;
        if residual.norm_sqr() > 1e-20 * psi.norm_sqr().max(1.0) {
            let config = residual.configs().into_iter().next().unwrap_or_default();
            return Err(NetworkError::UnmatchedTerm { stage: 0, config });
        }
        Ok(coords)
    }

    pub fn apply(&self, psi: &LabState) -> Result<LabState, NetworkError> {
        let coords = self.decompose(psi)?;
        let mut out = LabState::zero(self.final_stage.index, self.final_stage.slots);
        for (c, img) in coords.iter().zip(&self.images) {
            for (cfg, k, w) in img.terms() {
                out.accumulate(cfg.clone(), k, c * w);
            }
        }
        out.prune();
        Ok(out)
    }
}

/// Compose all transitions of `net` into `U_{n,0}`.
pub fn compose(net: &Network) -> Result<EffectiveOperator, NetworkError> {
    for (n, t) in net.transitions.iter().enumerate() {
        if t.from != n || t.to != n + 1 {
            return Err(NetworkError::GapInChain { expected: n, found: t.from });
        }
    }
    let first = net.transitions.first().ok_or(NetworkError::NoTransitions)?;
    let basis: Vec<LabState> = first.effective_basis().into_iter().map(|(i, _)| i).collect();
    let mut images = Vec::with_capacity(basis.len());
    for e in &basis {
        images.push(net.transitions.iter().try_fold(e.clone(), |psi, t| t.apply(&psi))?);
    }
    Ok(EffectiveOperator {
        basis,
        images,
        final_stage: net.final_stage().clone(),
        signatures: net.reachable_signatures(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::SpinVector;
    use alloc::vec;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    fn two_site(cols: [[C64; 2]; 2]) -> StageTransition {
        let a = Stage::new(1, 1, ["A1", "A2"]).unwrap();
        let b = Stage::new(2, 1, ["A1", "A2"]).unwrap();
        let mut t = StageTransition::new(&a, &b);
        for (col, v) in cols.iter().enumerate() {
            t.add_signal_rule(
                SignalConfig::single(col),
                [(SignalConfig::single(0), v[0]), (SignalConfig::single(1), v[1])],
            )
            .unwrap();
        }
        t
    }

    #[test]
    fn identity_and_hadamard_columns_pass() {
        let z = C64::new(0.0, 0.0);
        let t = two_site([[one(), z], [z, one()]]);
        let r = validate_semi_unitarity(&t, 1e-12);
        assert!(r.pass && r.defect == 0.0);

        let s = C64::new(crate::FRAC_1_SQRT_2, 0.0);
        let t = two_site([[s, s], [s, -s]]);
        let r = validate_semi_unitarity(&t, 1e-12);
        assert!(r.pass && r.defect < 1e-15, "{r}");
    }

    #[test]
    fn duplicated_column_fails() {
        let z = C64::new(0.0, 0.0);
        let t = two_site([[one(), z], [one(), z]]);
        let r = validate_semi_unitarity(&t, 1e-10);
        assert!(!r.pass);
        assert!((r.defect - 1.0).abs() < 1e-15);
    }

    #[test]
    fn defect_invariant_under_output_relabeling() {
        let v = [[C64::new(0.6, 0.0), C64::new(0.0, 0.8)], [C64::new(0.8, 0.1), C64::new(0.0, -0.6)]];
        let t = two_site(v);
        let swapped = two_site([[v[0][1], v[0][0]], [v[1][1], v[1][0]]]);
        let a = validate_semi_unitarity(&t, 1.0).defect;
        let b = validate_semi_unitarity(&swapped, 1.0).defect;
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn apply_to_empty_and_unmatched() {
        let z = C64::new(0.0, 0.0);
        let t = two_site([[one(), z], [z, one()]]);
        let out = t.apply(&LabState::zero(1, 1)).unwrap();
        assert!(out.is_zero() && out.stage() == 2);

        let a = Stage::new(1, 1, ["A1", "A2", "A3"]).unwrap();
        let b = Stage::new(2, 1, ["A1"]).unwrap();
        let mut t = StageTransition::new(&a, &b);
        t.add_signal_rule(SignalConfig::single(0), [(SignalConfig::single(0), one())]).unwrap();
        let h = SpinVector::ket(&[SpinLabel::H]).unwrap();
        let psi = LabState::term(1, &h, SignalConfig::single(2), one());
        assert_eq!(
            t.apply(&psi),
            Err(NetworkError::UnmatchedTerm { stage: 1, config: SignalConfig::single(2) })
        );
    }

    #[test]
    fn joint_rule_projects_onto_declared_kets() {
        // |L⟩ and |R⟩ inputs; an H input decomposes onto both.
        let a = Stage::new(0, 1, ["A"]).unwrap();
        let b = Stage::new(1, 1, ["B1", "B2"]).unwrap();
        let mut t = StageTransition::new(&a, &b);
        let h = SpinVector::ket(&[SpinLabel::H]).unwrap();
        t.add_joint_rule(
            vec![SpinLabel::L],
            SignalConfig::single(0),
            LabState::term(1, &h, SignalConfig::single(0), one()),
        )
        .unwrap();
        t.add_joint_rule(
            vec![SpinLabel::R],
            SignalConfig::single(0),
            LabState::term(1, &h, SignalConfig::single(1), one()),
        )
        .unwrap();
        assert!(validate_semi_unitarity(&t, 1e-14).pass);
        let psi = LabState::term(0, &h, SignalConfig::single(0), one());
        let out = t.apply(&psi).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-14);
        assert!((out.coefficient(&SignalConfig::single(0), 0).norm_sqr() - 0.5).abs() < 1e-14);

        // only |L⟩ declared: H is outside the effective domain
        let mut partial = StageTransition::new(&a, &b);
        partial
            .add_joint_rule(vec![SpinLabel::L], SignalConfig::single(0), LabState::term(1, &h, SignalConfig::single(0), one()))
            .unwrap();
        assert!(matches!(partial.apply(&psi), Err(NetworkError::UnmatchedTerm { .. })));
    }

    #[test]
    fn duplicate_rules_rejected() {
        let a = Stage::new(0, 1, ["A"]).unwrap();
        let b = Stage::new(1, 1, ["B"]).unwrap();
        let mut t = StageTransition::new(&a, &b);
        t.add_signal_rule(SignalConfig::single(0), [(SignalConfig::single(0), one())]).unwrap();
        assert!(matches!(
            t.add_signal_rule(SignalConfig::single(0), []),
            Err(NetworkError::DuplicateRule { .. })
        ));
        assert!(matches!(
            t.add_joint_rule(vec![SpinLabel::H], SignalConfig::single(0), LabState::zero(1, 1)),
            Err(NetworkError::DuplicateRule { .. })
        ));
    }

    #[test]
    fn network_rejects_gaps() {
        let s0 = Stage::new(0, 1, ["A"]).unwrap();
        let s1 = Stage::new(1, 1, ["B"]).unwrap();
        let s2 = Stage::new(2, 1, ["C"]).unwrap();
        let t02 = StageTransition::new(&s0, &s2);
        let src = LabState::zero(0, 1);
        assert!(matches!(
            Network::new(vec![s0.clone(), s1.clone(), s2.clone()], vec![t02], src.clone()),
            Err(NetworkError::GapInChain { .. })
        ));
        assert_eq!(Network::new(vec![s0], vec![], src), Err(NetworkError::NoTransitions));
    }
}
