//! Generalized Kraus operators, POVM elements and outcome rate tables.
//!
//! For a final-stage signature `σ`, `M_σ = Ā_σ U_{n,0}` keeps the part of the
//! evolved state carrying exactly the signals in `σ` (spin structure
//! intact), and `E_σ = M̄_σ M_σ` is a positive operator on the stage-0
//! effective space. Rates are `Pr(σ|Ψ_0) = Ψ̄_0 E_σ Ψ_0`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::SignalConfig;
use crate::labstate::LabState;
use crate::network::{compose, EffectiveOperator, Network, NetworkError, Stage};
use crate::C64;

/// A final-stage signal configuration used as a measurement outcome.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct OutcomeSignature {
    config: SignalConfig,
}

impl OutcomeSignature {
    pub fn new(config: SignalConfig) -> Self {
        Self { config }
    }

    pub fn from_labels<S: AsRef<str>>(stage: &Stage, labels: &[S]) -> Result<Self, NetworkError> {
        Ok(Self { config: stage.config(labels)? })
    }

    pub fn config(&self) -> &SignalConfig {
        &self.config
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausOperator {
    signature: SignalConfig,
    /// `M e_a` for each stage-0 effective basis vector.
    action: Vec<LabState>,
}

impl KrausOperator {
    pub fn signature(&self) -> &SignalConfig {
        &self.signature
    }

    pub fn action(&self) -> &[LabState] {
        &self.action
    }

    pub fn is_zero(&self) -> bool {
        self.action.iter().all(LabState::is_zero)
    }
}

/// `M_σ ≡ Ā_σ U_{n,0}`.
pub fn kraus(u: &EffectiveOperator, sig: &OutcomeSignature) -> Result<KrausOperator, NetworkError> {
    let stage = u.final_stage();
    if let Some(d) = sig.config.max_detector() {
        if d >= stage.detectors().len() {
            return Err(NetworkError::DetectorOutOfRange { stage: stage.index(), index: d });
        }
    }
    Ok(KrausOperator {
        signature: sig.config.clone(),
        action: u.images().iter().map(|img| img.restrict(&sig.config)).collect(),
    })
}

/// POVM element as a Hermitian matrix on the stage-0 effective basis. With a
/// one-dimensional effective space it is a scalar times the projector onto
/// the source direction.
#[derive(Clone, Debug, PartialEq)]
pub struct PovmElement {
    signature: SignalConfig,
    dim: usize,
    matrix: Vec<C64>,
}

impl PovmElement {
    pub fn signature(&self) -> &SignalConfig {
        &self.signature
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.matrix[a * self.dim + b]
    }

    pub fn as_scalar(&self) -> Option<f64> {
        (self.dim == 1).then(|| self.matrix[0].re)
    }

    /// `c† E c`.
    pub fn expectation(&self, coords: &[C64]) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (a, ca) in coords.iter().enumerate() {
            for (b, cb) in coords.iter().enumerate() {
                acc += ca.conj() * self.get(a, b) * cb;
            }
        }
        acc.re
    }
}

/// `E_σ ≡ M̄_σ M_σ`, i.e. `E_ab = ⟨M e_a, M e_b⟩`. Spin factors contract to
/// their inner products.
pub fn povm(m: &KrausOperator) -> PovmElement {
    let dim = m.action.len();
    let mut matrix = vec![C64::new(0.0, 0.0); dim * dim];
    for a in 0..dim {
        for b in a..dim {
            let g = m.action[a].inner(&m.action[b]).unwrap_or(C64::new(0.0, 0.0));
            matrix[a * dim + b] = g;
            matrix[b * dim + a] = g.conj();
        }
    }
    PovmElement { signature: m.signature.clone(), dim, matrix }
}

/// `max |Σ_σ E_σ − I_0^EFF|` over matrix entries.
pub fn completeness_defect(povms: &[PovmElement], dim: usize) -> f64 {
    let mut sum = vec![C64::new(0.0, 0.0); dim * dim];
    for e in povms {
        debug_assert_eq!(e.dim, dim);
        for (s, x) in sum.iter_mut().zip(&e.matrix) {
            *s += x;
        }
    }
    let mut worst: f64 = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((sum[a * dim + b] - C64::new(want, 0.0)).norm());
        }
    }
    worst
}

/// All POVM elements of the structurally reachable signatures.
pub fn povms(u: &EffectiveOperator) -> Vec<PovmElement> {
    u.signatures()
        .iter()
        .map(|c| {
            let m = kraus(u, &OutcomeSignature::new(c.clone())).expect("reachable signatures are in range");
            povm(&m)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateRow {
    pub signature: SignalConfig,
    pub rate: f64,
}

/// Outcome rates per signature, in units of the source rate `‖Ψ_0‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateTable {
    detectors: Vec<String>,
    rows: Vec<RateRow>,
    source_norm_sqr: f64,
}

impl RateTable {
    pub fn new(detectors: Vec<String>, mut rows: Vec<RateRow>, source_norm_sqr: f64) -> Self {
        rows.sort_by(|a, b| a.signature.cmp(&b.signature));
        Self { detectors, rows, source_norm_sqr }
    }

    pub fn detectors(&self) -> &[String] {
        &self.detectors
    }

    pub fn rows(&self) -> &[RateRow] {
        &self.rows
    }

    pub fn source_norm_sqr(&self) -> f64 {
        self.source_norm_sqr
    }

    pub fn total(&self) -> f64 {
        self.rows.iter().map(|r| r.rate).sum()
    }

    pub fn label(&self, row: &RateRow) -> String {
        row.signature.label(&self.detectors)
    }

    /// Rate divided by the source rate; zero for a void source.
    pub fn normalized(&self, row: &RateRow) -> f64 {
        if self.source_norm_sqr > 0.0 {
            row.rate / self.source_norm_sqr
        } else {
            0.0
        }
    }

    pub fn get(&self, config: &SignalConfig) -> Option<f64> {
        self.rows
            .binary_search_by(|r| r.signature.cmp(config))
            .ok()
            .map(|i| self.rows[i].rate)
    }

    /// Rate of the signature with exactly these detector labels; `0` when
    /// the signature is not in the table, `None` for unknown labels.
    pub fn rate_of<S: AsRef<str>>(&self, labels: &[S]) -> Option<f64> {
        let config = self.config_of(labels).ok()?;
        Some(self.get(&config).unwrap_or(0.0))
    }

    fn config_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<SignalConfig, NetworkError> {
        let mut idx = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            let d = self.detectors.iter().position(|x| x == l).ok_or_else(|| {
                NetworkError::UnknownDetector { stage: usize::MAX, label: String::from(l) }
            })?;
            idx.push(d);
        }
        Ok(SignalConfig::new(idx)?)
    }

    /// Total rate of every outcome that includes each detector.
    pub fn detector_totals(&self) -> Vec<(String, f64)> {
        let mut totals = vec![0.0; self.detectors.len()];
        for r in &self.rows {
            for d in r.signature.detectors() {
                totals[d] += r.rate;
            }
        }
        self.detectors.iter().cloned().zip(totals).collect()
    }

    /// Largest absolute difference between two tables, matching rows by
    /// signature label; rows missing on one side count as zero.
    pub fn max_discrepancy(&self, other: &RateTable) -> f64 {
        let mut map: BTreeMap<String, (f64, f64)> = BTreeMap::new();
        for r in &self.rows {
            map.entry(self.label(r)).or_default().0 += r.rate;
        }
        for r in &other.rows {
            map.entry(other.label(r)).or_default().1 += r.rate;
        }
        map.values().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Rate table for an already composed operator and a source labstate.
pub fn rates_for(u: &EffectiveOperator, source: &LabState) -> Result<RateTable, NetworkError> {
    let coords = u.decompose(source)?;
    let rows = povms(u)
        .into_iter()
        .map(|e| RateRow { signature: e.signature.clone(), rate: e.expectation(&coords) })
        .collect();
    Ok(RateTable::new(
        u.final_stage().detectors().to_vec(),
        rows,
        source.norm_sqr(),
    ))
}

/// `Pr(σ|Ψ_0) = Ψ̄_0 E_σ Ψ_0` for every reachable final-stage signature.
pub fn rates(net: &Network) -> Result<RateTable, NetworkError> {
    let u = compose(net)?;
    rates_for(&u, net.source())
}

/// Sum rates over signatures that agree on the detectors in `keep`. Each
/// output row is keyed by the kept part of the signature; keeping nothing
/// gives the single total row.
pub fn marginal<S: AsRef<str>>(table: &RateTable, keep: &[S]) -> Result<RateTable, NetworkError> {
    let keep = table.config_of(keep)?;
    let mut groups: BTreeMap<SignalConfig, f64> = BTreeMap::new();
    for r in &table.rows {
        *groups.entry(r.signature.intersection(&keep)).or_insert(0.0) += r.rate;
    }
    Ok(RateTable::new(
        table.detectors.clone(),
        groups.into_iter().map(|(signature, rate)| RateRow { signature, rate }).collect(),
        table.source_norm_sqr,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::StageTransition;
    use crate::spin::{SpinLabel, SpinVector};
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Two-site double slit with Hadamard-like screen amplitudes.
    fn tiny_ds() -> Network {
        let s = crate::FRAC_1_SQRT_2;
        let st0 = Stage::new(0, 1, ["A1"]).unwrap();
        let st1 = Stage::new(1, 1, ["A1", "A2"]).unwrap();
        let st2 = Stage::new(2, 1, ["A1", "A2"]).unwrap();
        let h = SpinVector::ket(&[SpinLabel::H]).unwrap();
        let mut t0 = StageTransition::new(&st0, &st1);
        let out = LabState::term(1, &h, SignalConfig::single(0), c(s, 0.0))
            .try_add(&LabState::term(1, &h, SignalConfig::single(1), c(s, 0.0)))
            .unwrap();
        t0.add_joint_rule(vec![SpinLabel::H], SignalConfig::single(0), out).unwrap();
        let mut t1 = StageTransition::new(&st1, &st2);
        t1.add_signal_rule(SignalConfig::single(0), [(SignalConfig::single(0), c(s, 0.0)), (SignalConfig::single(1), c(s, 0.0))]).unwrap();
        t1.add_signal_rule(SignalConfig::single(1), [(SignalConfig::single(0), c(s, 0.0)), (SignalConfig::single(1), c(-s, 0.0))]).unwrap();
        let src = LabState::term(0, &h, SignalConfig::single(0), c(1.0, 0.0));
        Network::new(vec![st0, st1, st2], vec![t0, t1], src).unwrap()
    }

    #[test]
    fn constructive_and_destructive_sites() {
        let t = rates(&tiny_ds()).unwrap();
        assert_eq!(t.rows().len(), 2);
        assert!((t.rate_of(&["A1"]).unwrap() - 1.0).abs() < 1e-15);
        assert!(t.rate_of(&["A2"]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn two_signal_kraus_is_zero() {
        let u = compose(&tiny_ds()).unwrap();
        let sig = OutcomeSignature::from_labels(u.final_stage(), &["A1", "A2"]).unwrap();
        let m = kraus(&u, &sig).unwrap();
        assert!(m.is_zero());
        assert_eq!(povm(&m).as_scalar(), Some(0.0));
    }

    #[test]
    fn unknown_detector() {
        let u = compose(&tiny_ds()).unwrap();
        assert!(matches!(
            OutcomeSignature::from_labels(u.final_stage(), &["A9"]),
            Err(NetworkError::UnknownDetector { .. })
        ));
        let sig = OutcomeSignature::new(SignalConfig::single(5));
        assert!(matches!(kraus(&u, &sig), Err(NetworkError::DetectorOutOfRange { .. })));
    }

    #[test]
    fn completeness_of_tiny_network() {
        let u = compose(&tiny_ds()).unwrap();
        assert!(completeness_defect(&povms(&u), u.dim()) < 1e-15);
        assert_eq!(completeness_defect(&[], 1), 1.0);
    }

    #[test]
    fn marginal_over_everything_is_the_total() {
        let t = rates(&tiny_ds()).unwrap();
        let m = marginal::<&str>(&t, &[]).unwrap();
        assert_eq!(m.rows().len(), 1);
        assert!(m.rows()[0].signature.is_void());
        assert!((m.rows()[0].rate - 1.0).abs() < 1e-15);
        assert!(matches!(marginal(&t, &["nope"]), Err(NetworkError::UnknownDetector { .. })));
    }

    #[test]
    fn void_source_gives_zero_rates() {
        let net = tiny_ds().with_source(LabState::zero(0, 1)).unwrap();
        let t = rates(&net).unwrap();
        assert!(t.rows().iter().all(|r| r.rate == 0.0));
        assert_eq!(t.normalized(&t.rows()[0]), 0.0);
    }
}
