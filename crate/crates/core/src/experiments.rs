//! Parameterized networks for the double slit, the delayed-choice quantum
//! eraser, Wheeler's delayed choice and the double-slit quantum eraser with
//! polarization control.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::config::SignalConfig;
use crate::labstate::LabState;
use crate::network::{Network, NetworkError, Stage, StageTransition};
use crate::spin::{ket_canonical, SpinLabel, SpinVector};
use crate::transfer::{TransferError, TransferMatrix};
use crate::whichpath::PathDisambiguation;
use crate::{c64, C64, FRAC_1_SQRT_2};
#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

/// Tolerance on the unit-norm and semi-unitarity constraints of a config.
pub const CONFIG_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("unknown experiment `{0}` (expected ds, dcqe, wheeler or walborn)")]
    UnknownExperiment(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ExperimentError> {
    Err(ExperimentError::InvalidConfig(msg.into()))
}

fn check_unit(name: &str, norm_sqr: f64) -> Result<(), ExperimentError> {
    if (norm_sqr - 1.0).abs() > CONFIG_TOL || !norm_sqr.is_finite() {
        return invalid(format!("{name} has squared norm {norm_sqr}, expected 1"));
    }
    Ok(())
}

fn check_finite(name: &str, z: C64) -> Result<(), ExperimentError> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return invalid(format!("{name} is not finite"));
    }
    Ok(())
}

fn one() -> C64 {
    c64(1.0, 0.0)
}

fn h_ket() -> SpinVector {
    SpinVector::ket(&[SpinLabel::H]).expect("one slot")
}

fn screen_labels(sites: usize) -> Vec<String> {
    (1..=sites).map(|i| format!("A{i}")).collect()
}

fn random_unit_pair<R: Rng + ?Sized>(rng: &mut R) -> (C64, C64) {
    let th = rng.gen_range(0.0..core::f64::consts::FRAC_PI_2);
    let p1 = rng.gen_range(0.0..core::f64::consts::TAU);
    let p2 = rng.gen_range(0.0..core::f64::consts::TAU);
    (C64::from_polar(th.cos(), p1), C64::from_polar(th.sin(), p2))
}

fn random_amp<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..core::f64::consts::TAU))
}

fn random_beamsplitter<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let th = rng.gen_range(0.0..=core::f64::consts::FRAC_PI_2);
    (th.cos(), th.sin())
}

fn random_unit_column<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
    TransferMatrix::random(rng, len, 1)
        .expect("random columns are independent")
        .column(0)
        .to_vec()
}

/// Plain double slit: source, two slits, `S` screen sites.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleSlitConfig {
    pub alpha: [C64; 2],
    /// `S × 2` screen amplitudes.
    pub transfer: TransferMatrix,
    pub source_amp: C64,
}

impl DoubleSlitConfig {
    pub fn sites(&self) -> usize {
        self.transfer.rows()
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        check_unit("alpha", self.alpha[0].norm_sqr() + self.alpha[1].norm_sqr())?;
        check_finite("source_amp", self.source_amp)?;
        check_two_column_screen(&self.transfer)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, sites: usize) -> Self {
        let (a1, a2) = random_unit_pair(rng);
        Self {
            alpha: [a1, a2],
            transfer: TransferMatrix::random(rng, sites, 2).expect("sites >= 2"),
            source_amp: random_amp(rng),
        }
    }
}

fn check_two_column_screen(v: &TransferMatrix) -> Result<(), ExperimentError> {
    if v.cols() != 2 || v.rows() < 2 {
        return invalid(format!("transfer matrix must be S×2 with S ≥ 2, got {}×{}", v.rows(), v.cols()));
    }
    let d = v.semi_unitarity_defect();
    if d > CONFIG_TOL {
        return invalid(format!("transfer matrix is not semi-unitary (defect {d:.3e})"));
    }
    Ok(())
}

/// Source → two slits → screen, shared by the double slit and Wheeler's
/// experiment.
fn slit_screen_network(
    alpha: [C64; 2],
    v: &TransferMatrix,
    source_amp: C64,
) -> Result<Network, ExperimentError> {
    let st0 = Stage::new(0, 1, ["A1"])?;
    let st1 = Stage::new(1, 1, ["A1", "A2"])?;
    let st2 = Stage::new(2, 1, screen_labels(v.rows()))?;
    let h = h_ket();

    let mut t0 = StageTransition::new(&st0, &st1);
    let mut out = LabState::zero(1, 1);
    for (a, &amp) in alpha.iter().enumerate() {
        out = out.try_add(&LabState::term(1, &h, SignalConfig::single(a), amp)).map_err(NetworkError::from)?;
    }
    t0.add_joint_rule(vec![SpinLabel::H], SignalConfig::single(0), out)?;

    let mut t1 = StageTransition::new(&st1, &st2);
    for a in 0..2 {
        t1.add_signal_rule(
            SignalConfig::single(a),
            (0..v.rows()).map(|i| (SignalConfig::single(i), v.get(i, a))),
        )?;
    }
    let source = LabState::term(0, &h, SignalConfig::single(0), source_amp);
    Ok(Network::new(vec![st0, st1, st2], vec![t0, t1], source)?)
}

pub fn build_double_slit(cfg: &DoubleSlitConfig) -> Result<Network, ExperimentError> {
    cfg.validate()?;
    let net = slit_screen_network(cfg.alpha, &cfg.transfer, cfg.source_amp)?;
    Ok(net.with_params(vec![
        ("alpha1".into(), cfg.alpha[0]),
        ("alpha2".into(), cfg.alpha[1]),
        ("source_amp".into(), cfg.source_amp),
        ("S".into(), c64(cfg.sites() as f64, 0.0)),
    ]))
}

/// Delayed-choice quantum eraser. `t[k]`, `r[k]` belong to beam splitter
/// `k+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DcqeConfig {
    pub alpha: C64,
    pub beta: C64,
    pub t: [f64; 3],
    pub r: [f64; 3],
    pub v_a: Vec<C64>,
    pub v_b: Vec<C64>,
    pub source_amp: C64,
}

impl DcqeConfig {
    pub fn sites(&self) -> usize {
        self.v_a.len()
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        check_unit("alpha, beta", self.alpha.norm_sqr() + self.beta.norm_sqr())?;
        check_finite("source_amp", self.source_amp)?;
        for k in 0..3 {
            let (t, r) = (self.t[k], self.r[k]);
            if t < 0.0 || r < 0.0 {
                return invalid(format!("t{0}, r{0} must be nonnegative", k + 1));
            }
            check_unit(&format!("(t{0}, r{0})", k + 1), t * t + r * r)?;
        }
        if self.v_a.is_empty() || self.v_a.len() != self.v_b.len() {
            return invalid("V_A and V_B must be non-empty and of equal length");
        }
        check_unit("V_A", self.v_a.iter().map(|x| x.norm_sqr()).sum())?;
        check_unit("V_B", self.v_b.iter().map(|x| x.norm_sqr()).sum())?;
        Ok(())
    }

    /// Symmetric beam splitters and `α = β = 1/√2`.
    pub fn symmetric(v_a: Vec<C64>, v_b: Vec<C64>) -> Self {
        let s = FRAC_1_SQRT_2;
        Self {
            alpha: c64(s, 0.0),
            beta: c64(s, 0.0),
            t: [s; 3],
            r: [s; 3],
            v_a,
            v_b,
            source_amp: one(),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, sites: usize) -> Self {
        let (alpha, beta) = random_unit_pair(rng);
        let mut t = [0.0; 3];
        let mut r = [0.0; 3];
        for k in 0..3 {
            (t[k], r[k]) = random_beamsplitter(rng);
        }
        Self {
            alpha,
            beta,
            t,
            r,
            v_a: random_unit_column(rng, sites),
            v_b: random_unit_column(rng, sites),
            source_amp: random_amp(rng),
        }
    }
}

/// Final-stage label of off-screen detector `S+k`.
pub fn off_screen_label(k: usize) -> String {
    format!("S+{k}")
}

pub fn build_dcqe(cfg: &DcqeConfig) -> Result<Network, ExperimentError> {
    cfg.validate()?;
    let sites = cfg.sites();
    let labels = || {
        let mut l = screen_labels(sites);
        l.extend((1..=4).map(off_screen_label));
        l
    };
    let st0 = Stage::new(0, 1, ["A1"])?;
    let st1 = Stage::new(1, 2, ["A1", "A2", "A3", "A4"])?;
    let st2 = Stage::new(2, 2, labels())?;
    let st3 = Stage::new(3, 2, labels())?;
    let off = |k: usize| sites + k - 1;
    let pair = |i: usize, k: usize| SignalConfig::pair(i, off(k)).expect("distinct detectors");
    let i_unit = c64(0.0, 1.0);

    // pair production, total angular momentum zero
    let lr = SpinVector::ket(&[SpinLabel::L, SpinLabel::R]).expect("two slots");
    let rl = SpinVector::ket(&[SpinLabel::R, SpinLabel::L]).expect("two slots");
    let singlet = SpinVector::canonical(
        lr.to_canonical()
            .amps()
            .iter()
            .zip(rl.to_canonical().amps())
            .map(|(a, b)| (a + b) * FRAC_1_SQRT_2)
            .collect(),
    )
    .expect("four components");
    let mut t0 = StageTransition::new(&st0, &st1);
    let out = LabState::term(1, &singlet, SignalConfig::pair(0, 1).expect("distinct"), cfg.alpha)
        .try_add(&LabState::term(1, &singlet, SignalConfig::pair(2, 3).expect("distinct"), cfg.beta))
        .map_err(NetworkError::from)?;
    t0.add_joint_rule(vec![SpinLabel::H], SignalConfig::single(0), out)?;

    // screen plus BS1 / BS2
    let [t1, t2, t3] = cfg.t;
    let [r1, r2, r3] = cfg.r;
    let mut tr1 = StageTransition::new(&st1, &st2);
    let mut from_a = Vec::with_capacity(2 * sites);
    let mut from_b = Vec::with_capacity(2 * sites);
    for i in 0..sites {
        from_a.push((pair(i, 2), cfg.v_a[i] * t1));
        from_a.push((pair(i, 1), cfg.v_a[i] * i_unit * r1));
        from_b.push((pair(i, 3), cfg.v_b[i] * t2));
        from_b.push((pair(i, 4), cfg.v_b[i] * i_unit * r2));
    }
    tr1.add_signal_rule(SignalConfig::pair(0, 1).expect("distinct"), from_a)?;
    tr1.add_signal_rule(SignalConfig::pair(2, 3).expect("distinct"), from_b)?;

    // BS3 mixes S+2 and S+3; S+1 and S+4 pass through
    let mut tr2 = StageTransition::new(&st2, &st3);
    for i in 0..sites {
        tr2.add_signal_rule(pair(i, 1), [(pair(i, 1), one())])?;
        tr2.add_signal_rule(pair(i, 2), [(pair(i, 3), c64(t3, 0.0)), (pair(i, 2), i_unit * r3)])?;
        tr2.add_signal_rule(pair(i, 3), [(pair(i, 2), c64(t3, 0.0)), (pair(i, 3), i_unit * r3)])?;
        tr2.add_signal_rule(pair(i, 4), [(pair(i, 4), one())])?;
    }

    let source = LabState::term(0, &h_ket(), SignalConfig::single(0), cfg.source_amp);
    let net = Network::new(vec![st0, st1, st2, st3], vec![t0, tr1, tr2], source)?;
    let mut params = vec![("alpha".into(), cfg.alpha), ("beta".into(), cfg.beta)];
    for k in 0..3 {
        params.push((format!("t{}", k + 1), c64(cfg.t[k], 0.0)));
        params.push((format!("r{}", k + 1), c64(cfg.r[k], 0.0)));
    }
    params.push(("source_amp".into(), cfg.source_amp));
    params.push(("S".into(), c64(sites as f64, 0.0)));
    Ok(net.with_params(params))
}

/// Wheeler's delayed choice: a double slit whose screen has `r` sites fed by
/// slit 1 only, `s` sites fed by both and `t` sites fed by slit 2 only.
#[derive(Clone, Debug, PartialEq)]
pub struct WheelerConfig {
    pub r: usize,
    pub s: usize,
    pub t: usize,
    pub alpha: [C64; 2],
    /// `(r+s+t) × 2`.
    pub transfer: TransferMatrix,
    pub source_amp: C64,
}

impl WheelerConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let (r, s, t) = (self.r, self.s, self.t);
        let v = &self.transfer;
        check_unit("alpha", self.alpha[0].norm_sqr() + self.alpha[1].norm_sqr())?;
        check_finite("source_amp", self.source_amp)?;
        if v.cols() != 2 || v.rows() != r + s + t {
            return invalid(format!("transfer matrix must be {}×2", r + s + t));
        }
        for i in 0..v.rows() {
            if i >= r + s && v.get(i, 0) != c64(0.0, 0.0) {
                return invalid(format!("V^{{{},1}} must vanish", i + 1));
            }
            if i < r && v.get(i, 1) != c64(0.0, 0.0) {
                return invalid(format!("V^{{{},2}} must vanish", i + 1));
            }
        }
        check_unit("slit-1 column", (0..r + s).map(|i| v.get(i, 0).norm_sqr()).sum())?;
        check_unit("slit-2 column", (r..r + s + t).map(|i| v.get(i, 1).norm_sqr()).sum())?;
        let overlap: C64 = (r..r + s).map(|i| v.get(i, 0).conj() * v.get(i, 1)).sum();
        if overlap.norm() > CONFIG_TOL {
            return invalid(format!("shared-site columns overlap by {:.3e}", overlap.norm()));
        }
        Ok(())
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, r: usize, s: usize, t: usize) -> Result<Self, ExperimentError> {
        let raw = TransferMatrix::random(rng, r + s + t, 2)?;
        let (a1, a2) = random_unit_pair(rng);
        Ok(Self {
            r,
            s,
            t,
            alpha: [a1, a2],
            transfer: wheeler_transfer(r, s, t, &raw)?,
            source_amp: random_amp(rng),
        })
    }
}

/// Impose the three-group support pattern on `raw` and restore the reduced
/// semi-unitarity relations: unit columns, orthogonal on the shared sites.
pub fn wheeler_transfer(
    r: usize,
    s: usize,
    t: usize,
    raw: &TransferMatrix,
) -> Result<TransferMatrix, ExperimentError> {
    let n = r + s + t;
    if raw.rows() != n || raw.cols() != 2 {
        return Err(TransferError::Shape.into());
    }
    let mut c1: Vec<C64> = (0..n).map(|i| if i < r + s { raw.get(i, 0) } else { c64(0.0, 0.0) }).collect();
    let mut c2: Vec<C64> = (0..n).map(|i| if i >= r { raw.get(i, 1) } else { c64(0.0, 0.0) }).collect();
    let mid = r..r + s;
    let mid_norm: f64 = mid.clone().map(|i| c1[i].norm_sqr()).sum();
    if mid_norm > 0.0 {
        for _pass in 0..2 {
            let p: C64 = mid.clone().map(|i| c1[i].conj() * c2[i]).sum::<C64>() / mid_norm;
            for i in mid.clone() {
                c2[i] -= p * c1[i];
            }
        }
    }
    for (k, col) in [&mut c1, &mut c2].into_iter().enumerate() {
        let norm = col.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return Err(TransferError::RankDeficient { column: k }.into());
        }
        for x in col.iter_mut() {
            *x /= norm;
        }
    }
    Ok(TransferMatrix::from_columns(vec![c1, c2])?)
}

pub fn build_wheeler(cfg: &WheelerConfig) -> Result<Network, ExperimentError> {
    cfg.validate()?;
    let net = slit_screen_network(cfg.alpha, &cfg.transfer, cfg.source_amp)?;
    Ok(net.with_params(vec![
        ("R".into(), c64(cfg.r as f64, 0.0)),
        ("S".into(), c64(cfg.s as f64, 0.0)),
        ("T".into(), c64(cfg.t as f64, 0.0)),
        ("alpha1".into(), cfg.alpha[0]),
        ("alpha2".into(), cfg.alpha[1]),
        ("source_amp".into(), cfg.source_amp),
    ]))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum WalbornMode {
    /// No quarter-wave plates; the `p` photon goes to one detector.
    NoPolarizers,
    /// Quarter-wave plates at the slits, no analyzer at `p`.
    CaseI,
    /// Quarter-wave plates and a two-output diagonal analyzer at `p`.
    CaseII,
}

impl FromStr for WalbornMode {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "NO_POLARIZERS" | "NONE" => Ok(Self::NoPolarizers),
            "CASE_I" | "I" | "1" => Ok(Self::CaseI),
            "CASE_II" | "II" | "2" => Ok(Self::CaseII),
            _ => invalid(format!("unknown Walborn mode `{s}`")),
        }
    }
}

impl fmt::Display for WalbornMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NoPolarizers => "NO_POLARIZERS",
            Self::CaseI => "CASE_I",
            Self::CaseII => "CASE_II",
        })
    }
}

/// Double-slit quantum eraser. Spin slot 0 is the `s` photon (slits and
/// screen), slot 1 the `p` photon.
#[derive(Clone, Debug, PartialEq)]
pub struct WalbornConfig {
    pub alpha: [C64; 2],
    pub transfer: TransferMatrix,
    pub mode: WalbornMode,
    pub source_amp: C64,
}

impl WalbornConfig {
    pub fn sites(&self) -> usize {
        self.transfer.rows()
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        check_unit("alpha", self.alpha[0].norm_sqr() + self.alpha[1].norm_sqr())?;
        check_finite("source_amp", self.source_amp)?;
        check_two_column_screen(&self.transfer)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, sites: usize, mode: WalbornMode) -> Self {
        let ds = DoubleSlitConfig::random(rng, sites);
        Self { alpha: ds.alpha, transfer: ds.transfer, mode, source_amp: ds.source_amp }
    }
}

/// Quarter-wave plate in front of slit `slit` (0 or 1), as the `HV` image of
/// `H` and `V`: slit 1 sends `H → L`, `V → iR`; slit 2 sends `H → R`,
/// `V → −iL`.
fn quarter_wave(slit: usize, input: SpinLabel) -> [C64; 2] {
    let (label, phase) = match (slit, input) {
        (0, SpinLabel::H) => (SpinLabel::L, one()),
        (0, _) => (SpinLabel::R, c64(0.0, 1.0)),
        (_, SpinLabel::H) => (SpinLabel::R, one()),
        (_, _) => (SpinLabel::L, c64(0.0, -1.0)),
    };
    let c = label.canonical();
    [c[0] * phase, c[1] * phase]
}

pub fn build_walborn(cfg: &WalbornConfig) -> Result<Network, ExperimentError> {
    cfg.validate()?;
    let sites = cfg.sites();
    let v = &cfg.transfer;
    let st0 = Stage::new(0, 1, ["A1"])?;
    let st1 = Stage::new(1, 2, ["s", "p"])?;
    let st2 = Stage::new(2, 2, ["s1", "s2", "p"])?;

    let mut t0 = StageTransition::new(&st0, &st1);
    let hv = ket_canonical(&[SpinLabel::H, SpinLabel::V]);
    let vh = ket_canonical(&[SpinLabel::V, SpinLabel::H]);
    let pair_spin = SpinVector::canonical(hv.iter().zip(&vh).map(|(a, b)| (a + b) * FRAC_1_SQRT_2).collect())
        .expect("four components");
    t0.add_joint_rule(
        vec![SpinLabel::H],
        SignalConfig::single(0),
        LabState::term(1, &pair_spin, SignalConfig::pair(0, 1).expect("distinct"), one()),
    )?;

    let mut t1 = StageTransition::new(&st1, &st2);
    t1.add_signal_rule(
        SignalConfig::pair(0, 1).expect("distinct"),
        [
            (SignalConfig::pair(0, 2).expect("distinct"), cfg.alpha[0]),
            (SignalConfig::pair(1, 2).expect("distinct"), cfg.alpha[1]),
        ],
    )?;

    let mut stages = vec![st0, st1, st2.clone()];
    let mut transitions = vec![t0, t1];
    let screen = |p_labels: &[&str]| {
        let mut l = screen_labels(sites);
        l.extend(p_labels.iter().map(|s| s.to_string()));
        l
    };
    let screen_rule = |t: &mut StageTransition, p_in: usize, p_out: usize| -> Result<(), NetworkError> {
        for a in 0..2 {
            t.add_signal_rule(
                SignalConfig::pair(a, p_in).expect("distinct"),
                (0..sites).map(|i| (SignalConfig::pair(i, p_out).expect("distinct"), v.get(i, a))),
            )?;
        }
        Ok(())
    };

    match cfg.mode {
        WalbornMode::NoPolarizers => {
            let st3 = Stage::new(3, 2, screen(&["p"]))?;
            let mut t2 = StageTransition::new(&st2, &st3);
            screen_rule(&mut t2, 2, sites)?;
            stages.push(st3);
            transitions.push(t2);
        }
        WalbornMode::CaseI | WalbornMode::CaseII => {
            let p_labels: &[&str] = if cfg.mode == WalbornMode::CaseI { &["p"] } else { &["p1", "p2"] };
            let mut names = vec!["s1", "s2"];
            names.extend_from_slice(p_labels);
            let st3 = Stage::new(3, 2, names)?;
            let st4 = Stage::new(4, 2, screen(p_labels))?;
            // p detector for the + and − analyzer outputs
            let p_out = |d: usize| if cfg.mode == WalbornMode::CaseI { 2 } else { 2 + d };
            let mut t2 = StageTransition::new(&st2, &st3);
            for slit in 0..2 {
                for s_in in [SpinLabel::H, SpinLabel::V] {
                    for p_in in [SpinLabel::H, SpinLabel::V] {
                        let s_out = SpinVector::canonical(quarter_wave(slit, s_in).to_vec()).expect("one slot");
                        let mut out = LabState::zero(3, 2);
                        for (d, analyzer) in [SpinLabel::Plus, SpinLabel::Minus].into_iter().enumerate() {
                            let a = analyzer.canonical();
                            let p = p_in.canonical();
                            let proj = a[0].conj() * p[0] + a[1].conj() * p[1];
                            let p_vec = SpinVector::ket(&[analyzer]).expect("one slot");
                            let spin = s_out.tensor(&p_vec).map_err(NetworkError::from)?;
                            let cfg3 = SignalConfig::pair(slit, p_out(d)).expect("distinct");
                            out = out.try_add(&LabState::term(3, &spin, cfg3, proj)).map_err(NetworkError::from)?;
                        }
                        t2.add_joint_rule(vec![s_in, p_in], SignalConfig::pair(slit, 2).expect("distinct"), out)?;
                    }
                }
            }
            let mut t3 = StageTransition::new(&st3, &st4);
            for (d, _) in p_labels.iter().enumerate() {
                screen_rule(&mut t3, 2 + d, sites + d)?;
            }
            stages.push(st3);
            stages.push(st4);
            transitions.push(t2);
            transitions.push(t3);
        }
    }
    let source = LabState::term(0, &h_ket(), SignalConfig::single(0), cfg.source_amp);
    let net = Network::new(stages, transitions, source)?;
    Ok(net.with_params(vec![
        ("alpha1".into(), cfg.alpha[0]),
        ("alpha2".into(), cfg.alpha[1]),
        ("source_amp".into(), cfg.source_amp),
        ("S".into(), c64(sites as f64, 0.0)),
    ]))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PresetKind {
    DoubleSlit,
    Dcqe,
    Wheeler,
    Walborn,
}

impl FromStr for PresetKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ds" => Ok(Self::DoubleSlit),
            "dcqe" => Ok(Self::Dcqe),
            "wheeler" => Ok(Self::Wheeler),
            "walborn" => Ok(Self::Walborn),
            _ => Err(ExperimentError::UnknownExperiment(s.to_string())),
        }
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DoubleSlit => "ds",
            Self::Dcqe => "dcqe",
            Self::Wheeler => "wheeler",
            Self::Walborn => "walborn",
        })
    }
}

/// How preset screens get their transfer amplitudes.
pub enum TransferSource<'a> {
    /// The deterministic two-source phase family.
    TwoSlit,
    /// Random orthonormalized columns.
    Random(&'a mut dyn RngCore),
}

impl PresetKind {
    pub const ALL: [PresetKind; 4] = [Self::DoubleSlit, Self::Dcqe, Self::Wheeler, Self::Walborn];

    /// Parameter names with their defaults. `S` is the screen size (for
    /// Wheeler, the size of the shared group).
    pub fn default_params(self, screen: usize) -> Vec<(String, C64)> {
        let s = c64(FRAC_1_SQRT_2, 0.0);
        let n = c64(screen as f64, 0.0);
        let p = |name: &str, v: C64| (name.to_string(), v);
        match self {
            Self::DoubleSlit | Self::Walborn => {
                vec![p("S", n), p("alpha1", s), p("alpha2", s), p("source_amp", one())]
            }
            Self::Dcqe => vec![
                p("S", n),
                p("alpha", s),
                p("beta", s),
                p("t1", s),
                p("r1", s),
                p("t2", s),
                p("r2", s),
                p("t3", s),
                p("r3", s),
                p("source_amp", one()),
            ],
            Self::Wheeler => vec![
                p("R", c64(2.0, 0.0)),
                p("S", n),
                p("T", c64(2.0, 0.0)),
                p("alpha1", s),
                p("alpha2", s),
                p("source_amp", one()),
            ],
        }
    }

    /// Build the preset from a complete parameter map (see
    /// [`default_params`](Self::default_params)).
    pub fn build(
        self,
        params: &BTreeMap<String, C64>,
        mode: WalbornMode,
        transfer: TransferSource<'_>,
    ) -> Result<(Network, PathDisambiguation), ExperimentError> {
        let defaults = self.default_params(0);
        for name in params.keys() {
            if !defaults.iter().any(|(n, _)| n == name) {
                return Err(ExperimentError::UnknownParameter(name.clone()));
            }
        }
        let get = |name: &str| -> Result<C64, ExperimentError> {
            params.get(name).copied().ok_or_else(|| ExperimentError::InvalidConfig(format!("missing parameter `{name}`")))
        };
        let real = |name: &str| -> Result<f64, ExperimentError> {
            let v = get(name)?;
            if v.im != 0.0 {
                return invalid(format!("`{name}` must be real"));
            }
            Ok(v.re)
        };
        let count = |name: &str| -> Result<usize, ExperimentError> {
            let v = real(name)?;
            if v < 0.0 || v.fract() != 0.0 || v > 1e6 {
                return invalid(format!("`{name}` must be a nonnegative integer"));
            }
            Ok(v as usize)
        };
        let mut transfer = transfer;
        let mut two_columns = |rows: usize| -> Result<TransferMatrix, ExperimentError> {
            if rows < 2 {
                return invalid("screen needs at least 2 sites");
            }
            Ok(match &mut transfer {
                TransferSource::TwoSlit => TransferMatrix::default_two_slit(rows)?,
                TransferSource::Random(rng) => TransferMatrix::random(&mut **rng, rows, 2)?,
            })
        };
        match self {
            Self::DoubleSlit => {
                let cfg = DoubleSlitConfig {
                    alpha: [get("alpha1")?, get("alpha2")?],
                    transfer: two_columns(count("S")?)?,
                    source_amp: get("source_amp")?,
                };
                Ok((build_double_slit(&cfg)?, PathDisambiguation::none()))
            }
            Self::Dcqe => {
                let sites = count("S")?;
                if sites < 1 {
                    return invalid("screen needs at least 1 site");
                }
                // the two screen columns are independent unit vectors; random
                // draws do not make them orthogonal
                let v = match (&mut transfer, sites) {
                    (TransferSource::Random(rng), _) => {
                        let a = random_unit_column(&mut **rng, sites);
                        let b = random_unit_column(&mut **rng, sites);
                        TransferMatrix::from_columns(vec![a, b])?
                    }
                    (TransferSource::TwoSlit, 1) => TransferMatrix::from_columns(vec![vec![one()], vec![one()]])?,
                    (TransferSource::TwoSlit, _) => TransferMatrix::default_two_slit(sites)?,
                };
                let cfg = DcqeConfig {
                    alpha: get("alpha")?,
                    beta: get("beta")?,
                    t: [real("t1")?, real("t2")?, real("t3")?],
                    r: [real("r1")?, real("r2")?, real("r3")?],
                    v_a: v.column(0).to_vec(),
                    v_b: v.column(1).to_vec(),
                    source_amp: get("source_amp")?,
                };
                Ok((build_dcqe(&cfg)?, PathDisambiguation::dcqe()))
            }
            Self::Wheeler => {
                let (r, s, t) = (count("R")?, count("S")?, count("T")?);
                let raw = two_columns(r + s + t)?;
                let cfg = WheelerConfig {
                    r,
                    s,
                    t,
                    alpha: [get("alpha1")?, get("alpha2")?],
                    transfer: wheeler_transfer(r, s, t, &raw)?,
                    source_amp: get("source_amp")?,
                };
                Ok((build_wheeler(&cfg)?, PathDisambiguation::wheeler(r, s, t)))
            }
            Self::Walborn => {
                let cfg = WalbornConfig {
                    alpha: [get("alpha1")?, get("alpha2")?],
                    transfer: two_columns(count("S")?)?,
                    mode,
                    source_amp: get("source_amp")?,
                };
                Ok((build_walborn(&cfg)?, PathDisambiguation::none()))
            }
        }
    }
}
