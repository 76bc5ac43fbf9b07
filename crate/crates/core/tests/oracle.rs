//! Effective-operator engine against the full-space oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stagelab_core::experiments::*;
use stagelab_core::kraus::rates;
use stagelab_core::oracle::{oracle_rates, oracle_run, Completion, OracleError};
use stagelab_core::{LabState, Network, SignalConfig, SpinLabel, SpinVector, Stage, StageTransition, C64};

fn check(net: &Network) {
    let engine = rates(net).unwrap();
    let runs: Vec<_> = Completion::ALL.iter().map(|c| oracle_run(net, *c).unwrap()).collect();
    for run in &runs {
        assert!(engine.max_discrepancy(&run.rates) <= 1e-10, "engine vs oracle");
        assert!(run.norm_drift() <= 1e-10);
    }
    assert!(runs[0].rates.max_discrepancy(&runs[1].rates) <= 1e-10);
}

#[test]
fn presets_agree_with_oracle() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for s in [2, 3, 5] {
        check(&build_double_slit(&DoubleSlitConfig::random(&mut r, s)).unwrap());
        check(&build_dcqe(&DcqeConfig::random(&mut r, s)).unwrap());
        check(&build_wheeler(&WheelerConfig::random(&mut r, 1, s, 1).unwrap()).unwrap());
        for mode in [WalbornMode::NoPolarizers, WalbornMode::CaseI, WalbornMode::CaseII] {
            check(&build_walborn(&WalbornConfig::random(&mut r, s, mode)).unwrap());
        }
    }
}

#[test]
fn dcqe_symmetric_oracle_value() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let cfg = DcqeConfig::symmetric(
        vec![C64::new(s, 0.0), C64::new(s, 0.0)],
        vec![C64::new(s, 0.0), C64::new(-s, 0.0)],
    );
    let t = oracle_rates(&build_dcqe(&cfg).unwrap()).unwrap();
    for k in 1..=4 {
        let got = t.rate_of(&["A1", off_screen_label(k).as_str()]).unwrap();
        assert!((got - 0.125).abs() < 1e-12);
    }
}

#[test]
fn void_source_gives_zero_rates() {
    let mut r = ChaCha8Rng::seed_from_u64(12);
    let net = build_double_slit(&DoubleSlitConfig::random(&mut r, 3)).unwrap();
    let net = net.with_source(LabState::zero(0, 1)).unwrap();
    let t = oracle_rates(&net).unwrap();
    assert_eq!(t.total(), 0.0);
    assert_eq!(rates(&net).unwrap().total(), 0.0);
}

#[test]
fn oversized_stage_is_refused() {
    let labels: Vec<String> = (0..25).map(|i| format!("D{i}")).collect();
    let st0 = Stage::new(0, 1, ["A"]).unwrap();
    let st1 = Stage::new(1, 1, labels).unwrap();
    let mut t = StageTransition::new(&st0, &st1);
    t.add_signal_rule(SignalConfig::single(0), [(SignalConfig::single(0), C64::new(1.0, 0.0))]).unwrap();
    let h = SpinVector::ket(&[SpinLabel::H]).unwrap();
    let src = LabState::term(0, &h, SignalConfig::single(0), C64::new(1.0, 0.0));
    let net = Network::new(vec![st0, st1], vec![t], src).unwrap();
    assert!(matches!(oracle_rates(&net), Err(OracleError::TooLarge { stage: 1, .. })));
}

#[test]
fn shrinking_stage_is_not_extendable() {
    let st0 = Stage::new(0, 1, ["A", "B"]).unwrap();
    let st1 = Stage::new(1, 1, ["C"]).unwrap();
    let mut t = StageTransition::new(&st0, &st1);
    t.add_signal_rule(SignalConfig::single(0), [(SignalConfig::single(0), C64::new(1.0, 0.0))]).unwrap();
    let h = SpinVector::ket(&[SpinLabel::H]).unwrap();
    let src = LabState::term(0, &h, SignalConfig::single(0), C64::new(1.0, 0.0));
    let net = Network::new(vec![st0, st1], vec![t], src).unwrap();
    assert!(matches!(oracle_rates(&net), Err(OracleError::NotExtendable { .. })));
}

#[test]
fn non_isometric_rules_are_refused() {
    let st0 = Stage::new(0, 1, ["A", "B"]).unwrap();
    let st1 = Stage::new(1, 1, ["C", "D"]).unwrap();
    let mut t = StageTransition::new(&st0, &st1);
    let one = C64::new(1.0, 0.0);
    t.add_signal_rule(SignalConfig::single(0), [(SignalConfig::single(0), one)]).unwrap();
    t.add_signal_rule(SignalConfig::single(1), [(SignalConfig::single(0), one)]).unwrap();
    let h = SpinVector::ket(&[SpinLabel::H]).unwrap();
    let src = LabState::term(0, &h, SignalConfig::single(0), one);
    let net = Network::new(vec![st0, st1], vec![t], src).unwrap();
    assert!(matches!(oracle_rates(&net), Err(OracleError::NotSemiUnitary { .. })));
}
