//! Network description language: parsing, elaboration and round trips.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stagelab_core::dsl::{load, parse, parse_bytes, serialize, DslError};
use stagelab_core::experiments::*;
use stagelab_core::kraus::rates;
use stagelab_core::{Network, C64};

const SMALL: &str = "
stagelab-network v1
param a = 1/sqrt(2);
param b = a;
constraint a^2 + b^2 == 1;
stage 0 slots 1 { A1 }
stage 1 slots 1 { A1, \"B+\" }
transition 0 -> 1 {
    |H> @ A1 -> a * |H> @ A1 + b * |+> @ \"B+\";
}
source = 2 * |H> @ A1;
";

fn same_rates(a: &Network, b: &Network) -> f64 {
    rates(a).unwrap().max_discrepancy(&rates(b).unwrap())
}

#[test]
fn small_document_elaborates() {
    let net = load(SMALL, &[]).unwrap();
    let t = rates(&net).unwrap();
    assert!((t.rate_of(&["A1"]).unwrap() - 2.0).abs() < 1e-12);
    assert!((t.rate_of(&["B+"]).unwrap() - 2.0).abs() < 1e-12);
    assert!((net.param("b").unwrap() - C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
}

#[test]
fn overrides_recompute_dependents() {
    let s = 0.6f64;
    let c = 0.8f64;
    let err = load(SMALL, &[("a".into(), C64::new(s, 0.0))]).unwrap_err();
    assert!(matches!(err, DslError::ConstraintViolated { line: 5, .. }), "{err}");
    let doc = SMALL.replace("param b = a;", "param b = sqrt(1 - a^2);");
    let net = load(&doc, &[("a".into(), C64::new(s, 0.0))]).unwrap();
    assert!((net.param("b").unwrap().re - c).abs() < 1e-15);
    assert_eq!(load(SMALL, &[("zz".into(), C64::new(1.0, 0.0))]).unwrap_err(), DslError::UnknownOverride("zz".into()));
}

#[test]
fn structural_errors_are_positioned() {
    let gap = "stage 0 { A } stage 2 { A } source = |H> @ A;";
    assert!(matches!(load(gap, &[]), Err(DslError::InvalidStructure { .. })));
    let missing = "stage 0 { A } stage 1 { A } source = |H> @ A;";
    assert!(matches!(load(missing, &[]), Err(DslError::InvalidStructure { .. })));
    let no_ket = "stage 0 { A } stage 1 { A } transition 0 -> 1 { A -> A; } source = A;";
    assert!(matches!(load(no_ket, &[]), Err(DslError::InvalidStructure { line: 1, .. })));
    let skip = "stage 0 { A } stage 1 { A } stage 2 { A } transition 0 -> 2 { A -> A; }";
    assert!(matches!(load(skip, &[]), Err(DslError::InvalidStructure { .. })));
    let twice = "stage 0 { A, B } stage 1 { A } transition 0 -> 1 { A A -> A; } source = |H> @ A;";
    assert!(matches!(load(twice, &[]), Err(DslError::InvalidStructure { .. })));
    let unmatched = "stage 0 { A, B } stage 1 { A } transition 0 -> 1 { A -> A; } source = |H> @ B;";
    let net = load(unmatched, &[]).unwrap();
    assert!(matches!(rates(&net), Err(stagelab_core::NetworkError::UnmatchedTerm { stage: 0, .. })));
}

#[test]
fn presets_round_trip_through_text() {
    let mut r = ChaCha8Rng::seed_from_u64(21);
    let nets = vec![
        build_double_slit(&DoubleSlitConfig::random(&mut r, 5)).unwrap(),
        build_dcqe(&DcqeConfig::random(&mut r, 3)).unwrap(),
        build_wheeler(&WheelerConfig::random(&mut r, 1, 2, 2).unwrap()).unwrap(),
        build_walborn(&WalbornConfig::random(&mut r, 3, WalbornMode::NoPolarizers)).unwrap(),
        build_walborn(&WalbornConfig::random(&mut r, 3, WalbornMode::CaseI)).unwrap(),
        build_walborn(&WalbornConfig::random(&mut r, 3, WalbornMode::CaseII)).unwrap(),
    ];
    for net in &nets {
        let text = serialize(net);
        assert_eq!(text, serialize(net), "deterministic");
        let back = load(&text, &[]).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert!(same_rates(net, &back) <= 1e-12);
        assert_eq!(serialize(&back).lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>(),
            text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>());
    }
}

#[test]
fn odd_labels_are_quoted() {
    let doc = "stage 0 { A } stage 1 { \"void\", \"a b\", \"q\\\"x\", \"i\" }
        transition 0 -> 1 { |H> @ A -> 0.5 * |H> @ \"void\" + 0.5 * |H> @ \"a b\" + 0.5 * |H> @ \"q\\\"x\" + 0.5 * |H> @ \"i\"; }
        source = |H> @ A;";
    let net = load(doc, &[]).unwrap();
    let back = load(&serialize(&net), &[]).unwrap();
    assert!(same_rates(&net, &back) <= 1e-15);
}

const WORDS: &[&str] = &[
    "stage", "0", "1", "slots", "{", "}", "A1", "A2", "\"S+1\"", "->", "transition", "source", "=", "param",
    "a", "*", "+", "-", "(", ")", "sqrt", "|H>", "|HV>", "@", ";", ",", "i", "2i", "^", "/", "constraint",
    "==", "void", "#", "\n", "stagelab-network", "v1", "1e-3", "|", ">", "\"",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn random_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_bytes(&bytes);
    }

    #[test]
    fn token_soup_never_panics(idx in proptest::collection::vec(0..WORDS.len(), 0..60)) {
        let text: Vec<&str> = idx.iter().map(|&i| WORDS[i]).collect();
        if let Ok(doc) = parse(&text.join(" ")) {
            let _ = stagelab_core::dsl::elaborate(&doc, &[]);
        }
    }
}
