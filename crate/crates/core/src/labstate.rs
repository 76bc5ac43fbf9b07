//! Sparse labstates: superpositions of spin ⊗ signal-configuration terms.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::config::SignalConfig;
use crate::spin::SpinVector;
use crate::{C64, PRUNE_EPS};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LabError {
    #[error("stage mismatch: {left} vs {right}")]
    StageMismatch { left: usize, right: usize },
    #[error("spin slot mismatch: {left} vs {right}")]
    SlotMismatch { left: usize, right: usize },
    #[error("detector {0} excited twice in one configuration")]
    DuplicateDetector(usize),
    #[error("slot {slot} out of range for a {slots}-slot spin vector")]
    BadSlot { slot: usize, slots: usize },
    #[error("unknown spin basis `{0}`")]
    UnknownBasis(String),
    #[error("unsupported number of spin slots: {0}")]
    TooManySlots(usize),
    #[error("expected {expected} spin components, found {found}")]
    ComponentCount { expected: usize, found: usize },
}

/// Term key: signal configuration and canonical (`HV`) spin component.
pub type TermKey = (SignalConfig, u8);

/// Unnormalized labstate at one stage.
///
/// Spin components are stored in the canonical `HV` tensor basis, so terms
/// with different keys are orthonormal. Coefficients with modulus below
/// [`PRUNE_EPS`] are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct LabState {
    stage: usize,
    slots: usize,
    terms: BTreeMap<TermKey, C64>,
}

impl LabState {
    pub fn zero(stage: usize, slots: usize) -> Self {
        Self { stage, slots, terms: BTreeMap::new() }
    }

    /// `coeff · spin ⊗ config`.
    pub fn term(
        stage: usize,
        spin: &SpinVector,
        config: SignalConfig,
        coeff: C64,
    ) -> Self {
        let canon = spin.to_canonical();
        let mut out = Self::zero(stage, spin.slots());
        for (k, a) in canon.amps().iter().enumerate() {
            out.accumulate(config.clone(), k as u8, a * coeff);
        }
        out.prune();
        out
    }

    /// `coeff · e_k ⊗ config` for canonical basis component `k`.
    pub fn basis_term(stage: usize, slots: usize, config: SignalConfig, k: u8, coeff: C64) -> Self {
        let mut out = Self::zero(stage, slots);
        out.accumulate(config, k, coeff);
        out.prune();
        out
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn spin_dim(&self) -> usize {
        1 << self.slots
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SignalConfig, u8, C64)> + '_ {
        self.terms.iter().map(|((c, k), v)| (c, *k, *v))
    }

    pub fn coefficient(&self, config: &SignalConfig, k: u8) -> C64 {
        self.terms
            .get(&(config.clone(), k))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Distinct signal configurations present, in order.
    pub fn configs(&self) -> Vec<SignalConfig> {
        let mut out: Vec<SignalConfig> = Vec::new();
        for (c, _) in self.terms.keys() {
            if out.last() != Some(c) {
                out.push(c.clone());
            }
        }
        out
    }

    /// Dense canonical spin vector attached to `config`.
    pub fn spin_at(&self, config: &SignalConfig) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.spin_dim()];
        for (k, a) in v.iter_mut().enumerate() {
            *a = self.coefficient(config, k as u8);
        }
        v
    }

    /// Component of the state with exactly this signal configuration.
    pub fn restrict(&self, config: &SignalConfig) -> LabState {
        let terms = self
            .terms
            .iter()
            .filter(|((c, _), _)| c == config)
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        Self { stage: self.stage, slots: self.slots, terms }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&self, c: C64) -> LabState {
        let mut out = Self::zero(self.stage, self.slots);
        for (k, v) in &self.terms {
            out.terms.insert(k.clone(), v * c);
        }
        out.prune();
        out
    }

    fn check_compatible(&self, other: &LabState) -> Result<(), LabError> {
        if self.stage != other.stage {
            return Err(LabError::StageMismatch { left: self.stage, right: other.stage });
        }
        if self.slots != other.slots && !self.is_zero() && !other.is_zero() {
            return Err(LabError::SlotMismatch { left: self.slots, right: other.slots });
        }
        Ok(())
    }

    /// Coefficient-wise sum.
    pub fn try_add(&self, other: &LabState) -> Result<LabState, LabError> {
        self.check_compatible(other)?;
        let mut out = if self.is_zero() { other.clone() } else { self.clone() };
        if !self.is_zero() {
            for (k, v) in &other.terms {
                *out.terms.entry(k.clone()).or_insert(C64::new(0.0, 0.0)) += v;
            }
        }
        out.prune();
        Ok(out)
    }

    /// `⟨self|other⟩`: conjugate-linear in `self`.
    pub fn inner(&self, other: &LabState) -> Result<C64, LabError> {
        self.check_compatible(other)?;
        let (small, large, flip) = if self.terms.len() <= other.terms.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = C64::new(0.0, 0.0);
        for (k, a) in &small.terms {
            if let Some(b) = large.terms.get(k) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    /// Add `c` to one coefficient without pruning; call [`prune`](Self::prune)
    /// once accumulation is complete.
    pub(crate) fn accumulate(&mut self, config: SignalConfig, k: u8, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        *self.terms.entry((config, k)).or_insert(C64::new(0.0, 0.0)) += c;
    }

    pub(crate) fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_EPS);
    }
}

/// Coefficient-wise sum of two labstates at the same stage.
pub fn add(a: &LabState, b: &LabState) -> Result<LabState, LabError> {
    a.try_add(b)
}

/// Inner product `⟨a|b⟩`.
pub fn inner(a: &LabState, b: &LabState) -> Result<C64, LabError> {
    a.inner(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::SpinLabel;
    use proptest::prelude::*;

    fn h() -> SpinVector {
        SpinVector::ket(&[SpinLabel::H]).unwrap()
    }

    #[test]
    fn add_identity_and_cancellation() {
        let psi = LabState::term(0, &h(), SignalConfig::single(0), C64::new(0.3, 0.4));
        let zero = LabState::zero(0, 1);
        assert_eq!(add(&psi, &zero).unwrap(), psi);
        let neg = psi.scale(C64::new(-1.0, 0.0));
        assert!(add(&psi, &neg).unwrap().is_zero());
    }

    #[test]
    fn like_terms_merge() {
        let half = LabState::term(1, &h(), SignalConfig::single(0), C64::new(0.5, 0.0));
        let sum = add(&half, &half).unwrap();
        assert_eq!(sum.len(), 1);
        assert_eq!(sum.coefficient(&SignalConfig::single(0), 0), C64::new(1.0, 0.0));
    }

    #[test]
    fn stage_mismatch() {
        let a = LabState::term(0, &h(), SignalConfig::single(0), C64::new(1.0, 0.0));
        let b = LabState::term(1, &h(), SignalConfig::single(0), C64::new(1.0, 0.0));
        assert_eq!(add(&a, &b), Err(LabError::StageMismatch { left: 0, right: 1 }));
        assert!(matches!(inner(&a, &b), Err(LabError::StageMismatch { .. })));
    }

    #[test]
    fn source_norm() {
        let amp = C64::new(1.5, -0.5);
        let psi = LabState::term(0, &h(), SignalConfig::single(0), amp);
        let n = inner(&psi, &psi).unwrap();
        assert!((n.re - amp.norm_sqr()).abs() < 1e-15 && n.im == 0.0);
    }

    #[test]
    fn orthogonality() {
        let one = C64::new(1.0, 0.0);
        let a1 = LabState::term(0, &h(), SignalConfig::single(0), one);
        let a2 = LabState::term(0, &h(), SignalConfig::single(1), one);
        assert_eq!(inner(&a1, &a2).unwrap(), C64::new(0.0, 0.0));
        let v = SpinVector::ket(&[SpinLabel::V]).unwrap();
        let b = LabState::term(0, &v, SignalConfig::single(0), one);
        assert_eq!(inner(&a1, &b).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn circular_spin_is_stored_canonically() {
        let l = SpinVector::ket(&[SpinLabel::L]).unwrap();
        let psi = LabState::term(2, &l, SignalConfig::single(3), C64::new(1.0, 0.0));
        assert_eq!(psi.len(), 2);
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-15);
    }

    fn arb_state() -> impl Strategy<Value = LabState> {
        prop::collection::vec((0usize..4, 0u8..4, -1.0f64..1.0, -1.0f64..1.0), 0..8).prop_map(
            |terms| {
                let mut s = LabState::zero(0, 2);
                for (d, k, re, im) in terms {
                    s.accumulate(SignalConfig::single(d), k, C64::new(re, im));
                }
                s.prune();
                s
            },
        )
    }

    proptest! {
        #[test]
        fn inner_is_hermitian(a in arb_state(), b in arb_state()) {
            let ab = inner(&a, &b).unwrap();
            let ba = inner(&b, &a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-14);
        }

        #[test]
        fn scaling_distributes(a in arb_state(), c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
            let lhs = a.scale(C64::new(c1 + c2, 0.0));
            let rhs = add(&a.scale(C64::new(c1, 0.0)), &a.scale(C64::new(c2, 0.0))).unwrap();
            let diff = add(&lhs, &rhs.scale(C64::new(-1.0, 0.0))).unwrap();
            prop_assert!(diff.norm_sqr().sqrt() < 1e-14);
        }
    }
}
