//! Stage-network simulation of quantum-optical apparatus.
//!
//! An experiment is a chain of *stages*, each a set of mutually
//! non-communicating elementary detectors. A [`LabState`] is a sparse
//! superposition of spin ⊗ signal-configuration terms at one stage, and
//! each [`StageTransition`] is a semi-unitary map between consecutive
//! stages, defined only on the effective basis reached from the source.
//!
//! Outcome rates come from generalized Kraus operators `M = Ā U` and POVM
//! elements `E = M̄ M` built on the composed effective evolution operator.
//! The [`oracle`] module recomputes the same rates in the full Hilbert space
//! of every stage as an independent check.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod config;
pub mod dsl;
pub mod experiments;
pub mod kraus;
pub mod labstate;
pub mod network;
pub mod oracle;
pub mod spin;
pub mod transfer;
pub mod whichpath;

pub use num_complex::Complex64 as C64;

pub use config::SignalConfig;
pub use kraus::{rates, KrausOperator, OutcomeSignature, PovmElement, RateRow, RateTable};
pub use labstate::{LabError, LabState};
pub use network::{
    compose, EffectiveOperator, Network, NetworkError, RuleEntry, Stage, StageTransition,
    ValidationReport,
};
pub use spin::{SpinBasis, SpinLabel, SpinVector};
pub use transfer::TransferMatrix;

/// Coefficients below this modulus are dropped from sparse states.
pub const PRUNE_EPS: f64 = 1e-15;

/// Default tolerance for semi-unitarity checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub(crate) const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
