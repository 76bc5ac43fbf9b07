//! The which-path measure `Φ`: the probability, per unit source rate, that a
//! detected photon leaves a record revealing which path it took.
//!
//! Revealing outcomes are declared, not inferred. A pattern is a set of
//! final-stage detector labels, and a signature is revealing when it fires
//! every detector in some pattern. Each preset ships its own default; at
//! isolated parameter points (for example the eraser with `r1 = r2 = 0` and
//! `t3 ∈ {0, 1}`) the default is not the right set and should be overridden.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::config::SignalConfig;
use crate::kraus::{rates, RateTable};
use crate::network::{Network, NetworkError};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum WhichPathError {
    #[error("revealing pattern names unknown detector `{0}`")]
    UnknownSignature(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PathDisambiguation {
    revealing: Vec<Vec<String>>,
}

impl PathDisambiguation {
    /// No outcome reveals the path.
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new<S: AsRef<str>>(patterns: &[&[S]]) -> Self {
        Self {
            revealing: patterns
                .iter()
                .map(|p| p.iter().map(|s| s.as_ref().to_string()).collect())
                .collect(),
        }
    }

    pub fn from_patterns(revealing: Vec<Vec<String>>) -> Self {
        Self { revealing }
    }

    /// Eraser default: any coincidence with `S+1` or `S+4`.
    pub fn dcqe() -> Self {
        Self::new(&[&["S+1"], &["S+4"]])
    }

    /// Wheeler default: the screen sites reached from one slit only.
    pub fn wheeler(r: usize, s: usize, t: usize) -> Self {
        let revealing = (1..=r)
            .chain(r + s + 1..=r + s + t)
            .map(|i| vec![format!("A{i}")])
            .collect();
        Self { revealing }
    }

    pub fn patterns(&self) -> &[Vec<String>] {
        &self.revealing
    }

    fn resolve(&self, detectors: &[String]) -> Result<Vec<SignalConfig>, WhichPathError> {
        self.revealing
            .iter()
            .map(|p| {
                let idx = p
                    .iter()
                    .map(|l| {
                        detectors
                            .iter()
                            .position(|d| d == l)
                            .ok_or_else(|| WhichPathError::UnknownSignature(l.clone()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                SignalConfig::new(idx).map_err(|e| WhichPathError::Network(e.into()))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WhichPathResult {
    pub phi: f64,
    /// Revealing signatures with their normalized rates.
    pub contributions: Vec<(String, f64)>,
}

/// `Φ` from an existing rate table.
pub fn which_path_table(table: &RateTable, d: &PathDisambiguation) -> Result<WhichPathResult, WhichPathError> {
    let patterns = d.resolve(table.detectors())?;
    let mut contributions = Vec::new();
    let mut phi = 0.0;
    for row in table.rows() {
        if patterns.iter().any(|p| row.signature.is_superset(p)) {
            let r = table.normalized(row);
            phi += r;
            contributions.push((table.label(row), r));
        }
    }
    Ok(WhichPathResult { phi, contributions })
}

pub fn which_path(net: &Network, d: &PathDisambiguation) -> Result<WhichPathResult, WhichPathError> {
    which_path_table(&rates(net)?, d)
}
