//! Transfer matrices `V^{i,a}` from emission channels to screen sites.
//!
//! Probability bookkeeping only requires semi-unitarity: the columns must be
//! orthonormal, `Σ_i conj(V^{i,a}) V^{i,b} = δ_ab`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::C64;
#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum TransferError {
    #[error("transfer matrix columns have unequal lengths or the matrix is empty")]
    Shape,
    #[error("column {column} is linearly dependent on earlier columns")]
    RankDeficient { column: usize },
}

/// Dense `rows × cols` complex matrix stored by column.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl TransferMatrix {
    pub fn from_columns(columns: Vec<Vec<C64>>) -> Result<Self, TransferError> {
        let rows = columns.first().map(Vec::len).unwrap_or(0);
        if rows == 0 || columns.iter().any(|c| c.len() != rows) {
            return Err(TransferError::Shape);
        }
        let cols = columns.len();
        Ok(Self { rows, cols, data: columns.into_iter().flatten().collect() })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, site: usize, channel: usize) -> C64 {
        self.data[channel * self.rows + site]
    }

    pub fn set(&mut self, site: usize, channel: usize, value: C64) {
        self.data[channel * self.rows + site] = value;
    }

    pub fn column(&self, channel: usize) -> &[C64] {
        &self.data[channel * self.rows..(channel + 1) * self.rows]
    }

    fn column_mut(&mut self, channel: usize) -> &mut [C64] {
        &mut self.data[channel * self.rows..(channel + 1) * self.rows]
    }

    /// `⟨column a, column b⟩`.
    pub fn overlap(&self, a: usize, b: usize) -> C64 {
        self.column(a).iter().zip(self.column(b)).map(|(x, y)| x.conj() * y).sum()
    }

    /// `max_{a,b} |⟨V_a, V_b⟩ − δ_ab|`.
    pub fn semi_unitarity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.cols {
            for b in a..self.cols {
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((self.overlap(a, b) - C64::new(want, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_semi_unitary(&self, tol: f64) -> bool {
        self.semi_unitarity_defect() <= tol
    }

    /// Multiply every entry by the matching unit phase `exp(i θ_{i,a})`.
    pub fn rephase(&self, phases: impl Fn(usize, usize) -> f64) -> Self {
        let mut out = self.clone();
        for a in 0..self.cols {
            for i in 0..self.rows {
                let th = phases(i, a);
                let v = self.get(i, a) * C64::new(th.cos(), th.sin());
                out.set(i, a, v);
            }
        }
        out
    }

    /// Columns with i.i.d. entries uniform in the unit square, orthonormalized.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Result<Self, TransferError> {
        let columns = (0..cols)
            .map(|_| {
                (0..rows)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        orthonormalize(&Self::from_columns(columns)?, 0.0)
    }

    /// Two-point-source family: `V^{i,a} ∝ exp(i k r_a(x_i))` for `sites`
    /// equally spaced points across `span` on a screen at `distance`, with
    /// sources at transverse positions `sources`. Orthonormalized afterwards.
    pub fn fraunhofer(
        sites: usize,
        sources: &[f64],
        wavelength: f64,
        distance: f64,
        span: f64,
    ) -> Result<Self, TransferError> {
        if sites == 0 || sources.is_empty() {
            return Err(TransferError::Shape);
        }
        let k = 2.0 * core::f64::consts::PI / wavelength;
        let scale = 1.0 / (sites as f64).sqrt();
        let columns = sources
            .iter()
            .map(|&y| {
                (0..sites)
                    .map(|i| {
                        let x = if sites == 1 {
                            0.0
                        } else {
                            -0.5 * span + span * i as f64 / (sites - 1) as f64
                        };
                        let r = (distance * distance + (x - y) * (x - y)).sqrt();
                        C64::new((k * r).cos(), (k * r).sin()) * scale
                    })
                    .collect()
            })
            .collect();
        orthonormalize(&Self::from_columns(columns)?, 0.0)
    }

    /// The default demonstration family: two sources 0.1 apart, a unit
    /// screen at unit distance, and about four fringes across it.
    pub fn default_two_slit(sites: usize) -> Result<Self, TransferError> {
        Self::fraunhofer(sites, &[-0.05, 0.05], 0.025, 1.0, 1.0)
    }
}

/// Gram–Schmidt orthonormalization of the columns of `raw`.
///
/// A matrix that is already semi-unitary to `tol` is returned unchanged.
/// Each column is orthogonalized twice, which keeps the result orthonormal
/// to rounding level even for nearly dependent inputs.
pub fn orthonormalize(raw: &TransferMatrix, tol: f64) -> Result<TransferMatrix, TransferError> {
    if raw.is_semi_unitary(tol) {
        return Ok(raw.clone());
    }
    let mut out = raw.clone();
    for a in 0..out.cols {
        let original: f64 = out.column(a).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for _pass in 0..2 {
            for b in 0..a {
                let p = out.overlap(b, a);
                let qb: Vec<C64> = out.column(b).to_vec();
                for (x, q) in out.column_mut(a).iter_mut().zip(&qb) {
                    *x -= p * q;
                }
            }
        }
        let norm: f64 = out.column(a).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-12 * original.max(f64::MIN_POSITIVE)) || !norm.is_finite() {
            return Err(TransferError::RankDeficient { column: a });
        }
        for x in out.column_mut(a) {
            *x /= norm;
        }
    }
    Ok(out)
}
