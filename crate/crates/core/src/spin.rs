//! Polarization bases and spin vectors for one or two photon slots.
//!
//! Components are stored per slot in a named basis. The canonical basis is
//! `HV`; the other two are fixed by
//!
//! ```text
//! |R⟩ = (|H⟩ − i|V⟩)/√2    |L⟩ = (|H⟩ + i|V⟩)/√2
//! |±⟩ = (|H⟩ ± |V⟩)/√2
//! ```
//!
//! which is the same as `|R⟩ = (1−i)/2 (|+⟩ + i|−⟩)` and
//! `|L⟩ = (1−i)/2 (i|+⟩ + |−⟩)`.
//!
//! Slot 0 is the most significant bit of a component index.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::labstate::LabError;
use crate::{c64, C64, FRAC_1_SQRT_2};

pub const MAX_SLOTS: usize = 2;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpinBasis {
    HV,
    LR,
    Diag,
}

impl SpinBasis {
    pub const ALL: [SpinBasis; 3] = [SpinBasis::HV, SpinBasis::LR, SpinBasis::Diag];

    /// The two labels of this basis, in component order.
    pub fn labels(self) -> [SpinLabel; 2] {
        match self {
            SpinBasis::HV => [SpinLabel::H, SpinLabel::V],
            SpinBasis::LR => [SpinLabel::L, SpinLabel::R],
            SpinBasis::Diag => [SpinLabel::Plus, SpinLabel::Minus],
        }
    }

    /// Basis matrix: column `k` holds the `HV` components of label `k`.
    pub fn matrix(self) -> [[C64; 2]; 2] {
        let [a, b] = self.labels();
        let ca = a.canonical();
        let cb = b.canonical();
        [[ca[0], cb[0]], [ca[1], cb[1]]]
    }
}

impl fmt::Display for SpinBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpinBasis::HV => "HV",
            SpinBasis::LR => "LR",
            SpinBasis::Diag => "DIAG",
        })
    }
}

impl FromStr for SpinBasis {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "HV" | "hv" => Ok(SpinBasis::HV),
            "LR" | "lr" => Ok(SpinBasis::LR),
            "DIAG" | "diag" | "+-" => Ok(SpinBasis::Diag),
            _ => Err(LabError::UnknownBasis(String::from(s))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpinLabel {
    H,
    V,
    L,
    R,
    Plus,
    Minus,
}

impl SpinLabel {
    pub fn basis(self) -> SpinBasis {
        match self {
            SpinLabel::H | SpinLabel::V => SpinBasis::HV,
            SpinLabel::L | SpinLabel::R => SpinBasis::LR,
            SpinLabel::Plus | SpinLabel::Minus => SpinBasis::Diag,
        }
    }

    /// Position of this label within its basis.
    pub fn index(self) -> usize {
        match self {
            SpinLabel::H | SpinLabel::L | SpinLabel::Plus => 0,
            SpinLabel::V | SpinLabel::R | SpinLabel::Minus => 1,
        }
    }

    /// `HV` components of this state.
    pub fn canonical(self) -> [C64; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            SpinLabel::H => [c64(1.0, 0.0), c64(0.0, 0.0)],
            SpinLabel::V => [c64(0.0, 0.0), c64(1.0, 0.0)],
            SpinLabel::L => [c64(s, 0.0), c64(0.0, s)],
            SpinLabel::R => [c64(s, 0.0), c64(0.0, -s)],
            SpinLabel::Plus => [c64(s, 0.0), c64(s, 0.0)],
            SpinLabel::Minus => [c64(s, 0.0), c64(-s, 0.0)],
        }
    }

    pub fn symbol(self) -> char {
        match self {
            SpinLabel::H => 'H',
            SpinLabel::V => 'V',
            SpinLabel::L => 'L',
            SpinLabel::R => 'R',
            SpinLabel::Plus => '+',
            SpinLabel::Minus => '-',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        Some(match c {
            'H' => SpinLabel::H,
            'V' => SpinLabel::V,
            'L' => SpinLabel::L,
            'R' => SpinLabel::R,
            '+' => SpinLabel::Plus,
            '-' => SpinLabel::Minus,
            _ => return None,
        })
    }
}

impl fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Spin content of the photons in flight: one basis per slot and
/// `2^slots` complex components in the tensor basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinVector {
    bases: Vec<SpinBasis>,
    amps: Vec<C64>,
}

impl SpinVector {
    pub fn new(bases: Vec<SpinBasis>, amps: Vec<C64>) -> Result<Self, LabError> {
        if bases.is_empty() || bases.len() > MAX_SLOTS {
            return Err(LabError::TooManySlots(bases.len()));
        }
        if amps.len() != 1 << bases.len() {
            return Err(LabError::ComponentCount {
                expected: 1 << bases.len(),
                found: amps.len(),
            });
        }
        Ok(Self { bases, amps })
    }

    /// Product state `|l0 l1 …⟩`, each slot in the basis of its label.
    pub fn ket(labels: &[SpinLabel]) -> Result<Self, LabError> {
        if labels.is_empty() || labels.len() > MAX_SLOTS {
            return Err(LabError::TooManySlots(labels.len()));
        }
        let n = labels.len();
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[ket_index(labels)] = C64::new(1.0, 0.0);
        Ok(Self {
            bases: labels.iter().map(|l| l.basis()).collect(),
            amps,
        })
    }

    /// Canonical (`HV`) vector from raw components.
    pub fn canonical(amps: Vec<C64>) -> Result<Self, LabError> {
        let slots = match amps.len() {
            2 => 1,
            4 => 2,
            n => return Err(LabError::ComponentCount { expected: 2, found: n }),
        };
        Self::new(vec![SpinBasis::HV; slots], amps)
    }

    pub fn slots(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[SpinBasis] {
        &self.bases
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            bases: self.bases.clone(),
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    /// Re-express slot `slot` in `target`. Other slots are untouched.
    pub fn change_basis(&self, target: SpinBasis, slot: usize) -> Result<Self, LabError> {
        let n = self.slots();
        if slot >= n {
            return Err(LabError::BadSlot { slot, slots: n });
        }
        let from = self.bases[slot];
        if from == target {
            return Ok(self.clone());
        }
        // target† · from
        let bf = from.matrix();
        let bt = target.matrix();
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = bt[0][r].conj() * bf[0][c] + bt[1][r].conj() * bf[1][c];
            }
        }
        let mut out = self.clone();
        out.bases[slot] = target;
        apply_on_slot(&mut out.amps, n, slot, &m);
        Ok(out)
    }

    /// Same vector with every slot in the `HV` basis.
    pub fn to_canonical(&self) -> Self {
        let mut v = self.clone();
        for slot in 0..v.slots() {
            // slot < slots by construction
            v = v.change_basis(SpinBasis::HV, slot).unwrap_or(v);
        }
        v
    }

    /// Tensor product; `self` occupies the leading slots.
    pub fn tensor(&self, other: &SpinVector) -> Result<Self, LabError> {
        let n = self.slots() + other.slots();
        if n > MAX_SLOTS {
            return Err(LabError::TooManySlots(n));
        }
        let mut bases = self.bases.clone();
        bases.extend_from_slice(&other.bases);
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self { bases, amps })
    }

    /// `⟨self|other⟩`, computed in the canonical basis.
    pub fn inner(&self, other: &SpinVector) -> Result<C64, LabError> {
        if self.slots() != other.slots() {
            return Err(LabError::SlotMismatch {
                left: self.slots(),
                right: other.slots(),
            });
        }
        let a = self.to_canonical();
        let b = other.to_canonical();
        Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
    }
}

/// Component index of a product ket in its own per-slot bases.
pub fn ket_index(labels: &[SpinLabel]) -> usize {
    labels.iter().fold(0, |acc, l| (acc << 1) | l.index())
}

/// Canonical components of a product ket.
pub fn ket_canonical(labels: &[SpinLabel]) -> Vec<C64> {
    let mut amps = vec![C64::new(1.0, 0.0)];
    for l in labels {
        let c = l.canonical();
        let mut next = Vec::with_capacity(amps.len() * 2);
        for a in &amps {
            next.push(a * c[0]);
            next.push(a * c[1]);
        }
        amps = next;
    }
    amps
}

/// Apply a 2×2 matrix to one slot of a tensor-basis vector.
pub(crate) fn apply_on_slot(amps: &mut [C64], slots: usize, slot: usize, m: &[[C64; 2]; 2]) {
    let stride = 1 << (slots - 1 - slot);
    for base in 0..amps.len() {
        if base & stride != 0 {
            continue;
        }
        let a0 = amps[base];
        let a1 = amps[base | stride];
        amps[base] = m[0][0] * a0 + m[0][1] * a1;
        amps[base | stride] = m[1][0] * a0 + m[1][1] * a1;
    }
}
