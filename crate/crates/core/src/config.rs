//! Signal configurations: which detectors of one stage carry a signal.

use alloc::string::String;
use alloc::vec::Vec;

use crate::labstate::LabError;

/// Set of excited detectors, as indices into the owning stage's detector
/// list. The empty set is the void state `|0,n)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignalConfig(Vec<u32>);

impl SignalConfig {
    pub fn void() -> Self {
        Self(Vec::new())
    }

    pub fn single(detector: usize) -> Self {
        Self(alloc::vec![detector as u32])
    }

    /// Fails if a detector appears twice: one signal per detector.
    pub fn new<I: IntoIterator<Item = usize>>(detectors: I) -> Result<Self, LabError> {
        let mut v: Vec<u32> = detectors.into_iter().map(|d| d as u32).collect();
        v.sort_unstable();
        for w in v.windows(2) {
            if w[0] == w[1] {
                return Err(LabError::DuplicateDetector(w[0] as usize));
            }
        }
        Ok(Self(v))
    }

    pub fn pair(a: usize, b: usize) -> Result<Self, LabError> {
        Self::new([a, b])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_void(&self) -> bool {
        self.0.is_empty()
    }

    pub fn detectors(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&d| d as usize)
    }

    pub fn contains(&self, detector: usize) -> bool {
        self.0.binary_search(&(detector as u32)).is_ok()
    }

    pub fn max_detector(&self) -> Option<usize> {
        self.0.last().map(|&d| d as usize)
    }

    pub fn is_superset(&self, other: &SignalConfig) -> bool {
        other.0.iter().all(|d| self.0.binary_search(d).is_ok())
    }

    pub fn intersection(&self, other: &SignalConfig) -> SignalConfig {
        Self(self.0.iter().copied().filter(|d| other.0.binary_search(d).is_ok()).collect())
    }

    /// Renumber detectors through `map` (old index → new index).
    pub fn relabel(&self, map: &[usize]) -> Result<SignalConfig, LabError> {
        Self::new(self.detectors().map(|d| map[d]))
    }

    /// Labels joined with `&`, or `void`.
    pub fn label<S: AsRef<str>>(&self, names: &[S]) -> String {
        if self.0.is_empty() {
            return String::from("void");
        }
        let mut out = String::new();
        for (k, d) in self.detectors().enumerate() {
            if k > 0 {
                out.push('&');
            }
            match names.get(d) {
                Some(n) => out.push_str(n.as_ref()),
                None => {
                    out.push('#');
                    out.push_str(&alloc::format!("{d}"));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_semantics() {
        let c = SignalConfig::new([3, 1]).unwrap();
        assert_eq!(c, SignalConfig::new([1, 3]).unwrap());
        assert_eq!(SignalConfig::new([2, 2]), Err(LabError::DuplicateDetector(2)));
        assert!(SignalConfig::void().is_void());
    }

    #[test]
    fn labels() {
        let names = ["A1", "A2", "S+1"];
        assert_eq!(SignalConfig::pair(2, 0).unwrap().label(&names), "A1&S+1");
        assert_eq!(SignalConfig::void().label(&names), "void");
    }

    #[test]
    fn superset_and_intersection() {
        let a = SignalConfig::new([0, 4, 5]).unwrap();
        assert!(a.is_superset(&SignalConfig::single(4)));
        assert!(!a.is_superset(&SignalConfig::single(1)));
        assert_eq!(a.intersection(&SignalConfig::pair(1, 5).unwrap()), SignalConfig::single(5));
    }
}
