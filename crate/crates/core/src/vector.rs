//! Finitely supported sequences indexed from 1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectraError};
use crate::num::{ExtReal, Scalar, Wide};

/// Finitely supported complex sequence. Zero entries are never stored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, Scalar)>", into = "Vec<(usize, Scalar)>")]
pub struct SparseVector {
    entries: BTreeMap<usize, Scalar>,
}

impl SparseVector {
    pub fn zero() -> SparseVector {
        SparseVector::default()
    }

    pub fn unit(k: usize) -> SparseVector {
        assert!(k >= 1, "indices start at 1");
        let mut v = SparseVector::zero();
        v.entries.insert(k, Scalar::new(1.0, 0.0));
        v
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, Scalar)>>(pairs: I) -> Result<SparseVector> {
        let mut v = SparseVector::zero();
        for (k, z) in pairs {
            if k == 0 {
                return Err(SpectraError::Invalid("sequence indices start at 1".into()));
            }
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(SpectraError::Invalid(format!("non-finite entry at index {k}")));
            }
            v.add_at(k, z);
        }
        Ok(v)
    }

    /// Real entries `values[i]` at index `i + 1`.
    pub fn from_reals(values: &[f64]) -> SparseVector {
        SparseVector::from_pairs(values.iter().enumerate().map(|(i, &x)| (i + 1, Scalar::new(x, 0.0))))
            .expect("finite real entries")
    }

    pub fn get(&self, k: usize) -> Scalar {
        self.entries.get(&k).copied().unwrap_or_default()
    }

    pub fn add_at(&mut self, k: usize, z: Scalar) {
        let e = self.entries.entry(k).or_default();
        *e += z;
        if *e == Scalar::default() {
            self.entries.remove(&k);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Scalar)> + '_ {
        self.entries.iter().map(|(&k, &z)| (k, z))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, c: Scalar) -> SparseVector {
        SparseVector::from_pairs(self.iter().map(|(k, z)| (k, z * c))).expect("finite scaling")
    }

    pub fn add(&self, other: &SparseVector) -> SparseVector {
        let mut v = self.clone();
        for (k, z) in other.iter() {
            v.add_at(k, z);
        }
        v
    }

    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        self.add(&other.scale(Scalar::new(-1.0, 0.0)))
    }

    /// Bilinear pairing `sum_k a_k b_k` (no conjugation).
    pub fn dot(&self, other: &SparseVector) -> Scalar {
        self.iter().map(|(k, z)| z * other.get(k)).sum()
    }

    pub fn sup_abs(&self) -> f64 {
        self.iter().map(|(_, z)| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_wide(&self) -> WideVector {
        let mut w = WideVector::zero();
        for (k, z) in self.iter() {
            w.add_at(k, Wide::new(z));
        }
        w
    }
}

impl TryFrom<Vec<(usize, Scalar)>> for SparseVector {
    type Error = SpectraError;
    fn try_from(pairs: Vec<(usize, Scalar)>) -> Result<SparseVector> {
        SparseVector::from_pairs(pairs)
    }
}

impl From<SparseVector> for Vec<(usize, Scalar)> {
    fn from(v: SparseVector) -> Self {
        v.entries.into_iter().collect()
    }
}

/// Finitely supported sequence of wide-range entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WideVector {
    entries: BTreeMap<usize, Wide>,
}

impl WideVector {
    pub fn zero() -> WideVector {
        WideVector::default()
    }

    pub fn unit(k: usize) -> WideVector {
        SparseVector::unit(k).to_wide()
    }

    pub fn get(&self, k: usize) -> Wide {
        self.entries.get(&k).copied().unwrap_or(Wide::ZERO)
    }

    pub fn add_at(&mut self, k: usize, z: Wide) {
        debug_assert!(k >= 1);
        if z.is_zero() {
            return;
        }
        let e = self.entries.entry(k).or_insert(Wide::ZERO);
        *e = *e + z;
        if e.is_zero() {
            self.entries.remove(&k);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Wide)> + '_ {
        self.entries.iter().map(|(&k, &z)| (k, z))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn scale(&self, c: Wide) -> WideVector {
        let mut v = WideVector::zero();
        for (k, z) in self.iter() {
            v.add_at(k, z * c);
        }
        v
    }

    pub fn add(&self, other: &WideVector) -> WideVector {
        let mut v = self.clone();
        for (k, z) in other.iter() {
            v.add_at(k, z);
        }
        v
    }

    pub fn sub(&self, other: &WideVector) -> WideVector {
        self.add(&other.scale(-Wide::ONE))
    }

    pub fn sup_abs(&self) -> ExtReal {
        self.iter().map(|(_, z)| z.abs()).fold(ExtReal::ZERO, ExtReal::max)
    }

    pub fn l1(&self) -> ExtReal {
        self.iter().map(|(_, z)| z.abs()).sum()
    }

    /// Converts to doubles; fails if an entry leaves the double range.
    pub fn to_sparse(&self) -> Result<SparseVector> {
        let mut v = SparseVector::zero();
        for (k, z) in self.iter() {
            let c = z.to_complex();
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(SpectraError::Overflow(format!("entry {k} exceeds the double range")));
            }
            v.add_at(k, c);
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_are_not_stored() {
        let mut v = SparseVector::unit(3);
        v.add_at(3, Scalar::new(-1.0, 0.0));
        assert!(v.is_empty());
        let w = SparseVector::from_reals(&[0.0, 2.0, 0.0]);
        assert_eq!(w.support().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn index_zero_rejected() {
        assert!(SparseVector::from_pairs([(0, Scalar::new(1.0, 0.0))]).is_err());
        assert!(SparseVector::from_pairs([(1, Scalar::new(f64::NAN, 0.0))]).is_err());
    }

    #[test]
    fn wide_roundtrip() {
        let v = SparseVector::from_reals(&[1.5, -2.0, 0.25]);
        assert_eq!(v.to_wide().to_sparse().unwrap(), v);
    }
}
