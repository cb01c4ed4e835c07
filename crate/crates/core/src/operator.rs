//! Structured operators on sequences: weighted shifts, diagonals, banded and
//! finite-rank operators, and their sums, products and scalings.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectraError};
use crate::num::{re, Scalar, Wide};
use crate::vector::{SparseVector, WideVector};
use crate::weight::Weight;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub offset: i64,
    pub weight: Weight,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorRep {
    /// `e_k -> w(k) e_{k-offset}`, and `0` when `k - offset < 1`.
    WeightedShift { offset: i64, weight: Weight },
    /// `e_k -> d(k) e_k`.
    Diagonal { weight: Weight },
    /// Sum of weighted shifts.
    Banded { bands: Vec<Band> },
    /// `x -> sum_r <f_r, x> y_r` with the bilinear pairing.
    FiniteRank { functionals: Vec<SparseVector>, range: Vec<SparseVector> },
    Sum { terms: Vec<OperatorRep> },
    /// Composition; the last factor acts first.
    Product { factors: Vec<OperatorRep> },
    Scale { factor: Scalar, operator: Box<OperatorRep> },
}

/// Sparsity pattern of the matrix `a_{ji}` (row `j`, column `i`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Triangularity {
    /// `a_{ji} != 0` only for `j > i`: every row of `T^n` vanishes eventually.
    StrictlyLower,
    /// `a_{ji} != 0` only for `j >= i`.
    Lower,
    General,
}

impl OperatorRep {
    pub fn identity() -> OperatorRep {
        OperatorRep::Diagonal { weight: Weight::one() }
    }

    pub fn zero() -> OperatorRep {
        OperatorRep::Diagonal { weight: Weight::real_constant(0.0) }
    }

    pub fn diagonal(weight: Weight) -> OperatorRep {
        OperatorRep::Diagonal { weight }
    }

    pub fn weighted_shift(offset: i64, weight: Weight) -> OperatorRep {
        OperatorRep::WeightedShift { offset, weight }
    }

    /// `e_k -> e_{k-1}`.
    pub fn left_shift() -> OperatorRep {
        OperatorRep::weighted_shift(1, Weight::one())
    }

    /// `e_k -> e_{k+1}`.
    pub fn forward_shift() -> OperatorRep {
        OperatorRep::weighted_shift(-1, Weight::one())
    }

    /// `e_k -> ((k-1)^(k-1) / k^k) e_{k-1}`.
    pub fn self_power_shift() -> OperatorRep {
        OperatorRep::weighted_shift(1, Weight::self_power_ratio())
    }

    pub fn rank_one(y: SparseVector, f: SparseVector) -> OperatorRep {
        OperatorRep::FiniteRank { functionals: vec![f], range: vec![y] }
    }

    /// Matrix `rows[j][i]` acting on the first coordinates.
    pub fn from_matrix(rows: &[Vec<Scalar>]) -> OperatorRep {
        let mut functionals = Vec::new();
        let mut range = Vec::new();
        for (j, row) in rows.iter().enumerate() {
            let f = SparseVector::from_pairs(row.iter().enumerate().map(|(i, &z)| (i + 1, z))).expect("finite matrix");
            if !f.is_empty() {
                functionals.push(f);
                range.push(SparseVector::unit(j + 1));
            }
        }
        OperatorRep::FiniteRank { functionals, range }
    }

    pub fn from_real_matrix(rows: &[Vec<f64>]) -> OperatorRep {
        let rows: Vec<Vec<Scalar>> = rows.iter().map(|r| r.iter().map(|&x| re(x)).collect()).collect();
        OperatorRep::from_matrix(&rows)
    }

    pub fn sum(terms: Vec<OperatorRep>) -> OperatorRep {
        OperatorRep::Sum { terms }
    }

    /// `factors[0] * factors[1] * ...`, the last factor applied first.
    pub fn product(factors: Vec<OperatorRep>) -> OperatorRep {
        OperatorRep::Product { factors }
    }

    pub fn scale(factor: Scalar, operator: OperatorRep) -> OperatorRep {
        OperatorRep::Scale { factor, operator: Box::new(operator) }
    }

    pub fn neg(self) -> OperatorRep {
        OperatorRep::scale(re(-1.0), self)
    }

    pub fn apply_wide(&self, x: &WideVector) -> WideVector {
        let mut out = WideVector::zero();
        match self {
            OperatorRep::WeightedShift { offset, weight } => shift_into(&mut out, *offset, weight, x),
            OperatorRep::Diagonal { weight } => {
                for (k, z) in x.iter() {
                    out.add_at(k, weight.wide(k) * z);
                }
            }
            OperatorRep::Banded { bands } => {
                for b in bands {
                    shift_into(&mut out, b.offset, &b.weight, x);
                }
            }
            OperatorRep::FiniteRank { functionals, range } => {
                for (f, y) in functionals.iter().zip(range) {
                    let s = pair(f, x);
                    if !s.is_zero() {
                        for (j, yj) in y.iter() {
                            out.add_at(j, s * Wide::new(yj));
                        }
                    }
                }
            }
            OperatorRep::Sum { terms } => {
                for t in terms {
                    out = out.add(&t.apply_wide(x));
                }
            }
            OperatorRep::Product { factors } => {
                out = x.clone();
                for f in factors.iter().rev() {
                    out = f.apply_wide(&out);
                }
            }
            OperatorRep::Scale { factor, operator } => out = operator.apply_wide(x).scale(Wide::new(*factor)),
        }
        out
    }

    /// Exact image in double precision.
    ///
    /// Panics if an image entry leaves the double range; use [`apply_wide`]
    /// for iterates that may overflow.
    ///
    /// [`apply_wide`]: OperatorRep::apply_wide
    pub fn apply(&self, x: &SparseVector) -> SparseVector {
        self.try_apply(x).expect("image entry exceeds the double range")
    }

    pub fn try_apply(&self, x: &SparseVector) -> Result<SparseVector> {
        self.apply_wide(&x.to_wide()).to_sparse()
    }

    /// `T^t y`; row `j` of `T` is `T^t e_j`.
    pub fn apply_transpose_wide(&self, y: &WideVector) -> WideVector {
        let mut out = WideVector::zero();
        match self {
            OperatorRep::WeightedShift { offset, weight } => shift_transpose_into(&mut out, *offset, weight, y),
            OperatorRep::Diagonal { weight } => {
                for (k, z) in y.iter() {
                    out.add_at(k, weight.wide(k) * z);
                }
            }
            OperatorRep::Banded { bands } => {
                for b in bands {
                    shift_transpose_into(&mut out, b.offset, &b.weight, y);
                }
            }
            OperatorRep::FiniteRank { functionals, range } => {
                for (f, r) in functionals.iter().zip(range) {
                    let s = pair(r, y);
                    if !s.is_zero() {
                        for (i, fi) in f.iter() {
                            out.add_at(i, s * Wide::new(fi));
                        }
                    }
                }
            }
            OperatorRep::Sum { terms } => {
                for t in terms {
                    out = out.add(&t.apply_transpose_wide(y));
                }
            }
            OperatorRep::Product { factors } => {
                out = y.clone();
                for f in factors {
                    out = f.apply_transpose_wide(&out);
                }
            }
            OperatorRep::Scale { factor, operator } => {
                out = operator.apply_transpose_wide(y).scale(Wide::new(*factor))
            }
        }
        out
    }

    /// Row `j` of `T`.
    pub fn row(&self, j: usize) -> WideVector {
        self.apply_transpose_wide(&WideVector::unit(j))
    }

    pub fn power_apply_wide(&self, n: usize, x: &WideVector) -> WideVector {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.apply_wide(&y);
        }
        y
    }

    /// Coefficient of `e_j` in `T^n e_i`, in wide form.
    pub fn power_coefficient_wide(&self, n: usize, i: usize, j: usize) -> Wide {
        assert!(i >= 1 && j >= 1, "indices start at 1");
        if n == 0 {
            return if i == j { Wide::ONE } else { Wide::ZERO };
        }
        match self {
            OperatorRep::WeightedShift { offset, weight } => {
                let c = *offset;
                let target = i as i64 - n as i64 * c;
                if target < 1 || target != j as i64 {
                    return Wide::ZERO;
                }
                // e_i -> w(i) e_{i-c} -> w(i) w(i-c) e_{i-2c} -> ...
                (0..n as i64).fold(Wide::ONE, |acc, t| acc * weight.wide((i as i64 - t * c) as usize))
            }
            OperatorRep::Diagonal { weight } => {
                if i == j {
                    weight.wide(i).powi(n as u64)
                } else {
                    Wide::ZERO
                }
            }
            OperatorRep::Scale { factor, operator } if operator.has_closed_form_powers() => {
                Wide::new(*factor).powi(n as u64) * operator.power_coefficient_wide(n, i, j)
            }
            _ => self.power_apply_wide(n, &WideVector::unit(i)).get(j),
        }
    }

    /// Coefficient of `e_j` in `T^n e_i`.
    pub fn power_coefficient(&self, n: usize, i: usize, j: usize) -> Result<Scalar> {
        let w = self.power_coefficient_wide(n, i, j);
        let z = w.to_complex();
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(SpectraError::Overflow(format!("|coefficient| = 2^{:.3}", w.abs().log2())));
        }
        Ok(z)
    }

    pub fn has_closed_form_powers(&self) -> bool {
        match self {
            OperatorRep::WeightedShift { .. } | OperatorRep::Diagonal { .. } => true,
            OperatorRep::Scale { operator, .. } => operator.has_closed_form_powers(),
            _ => false,
        }
    }

    /// Merges diagonal pieces, unwraps trivial scalings and single bands.
    pub fn normalize(&self) -> OperatorRep {
        match self {
            OperatorRep::Scale { factor, operator } => {
                let inner = operator.normalize();
                if *factor == re(1.0) {
                    return inner;
                }
                match inner {
                    OperatorRep::Diagonal { weight } => OperatorRep::diagonal(
                        Weight::product(vec![Weight::constant(*factor), weight]).normalize(),
                    ),
                    OperatorRep::WeightedShift { offset, weight } => OperatorRep::weighted_shift(
                        offset,
                        Weight::product(vec![Weight::constant(*factor), weight]).normalize(),
                    ),
                    OperatorRep::Scale { factor: g, operator } => OperatorRep::scale(factor * g, *operator),
                    other => OperatorRep::scale(*factor, other),
                }
            }
            OperatorRep::Banded { bands } if bands.len() == 1 => {
                OperatorRep::weighted_shift(bands[0].offset, bands[0].weight.clone()).normalize()
            }
            OperatorRep::WeightedShift { offset: 0, weight } => OperatorRep::diagonal(weight.normalize()),
            OperatorRep::WeightedShift { offset, weight } => OperatorRep::weighted_shift(*offset, weight.normalize()),
            OperatorRep::Diagonal { weight } => OperatorRep::diagonal(weight.normalize()),
            OperatorRep::Sum { terms } => {
                let parts: Vec<OperatorRep> = terms.iter().map(|t| t.normalize()).collect();
                let (diag, rest): (Vec<_>, Vec<_>) =
                    parts.into_iter().partition(|t| matches!(t, OperatorRep::Diagonal { .. }));
                let mut out = rest;
                if !diag.is_empty() {
                    let ws = diag
                        .into_iter()
                        .map(|d| match d {
                            OperatorRep::Diagonal { weight } => weight,
                            _ => unreachable!(),
                        })
                        .collect();
                    out.insert(0, OperatorRep::diagonal(Weight::sum(ws).normalize()));
                }
                if out.len() == 1 {
                    out.pop().unwrap()
                } else {
                    OperatorRep::Sum { terms: out }
                }
            }
            OperatorRep::Product { factors } => {
                let parts: Vec<OperatorRep> = factors.iter().map(|t| t.normalize()).collect();
                if parts.iter().all(|p| matches!(p, OperatorRep::Diagonal { .. })) {
                    let ws = parts
                        .into_iter()
                        .map(|d| match d {
                            OperatorRep::Diagonal { weight } => weight,
                            _ => unreachable!(),
                        })
                        .collect();
                    return OperatorRep::diagonal(Weight::product(ws).normalize());
                }
                if parts.len() == 1 {
                    return parts.into_iter().next().unwrap();
                }
                OperatorRep::Product { factors: parts }
            }
            other => other.clone(),
        }
    }

    /// The diagonal weight, if the operator normalizes to a diagonal.
    pub fn as_diagonal(&self) -> Option<Weight> {
        match self.normalize() {
            OperatorRep::Diagonal { weight } => Some(weight),
            _ => None,
        }
    }

    /// `(offset, weight)` of a shift with positive offset whose weights never
    /// vanish: every row of `T^n` is nonzero and reads ever larger indices.
    pub fn as_escaping_shift(&self) -> Option<(i64, Weight)> {
        match self.normalize() {
            OperatorRep::WeightedShift { offset, weight }
                if offset > 0 && weight.nowhere_zero_from(offset as usize + 1) == Some(true) =>
            {
                Some((offset, weight))
            }
            _ => None,
        }
    }

    /// Finite set of rows that can be nonzero, if there is one.
    pub fn output_support(&self) -> Option<BTreeSet<usize>> {
        match self {
            OperatorRep::FiniteRank { range, .. } => Some(range.iter().flat_map(|y| y.support()).collect()),
            OperatorRep::Diagonal { weight } => finite_nonzero(weight).map(|s| s.into_iter().collect()),
            OperatorRep::WeightedShift { offset, weight } => finite_nonzero(weight).map(|s| {
                s.into_iter().filter_map(|k| usize::try_from(k as i64 - offset).ok().filter(|&j| j >= 1)).collect()
            }),
            OperatorRep::Banded { bands } => {
                let mut out = BTreeSet::new();
                for b in bands {
                    out.extend(OperatorRep::weighted_shift(b.offset, b.weight.clone()).output_support()?);
                }
                Some(out)
            }
            OperatorRep::Sum { terms } => {
                let mut out = BTreeSet::new();
                for t in terms {
                    out.extend(t.output_support()?);
                }
                Some(out)
            }
            OperatorRep::Product { factors } => {
                if let Some(s) = factors.first().and_then(|f| f.output_support()) {
                    return Some(s);
                }
                // push the image of the rightmost finite factor through the rest
                let pos = factors.iter().rposition(|f| f.output_support().is_some())?;
                let mut s = factors[pos].output_support()?;
                for f in factors[..pos].iter().rev() {
                    let mut next = BTreeSet::new();
                    for &i in &s {
                        next.extend(f.apply_wide(&WideVector::unit(i)).support());
                    }
                    s = next;
                }
                Some(s)
            }
            OperatorRep::Scale { factor, operator } => {
                if *factor == re(0.0) {
                    Some(BTreeSet::new())
                } else {
                    operator.output_support()
                }
            }
        }
    }

    /// Finite set of coordinates the operator reads, if there is one.
    pub fn read_support(&self) -> Option<BTreeSet<usize>> {
        match self {
            OperatorRep::FiniteRank { functionals, .. } => Some(functionals.iter().flat_map(|f| f.support()).collect()),
            OperatorRep::Diagonal { weight } => finite_nonzero(weight).map(|s| s.into_iter().collect()),
            OperatorRep::WeightedShift { offset, weight } => finite_nonzero(weight)
                .map(|s| s.into_iter().filter(|&k| k as i64 - offset >= 1).collect()),
            OperatorRep::Banded { bands } => {
                let mut out = BTreeSet::new();
                for b in bands {
                    out.extend(OperatorRep::weighted_shift(b.offset, b.weight.clone()).read_support()?);
                }
                Some(out)
            }
            OperatorRep::Sum { terms } => {
                let mut out = BTreeSet::new();
                for t in terms {
                    out.extend(t.read_support()?);
                }
                Some(out)
            }
            OperatorRep::Product { factors } => {
                if let Some(s) = factors.last().and_then(|f| f.read_support()) {
                    return Some(s);
                }
                let pos = factors.iter().position(|f| f.read_support().is_some())?;
                let mut s = factors[pos].read_support()?;
                for f in &factors[pos + 1..] {
                    let mut next = BTreeSet::new();
                    for &j in &s {
                        next.extend(f.row(j).support());
                    }
                    s = next;
                }
                Some(s)
            }
            OperatorRep::Scale { factor, operator } => {
                if *factor == re(0.0) {
                    Some(BTreeSet::new())
                } else {
                    operator.read_support()
                }
            }
        }
    }

    /// `Some(true)` when infinitely many coordinates are read, `Some(false)`
    /// when finitely many are.
    pub fn reads_infinitely_many(&self) -> Option<bool> {
        let n = self.normalize();
        if n.read_support().is_some() {
            return Some(false);
        }
        match &n {
            OperatorRep::Diagonal { weight } | OperatorRep::WeightedShift { weight, .. } => {
                weight.eventually_zero().map(|z| !z)
            }
            OperatorRep::Banded { bands } => {
                // distinct offsets cannot cancel
                let offsets: BTreeSet<i64> = bands.iter().map(|b| b.offset).collect();
                if offsets.len() == bands.len() && bands.iter().any(|b| b.weight.eventually_zero() == Some(false)) {
                    Some(true)
                } else {
                    None
                }
            }
            OperatorRep::Sum { terms } => {
                // bands on distinct offsets plus finitely reading terms
                let mut bands: Vec<(i64, &Weight)> = Vec::new();
                let mut rest_finite = true;
                for t in terms {
                    match t {
                        OperatorRep::Diagonal { weight } => bands.push((0, weight)),
                        OperatorRep::WeightedShift { offset, weight } => bands.push((*offset, weight)),
                        OperatorRep::Banded { bands: bs } => bands.extend(bs.iter().map(|b| (b.offset, &b.weight))),
                        other => rest_finite &= other.read_support().is_some(),
                    }
                }
                let offsets: BTreeSet<i64> = bands.iter().map(|b| b.0).collect();
                if rest_finite
                    && offsets.len() == bands.len()
                    && bands.iter().any(|b| b.1.eventually_zero() == Some(false))
                {
                    return Some(true);
                }
                let infinite: Vec<_> = terms.iter().map(|t| t.reads_infinitely_many()).collect();
                if infinite.contains(&None) {
                    return None;
                }
                // a single infinitely reading term cannot be cancelled by finite ones
                match infinite.iter().filter(|x| **x == Some(true)).count() {
                    0 => Some(false),
                    1 => Some(true),
                    _ => None,
                }
            }
            OperatorRep::Scale { operator, .. } => operator.reads_infinitely_many(),
            _ => None,
        }
    }

    pub fn triangularity(&self) -> Triangularity {
        use Triangularity::*;
        match self {
            OperatorRep::WeightedShift { offset, weight } => {
                if *offset < 0 || weight.eventually_zero() == Some(true) && finite_nonzero(weight) == Some(vec![]) {
                    StrictlyLower
                } else if *offset == 0 {
                    Lower
                } else {
                    General
                }
            }
            OperatorRep::Diagonal { weight } => {
                if finite_nonzero(weight) == Some(vec![]) {
                    StrictlyLower
                } else {
                    Lower
                }
            }
            OperatorRep::Banded { bands } => bands
                .iter()
                .map(|b| OperatorRep::weighted_shift(b.offset, b.weight.clone()).triangularity())
                .max()
                .unwrap_or(StrictlyLower),
            OperatorRep::FiniteRank { functionals, range } => {
                let mut t = StrictlyLower;
                for (f, y) in functionals.iter().zip(range) {
                    let (Some(fmax), Some(ymin)) = (f.max_index(), y.support().next()) else { continue };
                    if ymin > fmax {
                        continue;
                    }
                    let min_gap = f.support().flat_map(|i| y.support().map(move |j| j as i64 - i as i64)).min().unwrap();
                    t = t.max(if min_gap > 0 { StrictlyLower } else if min_gap == 0 { Lower } else { General });
                }
                t
            }
            OperatorRep::Sum { terms } => terms.iter().map(|t| t.triangularity()).max().unwrap_or(StrictlyLower),
            OperatorRep::Product { factors } => {
                let ts: Vec<_> = factors.iter().map(|f| f.triangularity()).collect();
                if ts.contains(&General) {
                    General
                } else if ts.contains(&StrictlyLower) {
                    StrictlyLower
                } else {
                    Lower
                }
            }
            OperatorRep::Scale { factor, operator } => {
                if *factor == re(0.0) {
                    StrictlyLower
                } else {
                    operator.triangularity()
                }
            }
        }
    }

    /// First probe on which `ST x` and `TS x` differ by more than `1e-12`
    /// relative to the larger image.
    pub fn commutator_witness(s: &OperatorRep, t: &OperatorRep, probes: &[SparseVector]) -> Option<SparseVector> {
        for x in probes {
            let a = s.apply_wide(&t.apply_wide(&x.to_wide()));
            let b = t.apply_wide(&s.apply_wide(&x.to_wide()));
            let scale = a.sup_abs().max(b.sup_abs());
            let diff = a.sub(&b).sup_abs();
            if !diff.is_zero() && diff > scale * crate::num::ExtReal::new(1e-12) {
                return Some(x.clone());
            }
        }
        None
    }
}

// nonzero indices of a weight that vanishes eventually
fn finite_nonzero(w: &Weight) -> Option<Vec<usize>> {
    match w.normalize() {
        Weight::GeoPower { coef, base, .. } if coef == re(0.0) || base == 0.0 => Some(vec![]),
        Weight::Table { values, tail } if tail == re(0.0) => {
            Some(values.iter().enumerate().filter(|(_, v)| **v != re(0.0)).map(|(i, _)| i + 1).collect())
        }
        _ => None,
    }
}

fn shift_into(out: &mut WideVector, offset: i64, weight: &Weight, x: &WideVector) {
    for (k, z) in x.iter() {
        let j = k as i64 - offset;
        if j >= 1 {
            out.add_at(j as usize, weight.wide(k) * z);
        }
    }
}

fn shift_transpose_into(out: &mut WideVector, offset: i64, weight: &Weight, y: &WideVector) {
    for (j, z) in y.iter() {
        let i = j as i64 + offset;
        if i >= 1 {
            out.add_at(i as usize, weight.wide(i as usize) * z);
        }
    }
}

fn pair(f: &SparseVector, x: &WideVector) -> Wide {
    f.iter().fold(Wide::ZERO, |acc, (k, fk)| acc + Wide::new(fk) * x.get(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(k: usize) -> SparseVector {
        SparseVector::unit(k)
    }

    #[test]
    fn shift_actions() {
        assert_eq!(OperatorRep::left_shift().apply(&e(2)), e(1));
        assert!(OperatorRep::left_shift().apply(&e(1)).is_empty());
        let d = OperatorRep::diagonal(Weight::geometric(1.0, 0.5));
        assert_eq!(d.apply(&e(3)), e(3).scale(re(0.125)));
        assert_eq!(OperatorRep::self_power_shift().apply(&e(2)), e(1).scale(re(0.25)));
    }

    #[test]
    fn power_coefficient_examples() {
        let t = OperatorRep::self_power_shift();
        assert!((t.power_coefficient(2, 3, 1).unwrap() - re(1.0 / 27.0)).norm() < 1e-17);
        assert_eq!(t.power_coefficient(0, 4, 4).unwrap(), re(1.0));
        assert_eq!(OperatorRep::diagonal(Weight::real_constant(2.0)).power_coefficient(5, 1, 1).unwrap(), re(32.0));
        // (k-n)^(k-n)/k^k with k = 40, n = 25
        let c = t.power_coefficient_wide(25, 40, 15);
        let expect = Wide::real(15.0).powi(15) / Wide::real(40.0).powi(40);
        assert!(c.abs().rel_diff(expect.abs()) < 1e-13);
        assert!(t.power_coefficient_wide(40, 40, 1).is_zero());
        let huge = OperatorRep::diagonal(Weight::self_power(2.0));
        assert!(matches!(huge.power_coefficient(3, 200, 200), Err(SpectraError::Overflow(_))));
    }

    #[test]
    fn algebra_examples() {
        let s = OperatorRep::scale(re(2.0), OperatorRep::identity());
        assert_eq!(s.apply(&e(1)), e(1).scale(re(2.0)));
        let z = OperatorRep::sum(vec![OperatorRep::left_shift(), OperatorRep::left_shift().neg()]);
        assert!(z.apply(&SparseVector::from_reals(&[1.0, -2.0, 3.5])).is_empty());
        let lr = OperatorRep::product(vec![OperatorRep::left_shift(), OperatorRep::forward_shift()]);
        assert_eq!(lr.apply(&e(1)), e(1));
    }

    #[test]
    fn structure_queries() {
        let k = OperatorRep::from_real_matrix(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(k.output_support(), Some([1].into()));
        assert_eq!(k.read_support(), Some([2].into()));
        assert_eq!(OperatorRep::forward_shift().triangularity(), Triangularity::StrictlyLower);
        assert_eq!(OperatorRep::identity().triangularity(), Triangularity::Lower);
        assert_eq!(OperatorRep::left_shift().triangularity(), Triangularity::General);
        assert_eq!(OperatorRep::identity().reads_infinitely_many(), Some(true));
        assert_eq!(k.reads_infinitely_many(), Some(false));
        let mixed = OperatorRep::sum(vec![OperatorRep::identity(), k.clone()]);
        assert_eq!(mixed.reads_infinitely_many(), Some(true));
        assert!(OperatorRep::self_power_shift().as_escaping_shift().is_some());
        let prod = OperatorRep::product(vec![OperatorRep::left_shift(), k]);
        assert_eq!(prod.read_support(), Some([2].into()));
        assert_eq!(prod.output_support(), Some(BTreeSet::new()));
    }

    fn corpus() -> Vec<OperatorRep> {
        vec![
            OperatorRep::left_shift(),
            OperatorRep::forward_shift(),
            OperatorRep::self_power_shift(),
            OperatorRep::weighted_shift(2, Weight::power(1.0, 1.0)),
            OperatorRep::weighted_shift(-3, Weight::geometric(2.0, 0.5)),
            OperatorRep::diagonal(Weight::power(1.0, -1.0)),
            OperatorRep::diagonal(Weight::GeoPower { coef: Scalar::new(0.3, -1.2), base: 1.1, exponent: -0.5 }),
            OperatorRep::scale(Scalar::new(0.0, 2.0), OperatorRep::diagonal(Weight::geometric(1.0, 0.9))),
            OperatorRep::scale(re(-1.5), OperatorRep::left_shift()),
        ]
    }

    #[test]
    fn power_coefficients_match_repeated_apply() {
        for t in corpus() {
            for n in 0..=10 {
                for i in 1..=20 {
                    let col = t.power_apply_wide(n, &WideVector::unit(i));
                    for j in 1..=20 {
                        let a = t.power_coefficient_wide(n, i, j);
                        let b = col.get(j);
                        let scale = a.abs().max(b.abs());
                        assert!((a - b).abs() <= scale * crate::num::ExtReal::new(1e-12), "{t:?} n={n} i={i} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn transpose_matches_apply() {
        let mut ops = corpus();
        ops.push(OperatorRep::from_real_matrix(&[vec![1.0, 2.0, 0.0], vec![0.0, -1.0, 3.0], vec![4.0, 0.0, 0.5]]));
        ops.push(OperatorRep::Banded {
            bands: vec![
                Band { offset: -1, weight: Weight::one() },
                Band { offset: 1, weight: Weight::power(2.0, 1.0) },
            ],
        });
        for t in &ops {
            for i in 1..12 {
                let col = t.apply_wide(&WideVector::unit(i));
                for j in 1..12 {
                    assert_eq!(col.get(j), t.row(j).get(i), "{t:?} ({j},{i})");
                }
            }
        }
    }

    fn random_sparse(rng: &mut ChaCha8Rng) -> SparseVector {
        let n = rng.gen_range(0..6);
        SparseVector::from_pairs(
            (0..n).map(|_| (rng.gen_range(1..10), Scalar::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))),
        )
        .unwrap()
    }

    #[test]
    fn product_is_composition_on_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ops = corpus();
        for _ in 0..1000 {
            let a = &ops[rng.gen_range(0..ops.len())];
            let b = &ops[rng.gen_range(0..ops.len())];
            let x = random_sparse(&mut rng);
            let ab = OperatorRep::product(vec![a.clone(), b.clone()]);
            assert_eq!(ab.apply_wide(&x.to_wide()), a.apply_wide(&b.apply_wide(&x.to_wide())));
        }
    }

    proptest! {
        #[test]
        fn apply_is_linear(xs in proptest::collection::vec(-5.0f64..5.0, 1..8),
                           ys in proptest::collection::vec(-5.0f64..5.0, 1..8),
                           c in -3.0f64..3.0, which in 0usize..9) {
            let t = &corpus()[which];
            let x = SparseVector::from_reals(&xs);
            let y = SparseVector::from_reals(&ys);
            let lhs = t.apply(&x.scale(re(c)).add(&y));
            let rhs = t.apply(&x).scale(re(c)).add(&t.apply(&y));
            let err = lhs.sub(&rhs).sup_abs();
            prop_assert!(err <= 1e-12 * (1.0 + lhs.sup_abs()));
        }
    }
}
