//! Seminorms on finitely supported sequences and the families that generate a
//! topology or describe its bounded sets.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectraError};
use crate::num::ExtReal;
use crate::operator::OperatorRep;
use crate::vector::{SparseVector, WideVector};
use crate::weight::Weight;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Window {
    /// Indices `start..=end`.
    Range { start: usize, end: usize },
    /// Indices `start..`.
    From { start: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Seminorm {
    /// `|x_index|`.
    Coordinate { index: usize },
    /// `max_{k in indices} |x_k|`.
    FiniteMax { indices: BTreeSet<usize> },
    /// `sup_{k in window} |w(k)| |x_k|`.
    WeightedSup { window: Window, weight: Weight },
    /// Minkowski functional of the box `{x : |x_k| <= |bound(k)|}`.
    MinkowskiOfBox { bound: Weight },
    /// `sum_{k=0..=level} base(T^k x)`.
    GraphNorm { level: usize, operator: Arc<OperatorRep>, base: Box<Seminorm> },
}

/// Index set of a box-shaped seminorm.
#[derive(Clone, Debug, PartialEq)]
pub enum IndexSet {
    Finite(BTreeSet<usize>),
    Interval { start: usize, end: Option<usize> },
}

impl IndexSet {
    pub fn contains(&self, k: usize) -> bool {
        match self {
            IndexSet::Finite(s) => s.contains(&k),
            IndexSet::Interval { start, end } => k >= *start && end.map_or(true, |e| k <= e),
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, IndexSet::Interval { end: None, .. })
    }

    /// Elements of a finite set in increasing order.
    pub fn elements(&self) -> Option<Vec<usize>> {
        match self {
            IndexSet::Finite(s) => Some(s.iter().copied().collect()),
            IndexSet::Interval { start, end: Some(e) } => Some((*start..=*e).collect()),
            IndexSet::Interval { end: None, .. } => None,
        }
    }

    pub fn start(&self) -> usize {
        match self {
            IndexSet::Finite(s) => s.iter().next().copied().unwrap_or(usize::MAX),
            IndexSet::Interval { start, .. } => *start,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Scale<'a> {
    Unit,
    Weight(&'a Weight),
    InverseBound(&'a Weight),
}

/// A seminorm of the form `sup_{k in S} omega(k) |x_k|`.
#[derive(Clone, Debug)]
pub struct BoxView<'a> {
    pub indices: IndexSet,
    scale: Scale<'a>,
}

impl BoxView<'_> {
    /// `omega(k)` for `k` in the index set and zero outside it; an infinite
    /// value forces the coordinate to vanish on the unit ball.
    pub fn omega(&self, k: usize) -> ExtReal {
        if !self.indices.contains(k) {
            return ExtReal::ZERO;
        }
        match self.scale {
            Scale::Unit => ExtReal::ONE,
            Scale::Weight(w) => w.abs(k),
            Scale::InverseBound(b) => b.abs(k).recip(),
        }
    }

    /// `omega` as a closed-form weight (up to modulus).
    pub fn omega_weight(&self) -> Result<Weight> {
        Ok(match self.scale {
            Scale::Unit => Weight::one(),
            Scale::Weight(w) => w.clone(),
            Scale::InverseBound(b) => Weight::reciprocal(b.clone())?,
        })
    }

    /// `1/omega` as a closed-form weight (up to modulus).
    pub fn inverse_omega_weight(&self) -> Result<Weight> {
        Ok(match self.scale {
            Scale::Unit => Weight::one(),
            Scale::Weight(w) => Weight::reciprocal(w.clone())?,
            Scale::InverseBound(b) => b.clone(),
        })
    }

    pub fn has_unit_scale(&self) -> bool {
        match self.scale {
            Scale::Unit => true,
            Scale::Weight(w) | Scale::InverseBound(w) => matches!(
                w.normalize(),
                Weight::GeoPower { coef, base, exponent } if coef.norm() == 1.0 && base == 1.0 && exponent == 0.0
            ),
        }
    }

    fn eval_entries(&self, entries: impl Iterator<Item = (usize, ExtReal)>) -> ExtReal {
        let mut best = ExtReal::ZERO;
        for (k, a) in entries {
            if self.indices.contains(k) {
                best = best.max(self.omega(k) * a);
            }
        }
        best
    }
}

impl Seminorm {
    pub fn coordinate(index: usize) -> Seminorm {
        assert!(index >= 1, "indices start at 1");
        Seminorm::Coordinate { index }
    }

    pub fn finite_max<I: IntoIterator<Item = usize>>(indices: I) -> Seminorm {
        let indices: BTreeSet<usize> = indices.into_iter().collect();
        assert!(indices.iter().all(|&k| k >= 1), "indices start at 1");
        if indices.len() == 1 {
            return Seminorm::Coordinate { index: *indices.iter().next().unwrap() };
        }
        Seminorm::FiniteMax { indices }
    }

    /// `sup_k |x_k|` over all coordinates.
    pub fn sup_norm() -> Seminorm {
        Seminorm::WeightedSup { window: Window::From { start: 1 }, weight: Weight::one() }
    }

    pub fn minkowski(bound: Weight) -> Seminorm {
        Seminorm::MinkowskiOfBox { bound }
    }

    pub fn graph(level: usize, operator: Arc<OperatorRep>, base: Seminorm) -> Seminorm {
        Seminorm::GraphNorm { level, operator, base: Box::new(base) }
    }

    pub fn as_box(&self) -> Option<BoxView<'_>> {
        Some(match self {
            Seminorm::Coordinate { index } => {
                BoxView { indices: IndexSet::Finite([*index].into()), scale: Scale::Unit }
            }
            Seminorm::FiniteMax { indices } => BoxView { indices: IndexSet::Finite(indices.clone()), scale: Scale::Unit },
            Seminorm::WeightedSup { window, weight } => {
                let indices = match window {
                    Window::Range { start, end } => IndexSet::Interval { start: *start, end: Some(*end) },
                    Window::From { start } => IndexSet::Interval { start: *start, end: None },
                };
                BoxView { indices, scale: Scale::Weight(weight) }
            }
            Seminorm::MinkowskiOfBox { bound } => {
                BoxView { indices: IndexSet::Interval { start: 1, end: None }, scale: Scale::InverseBound(bound) }
            }
            Seminorm::GraphNorm { .. } => return None,
        })
    }

    pub fn eval(&self, x: &SparseVector) -> Result<ExtReal> {
        match self.as_box() {
            Some(b) => Ok(b.eval_entries(x.iter().map(|(k, z)| (k, ExtReal::new(z.norm()))))),
            None => self.eval_wide(&x.to_wide()),
        }
    }

    pub fn eval_wide(&self, x: &WideVector) -> Result<ExtReal> {
        match self {
            Seminorm::GraphNorm { level, operator, base } => {
                if matches!(**base, Seminorm::GraphNorm { .. }) {
                    return Err(SpectraError::Domain("graph norm over a graph norm".into()));
                }
                let mut total = ExtReal::ZERO;
                let mut y = x.clone();
                for k in 0..=*level {
                    if k > 0 {
                        y = operator.apply_wide(&y);
                    }
                    total = total + base.eval_wide(&y)?;
                }
                Ok(total)
            }
            _ => Ok(self.as_box().expect("box seminorm").eval_entries(x.iter().map(|(k, z)| (k, z.abs())))),
        }
    }

    /// Indices on which the seminorm can be nonzero, if finite.
    pub fn finite_indices(&self) -> Option<Vec<usize>> {
        self.as_box().and_then(|b| b.indices.elements())
    }
}

impl fmt::Display for Seminorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Seminorm::Coordinate { index } => write!(f, "p{index}"),
            Seminorm::FiniteMax { indices } => {
                let v: Vec<String> = indices.iter().map(|k| k.to_string()).collect();
                write!(f, "max{{{}}}", v.join(","))
            }
            Seminorm::WeightedSup { window: Window::Range { start, end }, .. } => write!(f, "wsup[{start}..={end}]"),
            Seminorm::WeightedSup { window: Window::From { start }, .. } => write!(f, "wsup[{start}..]"),
            Seminorm::MinkowskiOfBox { .. } => write!(f, "box"),
            Seminorm::GraphNorm { level, .. } => write!(f, "graph{level}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyRole {
    Generating,
    BoundedSets,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Coordinate seminorms `p_m`, plus their finite maxima when directed.
    Coordinates,
    /// `max_{k in core ∪ S} |x_k|` for finite `S`; generates the coordinate
    /// topology.
    CoordinatesContaining { core: BTreeSet<usize> },
    /// `max_{k <= m} |x_k|`.
    InitialSegments,
    /// A single norm.
    Single { norm: Seminorm },
    /// Graph seminorms `‖x‖_0, ‖x‖_1, ...` of an operator over a base norm.
    Graph { operator: Arc<OperatorRep>, base: Seminorm },
    Explicit { seminorms: Vec<Seminorm> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormFamily {
    pub kind: FamilyKind,
    pub directed: bool,
    pub role: FamilyRole,
}

// subsets of {1..m} that contain m and have at least two elements, in
// lexicographic order of their sorted element lists
fn subsets_with_max(m: usize) -> Vec<BTreeSet<usize>> {
    let mut out = Vec::new();
    let below = m - 1;
    for mask in 1u64..(1u64 << below) {
        let mut s: BTreeSet<usize> = (0..below).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        s.insert(m);
        out.push(s);
    }
    out.sort_by(|a, b| a.iter().cmp(b.iter()));
    out
}

/// Largest level accepted for exponentially large enumerations.
pub const MAX_DIRECTED_LEVEL: usize = 14;

impl SeminormFamily {
    pub fn coordinates(directed: bool) -> SeminormFamily {
        SeminormFamily { kind: FamilyKind::Coordinates, directed, role: FamilyRole::Generating }
    }

    pub fn coordinates_containing<I: IntoIterator<Item = usize>>(core: I) -> SeminormFamily {
        SeminormFamily {
            kind: FamilyKind::CoordinatesContaining { core: core.into_iter().collect() },
            directed: true,
            role: FamilyRole::Generating,
        }
    }

    pub fn initial_segments() -> SeminormFamily {
        SeminormFamily { kind: FamilyKind::InitialSegments, directed: true, role: FamilyRole::Generating }
    }

    pub fn single(norm: Seminorm) -> SeminormFamily {
        SeminormFamily { kind: FamilyKind::Single { norm }, directed: true, role: FamilyRole::Generating }
    }

    pub fn graph(operator: Arc<OperatorRep>, base: Seminorm) -> SeminormFamily {
        SeminormFamily { kind: FamilyKind::Graph { operator, base }, directed: true, role: FamilyRole::Generating }
    }

    pub fn bounded_sets(seminorms: Vec<Seminorm>) -> SeminormFamily {
        SeminormFamily { kind: FamilyKind::Explicit { seminorms }, directed: false, role: FamilyRole::BoundedSets }
    }

    pub fn explicit(seminorms: Vec<Seminorm>, directed: bool) -> SeminormFamily {
        SeminormFamily { kind: FamilyKind::Explicit { seminorms }, directed, role: FamilyRole::Generating }
    }

    /// Deterministic finite list; `enumerate(L)` is a prefix of `enumerate(L+1)`.
    pub fn enumerate(&self, level: usize) -> Vec<Seminorm> {
        match &self.kind {
            FamilyKind::Coordinates => {
                let mut out = Vec::new();
                for m in 1..=level {
                    out.push(Seminorm::coordinate(m));
                    if self.directed && m <= MAX_DIRECTED_LEVEL {
                        out.extend(subsets_with_max(m).into_iter().map(|indices| Seminorm::FiniteMax { indices }));
                    }
                }
                out
            }
            FamilyKind::CoordinatesContaining { core } => {
                let mut out: Vec<Seminorm> = Vec::new();
                if level == 0 {
                    return out;
                }
                let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
                let mut push = |s: BTreeSet<usize>, out: &mut Vec<Seminorm>| {
                    if !s.is_empty() && seen.insert(s.clone()) {
                        out.push(Seminorm::finite_max(s));
                    }
                };
                push(core.clone(), &mut out);
                for m in 1..=level.min(MAX_DIRECTED_LEVEL) {
                    let mut single = core.clone();
                    single.insert(m);
                    push(single, &mut out);
                    for s in subsets_with_max(m) {
                        push(s.union(core).copied().collect(), &mut out);
                    }
                }
                out
            }
            FamilyKind::InitialSegments => (1..=level).map(|m| Seminorm::finite_max(1..=m)).collect(),
            FamilyKind::Single { norm } => {
                if level == 0 {
                    vec![]
                } else {
                    vec![norm.clone()]
                }
            }
            FamilyKind::Graph { operator, base } => {
                (0..level).map(|n| Seminorm::graph(n, operator.clone(), base.clone())).collect()
            }
            FamilyKind::Explicit { seminorms } => seminorms.iter().take(level).cloned().collect(),
        }
    }

    /// Whether every seminorm of the family has a finite index set.
    pub fn is_coordinate_type(&self) -> bool {
        matches!(
            self.kind,
            FamilyKind::Coordinates | FamilyKind::CoordinatesContaining { .. } | FamilyKind::InitialSegments
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Coordinates => "coordinates",
            FamilyKind::CoordinatesContaining { .. } => "coordinates-containing",
            FamilyKind::InitialSegments => "initial-segments",
            FamilyKind::Single { .. } => "single",
            FamilyKind::Graph { .. } => "graph",
            FamilyKind::Explicit { .. } => "explicit",
        }
    }

    pub fn is_single_norm(&self) -> bool {
        matches!(self.kind, FamilyKind::Single { .. })
    }
}

/// The unit-scaled `max` of two box seminorms, when it is again representable.
pub fn max_of(p: &Seminorm, q: &Seminorm) -> Option<Seminorm> {
    let (a, b) = (p.finite_indices()?, q.finite_indices()?);
    let (pb, qb) = (p.as_box()?, q.as_box()?);
    if !pb.has_unit_scale() || !qb.has_unit_scale() {
        return None;
    }
    Some(Seminorm::finite_max(a.into_iter().chain(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{re, Scalar};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(pairs: &[(usize, f64)]) -> SparseVector {
        SparseVector::from_pairs(pairs.iter().map(|&(k, x)| (k, re(x)))).unwrap()
    }

    #[test]
    fn coordinate_and_max() {
        assert_eq!(Seminorm::coordinate(2).eval(&SparseVector::unit(2)).unwrap(), ExtReal::ONE);
        assert_eq!(Seminorm::coordinate(1).eval(&SparseVector::unit(2)).unwrap(), ExtReal::ZERO);
        let p = Seminorm::finite_max([1, 3]);
        assert_eq!(p.eval(&v(&[(1, 2.0), (3, -5.0)])).unwrap(), ExtReal::new(5.0));
    }

    #[test]
    fn minkowski_of_box() {
        let p = Seminorm::minkowski(Weight::self_power(2.0));
        // |x_1| / 4 and |x_2| / 256
        assert_eq!(p.eval(&v(&[(1, 2.0), (2, 256.0)])).unwrap(), ExtReal::ONE);
    }

    #[test]
    fn graph_norm_sums_powers() {
        let t = Arc::new(OperatorRep::diagonal(Weight::power(1.0, 1.0)));
        let g = Seminorm::graph(2, t, Seminorm::sup_norm());
        // e_3: 1 + 3 + 9
        assert_eq!(g.eval(&SparseVector::unit(3)).unwrap(), ExtReal::new(13.0));
        let nested = Seminorm::graph(1, Arc::new(OperatorRep::identity()), g);
        assert!(matches!(nested.eval(&SparseVector::unit(1)), Err(SpectraError::Domain(_))));
    }

    #[test]
    fn enumeration_examples() {
        let f = SeminormFamily::coordinates(false);
        assert_eq!(f.enumerate(2), vec![Seminorm::coordinate(1), Seminorm::coordinate(2)]);
        let d = SeminormFamily::coordinates(true);
        assert_eq!(d.enumerate(2), vec![Seminorm::coordinate(1), Seminorm::coordinate(2), Seminorm::finite_max([1, 2])]);
        assert!(d.enumerate(0).is_empty());
        assert_eq!(d.enumerate(4).len(), 15);
    }

    #[test]
    fn enumeration_is_prefix_monotone() {
        let families = [
            SeminormFamily::coordinates(true),
            SeminormFamily::coordinates(false),
            SeminormFamily::coordinates_containing([2, 5]),
            SeminormFamily::initial_segments(),
            SeminormFamily::single(Seminorm::sup_norm()),
            SeminormFamily::graph(Arc::new(OperatorRep::identity()), Seminorm::sup_norm()),
        ];
        for f in &families {
            for l in 0..7 {
                let a = f.enumerate(l);
                let b = f.enumerate(l + 1);
                assert_eq!(&b[..a.len()], &a[..], "{:?} at level {l}", f.kind);
            }
        }
    }

    #[test]
    fn directed_enumeration_dominates_pairwise_max() {
        let f = SeminormFamily::coordinates(true);
        let list = f.enumerate(4);
        for p in &list {
            for q in &list {
                let m = max_of(p, q).unwrap();
                assert!(list.contains(&m));
            }
        }
    }

    fn all_kinds() -> Vec<Seminorm> {
        let t = Arc::new(OperatorRep::from_matrix(&[vec![re(0.5), re(1.0)], vec![re(-1.0), re(0.25)]]));
        vec![
            Seminorm::coordinate(2),
            Seminorm::finite_max([1, 3, 4]),
            Seminorm::WeightedSup { window: Window::Range { start: 2, end: 5 }, weight: Weight::power(1.0, 1.0) },
            Seminorm::WeightedSup { window: Window::From { start: 1 }, weight: Weight::geometric(1.0, 0.5) },
            Seminorm::minkowski(Weight::self_power(1.0)),
            Seminorm::graph(3, t, Seminorm::sup_norm()),
        ]
    }

    fn random_vector(rng: &mut ChaCha8Rng) -> SparseVector {
        let n = rng.gen_range(0..6);
        SparseVector::from_pairs((0..n).map(|_| {
            (rng.gen_range(1..7), Scalar::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)))
        }))
        .unwrap()
    }

    #[test]
    fn homogeneity_and_subadditivity_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in all_kinds() {
            for _ in 0..1000 {
                let x = random_vector(&mut rng);
                let y = random_vector(&mut rng);
                let c = Scalar::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
                let px = p.eval(&x).unwrap();
                let pcx = p.eval(&x.scale(c)).unwrap();
                assert!(pcx.rel_diff(ExtReal::new(c.norm()) * px) <= 1e-12, "{p}");
                let sum = p.eval(&x.add(&y)).unwrap();
                assert!(sum.le_rel(px + p.eval(&y).unwrap(), 1e-12), "{p}");
            }
        }
    }

    proptest! {
        #[test]
        fn sup_norm_is_max_modulus(xs in proptest::collection::vec(-1e3f64..1e3, 1..12)) {
            let x = SparseVector::from_reals(&xs);
            let m = xs.iter().map(|v| v.abs()).fold(0.0, f64::max);
            prop_assert_eq!(Seminorm::sup_norm().eval(&x).unwrap().to_f64(), m);
        }
    }
}
