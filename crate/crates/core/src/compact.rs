//! Spectral radius against the largest spectral value for compact operators
//! given as diagonals tending to zero or finite-rank maps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_boundedness, BoundednessClass, Verdict};
use crate::error::{Result, SpectraError};
use crate::num::{re, Bracket, ExtReal, Scalar};
use crate::operator::OperatorRep;
use crate::radii::{estimate_all, RadiusConfig, RadiusEstimate, RadiusKind};
use crate::space::SpaceModel;
use crate::weight::{Limit, Weight};

pub const MAX_TRUNCATION: usize = 512;

/// Slack added to bracket widths when comparing the radius with `|sigma|`.
pub const EQUALITY_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CompactKind {
    /// `d(k) -> 0`.
    Diagonal(Weight),
    /// Reads and writes only indices up to `support`.
    FiniteRank { support: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactModel {
    pub operator: OperatorRep,
    pub kind: CompactKind,
    /// Size of the leading block used for eigenvalues.
    pub dimension: usize,
}

impl CompactModel {
    /// Accepts diagonals whose weight provably tends to zero and operators
    /// with finite read and output support. A finite-rank block is widened to
    /// cover its support.
    pub fn new(operator: OperatorRep, dimension: usize) -> Result<CompactModel> {
        if dimension == 0 || dimension > MAX_TRUNCATION {
            return Err(SpectraError::Invalid(format!("truncation dimension {dimension} outside 1..={MAX_TRUNCATION}")));
        }
        if let Some(w) = operator.as_diagonal() {
            if !matches!(w.limit(), Limit::Finite(c) if c == re(0.0)) {
                return Err(SpectraError::Invalid("diagonal weights must tend to zero".into()));
            }
            if w.sup_abs_from(dimension + 1).upper.is_infinite() {
                return Err(SpectraError::Invalid("diagonal tail is unbounded".into()));
            }
            return Ok(CompactModel { kind: CompactKind::Diagonal(w), operator, dimension });
        }
        match (operator.read_support(), operator.output_support()) {
            (Some(r), Some(o)) => {
                let support = r.iter().chain(o.iter()).copied().max().unwrap_or(1);
                if support > MAX_TRUNCATION {
                    return Err(SpectraError::Invalid(format!("support {support} exceeds {MAX_TRUNCATION}")));
                }
                Ok(CompactModel { operator, kind: CompactKind::FiniteRank { support }, dimension: dimension.max(support) })
            }
            _ => Err(SpectraError::Invalid("not a compact-certifiable operator".into())),
        }
    }

    pub fn with_dimension(&self, dimension: usize) -> Result<CompactModel> {
        CompactModel::new(self.operator.clone(), dimension)
    }
}

/// Leading `d x d` block `a_{ji}` of the matrix.
pub fn truncation_matrix(t: &OperatorRep, d: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(d, d);
    for i in 1..=d {
        let col = t.apply(&crate::vector::SparseVector::unit(i));
        for (j, z) in col.iter() {
            if j <= d {
                m[(j - 1, i - 1)] = z;
            }
        }
    }
    m
}

/// Eigenvalues of a square complex matrix from its Schur form.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<Scalar> {
    if m.nrows() == 0 {
        return vec![];
    }
    let (_, t) = m.clone().schur().unpack();
    t.diagonal().iter().copied().collect()
}

pub fn spectrum_of_truncation(model: &CompactModel) -> Vec<Scalar> {
    match &model.kind {
        CompactKind::Diagonal(w) => (1..=model.dimension).map(|k| w.value(k)).collect(),
        CompactKind::FiniteRank { .. } => eigenvalues(&truncation_matrix(&model.operator, model.dimension)),
    }
}

/// `max |sigma(K)|`, with `0` always in the spectrum. For diagonals the tail
/// beyond the block contributes `sup_{k>D} |d(k)|` to the upper side.
pub fn spectral_abs(model: &CompactModel) -> Bracket {
    let head = spectrum_of_truncation(model).iter().map(|z| z.norm()).fold(0.0, f64::max);
    match &model.kind {
        CompactKind::Diagonal(w) => {
            let tail = w.sup_abs_from(model.dimension + 1).upper;
            Bracket::new(ExtReal::new(head), ExtReal::new(head).max(tail))
        }
        CompactKind::FiniteRank { .. } => Bracket::exact(ExtReal::new(head)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactRadiusReport {
    pub radii: Vec<RadiusEstimate>,
    /// The collapsed radius, read from `r_nb`.
    pub radius: Bracket,
    pub spectral_abs: Bracket,
    /// `(D, max |eig|)` along growing truncations.
    pub truncations: Vec<(usize, f64)>,
    /// Every radius agrees with `r_nb` up to the bracket widths.
    pub collapsed: bool,
    pub difference: f64,
    pub tolerance: f64,
    pub bb_bounded: Verdict,
    pub holds: bool,
}

fn truncation_sizes(max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(4usize), |d| Some(d * 2)).take_while(|&d| d < max).collect();
    out.push(max);
    out
}

pub fn compact_radius_equality(model: &CompactModel, space: &SpaceModel, cfg: &RadiusConfig) -> Result<CompactRadiusReport> {
    let radii = estimate_all(&model.operator, space, cfg)?;
    let nb = radii.iter().find(|r| r.kind == RadiusKind::NB).unwrap().bracket();
    let r = nb.midpoint().to_f64();
    let collapsed = radii.iter().all(|e| {
        let b = e.bracket();
        let slack = b.abs_width() + nb.abs_width() + EQUALITY_TOLERANCE;
        (b.midpoint().to_f64() - r).abs() <= slack
    });
    let sizes = match model.kind {
        CompactKind::Diagonal(_) => truncation_sizes(model.dimension),
        CompactKind::FiniteRank { support } => truncation_sizes(model.dimension).into_iter().filter(|&d| d >= support).collect(),
    };
    let truncations = sizes
        .into_iter()
        .map(|d| {
            let m = model.with_dimension(d)?;
            Ok((d, spectrum_of_truncation(&m).iter().map(|z| z.norm()).fold(0.0, f64::max)))
        })
        .collect::<Result<Vec<_>>>()?;
    let sigma = spectral_abs(model);
    let difference = (r - sigma.midpoint().to_f64()).abs();
    let tolerance = nb.abs_width() + sigma.abs_width() + EQUALITY_TOLERANCE;
    let bb_bounded = classify_boundedness(&model.operator, space)?.verdict(BoundednessClass::Bb);
    let holds = collapsed && difference <= tolerance && bb_bounded == Verdict::Yes;
    Ok(CompactRadiusReport { radii, radius: nb, spectral_abs: sigma, truncations, collapsed, difference, tolerance, bb_bounded, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::SparseVector;
    use rand::{Rng, SeedableRng};

    /// Characteristic polynomial coefficients `c_0 = 1, c_1, ..., c_n` of
    /// `det(zI - A) = sum c_k z^(n-k)` by Faddeev-LeVerrier.
    fn char_poly(a: &DMatrix<Complex64>) -> Vec<Complex64> {
        let n = a.nrows();
        let mut c = vec![Complex64::new(1.0, 0.0)];
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for k in 1..=n {
            m = a * &m + DMatrix::identity(n, n) * c[k - 1];
            let am = a * &m;
            c.push(-am.trace() / k as f64);
        }
        c
    }

    /// Durand-Kerner iteration on a monic polynomial.
    fn roots(c: &[Complex64]) -> Vec<Complex64> {
        let n = c.len() - 1;
        let eval = |z: Complex64| c.iter().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck);
        let seed = Complex64::new(0.4, 0.9);
        let scale = 1.0 + c.iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);
        let mut z: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32) * scale).collect();
        for _ in 0..2000 {
            let mut delta: f64 = 0.0;
            for i in 0..n {
                let mut den = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        den *= z[i] - z[j];
                    }
                }
                let step = eval(z[i]) / den;
                z[i] -= step;
                delta = delta.max(step.norm());
            }
            if delta < 1e-15 {
                break;
            }
        }
        z
    }

    /// Greedy matching distance between two multisets of points.
    fn matched(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        let mut left: Vec<Complex64> = b.to_vec();
        a.iter().all(|x| {
            let (i, d) = left.iter().enumerate().map(|(i, y)| (i, (x - y).norm())).fold((0, f64::INFINITY), |m, v| if v.1 < m.1 { v } else { m });
            if d <= tol {
                left.remove(i);
                true
            } else {
                false
            }
        })
    }

    #[test]
    fn truncation_spectra() {
        let m = CompactModel::new(OperatorRep::diagonal(Weight::geometric(1.0, 0.5)), 8).unwrap();
        let s = spectrum_of_truncation(&m);
        assert_eq!(s, (1..=8).map(|k| re(0.5f64.powi(k))).collect::<Vec<_>>());
        let k = OperatorRep::scale(re(3.0), OperatorRep::rank_one(SparseVector::unit(1), SparseVector::unit(1)));
        let m = CompactModel::new(k, 4).unwrap();
        let mut s: Vec<f64> = spectrum_of_truncation(&m).iter().map(|z| z.norm()).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        assert!((s[0] - 3.0).abs() < 1e-12 && s[1..].iter().all(|v| v.abs() < 1e-12));
        assert!(CompactModel::new(OperatorRep::identity(), 8).is_err());
        assert!(CompactModel::new(OperatorRep::left_shift(), 8).is_err());
    }

    #[test]
    fn schur_matches_characteristic_roots() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = DMatrix::from_fn(5, 5, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let schur = eigenvalues(&a);
            let poly = roots(&char_poly(&a));
            assert!(matched(&schur, &poly, 1e-8), "{schur:?} vs {poly:?}");
        }
    }

    #[test]
    fn compact_examples() {
        let cfg = RadiusConfig::default();
        let space = SpaceModel::bounded_normed();
        let m = CompactModel::new(OperatorRep::diagonal(Weight::geometric(1.0, 0.5)), 64).unwrap();
        let r = compact_radius_equality(&m, &space, &cfg).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.radius.contains(ExtReal::new(0.5), 1e-9));
        let m = CompactModel::new(OperatorRep::diagonal(Weight::power(1.0, -1.0)), 64).unwrap();
        let r = compact_radius_equality(&m, &space, &cfg).unwrap();
        assert!(r.holds && r.radius.contains(ExtReal::ONE, 1e-9), "{r:?}");
        let nil = OperatorRep::rank_one(SparseVector::unit(1), SparseVector::unit(2));
        let m = CompactModel::new(nil.clone(), 4).unwrap();
        let r = compact_radius_equality(&m, &space, &cfg).unwrap();
        assert!(r.holds && r.spectral_abs == Bracket::exact(ExtReal::ZERO), "{r:?}");
        let rl = r.radii.iter().find(|e| e.kind == RadiusKind::L).unwrap();
        assert_eq!(rl.upper, ExtReal::ZERO);
    }

    #[test]
    fn random_finite_rank_radii_match_eigenvalues() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let space = SpaceModel::bounded_normed();
        for _ in 0..5 {
            let rank = rng.gen_range(1..=3);
            let dim = rng.gen_range(3..=6);
            let vec = |rng: &mut rand_chacha::ChaCha8Rng| {
                SparseVector::from_pairs((1..=dim).map(|k| (k, Scalar::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))).unwrap()
            };
            let ys: Vec<SparseVector> = (0..rank).map(|_| vec(&mut rng)).collect();
            let fs: Vec<SparseVector> = (0..rank).map(|_| vec(&mut rng)).collect();
            let k = OperatorRep::FiniteRank { functionals: fs, range: ys };
            let m = CompactModel::new(k, dim).unwrap();
            let r = compact_radius_equality(&m, &space, &RadiusConfig::default()).unwrap();
            assert!(r.holds, "{r:?}");
        }
    }
}
