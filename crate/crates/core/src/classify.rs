//! Decision rules for the boundedness classes nb, nn, continuous and bb,
//! and the rank bound for operators factoring through finitely many
//! functionals.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::calculus::operator_seminorm;
use crate::error::{Result, SpectraError};
use crate::num::{re, ExtReal, Scalar};
use crate::operator::{OperatorRep, Triangularity};
use crate::seminorm::Seminorm;
use crate::space::SpaceModel;
use crate::vector::SparseVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundednessClass {
    Nb,
    Nn,
    Continuous,
    Bb,
}

impl BoundednessClass {
    /// Strongest first.
    pub const CHAIN: [BoundednessClass; 4] =
        [BoundednessClass::Nb, BoundednessClass::Nn, BoundednessClass::Continuous, BoundednessClass::Bb];
}

impl fmt::Display for BoundednessClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundednessClass::Nb => "nb-bounded",
            BoundednessClass::Nn => "nn-bounded",
            BoundednessClass::Continuous => "continuous",
            BoundednessClass::Bb => "bb-bounded",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub verdict: Verdict,
    /// Certificate for Yes, counterexample for No.
    pub witness: String,
}

impl ClassVerdict {
    fn yes(w: impl Into<String>) -> ClassVerdict {
        ClassVerdict { verdict: Verdict::Yes, witness: w.into() }
    }

    fn no(w: impl Into<String>) -> ClassVerdict {
        ClassVerdict { verdict: Verdict::No, witness: w.into() }
    }

    fn unknown() -> ClassVerdict {
        ClassVerdict { verdict: Verdict::Unknown, witness: String::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub nb: ClassVerdict,
    pub nn: ClassVerdict,
    pub continuous: ClassVerdict,
    pub bb: ClassVerdict,
}

impl ClassificationReport {
    pub fn get(&self, c: BoundednessClass) -> &ClassVerdict {
        match c {
            BoundednessClass::Nb => &self.nb,
            BoundednessClass::Nn => &self.nn,
            BoundednessClass::Continuous => &self.continuous,
            BoundednessClass::Bb => &self.bb,
        }
    }

    fn get_mut(&mut self, c: BoundednessClass) -> &mut ClassVerdict {
        match c {
            BoundednessClass::Nb => &mut self.nb,
            BoundednessClass::Nn => &mut self.nn,
            BoundednessClass::Continuous => &mut self.continuous,
            BoundednessClass::Bb => &mut self.bb,
        }
    }

    pub fn verdict(&self, c: BoundednessClass) -> Verdict {
        self.get(c).verdict
    }

    /// Fills Unknowns implied by the chain and rejects a Yes above a No.
    fn close_under_hierarchy(mut self) -> Result<ClassificationReport> {
        let chain = BoundednessClass::CHAIN;
        for (i, &a) in chain.iter().enumerate() {
            for &b in &chain[i + 1..] {
                match (self.verdict(a), self.verdict(b)) {
                    (Verdict::Yes, Verdict::No) => {
                        return Err(SpectraError::Hierarchy(format!("{a} but not {b}")));
                    }
                    (Verdict::Yes, Verdict::Unknown) => *self.get_mut(b) = ClassVerdict::yes(format!("implied: {a}")),
                    (Verdict::Unknown, Verdict::No) => *self.get_mut(a) = ClassVerdict::no(format!("implied: not {b}")),
                    _ => {}
                }
            }
        }
        Ok(self)
    }
}

/// Rows scanned when looking for a coordinate outside a cylinder.
const WITNESS_ROWS: usize = 256;

// a row reading a coordinate beyond `level`
fn read_outside(t: &OperatorRep, level: usize) -> Option<(usize, usize)> {
    (1..=WITNESS_ROWS).find_map(|j| t.row(j).support().find(|&i| i > level).map(|i| (j, i)))
}

/// Upper bound for an operator norm from exact pieces and the triangle and
/// product inequalities; infinite when some piece has no exact value.
pub fn norm_upper(t: &OperatorRep, norm: &Seminorm) -> Result<ExtReal> {
    Ok(match t {
        OperatorRep::Sum { terms } => {
            let mut s = ExtReal::ZERO;
            for u in terms {
                s = s + norm_upper(u, norm)?;
            }
            s
        }
        OperatorRep::Product { factors } => {
            let mut s = ExtReal::ONE;
            for u in factors {
                s = s * norm_upper(u, norm)?;
            }
            s
        }
        OperatorRep::Scale { factor, operator } => ExtReal::new(factor.norm()) * norm_upper(operator, norm)?,
        OperatorRep::Banded { bands } => {
            let mut s = ExtReal::ZERO;
            for b in bands {
                s = s + norm_upper(&OperatorRep::weighted_shift(b.offset, b.weight.clone()), norm)?;
            }
            s
        }
        _ => {
            let v = operator_seminorm(t, norm)?;
            if v.is_exact() {
                v.value
            } else {
                ExtReal::INFINITY
            }
        }
    })
}

// parts that leave every initial segment {1..m} with m >= the returned bound invariant
fn initial_segment_bound(t: &OperatorRep) -> Option<usize> {
    if t.triangularity() <= Triangularity::Lower {
        return Some(1);
    }
    if let Some(r) = t.read_support() {
        return Some(r.into_iter().max().unwrap_or(1));
    }
    match t {
        OperatorRep::Sum { terms } => terms.iter().map(initial_segment_bound).try_fold(1, |m, b| Some(m.max(b?))),
        OperatorRep::Scale { operator, .. } => initial_segment_bound(operator),
        _ => None,
    }
}

fn classify_coordinatewise(t: &OperatorRep, space: &SpaceModel, level: usize) -> ClassificationReport {
    // every representable operator has finitely supported rows
    let continuous = ClassVerdict::yes("every output coordinate reads finitely many input coordinates");
    let bb = ClassVerdict::yes("continuous operators map bounded sets to bounded sets");
    let nb = match t.read_support() {
        Some(r) => ClassVerdict::yes(format!(
            "the image of the cylinder |x_k| < 1 on {:?} is bounded",
            r.iter().copied().collect::<Vec<_>>()
        )),
        None if t.reads_infinitely_many() == Some(true) => match read_outside(t, level) {
            Some((j, i)) => ClassVerdict::no(format!(
                "row {j} reads coordinate {i}; scaling e_{i} inside any cylinder on 1..={level} makes coordinate {j} unbounded"
            )),
            None => ClassVerdict::no("infinitely many coordinates are read"),
        },
        None => ClassVerdict::unknown(),
    };
    let nn = if nb.verdict == Verdict::Yes {
        ClassVerdict::yes("nb-bounded")
    } else if t.as_diagonal().is_some() {
        ClassVerdict::yes("every coordinate seminorm p_k satisfies p_k(Tx) <= |d(k)| p_k(x)")
    } else if let Some(m) = initial_segment_bound(t) {
        ClassVerdict::yes(format!("the initial segments max_{{k <= m}} |x_k|, m >= {m}, form an invariant base"))
    } else if !space.locally_bounded && t.as_escaping_shift().is_some() {
        ClassVerdict::no(
            "a base neighborhood V with T(V) in cV would contain T^{-n}(c^n V) for all n; \
             the shift moves every coordinate down, so V absorbs all coordinates and is bounded, \
             which is impossible in a space that is not locally bounded",
        )
    } else {
        ClassVerdict::unknown()
    };
    ClassificationReport { nb, nn, continuous, bb }
}

fn classify_normed(t: &OperatorRep, norm: &Seminorm) -> Result<ClassificationReport> {
    let upper = norm_upper(t, norm)?;
    let lower = operator_seminorm(t, norm)?.value;
    let v = if upper.is_finite() {
        ClassVerdict::yes(format!("operator norm at most {upper}"))
    } else if lower.is_infinite() {
        ClassVerdict::no("operator norm is infinite")
    } else {
        ClassVerdict::unknown()
    };
    // in a locally bounded space the four classes coincide
    Ok(ClassificationReport { nb: v.clone(), nn: v.clone(), continuous: v.clone(), bb: v })
}

pub fn classify_boundedness(t: &OperatorRep, space: &SpaceModel) -> Result<ClassificationReport> {
    classify_boundedness_at(t, space, 8)
}

/// As [`classify_boundedness`], searching witnesses beyond coordinate `level`.
pub fn classify_boundedness_at(t: &OperatorRep, space: &SpaceModel, level: usize) -> Result<ClassificationReport> {
    let report = if space.is_coordinatewise() {
        classify_coordinatewise(t, space, level)
    } else if let (true, Some(norm)) = (space.is_normed(), space.norm()) {
        classify_normed(t, norm)?
    } else {
        ClassificationReport {
            nb: ClassVerdict::unknown(),
            nn: ClassVerdict::unknown(),
            continuous: ClassVerdict::unknown(),
            bb: ClassVerdict::unknown(),
        }
    };
    report.close_under_hierarchy()
}

/// Reduced row echelon form in place; returns the pivot columns. Entries
/// below `tol` times the largest entry count as zero.
pub fn rref(rows: &mut [Vec<Scalar>], tol: f64) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let scale = rows.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let eps = tol * scale.max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(best) = (r..rows.len()).max_by(|&a, &b| rows[a][c].norm().total_cmp(&rows[b][c].norm())) else {
            break;
        };
        if rows[best][c].norm() <= eps {
            for row in rows[r..].iter_mut() {
                row[c] = re(0.0);
            }
            continue;
        }
        rows.swap(r, best);
        let p = rows[r][c];
        for v in rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k != r {
                let f = row[c];
                if f != re(0.0) {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteRankReport {
    /// Number of functionals, the bound on the rank.
    pub bound: usize,
    pub probe_dimension: usize,
    pub verified_rank: usize,
    /// Largest `|T e_k - phi(pi(e_k))|` over the probes, relative to `|T|`.
    pub factorization_residual: f64,
    pub holds: bool,
}

fn column(x: &SparseVector, rows: &[usize]) -> Vec<Scalar> {
    rows.iter().map(|&j| x.get(j)).collect()
}

/// Factors `T` through `pi = (f_1, ..., f_n)` on the span of `e_1..e_D` and
/// verifies that the rank of `T` there is at most `n`.
pub fn finite_rank_bound(fs: &[SparseVector], t: &OperatorRep, d: usize) -> Result<FiniteRankReport> {
    let n = fs.len();
    let images: Vec<SparseVector> = (1..=d).map(|k| t.try_apply(&SparseVector::unit(k))).collect::<Result<_>>()?;
    let t_scale = images.iter().map(|y| y.sup_abs()).fold(0.0, f64::max);
    // pi as an n x D matrix, reduced
    let mut f: Vec<Vec<Scalar>> = fs.iter().map(|fi| (1..=d).map(|k| fi.get(k)).collect()).collect();
    let pivots = rref(&mut f, RANK_TOLERANCE);
    let pivot_set: BTreeSet<usize> = pivots.iter().copied().collect();
    // joint kernel basis: one vector per free column
    for c in (0..d).filter(|c| !pivot_set.contains(c)) {
        let mut x = SparseVector::unit(c + 1);
        for (r, &pc) in pivots.iter().enumerate() {
            x.add_at(pc + 1, -f[r][c]);
        }
        let tx = t.try_apply(&x)?;
        if tx.sup_abs() > RANK_TOLERANCE * t_scale.max(1.0) {
            return Err(SpectraError::PreconditionFailed {
                probe: x,
                reason: "every functional vanishes but T does not".into(),
            });
        }
    }
    // phi on range(pi): pi(e_p) for pivot columns p span range(pi) and T e_p = phi(pi(e_p))
    let fk = |k: usize| -> Vec<Scalar> { fs.iter().map(|fi| fi.get(k)).collect() };
    let basis: Vec<Vec<Scalar>> = pivots.iter().map(|&p| fk(p + 1)).collect();
    let out_rows: Vec<usize> = images.iter().flat_map(|y| y.support()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut residual: f64 = 0.0;
    for (k, y) in images.iter().enumerate() {
        // coordinates of pi(e_k) in the pivot basis, by least squares
        let coords = solve_in_span(&basis, &fk(k + 1));
        let mut phi = vec![re(0.0); out_rows.len()];
        for (a, &p) in coords.iter().zip(&pivots) {
            for (o, v) in phi.iter_mut().zip(column(&images[p], &out_rows)) {
                *o += a * v;
            }
        }
        for (o, v) in phi.iter().zip(column(y, &out_rows)) {
            residual = residual.max((o - v).norm() / t_scale.max(f64::MIN_POSITIVE));
        }
    }
    let mut m: Vec<Vec<Scalar>> = images.iter().map(|y| column(y, &out_rows)).collect();
    let rank = if out_rows.is_empty() { 0 } else { rref(&mut m, RANK_TOLERANCE).len() };
    Ok(FiniteRankReport {
        bound: n,
        probe_dimension: d,
        verified_rank: rank,
        factorization_residual: residual,
        holds: rank <= n && residual <= 1e-8,
    })
}

// coefficients a with sum_i a_i basis_i = v, for linearly independent basis vectors
fn solve_in_span(basis: &[Vec<Scalar>], v: &[Scalar]) -> Vec<Scalar> {
    use nalgebra::{Complex, DMatrix, DVector};
    if basis.is_empty() {
        return vec![];
    }
    let m = DMatrix::from_fn(v.len(), basis.len(), |i, j| Complex::new(basis[j][i].re, basis[j][i].im));
    let rhs = DVector::from_iterator(v.len(), v.iter().map(|z| Complex::new(z.re, z.im)));
    let svd = m.svd(true, true);
    let sol = svd.solve(&rhs, 1e-12).expect("svd with vectors");
    sol.iter().map(|z| Scalar::new(z.re, z.im)).collect()
}
