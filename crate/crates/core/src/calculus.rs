//! Operator seminorms `p(T)` and mixed seminorms `m_{p,q}(S)`.
//!
//! For box seminorms `p(x) = sup_{i in S_p} a_i |x_i|` and
//! `q(y) = sup_{j in S_q} b_j |y_j|` the mixed seminorm is a row formula:
//! `m_{p,q}(S) = sup_{j in S_q} b_j sum_i |s_ji| / a_i`, where a coordinate
//! read by a row but not controlled by `p` (`a_i = 0`) makes the value
//! infinite. The sampling oracle below is an independent lower bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::num::{re, ExtReal, Scalar};
use crate::operator::OperatorRep;
use crate::seminorm::{BoxView, IndexSet, Seminorm};
use crate::vector::{SparseVector, WideVector};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certainty {
    Exact,
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedSeminormValue {
    pub value: ExtReal,
    pub certainty: Certainty,
}

impl MixedSeminormValue {
    fn exact(value: ExtReal) -> MixedSeminormValue {
        MixedSeminormValue { value, certainty: Certainty::Exact }
    }

    pub fn is_exact(&self) -> bool {
        self.certainty == Certainty::Exact
    }
}

/// Rows scanned when an infinite index set has no closed form.
const ROW_SCAN: usize = 4096;

/// Escape bound past which the oracle reports an infinite supremum.
pub const ESCAPE: f64 = 1e12;

/// `sum_i |row_i| / a_i` for the box `p`.
pub fn row_value(row: &WideVector, p: &BoxView) -> ExtReal {
    row.iter().map(|(i, z)| z.abs() * p.omega(i).recip()).sum()
}

pub fn mixed_seminorm(s: &OperatorRep, p: &Seminorm, q: &Seminorm) -> Result<MixedSeminormValue> {
    match (p.as_box(), q.as_box()) {
        (Some(pb), Some(qb)) => Ok(box_mixed(s, &pb, &qb)),
        _ => {
            // graph norms: probe-based lower bound
            let v = sampled_sup_oracle(s, p, q, 256, 0x5eed, Constraint::Ball)?;
            Ok(MixedSeminormValue { value: v, certainty: Certainty::LowerBound })
        }
    }
}

pub fn operator_seminorm(t: &OperatorRep, p: &Seminorm) -> Result<MixedSeminormValue> {
    mixed_seminorm(t, p, p)
}

fn finite_rows(s: &OperatorRep, p: &BoxView, q: &BoxView, rows: impl IntoIterator<Item = usize>) -> ExtReal {
    let mut best = ExtReal::ZERO;
    for j in rows {
        let w = q.omega(j);
        if w.is_zero() {
            continue;
        }
        best = best.max(w * row_value(&s.row(j), p));
        if best.is_infinite() {
            break;
        }
    }
    best
}

fn box_mixed(s: &OperatorRep, p: &BoxView, q: &BoxView) -> MixedSeminormValue {
    if let Some(js) = q.indices.elements() {
        return MixedSeminormValue::exact(finite_rows(s, p, q, js));
    }
    if let Some(out) = s.output_support() {
        return MixedSeminormValue::exact(finite_rows(s, p, q, out.into_iter().filter(|&j| q.indices.contains(j))));
    }
    let s = s.normalize();
    if let OperatorRep::Scale { factor, operator } = &s {
        let inner = box_mixed(operator, p, q);
        return MixedSeminormValue { value: ExtReal::new(factor.norm()) * inner.value, ..inner };
    }
    if let Some(v) = closed_form_infinite(&s, p, q) {
        return MixedSeminormValue::exact(v);
    }
    let start = q.indices.start();
    let v = finite_rows(&s, p, q, start..start + ROW_SCAN);
    if v.is_infinite() {
        return MixedSeminormValue::exact(v);
    }
    MixedSeminormValue { value: v, certainty: Certainty::LowerBound }
}

// Diagonals and single shifts against an unbounded interval `q`.
fn closed_form_infinite(s: &OperatorRep, p: &BoxView, q: &BoxView) -> Option<ExtReal> {
    let IndexSet::Interval { start: qs, end: None } = q.indices else { return None };
    let (offset, w) = match s {
        OperatorRep::Diagonal { weight } => (0i64, weight),
        OperatorRep::WeightedShift { offset, weight } => (*offset, weight),
        _ => return None,
    };
    // row j reads i = j + offset
    let first_i = (qs as i64 + offset).max(1) as usize;
    match &p.indices {
        IndexSet::Interval { start: ps, end: None } => {
            if (first_i..*ps).any(|i| w.value(i) != re(0.0)) {
                return Some(ExtReal::INFINITY);
            }
            let from_i = first_i.max(*ps);
            let tail = if offset == 0 {
                Weight::product(vec![q.omega_weight().ok()?, w.clone(), p.inverse_omega_weight().ok()?])
                    .sup_abs_from(from_i)
            } else if q.has_unit_scale() && p.has_unit_scale() {
                w.sup_abs_from(from_i)
            } else {
                return None;
            };
            tail.is_exact().then_some(tail.upper)
        }
        _ => {
            // p controls finitely many coordinates; any nonzero read outside is infinite
            match w.eventually_zero() {
                Some(false) => Some(ExtReal::INFINITY),
                _ => None,
            }
        }
    }
}

/// Constraint set for the sampling oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// `p(x) = 1`.
    Sphere,
    /// `p(x) <= 1`.
    Ball,
}

fn random_phase(rng: &mut ChaCha8Rng) -> Scalar {
    Scalar::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Lower bound for `sup_{p(x) <= 1} q(Sx)` from random and targeted probes.
///
/// Targeted probes put each coordinate at its bound with the phase that
/// aligns it with a row of `S`; coordinates that `p` does not control are
/// grown until `q(Sx)` passes [`ESCAPE`], which reports `INFINITY`.
pub fn sampled_sup_oracle(
    s: &OperatorRep,
    p: &Seminorm,
    q: &Seminorm,
    trials: usize,
    seed: u64,
    constraint: Constraint,
) -> Result<ExtReal> {
    assert!(trials >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = probe_window(s, p, q);
    let mut best = ExtReal::ZERO;
    let escape = ExtReal::new(ESCAPE);
    let consider = |x: &SparseVector, best: &mut ExtReal| -> Result<bool> {
        let px = p.eval(x)?;
        if px.is_zero() {
            // unconstrained direction: escalate
            let mut t = 1.0;
            for _ in 0..16 {
                let v = q.eval_wide(&s.apply_wide(&x.scale(Scalar::new(t, 0.0)).to_wide()))?;
                if v > escape {
                    *best = ExtReal::INFINITY;
                    return Ok(true);
                }
                if v.is_zero() {
                    break;
                }
                t *= 10.0;
            }
            return Ok(false);
        }
        if px.is_infinite() {
            return Ok(false);
        }
        // ball probes keep their size when already inside
        let v = q.eval_wide(&s.apply_wide(&x.to_wide()))?;
        let v = match constraint {
            Constraint::Ball if px <= ExtReal::ONE => v,
            _ => v / px,
        };
        if v > escape {
            *best = ExtReal::INFINITY;
            return Ok(true);
        }
        *best = (*best).max(v);
        Ok(false)
    };

    let mut probes: Vec<SparseVector> = Vec::new();
    // single coordinates
    for &i in &window {
        probes.push(SparseVector::unit(i));
    }
    // aligned extreme points of the box, one per row of q∘S
    if let Some(pb) = p.as_box() {
        let rows: Vec<usize> = match q.finite_indices() {
            Some(js) => js,
            None => window.clone(),
        };
        for j in rows {
            let row = s.row(j);
            let mut x = SparseVector::zero();
            for (i, a) in row.iter() {
                let om = pb.omega(i);
                if om.is_zero() || om.is_infinite() {
                    continue;
                }
                let a = a.to_complex();
                if a.norm() > 0.0 && a.norm().is_finite() {
                    x.add_at(i, (a.conj() / a.norm()) / om.to_f64());
                }
            }
            if !x.is_empty() {
                probes.push(x);
            }
        }
    }
    for _ in 0..trials {
        let n = rng.gen_range(1..=window.len().min(6));
        let mut x = SparseVector::zero();
        for _ in 0..n {
            let i = window[rng.gen_range(0..window.len())];
            x.add_at(i, random_phase(&mut rng) * rng.gen_range(0.1..1.0));
        }
        probes.push(x);
    }
    for x in &probes {
        if consider(x, &mut best)? {
            break;
        }
    }
    Ok(best)
}

fn probe_window(s: &OperatorRep, p: &Seminorm, q: &Seminorm) -> Vec<usize> {
    let mut top = 8usize;
    for idx in [p.finite_indices(), q.finite_indices()].into_iter().flatten() {
        top = top.max(idx.into_iter().max().unwrap_or(0));
    }
    if let Some(js) = q.finite_indices() {
        for j in js {
            if let Some(m) = s.row(j).max_index() {
                top = top.max(m);
            }
        }
    }
    (1..=top + 2).collect()
}
