//! Brackets for `limsup t_n^(1/n)` from finitely many terms.
//!
//! Everything runs on `l_n = log2 t_n`. Three independent characterizations
//! are exposed: the root itself ([`limsup_root`]), the smallest `nu` with
//! `t_n / nu^n -> 0` ([`vanishing_threshold`]) and the smallest `nu` with
//! `t_n / nu^n` bounded ([`bounded_threshold`]).

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SpectraError};
use crate::num::{Bracket, ExtReal};

pub const MIN_TERMS: usize = 8;

/// Relative slack added to both ends of a finite bracket.
const SLACK: f64 = 1e-12;

/// Fits with a residual below this (in log2 units) are treated as exact.
const SMOOTH_RESIDUAL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RootOptions {
    /// The sequence satisfies `t_{m+n} <= t_m t_n`, so `inf t_n^(1/n)` is the
    /// limit and becomes the upper end of the bracket.
    pub submultiplicative: bool,
}

struct Fit {
    coef: Vec<f64>,
    /// Max absolute residual.
    rmax: f64,
    /// L1 norms of the pseudo-inverse rows: the change of each coefficient
    /// per unit uniform perturbation of the data.
    sens: Vec<f64>,
}

fn lstsq(basis: &[fn(f64) -> f64], pts: &[(f64, f64)]) -> Option<Fit> {
    let m = pts.len();
    let k = basis.len();
    if m < k + 1 {
        return None;
    }
    let mut a = DMatrix::<f64>::zeros(m, k);
    for (i, &(x, _)) in pts.iter().enumerate() {
        for (j, f) in basis.iter().enumerate() {
            a[(i, j)] = f(x);
        }
    }
    // unit max-norm columns
    let scales: Vec<f64> = (0..k).map(|j| a.column(j).amax().max(f64::MIN_POSITIVE)).collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let y = DVector::from_iterator(m, pts.iter().map(|p| p.1));
    let svd = a.clone().svd(true, true);
    let pinv = svd.pseudo_inverse(1e-12).ok()?;
    let c = &pinv * &y;
    let r = &a * &c - &y;
    let coef: Vec<f64> = (0..k).map(|j| c[j] / scales[j]).collect();
    let sens = (0..k).map(|j| pinv.row(j).iter().map(|v| v.abs()).sum::<f64>() / scales[j]).collect();
    Some(Fit { coef, rmax: r.amax(), sens })
}

const B_LIN: [fn(f64) -> f64; 2] = [|_| 1.0, |n| n];
const B_LOG: [fn(f64) -> f64; 3] = [|_| 1.0, |n| n, |n| n.ln()];
const B_SUPER: [fn(f64) -> f64; 4] = [|_| 1.0, |n| n, |n| n.ln(), |n| n * n.ln()];

fn logs(t: &[ExtReal]) -> Vec<f64> {
    t.iter().map(|v| v.log2()).collect()
}

// centered running max with half-width h
fn envelope(l: &[f64], h: usize) -> Vec<f64> {
    (0..l.len())
        .map(|i| l[i.saturating_sub(h)..(i + h + 1).min(l.len())].iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

// finite points (n, l_n) with n >= from; n counts from 1
fn points(l: &[f64], from: usize) -> Vec<(f64, f64)> {
    l.iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64, v))
        .filter(|&(n, v)| n >= from as f64 && v.is_finite())
        .collect()
}

enum Trivial {
    Zero,
    Infinite,
}

fn trivial(l: &[f64]) -> Result<Option<Trivial>> {
    if l.len() < MIN_TERMS {
        return Err(SpectraError::InsufficientData { needed: MIN_TERMS, got: l.len() });
    }
    let tail = &l[l.len() * 3 / 4..];
    if tail.iter().any(|v| *v == f64::INFINITY) {
        return Ok(Some(Trivial::Infinite));
    }
    if tail.iter().all(|v| *v == f64::NEG_INFINITY) {
        return Ok(Some(Trivial::Zero));
    }
    Ok(None)
}

fn widen(lo: f64, hi: f64) -> Bracket {
    let lower = ExtReal::exp2(lo) * ExtReal::new(1.0 - SLACK);
    let upper = ExtReal::exp2(hi) * ExtReal::new(1.0 + SLACK);
    Bracket::new(lower, upper.max(lower))
}

// the raw logs when they follow `a + b n + c ln n`, else the running-max envelope
fn trend_data(l: &[f64]) -> Vec<f64> {
    let n = l.len();
    match lstsq(&B_LOG, &points(l, n / 4)) {
        Some(f) if f.rmax <= SMOOTH_RESIDUAL => l.to_vec(),
        _ => envelope(l, (n / 64).max(1)),
    }
}

fn root_at(l: &[f64], i: usize) -> f64 {
    l[i] / (i + 1) as f64
}

pub fn limsup_root(t: &[ExtReal]) -> Result<Bracket> {
    limsup_root_with(t, RootOptions::default())
}

pub fn limsup_root_with(t: &[ExtReal], opts: RootOptions) -> Result<Bracket> {
    let l = logs(t);
    let mut b = match trivial(&l)? {
        Some(Trivial::Zero) => return Ok(Bracket::exact(ExtReal::ZERO)),
        Some(Trivial::Infinite) => return Ok(Bracket::exact(ExtReal::INFINITY)),
        None => root_bracket(&l),
    };
    if opts.submultiplicative {
        let best = (0..l.len()).map(|i| root_at(&l, i)).fold(f64::INFINITY, f64::min);
        // every root bounds the limit from above; a fit can land below it
        b.upper = ExtReal::exp2(best) * ExtReal::new(1.0 + SLACK);
        b.lower = b.lower.min(b.upper);
    }
    Ok(b)
}

fn root_bracket(l: &[f64]) -> Bracket {
    let n = l.len();
    let wide = points(l, n / 4);
    let half = points(l, n / 2);
    let tail_roots: Vec<f64> = (n * 3 / 4..n).filter(|&i| l[i].is_finite()).map(|i| root_at(l, i)).collect();
    if half.len() < 4 {
        // too few nonzero terms to fit: the observed roots
        let lo = tail_roots.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = tail_roots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return widen(lo, hi);
    }
    let last = *tail_roots.last().unwrap();
    if let Some(f) = lstsq(&B_SUPER, &wide) {
        let kappa = f.coef[3];
        let significant = kappa.abs() > 1e-6 && kappa.abs() > 10.0 * f.rmax * f.sens[3];
        let monotone = |up: bool| {
            tail_roots.windows(2).all(|w| if up { w[1] >= w[0] - 1e-12 } else { w[1] <= w[0] + 1e-12 })
        };
        if significant && kappa > 0.0 && monotone(true) {
            return Bracket::new(ExtReal::exp2(last), ExtReal::INFINITY);
        }
        if significant && kappa < 0.0 && monotone(false) {
            return Bracket::new(ExtReal::ZERO, ExtReal::exp2(last) * ExtReal::new(1.0 + SLACK));
        }
    }
    if let Some(f) = lstsq(&B_LOG, &wide) {
        if f.rmax <= SMOOTH_RESIDUAL {
            let d = f.rmax * f.sens[1] + SLACK * f.coef[1].abs().max(1.0);
            return widen(f.coef[1] - d, f.coef[1] + d);
        }
    }
    let env = envelope(l, (n / 64).max(1));
    let env_wide = points(&env, n / 4);
    let env_half = points(&env, n / 2);
    let mut est = Vec::new();
    for (basis, pts) in [
        (&B_LIN[..], &half),
        (&B_LIN[..], &wide),
        (&B_LIN[..], &env_half),
        (&B_LIN[..], &env_wide),
        (&B_LOG[..], &env_wide),
    ] {
        if let Some(f) = lstsq(basis, pts) {
            est.push(f.coef[1]);
        }
    }
    let lo = est.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = est.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    widen(lo, hi)
}

/// `[sup{x : pred(x) = Some(false)}, inf{x : pred(x) = Some(true)}]` for a
/// predicate that is false below some threshold and true above it.
fn threshold_bisect(pred: impl Fn(f64) -> Option<bool>, guess: f64) -> (f64, f64) {
    let find = |want: bool, dir: f64| {
        let mut step = 1.0;
        for _ in 0..64 {
            let x = guess + dir * step;
            if pred(x) == Some(want) {
                return Some(x);
            }
            step *= 2.0;
        }
        None
    };
    let (Some(f), Some(t)) = (find(false, -1.0), find(true, 1.0)) else {
        return (f64::NEG_INFINITY, f64::INFINITY);
    };
    let boundary = |mut a: f64, mut b: f64, is_a: &dyn Fn(Option<bool>) -> bool| {
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if is_a(pred(m)) {
                a = m;
            } else {
                b = m;
            }
        }
        (a, b)
    };
    let (last_false, _) = boundary(f, t, &|v| v == Some(false));
    let (_, first_true) = boundary(f, t, &|v| v != Some(true));
    (last_false, first_true)
}

/// Smallest `nu` with `t_n / nu^n -> 0`, from dyadic three-point slopes
/// `(e_{4m} - 2 e_{2m} + e_m) / m` of the running-max envelope `e`; these
/// cancel constant and `log n` terms.
pub fn vanishing_threshold(t: &[ExtReal]) -> Result<Bracket> {
    let l = logs(t);
    match trivial(&l)? {
        Some(Trivial::Zero) => return Ok(Bracket::exact(ExtReal::ZERO)),
        Some(Trivial::Infinite) => return Ok(Bracket::exact(ExtReal::INFINITY)),
        None => {}
    }
    let n = l.len();
    let env = trend_data(&l);
    let at = |k: usize| env[k - 1];
    let slopes: Vec<f64> = (n / 8..=n / 4)
        .filter(|&m| m >= 1)
        .map(|m| (at(4 * m) - 2.0 * at(2 * m) + at(m)) / m as f64)
        .filter(|s| s.is_finite())
        .collect();
    if slopes.is_empty() {
        return Ok(root_bracket(&l));
    }
    let spread = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-10 + spread;
    // t_n / nu^n has dyadic slope s - log2(nu)
    let pred = |lnu: f64| {
        let shifted: Vec<f64> = slopes.iter().map(|s| s - lnu).collect();
        if shifted.iter().all(|s| *s < -tol) {
            Some(true)
        } else if shifted.iter().all(|s| *s > tol) {
            Some(false)
        } else {
            None
        }
    };
    let (lo, hi) = threshold_bisect(pred, slopes[0]);
    Ok(widen(lo, hi))
}

/// Smallest `nu` with `t_n / nu^n` bounded, from a `(1, n, ln n)` fit of
/// `log2(t_n / nu^n)` over the last three quarters.
pub fn bounded_threshold(t: &[ExtReal]) -> Result<Bracket> {
    let l = logs(t);
    match trivial(&l)? {
        Some(Trivial::Zero) => return Ok(Bracket::exact(ExtReal::ZERO)),
        Some(Trivial::Infinite) => return Ok(Bracket::exact(ExtReal::INFINITY)),
        None => {}
    }
    let n = l.len();
    let pts = points(&trend_data(&l), n / 4);
    let Some(base) = lstsq(&B_LOG, &pts) else { return Ok(root_bracket(&l)) };
    let tol_b = base.rmax * base.sens[1] + 1e-12;
    let tol_c = base.rmax * base.sens[2] + 1e-9;
    let pred = |lnu: f64| {
        let shifted: Vec<(f64, f64)> = pts.iter().map(|&(k, v)| (k, v - k * lnu)).collect();
        let f = lstsq(&B_LOG, &shifted)?;
        let (b, c) = (f.coef[1], f.coef[2]);
        if b < -tol_b {
            Some(true)
        } else if b > tol_b {
            Some(false)
        } else if c < -tol_c {
            Some(true)
        } else if c > tol_c {
            Some(false)
        } else {
            None
        }
    };
    let (lo, hi) = threshold_bisect(pred, base.coef[1]);
    Ok(widen(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(n: usize, f: impl Fn(f64) -> f64) -> Vec<ExtReal> {
        (1..=n).map(|k| ExtReal::exp2(f(k as f64))).collect()
    }

    #[test]
    fn geometric_and_polynomial_factor() {
        let b = limsup_root(&seq(200, |n| n * 3f64.log2())).unwrap();
        assert!(b.contains(ExtReal::new(3.0), 0.0) && b.abs_width() <= 0.05, "{b}");
        let b = limsup_root(&seq(500, |n| 2.0 * n.log2() - n)).unwrap();
        assert!(b.contains(ExtReal::new(0.5), 0.0) && b.abs_width() <= 0.05, "{b}");
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(limsup_root(&vec![ExtReal::ZERO; 20]).unwrap(), Bracket::exact(ExtReal::ZERO));
        let mut t = vec![ExtReal::ONE; 20];
        t[18] = ExtReal::INFINITY;
        assert_eq!(limsup_root(&t).unwrap(), Bracket::exact(ExtReal::INFINITY));
        assert!(matches!(limsup_root(&t[..7]), Err(SpectraError::InsufficientData { needed: 8, got: 7 })));
    }

    #[test]
    fn superexponential_growth_and_decay() {
        // (2n)^(2n) / n^n
        let b = limsup_root(&seq(30, |n| 2.0 * n * (2.0 * n).log2() - n * n.log2())).unwrap();
        assert!(b.upper.is_infinite() && b.lower > ExtReal::new(10.0), "{b}");
        // 1 / n!
        let lf = |n: f64| -(1..=n as usize).map(|k| (k as f64).log2()).sum::<f64>();
        let b = limsup_root(&seq(60, lf)).unwrap();
        assert!(b.lower.is_zero() && b.upper < ExtReal::new(0.1), "{b}");
    }

    #[test]
    fn oscillating_geometric() {
        // |cos(n)| 1.5^n, envelope root 1.5
        let t: Vec<ExtReal> = (1..=300).map(|n| ExtReal::new((n as f64).cos().abs() * 1.5f64.powi(n))).collect();
        let b = limsup_root(&t).unwrap();
        assert!(b.contains(ExtReal::new(1.5), 1e-3) && b.rel_width() < 0.05, "{b}");
    }

    #[test]
    fn submultiplicative_cap() {
        let t = seq(40, |n| 1.0 + n * 0.5f64.log2());
        let b = limsup_root_with(&t, RootOptions { submultiplicative: true }).unwrap();
        assert!(b.upper <= ExtReal::new(1.0));
        assert!(b.contains(ExtReal::new(0.5), 1e-9));
    }

    #[test]
    fn three_characterizations_agree_on_grid() {
        for c in [0.1f64, 1.0, 7.0] {
            for r in [0.3f64, 1.0, 2.5] {
                for a in [-1.5, 0.0, 2.0] {
                    let t = seq(500, |n| c.log2() + n * r.log2() + a * n.log2());
                    for (name, b) in [
                        ("root", limsup_root(&t).unwrap()),
                        ("vanish", vanishing_threshold(&t).unwrap()),
                        ("bounded", bounded_threshold(&t).unwrap()),
                    ] {
                        assert!(b.contains(ExtReal::new(r), 1e-12) && b.abs_width() <= 1e-2, "{name} {c} {r} {a}: {b}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bracket_contains_geometric_rate(c in 0.01f64..100.0, r in 0.05f64..20.0, a in -3.0f64..3.0) {
            let t = seq(200, |n| c.log2() + n * r.log2() + a * n.log2());
            let b = limsup_root(&t).unwrap();
            prop_assert!(b.lower <= b.upper);
            prop_assert!(b.contains(ExtReal::new(r), 1e-9), "{}", b);
        }

        #[test]
        fn scaling_the_sequence_keeps_the_root(c in 0.01f64..100.0, r in 0.1f64..10.0) {
            let t = seq(120, |n: f64| n * r.log2() + (n.sin() + 1.5f64).log2());
            let s: Vec<ExtReal> = t.iter().map(|v| *v * ExtReal::new(c)).collect();
            let (b1, b2) = (limsup_root(&t).unwrap(), limsup_root(&s).unwrap());
            prop_assert!(b1.contains(ExtReal::new(r), 0.05));
            prop_assert!(b2.contains(ExtReal::new(r), 0.05));
        }
    }
}
