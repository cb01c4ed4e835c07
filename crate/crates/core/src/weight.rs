//! Closed-form index rules `k -> w(k)` for shifts, diagonals and seminorm
//! weights.
//!
//! Every rule can be evaluated at arbitrarily large indices and reports its
//! supremum, tail limit and zero pattern analytically where it can, falling
//! back to a scan plus a tail bound otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectraError};
use crate::num::{re, Bracket, ExtReal, Scalar, Wide};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Weight {
    /// `coef * base^k * k^exponent`.
    GeoPower { coef: Scalar, base: f64, exponent: f64 },
    /// `(k-1)^(k-1) / k^k`, with `0^0 = 1`.
    SelfPowerRatio,
    /// `(factor*k)^(factor*k)`.
    SelfPower { factor: f64 },
    /// `values[k-1]` while in range, `tail` afterwards.
    Table { values: Vec<Scalar>, tail: Scalar },
    Sum { terms: Vec<Weight> },
    Product { factors: Vec<Weight> },
    /// `(lambda - of(k))^{-1}`.
    Resolvent { lambda: Scalar, of: Box<Weight> },
}

/// Behaviour of `w(k)` as `k -> infinity`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Limit {
    Finite(Scalar),
    Infinite,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Eventually {
    Constant(Scalar),
    NotConstant,
    Unknown,
}

const SCAN_START: usize = 64;
const SCAN_MAX: usize = 1 << 16;

fn wide_int_pow(base: f64, exp: u64) -> Wide {
    Wide::real(base).powi(exp)
}

// k^a in wide form, exact repeated squaring for integer a
fn kpow(k: usize, a: f64) -> Wide {
    if a == 0.0 {
        return Wide::ONE;
    }
    if a.fract() == 0.0 && a.abs() < 1e6 {
        let w = wide_int_pow(k as f64, a.abs() as u64);
        return if a < 0.0 { w.recip() } else { w };
    }
    Wide::exp2(a * (k as f64).log2())
}

fn self_power(x: f64) -> Wide {
    if x == 0.0 {
        return Wide::ONE;
    }
    if x.fract() == 0.0 && x < 1e15 {
        return wide_int_pow(x, x as u64);
    }
    Wide::exp2(x * x.log2())
}

impl Weight {
    pub fn constant(c: Scalar) -> Weight {
        Weight::GeoPower { coef: c, base: 1.0, exponent: 0.0 }
    }

    pub fn real_constant(c: f64) -> Weight {
        Weight::constant(re(c))
    }

    pub fn one() -> Weight {
        Weight::real_constant(1.0)
    }

    /// `c * b^k`.
    pub fn geometric(c: f64, b: f64) -> Weight {
        Weight::GeoPower { coef: re(c), base: b, exponent: 0.0 }
    }

    /// `c * k^a`.
    pub fn power(c: f64, a: f64) -> Weight {
        Weight::GeoPower { coef: re(c), base: 1.0, exponent: a }
    }

    pub fn self_power_ratio() -> Weight {
        Weight::SelfPowerRatio
    }

    pub fn self_power(factor: f64) -> Weight {
        Weight::SelfPower { factor }
    }

    pub fn table(values: Vec<Scalar>, tail: Scalar) -> Weight {
        Weight::Table { values, tail }
    }

    pub fn sum(terms: Vec<Weight>) -> Weight {
        Weight::Sum { terms }
    }

    pub fn product(factors: Vec<Weight>) -> Weight {
        Weight::Product { factors }
    }

    /// `1 / (lambda - of(k))`; fails when `lambda` is a value or an
    /// accumulation point of `of`.
    pub fn resolvent(lambda: Scalar, of: Weight) -> Result<Weight> {
        let dist = of.inf_dist_from(lambda, 1);
        if dist.lower.is_zero() {
            return Err(SpectraError::SpectrumLambda { distance: dist.upper.to_f64() });
        }
        Ok(Weight::Resolvent { lambda, of: Box::new(of) })
    }

    /// `1 / w(k)`.
    pub fn reciprocal(of: Weight) -> Result<Weight> {
        Ok(Weight::product(vec![Weight::real_constant(-1.0), Weight::resolvent(re(0.0), of)?]))
    }

    pub fn wide(&self, k: usize) -> Wide {
        debug_assert!(k >= 1);
        match self {
            Weight::GeoPower { coef, base, exponent } => {
                if *base == 0.0 || *coef == re(0.0) {
                    return Wide::ZERO;
                }
                Wide::new(*coef) * wide_int_pow(*base, k as u64) * kpow(k, *exponent)
            }
            Weight::SelfPowerRatio => {
                if k == 1 {
                    return Wide::ONE;
                }
                wide_int_pow((k - 1) as f64, (k - 1) as u64) / wide_int_pow(k as f64, k as u64)
            }
            Weight::SelfPower { factor } => self_power(factor * k as f64),
            Weight::Table { values, tail } => Wide::new(*values.get(k - 1).unwrap_or(tail)),
            Weight::Sum { terms } => terms.iter().fold(Wide::ZERO, |a, t| a + t.wide(k)),
            Weight::Product { factors } => factors.iter().fold(Wide::ONE, |a, t| a * t.wide(k)),
            Weight::Resolvent { lambda, of } => {
                let d = Wide::new(*lambda) - of.wide(k);
                assert!(!d.is_zero(), "resolvent weight evaluated at a pole (k = {k})");
                d.recip()
            }
        }
    }

    pub fn value(&self, k: usize) -> Scalar {
        self.wide(k).to_complex()
    }

    pub fn abs(&self, k: usize) -> ExtReal {
        self.wide(k).abs()
    }

    /// Merges products and sums of `GeoPower` rules into single rules.
    pub fn normalize(&self) -> Weight {
        match self {
            Weight::Table { values, tail } if values.is_empty() => Weight::constant(*tail),
            Weight::Product { factors } => {
                let mut flat = Vec::new();
                for f in factors {
                    match f.normalize() {
                        Weight::Product { factors } => flat.extend(factors),
                        g => flat.push(g),
                    }
                }
                let mut geo: Option<(Scalar, f64, f64)> = None;
                let mut rest = Vec::new();
                for f in flat {
                    match f {
                        Weight::GeoPower { coef, base, exponent } => {
                            let (c, b, a) = geo.unwrap_or((re(1.0), 1.0, 0.0));
                            geo = Some((c * coef, b * base, a + exponent));
                        }
                        g => rest.push(g),
                    }
                }
                if let Some((c, b, a)) = geo {
                    if c == re(0.0) || b == 0.0 {
                        return Weight::constant(re(0.0));
                    }
                    if rest.is_empty() || (c != re(1.0) || b != 1.0 || a != 0.0) {
                        rest.insert(0, Weight::GeoPower { coef: c, base: b, exponent: a });
                    }
                }
                match rest.len() {
                    0 => Weight::one(),
                    1 => rest.pop().unwrap(),
                    _ => Weight::Product { factors: rest },
                }
            }
            Weight::Sum { terms } => {
                let mut flat = Vec::new();
                for t in terms {
                    match t.normalize() {
                        Weight::Sum { terms } => flat.extend(terms),
                        g => flat.push(g),
                    }
                }
                let mut geo: Vec<(Scalar, f64, f64)> = Vec::new();
                let mut rest = Vec::new();
                for t in flat {
                    match t {
                        Weight::GeoPower { coef, base, exponent } => {
                            if coef == re(0.0) || base == 0.0 {
                                continue;
                            }
                            match geo.iter_mut().find(|g| g.1 == base && g.2 == exponent) {
                                Some(g) => g.0 += coef,
                                None => geo.push((coef, base, exponent)),
                            }
                        }
                        g => rest.push(g),
                    }
                }
                let mut out: Vec<Weight> = geo
                    .into_iter()
                    .filter(|g| g.0 != re(0.0))
                    .map(|(coef, base, exponent)| Weight::GeoPower { coef, base, exponent })
                    .collect();
                out.extend(rest);
                match out.len() {
                    0 => Weight::constant(re(0.0)),
                    1 => out.pop().unwrap(),
                    _ => Weight::Sum { terms: out },
                }
            }
            Weight::Resolvent { lambda, of } => Weight::Resolvent { lambda: *lambda, of: Box::new(of.normalize()) },
            w => w.clone(),
        }
    }

    pub fn limit(&self) -> Limit {
        match self.normalize() {
            Weight::GeoPower { coef, base, exponent } => {
                if coef == re(0.0) || base.abs() < 1.0 {
                    Limit::Finite(re(0.0))
                } else if base.abs() > 1.0 {
                    Limit::Infinite
                } else if exponent < 0.0 {
                    Limit::Finite(re(0.0))
                } else if exponent > 0.0 {
                    Limit::Infinite
                } else if base == 1.0 {
                    Limit::Finite(coef)
                } else {
                    Limit::Unknown
                }
            }
            Weight::SelfPowerRatio => Limit::Finite(re(0.0)),
            Weight::SelfPower { factor } => {
                if factor > 0.0 {
                    Limit::Infinite
                } else {
                    Limit::Finite(re(1.0))
                }
            }
            Weight::Table { tail, .. } => Limit::Finite(tail),
            Weight::Sum { terms } => {
                let mut acc = re(0.0);
                let mut infinite = 0;
                for t in &terms {
                    match t.limit() {
                        Limit::Finite(c) => acc += c,
                        Limit::Infinite => infinite += 1,
                        Limit::Unknown => return Limit::Unknown,
                    }
                }
                match infinite {
                    0 => Limit::Finite(acc),
                    1 => Limit::Infinite,
                    _ => Limit::Unknown,
                }
            }
            Weight::Product { factors } => {
                let mut acc = re(1.0);
                let mut infinite = false;
                for t in &factors {
                    match t.limit() {
                        Limit::Finite(c) => acc *= c,
                        Limit::Infinite => infinite = true,
                        Limit::Unknown => return Limit::Unknown,
                    }
                }
                match (infinite, acc == re(0.0)) {
                    (false, _) => Limit::Finite(acc),
                    (true, false) => Limit::Infinite,
                    (true, true) => Limit::Unknown,
                }
            }
            Weight::Resolvent { lambda, of } => match of.limit() {
                Limit::Finite(c) if c == lambda => Limit::Infinite,
                Limit::Finite(c) => Limit::Finite((lambda - c).inv()),
                Limit::Infinite => Limit::Finite(re(0.0)),
                Limit::Unknown => Limit::Unknown,
            },
        }
    }

    /// `Some(true)` if `w(k) = 0` for all large `k`, `Some(false)` if `w(k) != 0`
    /// for infinitely many `k`.
    pub fn eventually_zero(&self) -> Option<bool> {
        match self.normalize() {
            Weight::GeoPower { coef, base, .. } => Some(coef == re(0.0) || base == 0.0),
            Weight::SelfPowerRatio | Weight::SelfPower { .. } | Weight::Resolvent { .. } => Some(false),
            Weight::Table { tail, .. } => Some(tail == re(0.0)),
            Weight::Sum { terms } => {
                // distinct exponential-polynomial terms cannot cancel eventually
                if terms.iter().all(|t| matches!(t, Weight::GeoPower { .. })) {
                    return Some(terms.is_empty());
                }
                if terms.iter().all(|t| t.eventually_zero() == Some(true)) {
                    Some(true)
                } else {
                    None
                }
            }
            Weight::Product { factors } => {
                let z: Vec<_> = factors.iter().map(|f| f.eventually_zero()).collect();
                if z.contains(&Some(true)) {
                    Some(true)
                } else if z.iter().all(|x| *x == Some(false)) && factors.iter().all(|f| f.nowhere_zero_from(1) == Some(true)) {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }

    /// `Some(true)` if `w(k) != 0` for every `k >= k0`.
    pub fn nowhere_zero_from(&self, k0: usize) -> Option<bool> {
        match self.normalize() {
            Weight::GeoPower { coef, base, .. } => Some(coef != re(0.0) && base != 0.0),
            Weight::SelfPowerRatio | Weight::Resolvent { .. } => Some(true),
            Weight::SelfPower { factor } => Some(factor >= 0.0),
            Weight::Table { values, tail } => {
                let head = values.iter().skip(k0.saturating_sub(1)).all(|v| *v != re(0.0));
                Some(head && tail != re(0.0))
            }
            Weight::Product { factors } => {
                let z: Vec<_> = factors.iter().map(|f| f.nowhere_zero_from(k0)).collect();
                if z.iter().all(|x| *x == Some(true)) {
                    Some(true)
                } else {
                    None
                }
            }
            Weight::Sum { .. } => None,
        }
    }

    pub fn eventually(&self) -> Eventually {
        match self.normalize() {
            Weight::GeoPower { coef, base, exponent } => {
                if coef == re(0.0) || base == 0.0 {
                    Eventually::Constant(re(0.0))
                } else if base == 1.0 && exponent == 0.0 {
                    Eventually::Constant(coef)
                } else {
                    Eventually::NotConstant
                }
            }
            Weight::SelfPowerRatio => Eventually::NotConstant,
            Weight::SelfPower { factor } => {
                if factor == 0.0 {
                    Eventually::Constant(re(1.0))
                } else {
                    Eventually::NotConstant
                }
            }
            Weight::Table { tail, .. } => Eventually::Constant(tail),
            Weight::Sum { terms } => {
                if terms.iter().all(|t| matches!(t, Weight::GeoPower { .. })) {
                    // after normalization at most one term is constant and the
                    // remaining terms are linearly independent
                    return if terms.iter().all(|t| matches!(t.eventually(), Eventually::Constant(_))) {
                        Eventually::Constant(terms.iter().map(|t| t.value(1)).sum())
                    } else {
                        Eventually::NotConstant
                    };
                }
                let mut acc = re(0.0);
                for t in &terms {
                    match t.eventually() {
                        Eventually::Constant(c) => acc += c,
                        _ => return Eventually::Unknown,
                    }
                }
                Eventually::Constant(acc)
            }
            Weight::Product { factors } => {
                let mut acc = re(1.0);
                for t in &factors {
                    match t.eventually() {
                        Eventually::Constant(c) => acc *= c,
                        _ => return Eventually::Unknown,
                    }
                }
                Eventually::Constant(acc)
            }
            Weight::Resolvent { lambda, of } => match of.eventually() {
                Eventually::Constant(c) => Eventually::Constant((lambda - c).inv()),
                e => e,
            },
        }
    }

    /// `sup_{k >= k0} |w(k)|`, exact for the closed-form kinds and otherwise a
    /// bracket from a finite scan plus a tail bound.
    pub fn sup_abs_from(&self, k0: usize) -> Bracket {
        let k0 = k0.max(1);
        let w = self.normalize();
        match &w {
            Weight::GeoPower { coef, base, exponent } => {
                let (b, a) = (base.abs(), *exponent);
                if *coef == re(0.0) || b == 0.0 {
                    return Bracket::exact(ExtReal::ZERO);
                }
                let at = |k: usize| w.abs(k);
                let v = if b > 1.0 || (b == 1.0 && a > 0.0) {
                    ExtReal::INFINITY
                } else if b == 1.0 || a <= 0.0 {
                    // constant or nonincreasing modulus
                    at(k0)
                } else {
                    // log-concave: modulus peaks near a / ln(1/b)
                    let peak = a / -b.ln();
                    let mut best = at(k0);
                    for k in [peak.floor(), peak.ceil()] {
                        if k >= k0 as f64 && k < 1e15 {
                            best = best.max(at(k as usize));
                        }
                    }
                    best
                };
                Bracket::exact(v)
            }
            Weight::SelfPowerRatio => Bracket::exact(w.abs(k0)),
            Weight::SelfPower { factor } => {
                if *factor == 0.0 {
                    Bracket::exact(ExtReal::ONE)
                } else {
                    Bracket::exact(ExtReal::INFINITY)
                }
            }
            Weight::Table { values, tail } => {
                let head = values.iter().skip(k0 - 1).map(|v| ExtReal::new(v.norm()));
                Bracket::exact(head.fold(ExtReal::new(tail.norm()), ExtReal::max))
            }
            Weight::Resolvent { lambda, of } => {
                let d = of.inf_dist_from(*lambda, k0);
                Bracket::new(d.upper.recip(), d.lower.recip())
            }
            Weight::Sum { terms } => self.scan_sup(k0, |k| terms.iter().map(|t| t.sup_abs_from(k).upper).sum()),
            Weight::Product { factors } => {
                self.scan_sup(k0, |k| factors.iter().fold(ExtReal::ONE, |a, f| a * f.sup_abs_from(k).upper))
            }
        }
    }

    fn scan_sup(&self, k0: usize, tail_bound: impl Fn(usize) -> ExtReal) -> Bracket {
        let limit_floor = match self.limit() {
            Limit::Finite(c) => ExtReal::new(c.norm()),
            Limit::Infinite => return Bracket::exact(ExtReal::INFINITY),
            Limit::Unknown => ExtReal::ZERO,
        };
        let mut scanned = ExtReal::ZERO;
        let mut k = k0;
        let mut stop = k0 + SCAN_START;
        loop {
            while k < stop {
                scanned = scanned.max(self.abs(k));
                k += 1;
            }
            let tail = tail_bound(stop);
            let lower = scanned.max(limit_floor);
            if tail <= scanned {
                return Bracket::exact(scanned);
            }
            let upper = scanned.max(tail);
            if upper.rel_diff(lower) < 1e-15 || stop - k0 >= SCAN_MAX {
                return Bracket::new(lower, upper.max(lower));
            }
            stop = k0 + 2 * (stop - k0);
        }
    }

    /// `inf_{k >= k0} |lambda - w(k)|`.
    pub fn inf_dist_from(&self, lambda: Scalar, k0: usize) -> Bracket {
        let k0 = k0.max(1);
        let w = self.normalize();
        let dist = |k: usize| (Wide::new(lambda) - w.wide(k)).abs();
        match &w {
            Weight::Table { values, tail } => {
                let head = values.iter().skip(k0 - 1).map(|v| ExtReal::new((lambda - v).norm()));
                Bracket::exact(head.fold(ExtReal::new((lambda - tail).norm()), ExtReal::min))
            }
            Weight::GeoPower { coef, base, exponent } if coef.im == 0.0 && *base > 0.0 => {
                if *base == 1.0 && *exponent == 0.0 {
                    return Bracket::exact(ExtReal::new((lambda - coef).norm()));
                }
                Bracket::exact(monotone_pieces_inf(&w, lambda, k0, base.ln(), *exponent))
            }
            Weight::SelfPowerRatio => Bracket::exact(monotone_pieces_inf(&w, lambda, k0, -1.0, 0.0)),
            _ => {
                let lim = w.limit();
                let mut best = ExtReal::INFINITY;
                let mut k = k0;
                let mut stop = k0 + SCAN_START;
                loop {
                    while k < stop {
                        best = best.min(dist(k));
                        k += 1;
                    }
                    // tail: |lambda - w(k)| >= |lambda - L| - sup_{k>=stop} |w(k) - L|
                    let tail_lower = match lim {
                        Limit::Finite(c) => {
                            let dev = Weight::sum(vec![w.clone(), Weight::constant(-c)]).sup_abs_from(stop).upper;
                            ExtReal::new((lambda - c).norm()) - dev
                        }
                        Limit::Infinite => ExtReal::ZERO,
                        Limit::Unknown => ExtReal::ZERO,
                    };
                    if tail_lower >= best {
                        return Bracket::exact(best);
                    }
                    if stop - k0 >= SCAN_MAX {
                        let upper = match lim {
                            Limit::Finite(c) => best.min(ExtReal::new((lambda - c).norm())),
                            _ => best,
                        };
                        return Bracket::new(tail_lower.min(upper), upper);
                    }
                    stop = k0 + 2 * (stop - k0);
                }
            }
        }
    }
}

// `w(k) = sign * exp(g(k))` with `g(k) = const + slope*k + a*ln k`, which is
// monotone on each side of its single critical point. Self-power ratios are
// decreasing and reuse the same search with a negative slope.
fn monotone_pieces_inf(w: &Weight, lambda: Scalar, k0: usize, slope: f64, a: f64) -> ExtReal {
    let dist = |k: usize| (Wide::new(lambda) - w.wide(k)).abs();
    let val = |k: usize| w.wide(k).to_complex().re;
    let lim = match w.limit() {
        Limit::Finite(c) => Some(c),
        _ => None,
    };
    let crit = if slope != 0.0 && a != 0.0 { -a / slope } else { f64::NAN };
    let mut pieces: Vec<(usize, Option<usize>)> = Vec::new();
    if crit.is_finite() && crit > k0 as f64 {
        let c = crit.floor() as usize;
        pieces.push((k0, Some(c)));
        pieces.push((c + 1, None));
    } else {
        pieces.push((k0, None));
    }
    let target = lambda.re;
    let mut best = ExtReal::INFINITY;
    for (s, e) in pieces {
        best = best.min(dist(s));
        let end = match e {
            Some(e) => e,
            None => {
                // extend until w(k) passes the target or stops moving
                let mut hi = s.max(2) * 2;
                let up = val(s + 1) >= val(s);
                while hi < (1usize << 52) {
                    let v = val(hi);
                    if !v.is_finite() || (up && v >= target) || (!up && v <= target) {
                        break;
                    }
                    hi *= 2;
                }
                if hi >= (1usize << 52) {
                    if let Some(c) = lim {
                        best = best.min(ExtReal::new((lambda - c).norm()));
                    }
                }
                hi
            }
        };
        best = best.min(dist(end));
        if end <= s + 1 {
            continue;
        }
        // bisection for the crossing of the target on a monotone piece
        let up = val(end) >= val(s);
        let (mut lo, mut hi) = (s, end);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let v = val(mid);
            if (up && v < target) || (!up && v > target) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best = best.min(dist(lo)).min(dist(hi));
        if e.is_none() {
            if let Some(c) = lim {
                // an unattained infimum at the limit
                let passes = if up { val(end) >= target } else { val(end) <= target };
                if !passes {
                    best = best.min(ExtReal::new((lambda - c).norm()));
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scan_sup(w: &Weight, k0: usize, n: usize) -> f64 {
        (k0..k0 + n).map(|k| w.value(k).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn self_power_ratio_values() {
        let w = Weight::self_power_ratio();
        assert_eq!(w.value(1), re(1.0));
        assert_eq!(w.value(2), re(0.25));
        assert!((w.value(3).re - 4.0 / 27.0).abs() < 1e-16);
        // telescoping product over k = 2..=j is 1/j^j
        let prod = (2..=40).fold(Wide::ONE, |a, k| a * w.wide(k));
        let expect = Wide::real(40.0).powi(40).recip();
        assert!(prod.abs().rel_diff(expect.abs()) < 1e-13);
    }

    #[test]
    fn superexp_box_bound() {
        let b = Weight::self_power(2.0);
        assert_eq!(b.value(1), re(4.0));
        assert_eq!(b.value(2), re(256.0));
        assert!((b.abs(30).log2() - 60.0 * 60f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn geo_power_sup_exact() {
        assert_eq!(Weight::geometric(1.0, 0.5).sup_abs_from(1), Bracket::exact(ExtReal::new(0.5)));
        assert_eq!(Weight::power(1.0, -1.0).sup_abs_from(3).upper.to_f64(), 1.0 / 3.0);
        assert!(Weight::power(1.0, 1.0).sup_abs_from(1).upper.is_infinite());
        // k * 0.9^k peaks at k = 9 or 10
        let w = Weight::GeoPower { coef: re(1.0), base: 0.9, exponent: 1.0 };
        let s = w.sup_abs_from(1);
        assert!(s.is_exact());
        assert!((s.upper.to_f64() - scan_sup(&w, 1, 400)).abs() < 1e-15);
    }

    #[test]
    fn sum_sup_converges_to_exact() {
        let w = Weight::sum(vec![Weight::geometric(1.0, 0.5), Weight::power(1.0, -1.0)]);
        let s = w.sup_abs_from(1);
        assert!(s.is_exact());
        assert!((s.upper.to_f64() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn normalize_merges_geo_powers() {
        let w = Weight::product(vec![Weight::power(2.0, 1.0), Weight::geometric(3.0, 0.5)]).normalize();
        assert_eq!(w, Weight::GeoPower { coef: re(6.0), base: 0.5, exponent: 1.0 });
        let s = Weight::sum(vec![Weight::geometric(1.0, 0.5), Weight::geometric(-1.0, 0.5)]).normalize();
        assert_eq!(s.eventually_zero(), Some(true));
    }

    #[test]
    fn resolvent_of_harmonic() {
        let d = Weight::power(1.0, -1.0);
        let r = Weight::resolvent(re(2.0), d.clone()).unwrap();
        // entries (2 - 1/k)^{-1} increase to 1/2 from 1
        assert_eq!(r.sup_abs_from(1).upper.to_f64(), 1.0);
        // zero is an accumulation point of 1/k
        assert!(matches!(Weight::resolvent(re(0.0), d.clone()), Err(SpectraError::SpectrumLambda { .. })));
        assert!(Weight::resolvent(re(0.5), d).is_err());
    }

    #[test]
    fn inf_dist_linear_growth() {
        let d = Weight::power(1.0, 1.0);
        assert_eq!(d.inf_dist_from(re(-1.0), 1).upper.to_f64(), 2.0);
        assert_eq!(d.inf_dist_from(re(3.4), 1).upper.to_f64(), 0.3999999999999999);
        let z = Scalar::new(0.5, 0.5);
        assert!((d.inf_dist_from(z, 1).upper.to_f64() - (0.5f64).hypot(0.5)).abs() < 1e-15);
        assert!(d.inf_dist_from(re(7.0), 1).upper.is_zero());
    }

    #[test]
    fn limits_and_patterns() {
        assert_eq!(Weight::power(1.0, -1.0).limit(), Limit::Finite(re(0.0)));
        assert_eq!(Weight::self_power(2.0).limit(), Limit::Infinite);
        assert_eq!(Weight::table(vec![re(1.0), re(2.0)], re(0.0)).eventually_zero(), Some(true));
        assert_eq!(Weight::one().eventually(), Eventually::Constant(re(1.0)));
        assert_eq!(Weight::power(1.0, -1.0).eventually(), Eventually::NotConstant);
        assert_eq!(Weight::self_power_ratio().nowhere_zero_from(1), Some(true));
    }

    proptest! {
        #[test]
        fn geo_power_sup_matches_scan(c in -3.0f64..3.0, b in 0.05f64..0.99, a in -2.0f64..6.0, k0 in 1usize..20) {
            let w = Weight::GeoPower { coef: re(c), base: b, exponent: a };
            let s = w.sup_abs_from(k0);
            prop_assert!(s.is_exact());
            let scanned = scan_sup(&w, k0, 3000);
            prop_assert!((s.upper.to_f64() - scanned).abs() <= 1e-12 * scanned.max(1e-300));
        }

        #[test]
        fn inf_dist_matches_scan(x in -3.0f64..3.0, y in -1.0f64..1.0, b in 0.3f64..1.5, a in -1.0f64..1.0) {
            // near b = 1 the crossings move past the scan range
            prop_assume!((b - 1.0).abs() > 0.01);
            let w = Weight::GeoPower { coef: re(1.0), base: b, exponent: a };
            let lam = Scalar::new(x, y);
            let d = w.inf_dist_from(lam, 1).upper.to_f64();
            let scanned = (1..4000).map(|k| (lam - w.value(k)).norm()).filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
            prop_assert!(d <= scanned * (1.0 + 1e-12));
            // the infimum may sit at the limit, which a finite scan only approaches
            if let Limit::Finite(l) = w.limit() {
                prop_assert!(d >= scanned.min((lam - l).norm()) * (1.0 - 1e-12));
            } else {
                prop_assert!(d >= scanned * (1.0 - 1e-12));
            }
        }
    }
}
