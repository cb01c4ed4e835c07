//! Circle rotation acting on step functions, with convergence in measure.
//!
//! Values are stored as base-2 logarithms so that functions as large as
//! `2^(2^40)` stay representable. A zero value has logarithm `-inf`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectraError};
use crate::num::{Bracket, ExtReal};

/// Covering searches give up past this many arcs.
pub const COVER_CAP: usize = 1_000_000;

/// Base allowance for floating error in breakpoints.
pub const BREAKPOINT_SLACK: f64 = 1e-12;

/// Floating error per rotation step.
pub const STEP_ERROR: f64 = 1e-16;

pub fn golden_alpha() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// A function on the circle `[0, 1)`, constant on each arc between two
/// consecutive breakpoints. `log2_values[i]` holds on `[b_i, b_(i+1))`; the
/// last arc wraps around to `b_0 + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    log2_values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, log2_values: Vec<f64>) -> Result<StepFunction> {
        if breakpoints.is_empty() || breakpoints.len() != log2_values.len() {
            return Err(SpectraError::Invalid("need one value per breakpoint".into()));
        }
        if breakpoints.iter().any(|b| !(0.0..1.0).contains(b)) {
            return Err(SpectraError::Invalid("breakpoints must lie in [0, 1)".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SpectraError::Invalid("breakpoints must increase strictly".into()));
        }
        if log2_values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(SpectraError::Invalid("log2 values must be finite or -inf".into()));
        }
        Ok(StepFunction { breakpoints, log2_values }.merged())
    }

    pub fn constant(value: f64) -> StepFunction {
        StepFunction { breakpoints: vec![0.0], log2_values: vec![value.abs().log2()] }
    }

    /// Indicator of the arc `[a, b)` for `0 <= a < b <= 1`.
    pub fn indicator(a: f64, b: f64) -> Result<StepFunction> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(SpectraError::Invalid(format!("bad arc [{a}, {b})")));
        }
        let mut bp = vec![];
        let mut vals = vec![];
        if a > 0.0 {
            bp.push(0.0);
            vals.push(f64::NEG_INFINITY);
        }
        bp.push(a);
        vals.push(0.0);
        if b < 1.0 {
            bp.push(b);
            vals.push(f64::NEG_INFINITY);
        }
        StepFunction::new(bp, vals)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn log2_values(&self) -> &[f64] {
        &self.log2_values
    }

    pub fn pieces(&self) -> usize {
        self.breakpoints.len()
    }

    /// Arcs as `(start, length, log2 value)`.
    pub fn arcs(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.breakpoints.len();
        (0..n).map(move |i| {
            let a = self.breakpoints[i];
            let b = if i + 1 < n { self.breakpoints[i + 1] } else { self.breakpoints[0] + 1.0 };
            (a, b - a, self.log2_values[i])
        })
    }

    pub fn log2_at(&self, t: f64) -> f64 {
        let t = t.rem_euclid(1.0);
        let i = self.breakpoints.partition_point(|&b| b <= t);
        if i == 0 {
            *self.log2_values.last().unwrap()
        } else {
            self.log2_values[i - 1]
        }
    }

    pub fn value_at(&self, t: f64) -> ExtReal {
        ExtReal::exp2(self.log2_at(t))
    }

    /// `f(t - shift)`.
    pub fn shifted(&self, shift: f64) -> StepFunction {
        let s = shift.rem_euclid(1.0);
        let mut pairs: Vec<(f64, f64)> = self
            .breakpoints
            .iter()
            .zip(&self.log2_values)
            .map(|(&b, &v)| {
                let mut nb = b + s;
                if nb >= 1.0 {
                    nb -= 1.0;
                }
                (nb, v)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.dedup_by(|b, a| b.0 == a.0);
        let (breakpoints, log2_values) = pairs.into_iter().unzip();
        StepFunction { breakpoints, log2_values }.merged()
    }

    /// Multiply by `2^e`.
    pub fn scaled_log2(&self, e: f64) -> StepFunction {
        StepFunction { breakpoints: self.breakpoints.clone(), log2_values: self.log2_values.iter().map(|v| v + e).collect() }
    }

    /// Drop breakpoints that separate equal values.
    fn merged(self) -> StepFunction {
        let n = self.breakpoints.len();
        if n <= 1 {
            return self;
        }
        let keep: Vec<usize> = (0..n).filter(|&i| self.log2_values[i] != self.log2_values[(i + n - 1) % n]).collect();
        if keep.is_empty() {
            return StepFunction { breakpoints: vec![0.0], log2_values: vec![self.log2_values[0]] };
        }
        StepFunction {
            breakpoints: keep.iter().map(|&i| self.breakpoints[i]).collect(),
            log2_values: keep.iter().map(|&i| self.log2_values[i]).collect(),
        }
    }

    /// Pointwise sum, computed with log-sum-exp on the common refinement.
    pub fn sum(parts: &[StepFunction]) -> StepFunction {
        let mut cuts: Vec<f64> = parts.iter().flat_map(|f| f.breakpoints.iter().copied()).collect();
        cuts.push(0.0);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let n = cuts.len();
        let log2_values = (0..n)
            .map(|i| {
                let b = if i + 1 < n { cuts[i + 1] } else { 1.0 };
                let mid = 0.5 * (cuts[i] + b);
                log2_sum(parts.iter().map(|f| f.log2_at(mid)))
            })
            .collect();
        StepFunction { breakpoints: cuts, log2_values }.merged()
    }

    /// Lebesgue measure of `{ |f| >= 2^c }`.
    pub fn measure_at_least(&self, c: f64) -> f64 {
        self.arcs().filter(|a| a.2 >= c).map(|a| a.1).sum()
    }

    /// Lebesgue measure of `{ |f| > 2^c }`.
    pub fn measure_above(&self, c: f64) -> f64 {
        self.arcs().filter(|a| a.2 > c).map(|a| a.1).sum()
    }
}

/// `log2(sum 2^l)`.
pub fn log2_sum(logs: impl Iterator<Item = f64>) -> f64 {
    let logs: Vec<f64> = logs.collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + logs.iter().map(|l| (l - top).exp2()).sum::<f64>().log2()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationOperator {
    pub alpha: f64,
}

impl Default for RotationOperator {
    fn default() -> Self {
        RotationOperator { alpha: golden_alpha() }
    }
}

impl RotationOperator {
    pub fn new(alpha: f64) -> RotationOperator {
        RotationOperator { alpha }
    }

    /// Where `T^k` moves the point 0.
    pub fn offset(&self, k: u64) -> f64 {
        (k as f64 * self.alpha).rem_euclid(1.0)
    }
}

/// `(T^k f)(t) = f(t - k alpha)`.
pub fn rotate_apply(t: &RotationOperator, f: &StepFunction, k: u64) -> StepFunction {
    if k == 0 {
        return f.clone();
    }
    f.shifted(t.offset(k))
}

fn key(x: f64) -> u64 {
    x.to_bits()
}

/// Largest circular gap between points inserted so far.
struct GapTracker {
    points: BTreeSet<u64>,
    gaps: BTreeMap<u64, usize>,
}

impl GapTracker {
    fn new() -> Self {
        GapTracker { points: BTreeSet::new(), gaps: BTreeMap::new() }
    }

    fn add_gap(&mut self, g: f64) {
        *self.gaps.entry(key(g)).or_insert(0) += 1;
    }

    fn remove_gap(&mut self, g: f64) {
        let k = key(g);
        if let Some(c) = self.gaps.get_mut(&k) {
            *c -= 1;
            if *c == 0 {
                self.gaps.remove(&k);
            }
        }
    }

    fn insert(&mut self, p: f64) {
        let kp = key(p);
        if self.points.contains(&kp) {
            return;
        }
        if self.points.is_empty() {
            self.points.insert(kp);
            self.add_gap(1.0);
            return;
        }
        let prev = self.points.range(..kp).next_back().or_else(|| self.points.iter().next_back()).copied().unwrap();
        let next = self.points.range(kp..).next().or_else(|| self.points.iter().next()).copied().unwrap();
        let (a, b) = (f64::from_bits(prev), f64::from_bits(next));
        let circ = |x: f64, y: f64| if y > x { y - x } else { y - x + 1.0 };
        self.remove_gap(circ(a, b));
        self.add_gap(circ(a, p));
        self.add_gap(circ(p, b));
        self.points.insert(kp);
    }

    fn max_gap(&self) -> f64 {
        self.gaps.keys().next_back().map(|&k| f64::from_bits(k)).unwrap_or(1.0)
    }
}

/// Slack allowed when checking that arcs of the `m`-th rotation cover.
pub fn cover_slack(m: usize) -> f64 {
    BREAKPOINT_SLACK + m as f64 * STEP_ERROR
}

/// Smallest `M` with `[k alpha, k alpha + 1/n]`, `k = 1..M`, covering the
/// circle. The arcs cover exactly when no circular gap between consecutive
/// starting points exceeds `1/n`.
pub fn covering_count(alpha: f64, n: usize) -> Result<usize> {
    covering_count_with_cap(alpha, n, COVER_CAP)
}

pub fn covering_count_with_cap(alpha: f64, n: usize, cap: usize) -> Result<usize> {
    if n == 0 {
        return Err(SpectraError::Invalid("covering needs n >= 1".into()));
    }
    let len = 1.0 / n as f64;
    let mut tracker = GapTracker::new();
    for m in 1..=cap {
        tracker.insert((m as f64 * alpha).rem_euclid(1.0));
        if tracker.max_gap() <= len + cover_slack(m) {
            return Ok(m);
        }
    }
    Err(SpectraError::NoCover { cap })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub n: usize,
    /// First and last `k` of the block, `s_(n-1) + 1` and `s_n`.
    pub first: u64,
    pub last: u64,
    /// Measure of the set where the block sum of `T^k h / 2^k` is at least 1.
    pub covered_measure: f64,
    /// Smallest measure of `{ T^k h / 2^k >= 1 }` over the block.
    pub min_term_measure: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub alpha: f64,
    pub n_max: usize,
    /// `M_1, ..., M_(n_max)`.
    pub counts: Vec<usize>,
    /// `s_1, ..., s_(n_max)`.
    pub partial_counts: Vec<u64>,
    pub blocks: Vec<BlockReport>,
    pub holds: bool,
}

/// Required measure of each block's superlevel set.
pub const FULL_MEASURE: f64 = 1.0 - 1e-9;

/// Builds `h = 2^(s_n)` on `(1/(n+1), 1/n]` and checks that every block of
/// the series `sum T^k h / 2^k` at `lambda = 2` stays at least 1 on almost
/// the whole circle. Only the pieces up to `n_max` are kept; `h` takes the
/// value `2^(s_(n_max))` on `(0, 1/(n_max+1)]`, which is below the full
/// function there and so can only make the check harder.
pub fn build_counterexample(alpha: f64, n_max: usize) -> Result<(StepFunction, CounterexampleReport)> {
    if n_max < 2 {
        return Err(SpectraError::Invalid("the construction needs n_max >= 2".into()));
    }
    let counts: Vec<usize> = (1..=n_max).map(|n| covering_count(alpha, n)).collect::<Result<_>>()?;
    let partial_counts: Vec<u64> = counts
        .iter()
        .scan(0u64, |acc, &m| {
            *acc += m as u64;
            Some(*acc)
        })
        .collect();
    let h = counterexample_function(&partial_counts);
    let rot = RotationOperator::new(alpha);
    let mut blocks = Vec::new();
    for n in 1..=n_max {
        let first = if n == 1 { 1 } else { partial_counts[n - 2] + 1 };
        let last = partial_counts[n - 1];
        let terms: Vec<StepFunction> =
            (first..=last).map(|k| rotate_apply(&rot, &h, k).scaled_log2(-(k as f64))).collect();
        let min_term_measure = terms.iter().map(|f| f.measure_at_least(0.0)).fold(f64::INFINITY, f64::min);
        let covered_measure = StepFunction::sum(&terms).measure_at_least(0.0);
        let term_slack = BREAKPOINT_SLACK + last as f64 * STEP_ERROR;
        let holds = covered_measure >= FULL_MEASURE && min_term_measure >= 1.0 / n as f64 - term_slack;
        blocks.push(BlockReport { n, first, last, covered_measure, min_term_measure, holds });
    }
    let holds = blocks.iter().all(|b| b.holds);
    Ok((h, CounterexampleReport { alpha, n_max, counts, partial_counts, blocks, holds }))
}

fn counterexample_function(partial_counts: &[u64]) -> StepFunction {
    let n_max = partial_counts.len();
    // Arc (1/(m+1), 1/m] carries s_m; below 1/(n_max+1) the last value repeats.
    let mut bp = vec![0.0];
    let mut vals = vec![partial_counts[n_max - 1] as f64];
    for m in (1..=n_max).rev() {
        bp.push(1.0 / (m + 1) as f64);
        vals.push(partial_counts[m - 1] as f64);
    }
    StepFunction { breakpoints: bp, log2_values: vals }.merged()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureRadiusReport {
    pub alpha: f64,
    pub depth: usize,
    /// `mu(|T^n f| / 2^n > eps)` for `n = 1..depth`.
    pub above_one: Vec<f64>,
    /// `mu(|T^n f| 2^n > 1)` for `n = 1..depth`.
    pub below_one: Vec<f64>,
    /// Rotation kept every superlevel measure of every probe.
    pub invariant: bool,
    pub r_l_lower: f64,
    pub r_nn_upper: f64,
    /// `r_l = r_bb = r_c = r_nn` once both bounds are certified.
    pub chain: Option<Bracket>,
}

/// Level used for the decay trace with `nu = 2`.
pub const DECAY_EPS: f64 = 1e-6;

/// Superlevel probes for the invariance check.
fn invariance_probes() -> Vec<StepFunction> {
    let mut out = vec![StepFunction::indicator(0.0, 0.5).unwrap(), StepFunction::indicator(0.1, 0.35).unwrap()];
    out.push(StepFunction::new(vec![0.0, 0.2, 0.55, 0.9], vec![3.0, -1.0, f64::NEG_INFINITY, 0.5]).unwrap());
    if let Ok((h, _)) = build_counterexample(golden_alpha(), 3) {
        out.push(h);
    }
    out
}

/// The radii `r_l` through `r_nn` of the rotation under convergence in
/// measure all equal 1.
///
/// Upper bound: the sets `{ f : mu(|f| > eps) < delta }` form a base at zero
/// and rotation maps each into itself, which gives `r_nn <= 1`. Here that is
/// checked as equality of superlevel measures for every probe, level and
/// power up to `depth`. Lower bound: for the indicator of `[0, 1/2)`,
/// `|T^n f| 2^n > 1` on a set of measure 1/2 for every `n`, so `T^n f / nu^n`
/// does not tend to zero for `nu = 1/2`, and by scaling for no `nu < 1`.
pub fn measure_radius_check(t: &RotationOperator, depth: usize) -> MeasureRadiusReport {
    let f = StepFunction::indicator(0.0, 0.5).unwrap();
    let mut above_one = Vec::with_capacity(depth);
    let mut below_one = Vec::with_capacity(depth);
    for n in 1..=depth {
        let g = rotate_apply(t, &f, n as u64);
        above_one.push(g.scaled_log2(-(n as f64)).measure_above(DECAY_EPS.log2()));
        below_one.push(g.scaled_log2(n as f64).measure_above(0.0));
    }
    let mut invariant = true;
    for p in invariance_probes() {
        let levels: Vec<f64> = p.log2_values().iter().copied().filter(|v| v.is_finite()).chain([-0.5, 10.0]).collect();
        for n in 1..=depth as u64 {
            let g = rotate_apply(t, &p, n);
            let tol = BREAKPOINT_SLACK + n as f64 * STEP_ERROR * p.pieces() as f64;
            for &c in &levels {
                invariant &= (g.measure_at_least(c) - p.measure_at_least(c)).abs() <= tol;
                invariant &= (g.measure_above(c) - p.measure_above(c)).abs() <= tol;
            }
        }
    }
    let stalls = below_one.iter().all(|m| (m - 0.5).abs() <= BREAKPOINT_SLACK);
    let decays = above_one.last().is_some_and(|&m| m == 0.0);
    let r_l_lower = if stalls && depth > 0 { 1.0 } else { 0.0 };
    let r_nn_upper = if invariant { 1.0 } else { f64::INFINITY };
    let chain = (r_l_lower == 1.0 && r_nn_upper == 1.0 && decays).then(|| Bracket::exact(ExtReal::ONE));
    MeasureRadiusReport { alpha: t.alpha, depth, above_one, below_one, invariant, r_l_lower, r_nn_upper, chain }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Merges the arcs `[s, s + len]` on the circle and reports whether they
    /// leave any gap longer than `slack`.
    fn sweep_covers(starts: &[f64], len: f64, slack: f64) -> bool {
        let mut iv: Vec<(f64, f64)> = Vec::new();
        for &s in starts {
            let e = s + len;
            if e > 1.0 {
                iv.push((s, 1.0));
                iv.push((0.0, e - 1.0));
            } else {
                iv.push((s, e));
            }
        }
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut reach = 0.0;
        for (a, b) in iv {
            if a > reach + slack {
                return false;
            }
            reach = f64::max(reach, b);
        }
        reach >= 1.0 - slack
    }

    fn starts(alpha: f64, m: usize) -> Vec<f64> {
        (1..=m).map(|k| (k as f64 * alpha).rem_euclid(1.0)).collect()
    }

    #[test]
    fn rotation_examples() {
        let f = StepFunction::indicator(0.0, 0.5).unwrap();
        let t = RotationOperator::new(0.25);
        assert_eq!(rotate_apply(&t, &f, 0), f);
        assert_eq!(rotate_apply(&t, &f, 1), StepFunction::indicator(0.25, 0.75).unwrap());
        assert_eq!(rotate_apply(&t, &f, 4), f);
        let g = rotate_apply(&RotationOperator::default(), &f, 7);
        assert!((g.measure_at_least(0.0) - 0.5).abs() < 1e-12);
        assert_eq!(g.value_at((7.0 * golden_alpha() + 0.25).rem_euclid(1.0)), ExtReal::ONE);
    }

    #[test]
    fn covering_counts_match_the_sweep() {
        let a = golden_alpha();
        assert_eq!(covering_count(a, 1).unwrap(), 1);
        for n in 2..=12 {
            let m = covering_count(a, n).unwrap();
            assert!(sweep_covers(&starts(a, m), 1.0 / n as f64, cover_slack(m)), "n={n} m={m}");
            assert!(!sweep_covers(&starts(a, m - 1), 1.0 / n as f64, cover_slack(m)), "n={n} m={m}");
        }
        assert!(matches!(covering_count_with_cap(0.25, 8, 1000), Err(SpectraError::NoCover { cap: 1000 })));
        assert_eq!(covering_count(0.25, 4).unwrap(), 4);
    }

    #[test]
    fn counterexample_blocks_cover() {
        let (h, rep) = build_counterexample(golden_alpha(), 5).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert_eq!(rep.blocks.len(), 5);
        assert_eq!(rep.blocks[0].first, 1);
        assert_eq!(rep.blocks[0].last, 1);
        for b in &rep.blocks {
            assert!(b.covered_measure >= FULL_MEASURE);
            assert!(b.min_term_measure >= 1.0 / b.n as f64 - 1e-9);
        }
        assert_eq!(h.log2_at(0.75), rep.partial_counts[0] as f64);
        assert_eq!(h.log2_at(0.45), rep.partial_counts[1] as f64);
        assert!(build_counterexample(golden_alpha(), 1).is_err());
    }

    #[test]
    fn log_domain_sum_survives_huge_values() {
        let big = StepFunction::new(vec![0.0, 0.5], vec![5000.0, 5000.0 - 1.0]).unwrap();
        let s = StepFunction::sum(&[big.clone(), big]);
        assert_eq!(s.log2_at(0.1), 5001.0);
        assert_eq!(s.log2_at(0.7), 5000.0);
        assert_eq!(log2_sum([f64::NEG_INFINITY, f64::NEG_INFINITY].into_iter()), f64::NEG_INFINITY);
    }

    #[test]
    fn rotation_radii_are_one() {
        let r = measure_radius_check(&RotationOperator::default(), 40);
        assert_eq!(r.chain, Some(Bracket::exact(ExtReal::ONE)), "{r:?}");
        assert!(r.below_one.iter().all(|m| (m - 0.5).abs() < 1e-12));
        assert_eq!(*r.above_one.last().unwrap(), 0.0);
        assert_eq!(r.above_one[0], 0.5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rotation_preserves_superlevel_measure(
                raw in proptest::collection::btree_set(1u32..999, 1..8),
                vals in proptest::collection::vec(-4.0f64..4.0, 8),
                k in 0u64..500,
                c in -4.0f64..4.0,
            ) {
                let mut bp: Vec<f64> = vec![0.0];
                bp.extend(raw.iter().map(|&r| r as f64 / 1000.0));
                let f = StepFunction::new(bp.clone(), vals[..bp.len()].to_vec()).unwrap();
                let g = rotate_apply(&RotationOperator::default(), &f, k);
                prop_assert!((g.measure_at_least(c) - f.measure_at_least(c)).abs() < 1e-12);
            }
        }
    }
}
