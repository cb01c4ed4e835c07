//! Neumann partial sums `R_{lambda,n} x = sum_{i<=n} T^i x / lambda^(i+1)`,
//! convergence monitoring in the five topologies, and resolvent-set
//! membership for operators with closed-form resolvents.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::calculus::ESCAPE;
use crate::classify::{classify_boundedness, ClassificationReport, Verdict};
use crate::error::{Result, SpectraError};
use crate::limsup::limsup_root;
use crate::num::{re, Bracket, ExtReal, Scalar, Wide};
use crate::operator::OperatorRep;
use crate::radii::{
    mixed_sequence, nn_candidates, nn_members, p_list, q_list, target, PowerRows, RadiusConfig, RadiusKind, ROW_SCAN,
};
use crate::seminorm::{FamilyKind, Seminorm};
use crate::space::{SequenceClass, SpaceModel};
use crate::vector::{SparseVector, WideVector};
use crate::weight::{Eventually, Weight};

fn check_lambda(lambda: Scalar) -> Result<()> {
    if lambda == re(0.0) {
        return Err(SpectraError::ZeroLambda);
    }
    Ok(())
}

/// The terms `T^i x / lambda^(i+1)` for `i = 0..=n`.
pub fn neumann_terms(t: &OperatorRep, lambda: Scalar, n: usize, x: &WideVector) -> Result<Vec<WideVector>> {
    check_lambda(lambda)?;
    let inv = Wide::new(lambda).recip();
    let mut out = Vec::with_capacity(n + 1);
    let mut y = x.scale(inv);
    for _ in 0..=n {
        let next = t.apply_wide(&y).scale(inv);
        out.push(y);
        y = next;
    }
    Ok(out)
}

pub fn partial_sum_wide(t: &OperatorRep, lambda: Scalar, n: usize, x: &WideVector) -> Result<WideVector> {
    Ok(neumann_terms(t, lambda, n, x)?.iter().fold(WideVector::zero(), |acc, y| acc.add(y)))
}

pub fn partial_sum(t: &OperatorRep, lambda: Scalar, n: usize, x: &SparseVector) -> Result<SparseVector> {
    partial_sum_wide(t, lambda, n, &x.to_wide())?.to_sparse()
}

/// Largest coordinate deviation between `R_{lambda,n}(lambda x - T x)` and
/// `x - T^(n+1) x / lambda^(n+1)`, relative to the largest coordinate of any
/// summand on either side.
pub fn residual_identity_check(t: &OperatorRep, lambda: Scalar, n: usize, x: &SparseVector) -> Result<ExtReal> {
    check_lambda(lambda)?;
    let xw = x.to_wide();
    let v = xw.scale(Wide::new(lambda)).sub(&t.apply_wide(&xw));
    let terms = neumann_terms(t, lambda, n, &v)?;
    let lhs = terms.iter().fold(WideVector::zero(), |acc, y| acc.add(y));
    let tail = t.power_apply_wide(n + 1, &xw).scale(Wide::new(lambda).powi(n as u64 + 1).recip());
    let rhs = xw.sub(&tail);
    let scale = terms.iter().map(|y| y.sup_abs()).fold(xw.sup_abs().max(tail.sup_abs()), ExtReal::max);
    if scale.is_zero() {
        return Ok(ExtReal::ZERO);
    }
    Ok(lhs.sub(&rhs).sup_abs() / scale)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    Converged,
    Diverged,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailStep {
    pub n: usize,
    pub index: usize,
    pub modulus: ExtReal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// The partial sums measured by `seminorm` pass the escape bound.
    Escape { track: String, n: usize, value: ExtReal },
    /// Increments do not decay and the partial sums grow over the last quarter.
    Growth { track: String, from: usize, to: usize, first: ExtReal, last: ExtReal },
    /// Each increment puts a coordinate of non-vanishing size at an index the
    /// earlier partial sums never touched; the coordinatewise limit leaves
    /// the sequence class.
    Trail { probe: SparseVector, steps: Vec<TrailStep> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeumannReport {
    pub lambda: Scalar,
    pub kind: RadiusKind,
    pub terms_used: usize,
    /// Size of the increment `T^n / lambda^(n+1)` in the monitored topology.
    pub residual_trace: Vec<(usize, ExtReal)>,
    pub verdict: Convergence,
    pub witness: Option<Witness>,
    pub reason: String,
}

/// Increments below this count as vanished.
pub const VANISHED: f64 = 1e-12;

// increment sizes a_n and partial sizes s_n for one seminorm or seminorm pair
struct Track {
    label: String,
    a: Vec<ExtReal>,
    s: Vec<ExtReal>,
}

impl Track {
    fn from_increments(label: String, a: Vec<ExtReal>) -> Track {
        let mut acc = ExtReal::ZERO;
        let s = a
            .iter()
            .map(|v| {
                acc = acc + *v;
                acc
            })
            .collect();
        Track { label, a, s }
    }
}

struct TrackVerdict {
    verdict: Convergence,
    witness: Option<Witness>,
    reason: String,
}

fn judge(tr: &Track) -> TrackVerdict {
    let n = tr.a.len();
    let escape = ExtReal::new(ESCAPE);
    if let Some(i) = (0..n).find(|&i| tr.s[i] > escape || tr.a[i] > escape) {
        return TrackVerdict {
            verdict: Convergence::Diverged,
            witness: Some(Witness::Escape { track: tr.label.clone(), n: i + 1, value: tr.s[i].max(tr.a[i]) }),
            reason: format!("{} passes {ESCAPE:e} at n = {}", tr.label, i + 1),
        };
    }
    let q = n * 3 / 4;
    let tail = &tr.a[q..];
    if tail.iter().all(|v| v.is_zero()) {
        return TrackVerdict { verdict: Convergence::Converged, witness: None, reason: "increments vanish".into() };
    }
    let last = *tr.a.last().unwrap();
    let decreasing = tail.windows(2).all(|w| w[1] <= w[0]);
    if last < ExtReal::new(VANISHED) && decreasing {
        return TrackVerdict {
            verdict: Convergence::Converged,
            witness: None,
            reason: format!("increments decrease to {last}"),
        };
    }
    let root = limsup_root(&tr.a).ok();
    if root.is_some_and(|b| b.upper < ExtReal::ONE) {
        return TrackVerdict {
            verdict: Convergence::Converged,
            witness: None,
            reason: format!("root test bracket {} below 1", root.unwrap()),
        };
    }
    let non_decaying = root.is_some_and(|b| b.lower >= ExtReal::ONE) || tail.windows(2).all(|w| w[1] >= w[0]);
    let growing = tr.s[q..].windows(2).all(|w| w[1] > w[0]);
    if non_decaying && growing {
        return TrackVerdict {
            verdict: Convergence::Diverged,
            witness: Some(Witness::Growth {
                track: tr.label.clone(),
                from: q + 1,
                to: n,
                first: tr.s[q],
                last: tr.s[n - 1],
            }),
            reason: format!("{} grows over the last quarter", tr.label),
        };
    }
    TrackVerdict { verdict: Convergence::Inconclusive, witness: None, reason: "no decision".into() }
}

// Diverged if any track diverges, Converged if all converge
fn combine_all(tracks: &[Track]) -> TrackVerdict {
    let verdicts: Vec<TrackVerdict> = tracks.iter().map(judge).collect();
    if let Some(v) = verdicts.iter().find(|v| v.verdict == Convergence::Diverged) {
        return TrackVerdict { verdict: v.verdict, witness: v.witness.clone(), reason: v.reason.clone() };
    }
    if verdicts.iter().all(|v| v.verdict == Convergence::Converged) {
        return TrackVerdict {
            verdict: Convergence::Converged,
            witness: None,
            reason: format!("all {} tracks converge", tracks.len()),
        };
    }
    TrackVerdict { verdict: Convergence::Inconclusive, witness: None, reason: "some tracks undecided".into() }
}

// coordinatewise limits outside a non-complete class
fn trail(t: &OperatorRep, lambda: Scalar, x: &SparseVector, depth: usize, class: SequenceClass) -> Result<Option<Witness>> {
    let terms = neumann_terms(t, lambda, depth, &x.to_wide())?;
    let mut seen: BTreeSet<usize> = terms[0].support().collect();
    let mut steps = Vec::new();
    for (n, y) in terms.iter().enumerate().skip(1) {
        let Some((index, modulus)) = y.iter().map(|(k, z)| (k, z.abs())).max_by(|a, b| a.1.cmp(&b.1)) else {
            return Ok(None);
        };
        if seen.contains(&index) {
            return Ok(None);
        }
        seen.extend(y.support());
        steps.push(TrailStep { n, index, modulus });
    }
    if steps.len() < 8 {
        return Ok(None);
    }
    let top = steps.iter().map(|s| s.modulus).max().unwrap();
    let half = &steps[steps.len() / 2..];
    let holds = match class {
        SequenceClass::Null => half.iter().all(|s| s.modulus >= top * ExtReal::new(1e-6)),
        SequenceClass::Bounded => {
            half.windows(2).all(|w| w[1].modulus >= w[0].modulus)
                && half.last().unwrap().modulus >= half[0].modulus * ExtReal::new(2.0)
        }
        SequenceClass::All => false,
    };
    Ok(holds.then(|| Witness::Trail { probe: x.clone(), steps }))
}

fn pointwise_tracks(t: &OperatorRep, lambda: Scalar, space: &SpaceModel, cfg: &RadiusConfig) -> Result<Vec<Track>> {
    let probes: Vec<SparseVector> =
        if cfg.probes.is_empty() { (1..=cfg.level.max(1)).map(SparseVector::unit).collect() } else { cfg.probes.clone() };
    let mut tracks = Vec::new();
    for x in &probes {
        let terms = neumann_terms(t, lambda, cfg.depth, &x.to_wide())?;
        let top = x.max_index().unwrap_or(1).max(cfg.level);
        let ps: Vec<Seminorm> = match &space.family.kind {
            FamilyKind::Single { norm } => vec![norm.clone()],
            k if space.family.is_coordinate_type() && !matches!(k, FamilyKind::Explicit { .. }) => {
                (1..=top).map(Seminorm::coordinate).collect()
            }
            _ => space.family.enumerate(cfg.level),
        };
        for p in &ps {
            let mut partial = WideVector::zero();
            let mut a = Vec::new();
            let mut s = Vec::new();
            for y in &terms[1..] {
                partial = partial.add(y);
                a.push(p.eval_wide(y)?);
                s.push(p.eval_wide(&partial)?);
            }
            tracks.push(Track { label: format!("{p} at probe {:?}", x.support().collect::<Vec<_>>()), a, s });
        }
    }
    Ok(tracks)
}

fn scaled(seq: Vec<ExtReal>, lambda: Scalar) -> Vec<ExtReal> {
    let l = ExtReal::new(lambda.norm());
    seq.into_iter().enumerate().map(|(i, v)| v / l.powi(i as u64 + 2)).collect()
}

// per-n reduction of several increment sequences
fn reduce(seqs: &[Vec<ExtReal>], take_max: bool) -> Vec<ExtReal> {
    let n = seqs.first().map_or(0, |s| s.len());
    (0..n)
        .map(|i| {
            let it = seqs.iter().map(|s| s[i]);
            if take_max {
                it.fold(ExtReal::ZERO, ExtReal::max)
            } else {
                it.fold(ExtReal::INFINITY, ExtReal::min)
            }
        })
        .collect()
}

/// Monitors the tail increments of `R_{lambda,n}` in the topology of `kind`:
/// seminorms of increments at the probes for `L`, box mixed seminorms of the
/// increment operators for `BB`, and the mixed-seminorm patterns of the
/// radius formulas for `C`, `NN` and `NB`.
pub fn converge_monitor(
    t: &OperatorRep,
    lambda: Scalar,
    kind: RadiusKind,
    space: &SpaceModel,
    cfg: &RadiusConfig,
) -> Result<NeumannReport> {
    check_lambda(lambda)?;
    let depth = cfg.depth.max(8);
    let cfg = RadiusConfig { depth, ..cfg.clone() };
    let level = cfg.level.max(1);
    let output = t.output_support();
    let scan = ROW_SCAN.max(level);
    let mut rows = PowerRows::new(t, depth);
    let family = &space.family;

    // each of the five convergences implies pointwise convergence, so a
    // limit outside the class rules them all out
    if !space.complete && space.class != SequenceClass::All {
        let probes: Vec<SparseVector> =
            if cfg.probes.is_empty() { vec![SparseVector::unit(1)] } else { cfg.probes.clone() };
        for x in &probes {
            if let Some(w) = trail(t, lambda, x, depth, space.class)? {
                let residual_trace = match &w {
                    Witness::Trail { steps, .. } => steps.iter().map(|s| (s.n, s.modulus)).collect(),
                    _ => vec![],
                };
                return Ok(NeumannReport {
                    lambda,
                    kind,
                    terms_used: depth,
                    residual_trace,
                    verdict: Convergence::Diverged,
                    witness: Some(w),
                    reason: "partial sums are coordinatewise Cauchy but their limit leaves the space".into(),
                });
            }
        }
    }

    let mut nn_choice = None;
    let tracks: Vec<Track> = match kind {
        RadiusKind::L => pointwise_tracks(t, lambda, space, &cfg)?,
        RadiusKind::BB => {
            let (qs, _) = q_list(family, level, &output);
            let mut out = Vec::new();
            for b in space.bounded_sets.enumerate(usize::MAX) {
                for q in &qs {
                    let tq = target(q, &output, scan);
                    let a = scaled(mixed_sequence(&mut rows, &b, &tq), lambda);
                    out.push(Track::from_increments(format!("m({b}, {q})"), a));
                }
            }
            out
        }
        RadiusKind::C => {
            let (qs, _) = q_list(family, level, &output);
            let ps = p_list(family, level);
            let mut out = Vec::new();
            for q in &qs {
                let tq = target(q, &output, scan);
                let seqs: Vec<Vec<ExtReal>> =
                    ps.iter().map(|p| scaled(mixed_sequence(&mut rows, p, &tq), lambda)).collect();
                out.push(Track::from_increments(format!("inf_p m(p, {q})"), reduce(&seqs, false)));
            }
            out
        }
        RadiusKind::NB => {
            let (qs, _) = q_list(family, level, &output);
            let ps = p_list(family, level);
            let mut per_p = Vec::new();
            for p in &ps {
                let seqs: Vec<Vec<ExtReal>> = qs
                    .iter()
                    .map(|q| scaled(mixed_sequence(&mut rows, p, &target(q, &output, scan)), lambda))
                    .collect();
                per_p.push(reduce(&seqs, true));
            }
            vec![Track::from_increments("inf_p sup_q m(p, q)".into(), reduce(&per_p, false))]
        }
        RadiusKind::NN => {
            // converges when the increments vanish for one candidate base
            let mut best: Option<(Track, TrackVerdict)> = None;
            for (fam, exhaustive) in nn_candidates(t, space, &cfg) {
                let mut seqs = Vec::new();
                for p in nn_members(&fam, exhaustive, level) {
                    if p.as_box().is_none() {
                        if let Some((seq, _)) = crate::radii::graph_power_sequence(t, &p, depth) {
                            seqs.push(scaled(seq, lambda));
                        }
                        continue;
                    }
                    let tp = target(&p, &output, scan);
                    seqs.push(scaled(mixed_sequence(&mut rows, &p, &tp), lambda));
                }
                if seqs.is_empty() {
                    continue;
                }
                let tr = Track::from_increments(format!("sup_p p over {}", fam.kind_name()), reduce(&seqs, true));
                let v = judge(&tr);
                let rank = |v: &TrackVerdict| match v.verdict {
                    Convergence::Converged => 0,
                    Convergence::Inconclusive => 1,
                    Convergence::Diverged => 2,
                };
                if best.as_ref().is_none_or(|(_, b)| rank(&v) < rank(b)) {
                    best = Some((tr, v));
                }
            }
            let (tr, v) = best.ok_or_else(|| SpectraError::UnsupportedCombination("no nn candidate".into()))?;
            nn_choice = Some(v);
            vec![tr]
        }
    };
    let combined = match nn_choice {
        Some(v) => v,
        None => combine_all(&tracks),
    };
    // the worst track as the trace
    let trace_track = tracks
        .iter()
        .max_by(|a, b| a.a.last().cmp(&b.a.last()))
        .ok_or_else(|| SpectraError::UnsupportedCombination(format!("{kind} monitor without seminorms")))?;
    Ok(NeumannReport {
        lambda,
        kind,
        terms_used: depth,
        residual_trace: trace_track.a.iter().enumerate().map(|(i, v)| (i + 1, *v)).collect(),
        verdict: combined.verdict,
        witness: combined.witness,
        reason: combined.reason,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub kind: RadiusKind,
    /// `Yes` when lambda lies in the resolvent set of this class.
    pub in_resolvent_set: Verdict,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub lambda: Scalar,
    pub resolvent: String,
    pub memberships: Vec<Membership>,
    /// Supporting numerical evidence, such as truncated solves.
    pub evidence: Vec<String>,
    /// Set when the verdicts restate a claim the source leaves unproved.
    pub asserted: bool,
}

impl SpectrumReport {
    pub fn get(&self, kind: RadiusKind) -> Verdict {
        self.memberships.iter().find(|m| m.kind == kind).map_or(Verdict::Unknown, |m| m.in_resolvent_set)
    }
}

struct Classes {
    exists: (Verdict, String),
    bb: (Verdict, String),
    c: (Verdict, String),
    nn: (Verdict, String),
    nb: (Verdict, String),
}

fn memberships(c: Classes) -> Vec<Membership> {
    let mut out = Vec::new();
    let mut chain_no: Option<String> = None;
    for (kind, (v, w)) in [
        (RadiusKind::L, c.exists),
        (RadiusKind::BB, c.bb),
        (RadiusKind::C, c.c),
        (RadiusKind::NN, c.nn),
        (RadiusKind::NB, c.nb),
    ] {
        // spectra grow along the chain
        let (v, w) = match &chain_no {
            Some(why) => (Verdict::No, why.clone()),
            None => (v, w),
        };
        if v == Verdict::No && chain_no.is_none() {
            chain_no = Some(format!("lambda in the {kind} spectrum: {w}"));
        }
        out.push(Membership { kind, in_resolvent_set: v, witness: w });
    }
    out
}

fn from_classification(r: &ClassificationReport) -> [(Verdict, String); 3] {
    [
        (r.bb.verdict, r.bb.witness.clone()),
        (r.continuous.verdict, r.continuous.witness.clone()),
        (r.nn.verdict, r.nn.witness.clone()),
    ]
}

/// Resolvent-set membership of `lambda` for every class, for diagonals,
/// finite-rank operators and weighted shifts by one step.
pub fn spectrum_probe(t: &OperatorRep, lambda: Scalar, space: &SpaceModel) -> Result<SpectrumReport> {
    let n = t.normalize();
    if let Some(d) = n.as_diagonal() {
        return diagonal_probe(&d, lambda, space);
    }
    match &n {
        OperatorRep::FiniteRank { functionals, range } => finite_rank_probe(functionals, range, lambda, space),
        OperatorRep::Scale { factor, operator } => match &**operator {
            OperatorRep::FiniteRank { functionals, range } => {
                let range: Vec<SparseVector> = range.iter().map(|y| y.scale(*factor)).collect();
                finite_rank_probe(functionals, &range, lambda, space)
            }
            _ => Err(SpectraError::NoClosedForm(format!("{n:?}"))),
        },
        OperatorRep::WeightedShift { offset: off @ (1 | -1), weight } => shift_probe(*off, weight, lambda, space),
        _ => Err(SpectraError::NoClosedForm("resolvents of composite operators".into())),
    }
}

const HIT_SCAN: usize = 4096;

fn diagonal_probe(d: &Weight, lambda: Scalar, space: &SpaceModel) -> Result<SpectrumReport> {
    let dist = d.inf_dist_from(lambda, 1);
    let hit = (1..=HIT_SCAN).find(|&k| d.value(k) == lambda);
    let no = |why: String| Classes {
        exists: (Verdict::No, why.clone()),
        bb: (Verdict::No, why.clone()),
        c: (Verdict::No, why.clone()),
        nn: (Verdict::No, why.clone()),
        nb: (Verdict::No, why),
    };
    let unknown = || (Verdict::Unknown, String::new());
    let mut resolvent = "none".to_string();
    let classes = if let Some(k) = hit {
        no(format!("e_{k} spans the kernel of lambda - T"))
    } else if dist.lower > ExtReal::ZERO || space.class == SequenceClass::All {
        let bounded_inverse = dist.lower > ExtReal::ZERO;
        let never_hit = bounded_inverse || (lambda == re(0.0) && d.nowhere_zero_from(1) == Some(true));
        if !never_hit {
            Classes { exists: unknown(), bb: unknown(), c: unknown(), nn: unknown(), nb: unknown() }
        } else {
            let r = Weight::Resolvent { lambda, of: Box::new(d.clone()) };
            resolvent = format!("diagonal 1/(lambda - d(k)), inf distance {}", dist.lower);
            let rop = OperatorRep::diagonal(r.clone());
            let cls = classify_boundedness(&rop, space)?;
            let [bb, c, nn] = from_classification(&cls);
            let nb = if space.locally_bounded {
                (cls.nb.verdict, cls.nb.witness.clone())
            } else {
                match r.eventually() {
                    Eventually::Constant(alpha) => match head_part(d, lambda, alpha) {
                        Some(w) => {
                            let v = classify_boundedness(&OperatorRep::diagonal(w), space)?.nb;
                            (v.verdict, format!("R - {alpha} I: {}", v.witness))
                        }
                        None => unknown(),
                    },
                    Eventually::NotConstant => (
                        Verdict::No,
                        "R - alpha I is a diagonal that never vanishes eventually, for every alpha".into(),
                    ),
                    Eventually::Unknown => unknown(),
                }
            };
            Classes { exists: (Verdict::Yes, "diagonal inverse".into()), bb, c, nn, nb }
        }
    } else if dist.upper.is_zero() {
        no(format!("1/(lambda - d(k)) is unbounded, so the inverse leaves {:?} sequences", space.class))
    } else {
        Classes { exists: unknown(), bb: unknown(), c: unknown(), nn: unknown(), nb: unknown() }
    };
    Ok(SpectrumReport { lambda, resolvent, memberships: memberships(classes), evidence: vec![], asserted: false })
}

// R - alpha I as an explicit finite table when d is eventually constant
fn head_part(d: &Weight, lambda: Scalar, alpha: Scalar) -> Option<Weight> {
    match d.normalize() {
        Weight::Table { values, .. } => {
            Some(Weight::table(values.iter().map(|v| (lambda - v).inv() - alpha).collect(), re(0.0)))
        }
        Weight::GeoPower { base, exponent, .. } if base == 1.0 && exponent == 0.0 => {
            Some(Weight::table(vec![], re(0.0)))
        }
        _ => None,
    }
}

fn finite_rank_probe(fs: &[SparseVector], ys: &[SparseVector], lambda: Scalar, space: &SpaceModel) -> Result<SpectrumReport> {
    use nalgebra::{Complex, DMatrix};
    let r = fs.len();
    let beyond = fs.iter().chain(ys).filter_map(|v| v.max_index()).max().unwrap_or(0) + 1;
    if lambda == re(0.0) {
        let why = format!("T has finite rank, e_{beyond} lies in its kernel");
        let c = Classes {
            exists: (Verdict::No, why.clone()),
            bb: (Verdict::No, why.clone()),
            c: (Verdict::No, why.clone()),
            nn: (Verdict::No, why.clone()),
            nb: (Verdict::No, why),
        };
        return Ok(SpectrumReport { lambda, resolvent: "none".into(), memberships: memberships(c), evidence: vec![], asserted: false });
    }
    // lambda - G with G_ij = f_i(y_j)
    let m = DMatrix::from_fn(r, r, |i, j| {
        let z = if i == j { lambda } else { re(0.0) } - fs[i].dot(&ys[j]);
        Complex::new(z.re, z.im)
    });
    let svd = m.clone().svd(true, true);
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if r > 0 && smin <= 1e-12 * smax.max(lambda.norm()) {
        let why = format!("lambda is an eigenvalue of the compression (smallest singular value {smin:e})");
        let c = Classes {
            exists: (Verdict::No, why.clone()),
            bb: (Verdict::No, why.clone()),
            c: (Verdict::No, why.clone()),
            nn: (Verdict::No, why.clone()),
            nb: (Verdict::No, why),
        };
        return Ok(SpectrumReport { lambda, resolvent: "none".into(), memberships: memberships(c), evidence: vec![], asserted: false });
    }
    // R = (1/lambda)(I + Y (lambda - G)^{-1} F)
    let inv = m.try_inverse().ok_or_else(|| SpectraError::Domain("singular compression".into()))?;
    let mut new_fs = Vec::with_capacity(r);
    for i in 0..r {
        let mut f = SparseVector::zero();
        for (j, fj) in fs.iter().enumerate() {
            let c = inv[(i, j)];
            f = f.add(&fj.scale(Scalar::new(c.re, c.im)));
        }
        new_fs.push(f);
    }
    let inv_l = re(1.0) / lambda;
    let k = OperatorRep::FiniteRank { functionals: new_fs, range: ys.iter().map(|y| y.scale(inv_l)).collect() };
    let rop = OperatorRep::sum(vec![OperatorRep::scale(inv_l, OperatorRep::identity()), k.clone()]);
    // (lambda - T) R = I on unit probes
    let t = OperatorRep::FiniteRank { functionals: fs.to_vec(), range: ys.to_vec() };
    let mut worst: f64 = 0.0;
    for j in 1..=beyond {
        let x = SparseVector::unit(j);
        let rx = rop.try_apply(&x)?;
        let back = rx.scale(lambda).sub(&t.try_apply(&rx)?);
        worst = worst.max(back.sub(&x).sup_abs());
    }
    let cls = classify_boundedness(&rop, space)?;
    let [bb, c, nn] = from_classification(&cls);
    let nb_s = classify_boundedness(&k, space)?.nb;
    let classes = Classes {
        exists: (Verdict::Yes, "(1/lambda)(I + Y (lambda - G)^{-1} F)".into()),
        bb,
        c,
        nn,
        nb: (nb_s.verdict, format!("R - I/lambda has finite rank: {}", nb_s.witness)),
    };
    Ok(SpectrumReport {
        lambda,
        resolvent: "identity multiple plus finite rank".into(),
        memberships: memberships(classes),
        evidence: vec![format!("max |(lambda - T) R e_j - e_j| = {worst:e} for j <= {beyond}")],
        asserted: false,
    })
}

const SHIFT_DEPTH: usize = 60;
const SHIFT_WINDOWS: usize = 256;

/// Upper bounds for `sup_j |prod of i consecutive weights|`, the norms of
/// `T^i` on bounded sequences: windows starting at or before `SHIFT_WINDOWS`
/// are multiplied out, later ones bounded by the tail supremum.
fn shift_power_norms(weight: &Weight, first: usize, depth: usize) -> Vec<ExtReal> {
    let tail = weight.sup_abs_from(first + SHIFT_WINDOWS).upper;
    (1..=depth)
        .map(|i| {
            let mut best = tail.powi(i as u64);
            for j in first..first + SHIFT_WINDOWS {
                let p = (j..j + i).fold(ExtReal::ONE, |acc, k| acc * weight.abs(k));
                best = best.max(p);
            }
            best
        })
        .collect()
}

// solve (lambda - T) x = e_1 on the first dim coordinates
fn truncated_solve(offset: i64, weight: &Weight, lambda: Scalar, dim: usize) -> Vec<Scalar> {
    let mut x = vec![re(0.0); dim];
    let rhs = |j: usize| if j == 0 { re(1.0) } else { re(0.0) };
    if offset == 1 {
        // lambda x_j - w(j+1) x_{j+1} = y_j, back substitution from the cut
        for j in (0..dim).rev() {
            let next = if j + 1 < dim { weight.value(j + 2) * x[j + 1] } else { re(0.0) };
            x[j] = (rhs(j) + next) / lambda;
        }
    } else {
        for j in 0..dim {
            let prev = if j > 0 { weight.value(j) * x[j - 1] } else { re(0.0) };
            x[j] = (rhs(j) + prev) / lambda;
        }
    }
    x
}

fn shift_probe(offset: i64, weight: &Weight, lambda: Scalar, space: &SpaceModel) -> Result<SpectrumReport> {
    let unknown = || (Verdict::Unknown, String::new());
    let all_no = |why: String| Classes {
        exists: (Verdict::No, why.clone()),
        bb: (Verdict::No, why.clone()),
        c: (Verdict::No, why.clone()),
        nn: (Verdict::No, why.clone()),
        nb: (Verdict::No, why),
    };
    let nowhere_zero = weight.nowhere_zero_from(if offset == 1 { 2 } else { 1 }) == Some(true);
    let first = if offset == 1 { 2 } else { 1 };
    let norms = shift_power_norms(weight, first, SHIFT_DEPTH);
    let rho: Bracket = limsup_root(&norms)?;
    let mut evidence = vec![format!("norms of T^i on bounded sequences have root bracket {rho}")];
    let l = ExtReal::new(lambda.norm());
    let report = |c: Classes, evidence: Vec<String>, asserted: bool| SpectrumReport {
        lambda,
        resolvent: if c.exists.0 == Verdict::Yes { "Neumann series".into() } else { "none".into() },
        memberships: memberships(c),
        evidence,
        asserted,
    };
    if lambda == re(0.0) {
        let why = if offset == 1 {
            "T e_1 = 0".to_string()
        } else {
            "e_1 is not in the range of T".to_string()
        };
        return Ok(report(all_no(why), evidence, false));
    }
    // existence of the algebraic inverse on the class
    let exists: (Verdict, String) = if space.class == SequenceClass::All {
        if offset == -1 {
            (Verdict::Yes, "lambda - T is lower bidiagonal with nonzero diagonal".into())
        } else if nowhere_zero {
            (Verdict::No, "x_(k+1) = lambda x_k / w(k+1) spans the kernel".into())
        } else {
            unknown()
        }
    } else if rho.upper < l {
        (Verdict::Yes, format!("sum of |lambda|^-i |T^i| converges: {rho} < {l}"))
    } else if offset == -1 {
        // unique solution of (lambda - T) x = e_1: x_(1+i) = (T^i)_(1+i,1) / lambda^(i+1)
        let col: Vec<ExtReal> = (0..SHIFT_DEPTH)
            .map(|i| {
                let p = (1..=i).fold(ExtReal::ONE, |acc, k| acc * weight.abs(k));
                p / l.powi(i as u64 + 1)
            })
            .collect();
        let top = col.iter().copied().fold(ExtReal::ZERO, ExtReal::max);
        let tail = &col[SHIFT_DEPTH * 3 / 4..];
        let leaves = match space.class {
            SequenceClass::Null => tail.iter().all(|v| *v >= top * ExtReal::new(1e-3)),
            _ => tail.iter().any(|v| *v > ExtReal::new(ESCAPE)),
        };
        if leaves {
            (Verdict::No, "the unique solution of (lambda - T) x = e_1 leaves the space".into())
        } else {
            unknown()
        }
    } else {
        unknown()
    };
    if exists.0 != Verdict::Yes {
        let c = if exists.0 == Verdict::No {
            all_no(exists.1)
        } else {
            Classes { exists, bb: unknown(), c: unknown(), nn: unknown(), nb: unknown() }
        };
        return Ok(report(c, evidence, false));
    }
    // truncated solves at two sizes agree when the inverse is stable
    let (a, b) = (truncated_solve(offset, weight, lambda, 40), truncated_solve(offset, weight, lambda, 80));
    let gap = a.iter().zip(&b).take(20).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
    evidence.push(format!("truncated solves of (lambda - T) x = e_1 at sizes 40 and 80 differ by {gap:e} on the first 20 coordinates"));
    if space.is_normed() {
        let why = "bounded inverse on a normed space".to_string();
        let c = Classes {
            exists,
            bb: (Verdict::Yes, why.clone()),
            c: (Verdict::Yes, why.clone()),
            nn: (Verdict::Yes, why.clone()),
            nb: (Verdict::Yes, why),
        };
        return Ok(report(c, evidence, false));
    }
    if !space.is_coordinatewise() || !nowhere_zero {
        let c = Classes { exists, bb: unknown(), c: unknown(), nn: unknown(), nb: unknown() };
        return Ok(report(c, evidence, false));
    }
    if offset == -1 {
        let c = Classes {
            exists,
            bb: (Verdict::Yes, "continuous".into()),
            c: (Verdict::Yes, "lower triangular, every row is finite".into()),
            nn: (Verdict::Yes, "initial segments are invariant under lower triangular maps".into()),
            nb: (Verdict::No, "R - alpha I has nonzero entries below the diagonal in every row".into()),
        };
        return Ok(report(c, evidence, false));
    }
    // row 1 of R reads every coordinate: coefficient of x_(1+i) is prod w(2..=1+i) / lambda^(i+1)
    let coef = |i: usize| (2..=1 + i).fold(ExtReal::ONE, |acc, k| acc * weight.abs(k)) / l.powi(i as u64 + 1);
    let mut bb = (Verdict::Unknown, String::new());
    for (bi, set) in space.bounded_sets.enumerate(usize::MAX).iter().enumerate() {
        let Some(view) = set.as_box() else { continue };
        let mut sum = ExtReal::ZERO;
        for i in 0..SHIFT_DEPTH * 4 {
            let w = view.omega(1 + i);
            sum = sum + if w.is_zero() { ExtReal::INFINITY } else { coef(i) / w };
            if sum > ExtReal::new(ESCAPE) {
                bb = (Verdict::No, format!("coordinate 1 of R is unbounded on bounded set {bi} (sum passes {ESCAPE:e} after {} terms)", i + 1));
                break;
            }
        }
        if bb.0 == Verdict::No {
            break;
        }
    }
    let why = "coordinate 1 of R reads every coordinate with a nonzero coefficient".to_string();
    let c = Classes {
        exists,
        bb,
        c: (Verdict::No, why.clone()),
        nn: (Verdict::No, why.clone()),
        nb: (Verdict::No, why),
    };
    Ok(report(c, evidence, true))
}
