//! The five spectral radii through seminorm formulas:
//!
//! * `r_l  = sup_{p, x} limsup p(T^n x)^(1/n)`
//! * `r_bb = sup_{B, q} limsup m_{B,q}(T^n)^(1/n)`
//! * `r_c  = sup_q inf_p limsup m_{p,q}(T^n)^(1/n)`
//! * `r_nn = inf_Q sup_{p in Q} limsup p(T^n)^(1/n)` over generating families `Q`
//! * `r_nb = inf_p sup_q limsup m_{p,q}(T^n)^(1/n)`
//!
//! Sups and infs run over finite enumerations. A sup over a subset is a lower
//! bound and an inf over a subset an upper bound; each estimate records which
//! side holds for the untruncated radius. Structural closed forms override
//! the numeric bracket when they apply.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::calculus::row_value;
use crate::error::{Result, SpectraError};
use crate::limsup::{limsup_root_with, RootOptions};
use crate::num::{re, Bracket, ExtReal, Scalar};
use crate::operator::{OperatorRep, Triangularity};
use crate::seminorm::{FamilyKind, Seminorm, SeminormFamily, MAX_DIRECTED_LEVEL};
use crate::space::{SequenceClass, SpaceModel};
use crate::vector::{SparseVector, WideVector};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusKind {
    L,
    BB,
    C,
    NN,
    NB,
}

impl RadiusKind {
    pub const ALL: [RadiusKind; 5] = [RadiusKind::L, RadiusKind::BB, RadiusKind::C, RadiusKind::NN, RadiusKind::NB];

    pub fn name(self) -> &'static str {
        match self {
            RadiusKind::L => "l",
            RadiusKind::BB => "bb",
            RadiusKind::C => "c",
            RadiusKind::NN => "nn",
            RadiusKind::NB => "nb",
        }
    }
}

impl fmt::Display for RadiusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r_{}", self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub kind: RadiusKind,
    pub lower: ExtReal,
    pub upper: ExtReal,
    /// `lower` bounds the untruncated radius from below.
    pub certified_lower: bool,
    /// `upper` bounds the untruncated radius from above.
    pub certified_upper: bool,
    /// The numeric bracket before any closed form was applied.
    pub numeric: Bracket,
    /// The sequence `t_n` that decided the numeric bracket.
    pub iterates: Vec<(usize, ExtReal)>,
    pub method: String,
}

impl RadiusEstimate {
    pub fn bracket(&self) -> Bracket {
        Bracket::new(self.lower, self.upper)
    }

    pub fn is_exact(&self) -> bool {
        self.certified_lower && self.certified_upper && self.lower == self.upper
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadiusConfig {
    pub depth: usize,
    pub level: usize,
    /// Probe vectors for `r_l`; the unit vectors up to the level when empty.
    pub probes: Vec<SparseVector>,
    /// Extra candidate families for `r_nn`.
    pub candidates: Vec<SeminormFamily>,
}

impl Default for RadiusConfig {
    fn default() -> RadiusConfig {
        RadiusConfig { depth: 60, level: 8, probes: Vec::new(), candidates: Vec::new() }
    }
}

impl RadiusConfig {
    pub fn new(depth: usize, level: usize) -> RadiusConfig {
        RadiusConfig { depth, level, ..RadiusConfig::default() }
    }

    pub fn with_probes(mut self, probes: Vec<SparseVector>) -> RadiusConfig {
        self.probes = probes;
        self
    }
}

/// Rows scanned for norms over infinitely many coordinates.
pub(crate) const ROW_SCAN: usize = 64;

/// Largest number of seminorms taken from a directed enumeration for `r_nn`.
const NN_ENUMERATION_CAP: usize = 512;

// rows of T^1..T^N, computed by transposed iteration
pub(crate) struct PowerRows<'a> {
    t: &'a OperatorRep,
    depth: usize,
    rows: BTreeMap<usize, Vec<WideVector>>,
}

impl<'a> PowerRows<'a> {
    pub(crate) fn new(t: &'a OperatorRep, depth: usize) -> PowerRows<'a> {
        PowerRows { t, depth, rows: BTreeMap::new() }
    }

    pub(crate) fn get(&mut self, j: usize) -> &[WideVector] {
        let (t, depth) = (self.t, self.depth);
        self.rows.entry(j).or_insert_with(|| {
            let mut out = Vec::with_capacity(depth);
            let mut r = WideVector::unit(j);
            for _ in 0..depth {
                r = t.apply_transpose_wide(&r);
                out.push(r.clone());
            }
            out
        })
    }
}

// which rows a target seminorm reads
pub(crate) struct Target {
    rows: Vec<(usize, ExtReal)>,
    exhaustive: bool,
}

pub(crate) fn target(q: &Seminorm, output: &Option<BTreeSet<usize>>, scan: usize) -> Target {
    let b = q.as_box().expect("box seminorm");
    if let Some(js) = b.indices.elements() {
        return Target { rows: js.into_iter().map(|j| (j, b.omega(j))).collect(), exhaustive: true };
    }
    match output {
        Some(out) => Target {
            rows: out.iter().filter(|&&j| b.indices.contains(j)).map(|&j| (j, b.omega(j))).collect(),
            exhaustive: true,
        },
        None => {
            let s = b.indices.start();
            Target { rows: (s..s + scan).map(|j| (j, b.omega(j))).collect(), exhaustive: false }
        }
    }
}

// t_n = sup_{j} omega_q(j) * sum_i |(T^n)_{ji}| / omega_p(i)
pub(crate) fn mixed_sequence(rows: &mut PowerRows, p: &Seminorm, q: &Target) -> Vec<ExtReal> {
    let pb = p.as_box().expect("box seminorm");
    let mut t = vec![ExtReal::ZERO; rows.depth];
    for &(j, w) in &q.rows {
        if w.is_zero() {
            continue;
        }
        for (n, r) in rows.get(j).iter().enumerate() {
            t[n] = t[n].max(w * row_value(r, &pb));
        }
    }
    t
}

// equal seminorms make the mixed power sequence submultiplicative
fn same_box(a: &Seminorm, b: &Seminorm) -> bool {
    a == b
        || matches!((a.as_box(), b.as_box()), (Some(x), Some(y))
            if x.indices == y.indices && x.has_unit_scale() && y.has_unit_scale())
}

struct Scored {
    bracket: Bracket,
    seq: Vec<ExtReal>,
}

fn score(seq: Vec<ExtReal>, submultiplicative: bool) -> Result<Scored> {
    let bracket = limsup_root_with(&seq, RootOptions { submultiplicative })?;
    Ok(Scored { bracket, seq })
}

fn sup_of(items: Vec<Scored>) -> Option<Scored> {
    let lower = items.iter().map(|s| s.bracket.lower).max()?;
    let upper = items.iter().map(|s| s.bracket.upper).max()?;
    let best = items.into_iter().max_by(|a, b| a.bracket.upper.cmp(&b.bracket.upper))?;
    Some(Scored { bracket: Bracket::new(lower, upper), seq: best.seq })
}

fn inf_of(items: Vec<Scored>) -> Option<Scored> {
    let lower = items.iter().map(|s| s.bracket.lower).min()?;
    let upper = items.iter().map(|s| s.bracket.upper).min()?;
    let best = items.into_iter().min_by(|a, b| a.bracket.lower.cmp(&b.bracket.lower))?;
    Some(Scored { bracket: Bracket::new(lower, upper), seq: best.seq })
}

/// The seminorm that dominates the enumeration of a directed family at
/// `level`; for the inf over `p` of `m_{p,q}` it attains the minimum.
pub(crate) fn family_top(family: &SeminormFamily, level: usize) -> Option<Seminorm> {
    if !family.directed {
        return None;
    }
    match &family.kind {
        FamilyKind::Coordinates | FamilyKind::InitialSegments => Some(Seminorm::finite_max(1..=level)),
        FamilyKind::CoordinatesContaining { core } => {
            Some(Seminorm::finite_max(core.iter().copied().chain(1..=level)))
        }
        FamilyKind::Single { norm } => Some(norm.clone()),
        _ => None,
    }
}

// targets for sups over q; sup over finite maxima equals sup over members
pub(crate) fn q_list(family: &SeminormFamily, level: usize, output: &Option<BTreeSet<usize>>) -> (Vec<Seminorm>, bool) {
    match &family.kind {
        FamilyKind::Coordinates | FamilyKind::InitialSegments | FamilyKind::CoordinatesContaining { .. } => {
            let mut js: BTreeSet<usize> = (1..=level).collect();
            if let FamilyKind::CoordinatesContaining { core } = &family.kind {
                js.extend(core.iter().copied());
            }
            // rows outside the output support vanish
            let exhaustive = match output {
                Some(out) => {
                    js.extend(out.iter().copied());
                    true
                }
                None => false,
            };
            (js.into_iter().map(Seminorm::coordinate).collect(), exhaustive)
        }
        FamilyKind::Single { norm } => (vec![norm.clone()], true),
        _ => (family.enumerate(level), false),
    }
}

pub(crate) fn p_list(family: &SeminormFamily, level: usize) -> Vec<Seminorm> {
    match family_top(family, level) {
        Some(top) => vec![top],
        None => family.enumerate(level),
    }
}

/// Candidate generating families for `r_nn`, flagged when every member of
/// the family is covered by the enumeration.
pub(crate) fn nn_candidates(t: &OperatorRep, space: &SpaceModel, cfg: &RadiusConfig) -> Vec<(SeminormFamily, bool)> {
    let family = &space.family;
    let output = t.output_support();
    // graph norms of a diagonal all see the same sequence under a diagonal T
    let uniform = match &family.kind {
        FamilyKind::Graph { operator, .. } => t.as_diagonal().is_some() && operator.as_diagonal().is_some(),
        _ => false,
    };
    let mut candidates: Vec<(SeminormFamily, bool)> = vec![(family.clone(), family.is_single_norm() || uniform)];
    if family.is_coordinate_type() {
        if let (Some(read), Some(out)) = (t.read_support(), &output) {
            let core: BTreeSet<usize> = read.union(out).copied().collect();
            if !core.is_empty() {
                candidates.push((SeminormFamily::coordinates_containing(core), true));
            }
        }
        if t.triangularity() <= Triangularity::Lower {
            candidates.push((SeminormFamily::initial_segments(), false));
        }
    }
    candidates.extend(cfg.candidates.iter().cloned().map(|f| (f, false)));
    candidates
}

pub(crate) fn nn_members(fam: &SeminormFamily, exhaustive: bool, level: usize) -> Vec<Seminorm> {
    match &fam.kind {
        // every member containing the core gives the same value
        FamilyKind::CoordinatesContaining { core } if exhaustive => {
            vec![Seminorm::finite_max(core.iter().copied())]
        }
        FamilyKind::Coordinates if fam.directed => {
            fam.enumerate(level.min(MAX_DIRECTED_LEVEL)).into_iter().take(NN_ENUMERATION_CAP).collect()
        }
        _ => fam.enumerate(level),
    }
}

/// `p(T^n)` for a graph norm `p` built from a diagonal and a diagonal `T`:
/// unit vectors attain `p(T^n) = sup_k |d(k)|^n` since both act coordinatewise.
pub(crate) fn graph_power_sequence(t: &OperatorRep, p: &Seminorm, depth: usize) -> Option<(Vec<ExtReal>, bool)> {
    let Seminorm::GraphNorm { operator, .. } = p else { return None };
    let (d, _) = (t.as_diagonal()?, operator.as_diagonal()?);
    let sup = d.sup_abs_from(1);
    Some(((1..=depth as u64).map(|n| sup.upper.powi(n)).collect(), sup.is_exact()))
}

struct Numeric {
    scored: Scored,
    certified_lower: bool,
    certified_upper: bool,
    method: String,
}

fn probes_for(cfg: &RadiusConfig, t: &OperatorRep) -> Vec<SparseVector> {
    if !cfg.probes.is_empty() {
        return cfg.probes.clone();
    }
    let mut top = cfg.level;
    if let Some(s) = t.read_support() {
        top = top.max(s.into_iter().max().unwrap_or(0));
    }
    (1..=top.max(1)).map(SparseVector::unit).collect()
}

fn numeric(kind: RadiusKind, t: &OperatorRep, space: &SpaceModel, cfg: &RadiusConfig) -> Result<Numeric> {
    let level = cfg.level.max(1);
    let output = t.output_support();
    let scan = ROW_SCAN.max(level);
    let mut rows = PowerRows::new(t, cfg.depth);
    let family = &space.family;
    let single = family.is_single_norm();
    let finite_dim = t.read_support().is_some() && output.is_some();
    let none = || SpectraError::UnsupportedCombination(format!("{kind} over an empty enumeration"));
    // on a finite block every radius is the spectral radius of the block
    let block = finite_dim && (single || family.is_coordinate_type());
    let mut out = match kind {
        RadiusKind::L => {
            let probes = probes_for(cfg, t);
            let ps: Vec<Seminorm> = match &family.kind {
                FamilyKind::Single { norm } => vec![norm.clone()],
                FamilyKind::Coordinates | FamilyKind::InitialSegments | FamilyKind::CoordinatesContaining { .. } => {
                    // coordinates that the iterates can reach
                    let mut top = level;
                    for x in &probes {
                        top = top.max(x.max_index().unwrap_or(0));
                    }
                    (1..=top).map(Seminorm::coordinate).collect()
                }
                _ => family.enumerate(level),
            };
            let mut items = Vec::new();
            for x in &probes {
                let mut iter = Vec::with_capacity(cfg.depth);
                let mut y = x.to_wide();
                for _ in 0..cfg.depth {
                    y = t.apply_wide(&y);
                    iter.push(y.clone());
                }
                for p in &ps {
                    let seq = iter.iter().map(|v| p.eval_wide(v)).collect::<Result<Vec<_>>>()?;
                    items.push(score(seq, false)?);
                }
            }
            // unit probes spanning the block see every eigenvector
            let spans = finite_dim
                && cfg.probes.is_empty()
                && t.read_support().unwrap().iter().all(|&i| probes.iter().any(|x| x.get(i) != re(0.0)));
            Numeric {
                scored: sup_of(items).ok_or_else(none)?,
                certified_lower: true,
                certified_upper: spans && (single || family.is_coordinate_type()),
                method: format!("sup over {} probes and {} seminorms", probes.len(), ps.len()),
            }
        }
        RadiusKind::BB => {
            let sets = space.bounded_sets.enumerate(usize::MAX);
            let (qs, q_exh) = q_list(family, level, &output);
            let mut items = Vec::new();
            let mut exhaustive = q_exh;
            for b in &sets {
                for q in &qs {
                    let tq = target(q, &output, scan);
                    exhaustive &= tq.exhaustive;
                    items.push(score(mixed_sequence(&mut rows, b, &tq), same_box(b, q) && tq.exhaustive)?);
                }
            }
            Numeric {
                scored: sup_of(items).ok_or_else(none)?,
                certified_lower: true,
                // in a normed space the unit ball absorbs every bounded set
                certified_upper: single && exhaustive,
                method: format!("sup over {} bounded sets and {} targets", sets.len(), qs.len()),
            }
        }
        RadiusKind::C => {
            let (qs, q_exh) = q_list(family, level, &output);
            let ps = p_list(family, level);
            let mut outer = Vec::new();
            let mut inner_exact = true;
            let mut exhaustive = q_exh;
            for q in &qs {
                let tq = target(q, &output, scan);
                exhaustive &= tq.exhaustive;
                let mut inner = Vec::new();
                for p in &ps {
                    let seq = mixed_sequence(&mut rows, p, &tq);
                    inner_exact &= seq.iter().all(|v| v.is_finite()) || single;
                    inner.push(score(seq, same_box(p, q) && tq.exhaustive)?);
                }
                outer.push(inf_of(inner).ok_or_else(none)?);
            }
            let top_exists = family_top(family, level).is_some();
            Numeric {
                scored: sup_of(outer).ok_or_else(none)?,
                // the dominating p already controls every coordinate read
                certified_lower: top_exists && inner_exact,
                certified_upper: exhaustive,
                method: format!("sup over {} targets of inf over {} sources", qs.len(), ps.len()),
            }
        }
        RadiusKind::NN => {
            let candidates = nn_candidates(t, space, cfg);
            let mut per_family = Vec::new();
            for (fam, exhaustive) in &candidates {
                let ps = nn_members(fam, *exhaustive, level);
                let mut items = Vec::new();
                for p in &ps {
                    if p.as_box().is_none() {
                        if let Some((seq, exh)) = graph_power_sequence(t, p, cfg.depth) {
                            items.push((score(seq, exh)?, exh));
                        }
                        continue;
                    }
                    let tp = target(p, &output, scan);
                    let exh = tp.exhaustive;
                    items.push((score(mixed_sequence(&mut rows, p, &tp), exh)?, exh));
                }
                let all_exh = items.iter().all(|(_, e)| *e);
                if let Some(s) = sup_of(items.into_iter().map(|(s, _)| s).collect()) {
                    per_family.push((s, *exhaustive && all_exh));
                }
            }
            // the certified candidate with the smallest upper end
            let certified = per_family.iter().filter(|(_, e)| *e).map(|(s, _)| s.bracket.upper).min();
            let n_families = per_family.len();
            let scored = inf_of(per_family.into_iter().map(|(s, _)| s).collect()).ok_or_else(none)?;
            let certified_upper = certified.is_some_and(|u| u <= scored.bracket.upper);
            Numeric {
                scored,
                certified_lower: false,
                certified_upper,
                method: format!("inf over {n_families} candidate families"),
            }
        }
        RadiusKind::NB => {
            let (qs, q_exh) = q_list(family, level, &output);
            let ps = p_list(family, level);
            let mut outer = Vec::new();
            let mut exhaustive = q_exh;
            for p in &ps {
                let mut inner = Vec::new();
                for q in &qs {
                    let tq = target(q, &output, scan);
                    exhaustive &= tq.exhaustive;
                    inner.push(score(mixed_sequence(&mut rows, p, &tq), same_box(p, q) && tq.exhaustive)?);
                }
                outer.push(sup_of(inner).ok_or_else(none)?);
            }
            Numeric {
                scored: inf_of(outer).ok_or_else(none)?,
                certified_lower: single && exhaustive,
                certified_upper: exhaustive,
                method: format!("inf over {} sources of sup over {} targets", ps.len(), qs.len()),
            }
        }
    };
    if block && kind != RadiusKind::L {
        out.certified_lower = true;
        out.certified_upper = true;
    }
    Ok(out)
}

/// Structural closed forms:
///
/// * diagonal `d` on a coordinate family: `sup|d|` for all but `r_nb`,
///   which is `sup|d|` when `d` vanishes eventually and infinite otherwise;
///   on a normed space all five are `sup|d|`;
/// * strictly lower triangular on a coordinate family: every row of `T^n`
///   vanishes for large `n`, so all five are zero;
/// * a shift towards lower indices with nowhere vanishing weights on a
///   coordinate family: rows of `T^n` escape every finite index set, so
///   `r_bb` through `r_nb` are infinite, and `r_l` is too on the space of
///   all sequences.
pub fn closed_form(kind: RadiusKind, t: &OperatorRep, space: &SpaceModel) -> Option<Bracket> {
    let t = t.normalize();
    let coordinatewise = space.is_coordinatewise();
    if !coordinatewise && !space.is_normed() {
        return None;
    }
    if let OperatorRep::Scale { factor, operator } = &t {
        let c = ExtReal::new(factor.norm());
        return closed_form(kind, operator, space).map(|b| b.map_monotone(|v| c * v));
    }
    if let OperatorRep::Diagonal { weight } = &t {
        let s = weight.sup_abs_from(1);
        if space.is_normed() {
            return (space.norm().is_some_and(|n| n.as_box().is_some_and(|b| b.has_unit_scale()))).then_some(s);
        }
        if kind == RadiusKind::NB {
            return match weight.eventually_zero() {
                Some(true) => Some(s),
                Some(false) => Some(Bracket::exact(ExtReal::INFINITY)),
                None => None,
            };
        }
        return Some(s);
    }
    if !coordinatewise {
        return None;
    }
    if t.triangularity() == Triangularity::StrictlyLower {
        return Some(Bracket::exact(ExtReal::ZERO));
    }
    if t.as_escaping_shift().is_some() {
        return match kind {
            RadiusKind::L if space.class != SequenceClass::All => None,
            _ => Some(Bracket::exact(ExtReal::INFINITY)),
        };
    }
    None
}

pub fn estimate_radius(kind: RadiusKind, t: &OperatorRep, space: &SpaceModel, cfg: &RadiusConfig) -> Result<RadiusEstimate> {
    let num = numeric(kind, t, space, cfg)?;
    let iterates: Vec<(usize, ExtReal)> = num.scored.seq.iter().enumerate().map(|(i, v)| (i + 1, *v)).collect();
    let b = num.scored.bracket;
    Ok(match closed_form(kind, t, space) {
        Some(c) => RadiusEstimate {
            kind,
            lower: c.lower,
            upper: c.upper,
            certified_lower: true,
            certified_upper: true,
            numeric: b,
            iterates,
            method: format!("closed form; numeric {}", num.method),
        },
        None => RadiusEstimate {
            kind,
            lower: b.lower,
            upper: b.upper,
            certified_lower: num.certified_lower,
            certified_upper: num.certified_upper,
            numeric: b,
            iterates,
            method: num.method,
        },
    })
}

pub fn estimate_all(t: &OperatorRep, space: &SpaceModel, cfg: &RadiusConfig) -> Result<Vec<RadiusEstimate>> {
    RadiusKind::ALL.iter().map(|&k| estimate_radius(k, t, space, cfg)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderViolation {
    pub smaller: RadiusKind,
    pub larger: RadiusKind,
    pub lower: ExtReal,
    pub upper: ExtReal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub holds: bool,
    pub comparisons: usize,
    pub violations: Vec<OrderViolation>,
}

/// Relative tolerance for comparing brackets from independent estimates.
pub const ORDER_TOLERANCE: f64 = 1e-9;

/// Checks `r_l <= r_bb <= r_c <= r_nn <= r_nb` on certified sides only.
pub fn verify_ordering(estimates: &[RadiusEstimate]) -> OrderingReport {
    let mut violations = Vec::new();
    let mut comparisons = 0;
    for a in estimates {
        for b in estimates {
            if a.kind >= b.kind || !a.certified_lower || !b.certified_upper {
                continue;
            }
            comparisons += 1;
            if !a.lower.le_rel(b.upper, ORDER_TOLERANCE) {
                violations.push(OrderViolation { smaller: a.kind, larger: b.kind, lower: a.lower, upper: b.upper });
            }
        }
    }
    OrderingReport { holds: violations.is_empty(), comparisons, violations }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArithmeticReport {
    pub rc_s: Bracket,
    pub rc_t: Bracket,
    pub rc_product: Bracket,
    pub rc_sum: Bracket,
    /// `r_c(ST) <= r_c(S) r_c(T)`.
    pub product_holds: bool,
    /// `r_c(S+T) <= r_c(S) + r_c(T)`.
    pub sum_holds: bool,
}

fn commutation_probes() -> Vec<SparseVector> {
    let mut out: Vec<SparseVector> = (1..=12).map(SparseVector::unit).collect();
    out.push(SparseVector::from_reals(&[1.0, -2.0, 0.5, 3.0, -1.0]));
    out
}

/// `r_c` of products and sums of commuting diagonals, from exact suprema.
pub fn radius_arithmetic_check(s: &OperatorRep, t: &OperatorRep) -> Result<ArithmeticReport> {
    if let Some(probe) = OperatorRep::commutator_witness(s, t, &commutation_probes()) {
        return Err(SpectraError::NonCommuting { probe });
    }
    let (Some(ds), Some(dt)) = (s.as_diagonal(), t.as_diagonal()) else {
        return Err(SpectraError::UnsupportedCombination("r_c arithmetic needs diagonal operands".into()));
    };
    let space = SpaceModel::all_sequences();
    let rc = |w: Weight| closed_form(RadiusKind::C, &OperatorRep::diagonal(w), &space).expect("diagonal closed form");
    let (rs, rt) = (rc(ds.clone()), rc(dt.clone()));
    let rp = rc(Weight::product(vec![ds.clone(), dt.clone()]));
    let rsum = rc(Weight::sum(vec![ds, dt]));
    let tol = ExtReal::new(1.0 + 1e-12);
    Ok(ArithmeticReport {
        rc_s: rs,
        rc_t: rt,
        rc_product: rp,
        rc_sum: rsum,
        product_holds: rp.lower <= rs.upper * rt.upper * tol,
        sum_holds: rsum.lower <= (rs.upper + rt.upper) * tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FastNullVerdict {
    Holds,
    Fails,
    PreconditionViolated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FastNullReport {
    pub verdict: FastNullVerdict,
    pub depth: usize,
    /// `(alpha, sup_k |alpha^N (T^N x_N)_k|)` at the final depth.
    pub finals: Vec<(f64, ExtReal)>,
    pub reason: String,
}

pub const FAST_NULL_ALPHAS: [f64; 2] = [2.0, 10.0];

// alpha^n * sup|v_n| is eventually decreasing and below `tol` at the end
fn decays(values: &[ExtReal], alpha: f64, tol: f64) -> (bool, ExtReal) {
    let scaled: Vec<ExtReal> =
        values.iter().enumerate().map(|(i, v)| *v * ExtReal::new(alpha).powi(i as u64 + 1)).collect();
    let last = *scaled.last().unwrap();
    let tail = &scaled[scaled.len() * 3 / 4..];
    let decreasing = tail.windows(2).all(|w| w[1] <= w[0]);
    (decreasing && last < ExtReal::new(tol), last)
}

/// Checks that `alpha^n T^n x_n -> 0` for `alpha` in {2, 10} when `(x_n)` is
/// fast null and `r_c(T)` is finite.
pub fn fast_null_check(t: &OperatorRep, x_seq: &dyn Fn(usize) -> SparseVector, depth: usize) -> FastNullReport {
    let depth = depth.max(8);
    let xs: Vec<WideVector> = (1..=depth).map(|n| x_seq(n).to_wide()).collect();
    let sizes: Vec<ExtReal> = xs.iter().map(|x| x.sup_abs()).collect();
    let violated = |reason: String| FastNullReport {
        verdict: FastNullVerdict::PreconditionViolated,
        depth,
        finals: vec![],
        reason,
    };
    for alpha in FAST_NULL_ALPHAS {
        let (ok, last) = decays(&sizes, alpha, 1e-3);
        if !ok {
            return violated(format!("x_n is not fast null: alpha = {alpha} gives {last} at n = {depth}"));
        }
    }
    let rc = closed_form(RadiusKind::C, t, &SpaceModel::all_sequences());
    if rc.is_some_and(|b| b.lower.is_infinite()) {
        return violated("r_c(T) is infinite".into());
    }
    let images: Vec<ExtReal> = xs.iter().enumerate().map(|(i, x)| t.power_apply_wide(i + 1, x).sup_abs()).collect();
    let mut finals = Vec::new();
    let mut holds = true;
    for alpha in FAST_NULL_ALPHAS {
        let (ok, last) = decays(&images, alpha, 1e-8);
        holds &= ok;
        finals.push((alpha, last));
    }
    FastNullReport {
        verdict: if holds { FastNullVerdict::Holds } else { FastNullVerdict::Fails },
        depth,
        finals,
        reason: if holds { "alpha^n T^n x_n decays".into() } else { "alpha^n T^n x_n does not decay".into() },
    }
}

pub fn scalar_abs(z: Scalar) -> ExtReal {
    ExtReal::new(z.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limsup::{bounded_threshold, vanishing_threshold};

    fn cfg() -> RadiusConfig {
        RadiusConfig::new(60, 8)
    }

    fn factorial_probe(n: usize) -> SparseVector {
        let f: f64 = (1..=n).map(|k| k as f64).product();
        SparseVector::unit(1).scale(re(1.0 / f))
    }

    #[test]
    fn diagonal_half_on_a_normed_space() {
        let d = OperatorRep::diagonal(Weight::real_constant(0.5));
        let est = estimate_all(&d, &SpaceModel::bounded_normed(), &cfg()).unwrap();
        for e in &est {
            assert!(e.is_exact() && e.lower == ExtReal::new(0.5), "{e:?}");
            assert!(e.numeric.contains(ExtReal::new(0.5), 1e-9), "{e:?}");
        }
        assert!(verify_ordering(&est).holds);
        // on all sequences a nonvanishing diagonal is not nb-bounded
        let nb = estimate_radius(RadiusKind::NB, &d, &SpaceModel::all_sequences(), &cfg()).unwrap();
        assert_eq!(nb.lower, ExtReal::INFINITY);
    }

    #[test]
    fn self_power_shift_radii() {
        let t = OperatorRep::self_power_shift();
        let space = SpaceModel::bounded_coordinatewise();
        let cfg = RadiusConfig::new(50, 20);
        let rl = estimate_radius(RadiusKind::L, &t, &space, &cfg).unwrap();
        assert!(rl.upper <= ExtReal::new(1e-3), "{rl:?}");
        let space = space.with_bounded_sets(vec![Seminorm::minkowski(Weight::self_power(2.0))]);
        let bb = estimate_radius(RadiusKind::BB, &t, &space, &RadiusConfig::new(30, 4)).unwrap();
        assert!(bb.numeric.lower >= ExtReal::new(10.0), "{bb:?}");
        let mut est = estimate_all(&t, &space, &cfg).unwrap();
        est[0] = rl;
        assert!(verify_ordering(&est).holds);
    }

    #[test]
    fn forward_shift_on_null_sequences_is_zero() {
        let est = estimate_all(&OperatorRep::forward_shift(), &SpaceModel::null_coordinatewise(), &cfg()).unwrap();
        for e in &est {
            assert!(e.is_exact() && e.lower.is_zero(), "{e:?}");
        }
        assert!(verify_ordering(&est).holds);
    }

    #[test]
    fn finite_rank_radii_collapse() {
        // nilpotent plus a 2x2 block with eigenvalues 3 and -1
        let k = OperatorRep::from_real_matrix(&[vec![1.0, 2.0, 0.0], vec![2.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]]);
        let est = estimate_all(&k, &SpaceModel::all_sequences(), &RadiusConfig::new(80, 4)).unwrap();
        for e in &est {
            assert!(e.bracket().contains(ExtReal::new(3.0), 1e-9) && e.bracket().rel_width() < 0.05, "{e:?}");
        }
        for e in &est[1..] {
            assert!(e.certified_upper, "{e:?}");
        }
        assert!(verify_ordering(&est).holds);
    }

    #[test]
    fn left_shift_is_infinite_beyond_pointwise() {
        let est = estimate_all(&OperatorRep::left_shift(), &SpaceModel::all_sequences(), &cfg()).unwrap();
        for e in &est {
            assert_eq!(e.lower, ExtReal::INFINITY, "{e:?}");
        }
    }

    #[test]
    fn characterizations_agree_on_closed_forms() {
        // sequences behind the radii of diagonals, in all three readings
        for (w, r) in [(Weight::geometric(1.0, 0.5), 0.5), (Weight::power(2.0, -1.0), 2.0), (Weight::real_constant(1.5), 1.5)] {
            let est = estimate_radius(RadiusKind::NN, &OperatorRep::diagonal(w), &SpaceModel::bounded_normed(), &RadiusConfig::new(200, 4)).unwrap();
            let t: Vec<ExtReal> = est.iterates.iter().map(|p| p.1).collect();
            for b in [est.numeric, vanishing_threshold(&t).unwrap(), bounded_threshold(&t).unwrap()] {
                assert!(b.contains(ExtReal::new(r), 1e-9) && b.rel_width() < 0.05, "{b}");
            }
        }
    }

    #[test]
    fn arithmetic_examples() {
        let d = |w| OperatorRep::diagonal(w);
        let r = radius_arithmetic_check(&d(Weight::real_constant(0.5)), &d(Weight::real_constant(1.0 / 3.0))).unwrap();
        assert!(r.product_holds && r.sum_holds);
        assert!((r.rc_product.upper.to_f64() - 1.0 / 6.0).abs() < 1e-15);
        assert!((r.rc_sum.upper.to_f64() - 5.0 / 6.0).abs() < 1e-15);
        let r = radius_arithmetic_check(&d(Weight::power(1.0, -1.0)), &d(Weight::real_constant(0.5))).unwrap();
        assert!(r.product_holds && (r.rc_product.upper.to_f64() - 0.5).abs() < 1e-15);
        let r = radius_arithmetic_check(&OperatorRep::zero(), &d(Weight::real_constant(0.5))).unwrap();
        assert!(r.rc_product.upper.is_zero() && r.product_holds);
        let err = radius_arithmetic_check(&OperatorRep::left_shift(), &d(Weight::power(1.0, 1.0)));
        assert!(matches!(err, Err(SpectraError::NonCommuting { .. })));
    }

    #[test]
    fn fast_null_examples() {
        let half = OperatorRep::diagonal(Weight::real_constant(0.5));
        let three = OperatorRep::diagonal(Weight::real_constant(3.0));
        assert_eq!(fast_null_check(&half, &factorial_probe, 200).verdict, FastNullVerdict::Holds);
        assert_eq!(fast_null_check(&three, &factorial_probe, 200).verdict, FastNullVerdict::Holds);
        let geometric = |n: usize| SparseVector::unit(1).scale(re(0.5f64.powi(n as i32)));
        assert_eq!(fast_null_check(&three, &geometric, 200).verdict, FastNullVerdict::PreconditionViolated);
    }
}
