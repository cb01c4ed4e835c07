//! Registered worked examples, each with its expected outcome.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use tvspec_core::classify::{classify_boundedness, finite_rank_bound, BoundednessClass, Verdict};
use tvspec_core::closed_ops::{resolvent_bound_check, resolvent_radius_check, restricted_radius_check, standard_probes, ClosedOperatorModel};
use tvspec_core::compact::{compact_radius_equality, eigenvalues, truncation_matrix, CompactModel};
use tvspec_core::corpus::{self, random_dense_block};
use tvspec_core::measure::{build_counterexample, golden_alpha, measure_radius_check, RotationOperator};
use tvspec_core::neumann::{converge_monitor, spectrum_probe, Convergence, Witness};
use tvspec_core::num::{re, Scalar};
use tvspec_core::radii::{
    estimate_all, estimate_radius, fast_null_check, radius_arithmetic_check, verify_ordering, FastNullVerdict, RadiusConfig,
    RadiusKind,
};
use tvspec_core::seminorm::Seminorm;
use tvspec_core::space::SpaceModel;
use tvspec_core::{ExtReal, OperatorRep, SparseVector, SpectraError, Weight};

use crate::report::{Params, Section};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GalleryEntry {
    pub id: &'static str,
    pub title: &'static str,
    /// Which worked example this reproduces.
    pub anchor: &'static str,
    pub expected: &'static str,
}

const fn entry(id: &'static str, title: &'static str, anchor: &'static str, expected: &'static str) -> GalleryEntry {
    GalleryEntry { id, title, anchor, expected }
}

pub const REGISTRY: [GalleryEntry; 16] = [
    entry(
        "left-shift-not-nn",
        "left shift on all sequences",
        "continuous operator that is not nn-bounded",
        "continuous Yes, nn-bounded No",
    ),
    entry(
        "identity-not-nb",
        "identity on all sequences",
        "nn-bounded operator that is not nb-bounded",
        "nn-bounded Yes, nb-bounded No",
    ),
    entry(
        "projections-not-closed",
        "coordinate projections converging to the identity",
        "the nb-bounded operators are not closed",
        "every P_n nb-bounded, P_n e_k -> e_k, limit I not nb-bounded",
    ),
    entry(
        "weighted-shift-rl-zero-rbb-inf",
        "weighted backward shift with weights (k-1)^(k-1)/k^k on bounded sequences",
        "continuous operator with r_l = 0 and r_bb = infinity",
        "r_l upper <= 1e-3 at depth 50, r_bb lower >= 10 at depth 30",
    ),
    entry(
        "c0-neumann-divergence",
        "forward shift on null sequences, coordinatewise",
        "r_nb = 0 while the Neumann series diverges",
        "r_nb exactly 0, Diverged at lambda = 1 with a trail from e_1",
    ),
    entry(
        "rotation-measure-divergence",
        "irrational rotation under convergence in measure",
        "radii equal 1 but the Neumann series at 2 diverges",
        "radius chain exactly 1, every block sum >= 1 on measure >= 1 - 1e-9 for n <= 4",
    ),
    entry("compact-diag-half", "Diag(2^-k) on bounded sequences", "compact radius equals |sigma|", "r = 0.5 +- 1e-6"),
    entry("compact-diag-harmonic", "Diag(1/k) on bounded sequences", "compact radius equals |sigma|", "r = 1 +- 1e-6"),
    entry("compact-nilpotent", "rank-one e_1 (x) e_2", "quasinilpotent compact operator", "r = 0 = |sigma|, r_l = 0"),
    entry(
        "closed-diag-resolvent",
        "resolvent of the closed diagonal d(k) = k on its core domain",
        "graph-norm resolvent bound",
        "|R x|_n <= C_n |x|_(n-1) on 100 probes for n <= 4",
    ),
    entry(
        "restricted-radius",
        "bounded diagonals restricted to the core domain of d(k) = k",
        "restricted radii do not exceed the Banach radius",
        "r_nn(S|D) <= r(S), r_nb(R|D) <= r(R)",
    ),
    entry(
        "finite-rank-factor",
        "operators vanishing on a joint kernel",
        "finite-rank factorization through n functionals",
        "verified rank <= n; kernel violation raises PreconditionFailed",
    ),
    entry(
        "nb-finite-rank-collapse",
        "finite-rank block on all sequences",
        "nb-bounded finite rank operators have equal radii and spectra",
        "all radii contain 3; spectra agree across bb, c, nn, nb",
    ),
    entry(
        "banach-collapse",
        "random dense 5x5 block under the sup norm",
        "radii coincide on a normed space",
        "all five brackets contain max|eig| with relative width <= 0.05",
    ),
    entry(
        "rc-arithmetic",
        "commuting diagonal pairs",
        "r_c is submultiplicative and subadditive",
        "r_c(ST) <= r_c(S) r_c(T), r_c(S+T) <= r_c(S) + r_c(T)",
    ),
    entry(
        "fast-null",
        "e_1 / n! under bounded diagonals",
        "fast null sequences stay fast null",
        "alpha^n T^n x_n -> 0 for alpha in {2, 10}",
    ),
];

pub fn find(id: &str) -> Option<&'static GalleryEntry> {
    REGISTRY.iter().find(|e| e.id == id)
}

fn yn(v: Verdict) -> String {
    format!("{v:?}")
}

fn seed(p: &Params) -> u64 {
    p.seed.unwrap_or(corpus::DEFAULT_SEED)
}

pub fn run(id: &str, params: &Params) -> Section {
    let Some(e) = find(id) else {
        return Section::failed(id, format!("unknown gallery id {id:?}"));
    };
    let mut sec = Section::new(e.id);
    sec.title = Some(e.title.into());
    sec.anchor = Some(e.anchor.into());
    sec.expected = Some(e.expected.into());
    let outcome = match e.id {
        "left-shift-not-nn" => left_shift(&mut sec),
        "identity-not-nb" => identity(&mut sec),
        "projections-not-closed" => projections(&mut sec),
        "weighted-shift-rl-zero-rbb-inf" => weighted_shift(&mut sec, params),
        "c0-neumann-divergence" => null_shift(&mut sec, params),
        "rotation-measure-divergence" => rotation(&mut sec, params),
        "compact-diag-half" => compact(&mut sec, OperatorRep::diagonal(Weight::geometric(1.0, 0.5)), 0.5, params),
        "compact-diag-harmonic" => compact(&mut sec, OperatorRep::diagonal(Weight::power(1.0, -1.0)), 1.0, params),
        "compact-nilpotent" => nilpotent(&mut sec, params),
        "closed-diag-resolvent" => closed_resolvent(&mut sec, params),
        "restricted-radius" => restricted(&mut sec, params),
        "finite-rank-factor" => finite_rank_factor(&mut sec, params),
        "nb-finite-rank-collapse" => finite_rank_collapse(&mut sec, params),
        "banach-collapse" => banach_collapse(&mut sec, params),
        "rc-arithmetic" => rc_arithmetic(&mut sec),
        "fast-null" => fast_null(&mut sec, params),
        _ => unreachable!("registry and dispatch disagree"),
    };
    if let Err(err) = outcome {
        sec.error = Some(err.to_string());
    }
    sec.finish()
}

type Outcome = Result<(), SpectraError>;

fn cfg(params: &Params, depth: usize, level: usize) -> RadiusConfig {
    RadiusConfig::new(params.depth.unwrap_or(depth), params.level.unwrap_or(level))
}

fn left_shift(sec: &mut Section) -> Outcome {
    let r = classify_boundedness(&OperatorRep::left_shift(), &SpaceModel::all_sequences())?;
    let c = r.verdict(BoundednessClass::Continuous);
    let nn = r.verdict(BoundednessClass::Nn);
    sec.check("continuous", "Yes", yn(c), c == Verdict::Yes);
    sec.check("nn-bounded", "No", yn(nn), nn == Verdict::No);
    sec.details = serde_json::to_value(r).unwrap();
    Ok(())
}

fn identity(sec: &mut Section) -> Outcome {
    let r = classify_boundedness(&OperatorRep::identity(), &SpaceModel::all_sequences())?;
    let nn = r.verdict(BoundednessClass::Nn);
    let nb = r.verdict(BoundednessClass::Nb);
    sec.check("nn-bounded", "Yes", yn(nn), nn == Verdict::Yes);
    sec.check("nb-bounded", "No", yn(nb), nb == Verdict::No);
    sec.details = serde_json::to_value(r).unwrap();
    Ok(())
}

fn projections(sec: &mut Section) -> Outcome {
    let space = SpaceModel::all_sequences();
    let proj = |n: usize| OperatorRep::diagonal(Weight::table(vec![re(1.0); n], re(0.0)));
    let mut all_nb = true;
    let mut verdicts = Vec::new();
    for n in 1..=8 {
        let v = classify_boundedness(&proj(n), &space)?.verdict(BoundednessClass::Nb);
        all_nb &= v == Verdict::Yes;
        verdicts.push(yn(v));
    }
    sec.check("P_n nb-bounded, n = 1..8", "Yes", verdicts.join(","), all_nb);
    // P_n e_k = e_k as soon as n >= k, so P_n -> I coordinatewise
    let converges = (1..=8).all(|k| (k..=8).all(|n| proj(n).apply(&SparseVector::unit(k)) == SparseVector::unit(k)));
    sec.check("P_n e_k = e_k for n >= k", "true", converges.to_string(), converges);
    let limit = classify_boundedness(&OperatorRep::identity(), &space)?.verdict(BoundednessClass::Nb);
    sec.check("limit I nb-bounded", "No", yn(limit), limit == Verdict::No);
    Ok(())
}

fn weighted_shift(sec: &mut Section, params: &Params) -> Outcome {
    let t = OperatorRep::self_power_shift();
    let space = SpaceModel::bounded_coordinatewise();
    let rl = estimate_radius(RadiusKind::L, &t, &space, &cfg(params, 50, 20))?;
    sec.check("r_l upper", "<= 1e-3", rl.upper.to_string(), rl.upper <= ExtReal::new(1e-3));
    let space = space.with_bounded_sets(vec![Seminorm::minkowski(Weight::self_power(2.0))]);
    let bb = estimate_radius(RadiusKind::BB, &t, &space, &cfg(params, 30, 4))?;
    sec.check("r_bb lower over A", ">= 10", bb.numeric.lower.to_string(), bb.numeric.lower >= ExtReal::new(10.0));
    let mut all = estimate_all(&t, &space, &cfg(params, 50, 8))?;
    all[0] = rl;
    all[1] = bb;
    let ord = verify_ordering(&all);
    sec.check("ordering", "holds", ord.holds.to_string(), ord.holds);
    sec.radii = all;
    Ok(())
}

fn null_shift(sec: &mut Section, params: &Params) -> Outcome {
    let t = OperatorRep::forward_shift();
    let space = SpaceModel::null_coordinatewise();
    let nb = estimate_radius(RadiusKind::NB, &t, &space, &cfg(params, 60, 8))?;
    sec.check("r_nb", "exactly 0", nb.bracket().to_string(), nb.is_exact() && nb.lower.is_zero());
    let depth = params.depth.unwrap_or(100).min(100);
    let mcfg = RadiusConfig::new(depth, 4).with_probes(vec![SparseVector::unit(1)]);
    let m = converge_monitor(&t, re(1.0), RadiusKind::L, &space, &mcfg)?;
    let trail = matches!(&m.witness, Some(Witness::Trail { .. }));
    sec.check("verdict at lambda = 1", "Diverged", format!("{:?}", m.verdict), m.verdict == Convergence::Diverged);
    sec.check("witness", "trail from e_1 within 100 terms", format!("trail: {trail}, terms {}", m.terms_used), trail && m.terms_used <= 100);
    sec.radii = vec![nb];
    sec.neumann = vec![m];
    Ok(())
}

fn rotation(sec: &mut Section, params: &Params) -> Outcome {
    let t = RotationOperator::default();
    let r = measure_radius_check(&t, params.depth.unwrap_or(60));
    let chain = r.chain.map(|b| b.to_string()).unwrap_or_else(|| "not certified".into());
    sec.check("radius chain", "exactly 1", chain, r.chain.is_some_and(|b| b.is_exact() && b.lower == ExtReal::ONE));
    let (_, rep) = build_counterexample(golden_alpha(), 4)?;
    for b in &rep.blocks {
        sec.check(
            &format!("block n = {}", b.n),
            ">= 1 on measure >= 1 - 1e-9",
            format!("{:.17e} over k = {}..{}", b.covered_measure, b.first, b.last),
            b.holds,
        );
    }
    sec.details = json!({ "radii": r, "counterexample": rep });
    Ok(())
}

fn compact(sec: &mut Section, k: OperatorRep, target: f64, params: &Params) -> Outcome {
    let model = CompactModel::new(k, 64)?;
    let r = compact_radius_equality(&model, &SpaceModel::bounded_normed(), &cfg(params, 60, 8))?;
    let mid = r.radius.midpoint().to_f64();
    sec.check("r", format!("{target} +- 1e-6"), r.radius.to_string(), (mid - target).abs() <= 1e-6 + r.radius.abs_width());
    sec.check("|r - |sigma||", format!("<= {:.3e}", r.tolerance), format!("{:.3e}", r.difference), r.holds);
    sec.radii = r.radii.clone();
    sec.details = json!({ "spectral_abs": r.spectral_abs, "truncations": r.truncations, "bb_bounded": r.bb_bounded });
    Ok(())
}

fn nilpotent(sec: &mut Section, params: &Params) -> Outcome {
    let k = OperatorRep::rank_one(SparseVector::unit(1), SparseVector::unit(2));
    compact(sec, k, 0.0, params)?;
    let rl = sec.radii.iter().find(|e| e.kind == RadiusKind::L).map(|e| e.upper).unwrap_or(ExtReal::INFINITY);
    sec.check("r_l", "0", rl.to_string(), rl.is_zero());
    Ok(())
}

fn closed_resolvent(sec: &mut Section, params: &Params) -> Outcome {
    let m = ClosedOperatorModel::identity_weights();
    let probes = standard_probes(100, seed(params));
    let mut reports = Vec::new();
    for lambda in [re(-1.0), re(-2.0), Scalar::new(0.5, 0.5)] {
        for n in 1..=4 {
            let r = resolvent_bound_check(&m, lambda, n, &probes)?;
            sec.check(
                &format!("lambda = {lambda}, n = {n}"),
                "ratio <= 1",
                format!("{:.17e} ({} violations)", r.max_ratio, r.violations.len()),
                r.holds,
            );
            reports.push(r);
        }
    }
    sec.details = serde_json::to_value(reports).unwrap();
    Ok(())
}

fn restricted(sec: &mut Section, params: &Params) -> Outcome {
    let m = ClosedOperatorModel::identity_weights();
    let c = cfg(params, 60, 4);
    let s = OperatorRep::diagonal(Weight::real_constant(0.5));
    let a = restricted_radius_check(&m, &s, &c)?;
    sec.check("r_nn(S|D) <= r(S), S = Diag(1/2)", a.banach_radius.to_string(), a.restricted.bracket().to_string(), a.holds);
    let lambda = re(-1.0);
    let rop = OperatorRep::diagonal(Weight::resolvent(lambda, m.weight.clone())?);
    let b = restricted_radius_check(&m, &rop, &c)?;
    sec.check("r_nn(R|D) <= r(R), lambda = -1", b.banach_radius.to_string(), b.restricted.bracket().to_string(), b.holds);
    let rr = resolvent_radius_check(&m, lambda, 2, 200, &standard_probes(20, seed(params)))?;
    sec.check("r_nb(R|D) <= r(R), k = 2", rr.banach_radius.to_string(), rr.nb_bound.to_string(), rr.holds);
    sec.radii = vec![a.restricted.clone(), b.restricted.clone()];
    sec.details = json!({ "resolvent_radius": rr });
    Ok(())
}

fn finite_rank_factor(sec: &mut Section, params: &Params) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed(params));
    let fs: Vec<SparseVector> = (0..2).map(|_| corpus::random_vector(&mut rng, 6)).collect();
    let ys: Vec<SparseVector> = (0..2).map(|_| corpus::random_vector(&mut rng, 6)).collect();
    let t = OperatorRep::FiniteRank { functionals: fs.clone(), range: ys };
    let r = finite_rank_bound(&fs, &t, 10)?;
    sec.check("verified rank", "<= 2", r.verified_rank.to_string(), r.holds && r.verified_rank <= 2);
    let bad = OperatorRep::rank_one(SparseVector::unit(1), SparseVector::unit(3));
    let violation = finite_rank_bound(&[SparseVector::unit(1), SparseVector::unit(2)], &bad, 10);
    let observed = match &violation {
        Err(SpectraError::PreconditionFailed { probe, .. }) => format!("PreconditionFailed on {probe:?}"),
        Err(e) => e.to_string(),
        Ok(r) => format!("accepted with rank {}", r.verified_rank),
    };
    sec.check("e_1 (x) e_3 against {e_1, e_2}", "PreconditionFailed", observed, matches!(violation, Err(SpectraError::PreconditionFailed { .. })));
    sec.details = serde_json::to_value(r).unwrap();
    Ok(())
}

fn finite_rank_collapse(sec: &mut Section, params: &Params) -> Outcome {
    let k = OperatorRep::from_real_matrix(&[vec![1.0, 2.0, 0.0], vec![2.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]]);
    let space = SpaceModel::all_sequences();
    let est = estimate_all(&k, &space, &cfg(params, 80, 4))?;
    for e in &est {
        let ok = e.bracket().contains(ExtReal::new(3.0), 1e-9) && e.bracket().rel_width() <= 0.05;
        sec.check(&e.kind.to_string(), "contains 3", e.bracket().to_string(), ok);
    }
    let nb = classify_boundedness(&k, &space)?.verdict(BoundednessClass::Nb);
    sec.check("nb-bounded", "Yes", yn(nb), nb == Verdict::Yes);
    let mut spectra = Vec::new();
    for lambda in [re(3.0), re(-1.0), re(2.0), Scalar::new(0.5, 1.0)] {
        let s = spectrum_probe(&k, lambda, &space)?;
        let v: Vec<Verdict> = [RadiusKind::BB, RadiusKind::C, RadiusKind::NN, RadiusKind::NB].iter().map(|&kind| s.get(kind)).collect();
        let agree = v.iter().all(|x| *x == v[0] && *x != Verdict::Unknown);
        sec.check(&format!("memberships at {lambda}"), "equal across bb, c, nn, nb", format!("{v:?}"), agree);
        spectra.push(s);
    }
    sec.radii = est;
    sec.details = serde_json::to_value(spectra).unwrap();
    Ok(())
}

fn banach_collapse(sec: &mut Section, params: &Params) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed(params));
    let k = random_dense_block(&mut rng, 5);
    let target = eigenvalues(&truncation_matrix(&k, 5)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let est = estimate_all(&k, &SpaceModel::bounded_normed(), &cfg(params, 300, 8))?;
    for e in &est {
        let ok = e.bracket().contains(ExtReal::new(target), 1e-9) && e.bracket().rel_width() <= 0.05;
        sec.check(&e.kind.to_string(), format!("contains {target:.17e}"), e.bracket().to_string(), ok);
    }
    sec.radii = est;
    Ok(())
}

fn rc_arithmetic(sec: &mut Section) -> Outcome {
    let d = OperatorRep::diagonal;
    let pairs = [
        ("Diag(1/2), Diag(1/3)", d(Weight::real_constant(0.5)), d(Weight::real_constant(1.0 / 3.0))),
        ("Diag(1/k), Diag(1/2)", d(Weight::power(1.0, -1.0)), d(Weight::real_constant(0.5))),
        ("0, Diag(1/2)", OperatorRep::zero(), d(Weight::real_constant(0.5))),
    ];
    let mut reports = Vec::new();
    for (name, s, t) in pairs {
        let r = radius_arithmetic_check(&s, &t)?;
        sec.check(
            name,
            "r_c(ST) <= r_c(S) r_c(T) and r_c(S+T) <= r_c(S) + r_c(T)",
            format!("r_c(ST) = {}, r_c(S+T) = {}", r.rc_product, r.rc_sum),
            r.product_holds && r.sum_holds,
        );
        reports.push(r);
    }
    sec.details = serde_json::to_value(reports).unwrap();
    Ok(())
}

fn factorial_probe(n: usize) -> SparseVector {
    let f: f64 = (1..=n).map(|k| k as f64).product();
    SparseVector::unit(1).scale(re(1.0 / f))
}

fn fast_null(sec: &mut Section, params: &Params) -> Outcome {
    let depth = params.depth.unwrap_or(150).min(170);
    let mut reports = Vec::new();
    for c in [0.5, 3.0] {
        let r = fast_null_check(&OperatorRep::diagonal(Weight::real_constant(c)), &factorial_probe, depth);
        sec.check(&format!("Diag({c})"), "Holds", format!("{:?}", r.verdict), r.verdict == FastNullVerdict::Holds);
        reports.push(r);
    }
    sec.details = serde_json::to_value(reports).unwrap();
    Ok(())
}
