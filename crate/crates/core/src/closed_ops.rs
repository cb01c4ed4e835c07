//! A closed diagonal operator `T` with unbounded weights, the Fréchet
//! space of vectors in every domain of `T^n` under the graph norms
//! `|x|_n = sum_{k<=n} |T^k x|`, and resolvent bounds there.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectraError};
use crate::limsup::limsup_root;
use crate::num::{Bracket, ExtReal, Scalar};
use crate::operator::OperatorRep;
use crate::radii::{estimate_radius, RadiusConfig, RadiusEstimate, RadiusKind};
use crate::seminorm::{FamilyRole, Seminorm, SeminormFamily};
use crate::space::{SequenceClass, SpaceModel};
use crate::vector::{SparseVector, WideVector};
use crate::weight::Weight;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedOperatorModel {
    /// Diagonal weight of `T`.
    pub weight: Weight,
    pub base_norm: Seminorm,
}

impl ClosedOperatorModel {
    pub fn diagonal(weight: Weight) -> ClosedOperatorModel {
        ClosedOperatorModel { weight, base_norm: Seminorm::sup_norm() }
    }

    /// `d(k) = k`.
    pub fn identity_weights() -> ClosedOperatorModel {
        ClosedOperatorModel::diagonal(Weight::power(1.0, 1.0))
    }

    pub fn operator(&self) -> OperatorRep {
        OperatorRep::diagonal(self.weight.clone())
    }

    pub fn graph_family(&self) -> SeminormFamily {
        SeminormFamily::graph(Arc::new(self.operator()), self.base_norm.clone())
    }

    /// The core domain with its graph norms.
    pub fn space(&self) -> SpaceModel {
        let family = self.graph_family();
        let bounded_sets = SeminormFamily { role: FamilyRole::BoundedSets, ..family.clone() };
        SpaceModel {
            name: "core domain, graph norms".into(),
            class: SequenceClass::All,
            family,
            bounded_sets,
            complete: true,
            locally_bounded: false,
        }
    }

    pub fn graph_norm(&self, n: usize, x: &WideVector) -> Result<ExtReal> {
        Seminorm::graph(n, Arc::new(self.operator()), self.base_norm.clone()).eval_wide(x)
    }

    /// `sup_k |lambda - d(k)|^{-1}`.
    pub fn resolvent_norm(&self, lambda: Scalar) -> Result<Bracket> {
        let r = Weight::resolvent(lambda, self.weight.clone())?;
        Ok(r.sup_abs_from(1))
    }

    pub fn apply_resolvent(&self, lambda: Scalar, x: &WideVector) -> Result<WideVector> {
        let r = Weight::resolvent(lambda, self.weight.clone())?;
        let mut out = WideVector::zero();
        for (k, z) in x.iter() {
            out.add_at(k, r.wide(k) * z);
        }
        Ok(out)
    }
}

/// `mu_k = 1 + |lambda| + ... + |lambda|^k`, zero for `k < 0`.
pub fn mu(lambda: Scalar, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    (0..=k).map(|i| lambda.norm().powi(i as i32)).sum()
}

/// `C_n = mu_n |R| + mu_(n-1)`. Bounding each `|T^j x|` in the expansion of
/// `|R x|_n` by the sum `|x|_(n-1)` and the `mu` by the largest one gives
/// `|R x|_n <= C_n |x|_(n-1)`.
pub fn c_constant(lambda: Scalar, n: usize, resolvent_norm: f64) -> f64 {
    mu(lambda, n as i64) * resolvent_norm + mu(lambda, n as i64 - 1)
}

/// `M_k = C_1 C_2 ... C_k`.
pub fn m_constant(lambda: Scalar, k: usize, resolvent_norm: f64) -> f64 {
    (1..=k).map(|i| c_constant(lambda, i, resolvent_norm)).product()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventBoundReport {
    pub lambda: Scalar,
    pub n: usize,
    pub c_n: f64,
    pub resolvent_norm: f64,
    /// Largest `|R x|_n / (C_n |x|_(n-1))` over the probes.
    pub max_ratio: f64,
    pub violations: Vec<SparseVector>,
    pub holds: bool,
}

pub fn resolvent_bound_check(
    model: &ClosedOperatorModel,
    lambda: Scalar,
    n: usize,
    probes: &[SparseVector],
) -> Result<ResolventBoundReport> {
    if n == 0 {
        return Err(SpectraError::Invalid("the bound needs n >= 1".into()));
    }
    let rn = model.resolvent_norm(lambda)?.upper.to_f64();
    let c_n = c_constant(lambda, n, rn);
    let mut max_ratio: f64 = 0.0;
    let mut violations = Vec::new();
    for x in probes {
        let xw = x.to_wide();
        let lhs = model.graph_norm(n, &model.apply_resolvent(lambda, &xw)?)?;
        let rhs = model.graph_norm(n - 1, &xw)? * ExtReal::new(c_n);
        if rhs.is_zero() {
            if !lhs.is_zero() {
                violations.push(x.clone());
            }
            continue;
        }
        let ratio = (lhs / rhs).to_f64();
        max_ratio = max_ratio.max(ratio);
        if ratio > 1.0 + 1e-12 {
            violations.push(x.clone());
        }
    }
    Ok(ResolventBoundReport { lambda, n, c_n, resolvent_norm: rn, max_ratio, holds: violations.is_empty(), violations })
}

/// `|x|_m <= |x|_k` for `m <= k <= n_max`.
pub fn graph_norms_monotone(model: &ClosedOperatorModel, x: &SparseVector, n_max: usize) -> Result<bool> {
    let xw = x.to_wide();
    let norms: Vec<ExtReal> = (0..=n_max).map(|n| model.graph_norm(n, &xw)).collect::<Result<_>>()?;
    Ok(norms.windows(2).all(|w| w[0] <= w[1]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedRadiusReport {
    /// Spectral radius in the base norm.
    pub banach_radius: Bracket,
    pub restricted: RadiusEstimate,
    pub holds: bool,
}

fn commutation_probes() -> Vec<SparseVector> {
    let mut p: Vec<SparseVector> = (1..=12).map(SparseVector::unit).collect();
    p.push(SparseVector::from_reals(&[1.0, 2.0, -1.0, 0.5]));
    p
}

/// `r_nn(S restricted to the core) <= r(S)` for a bounded diagonal `S`.
pub fn restricted_radius_check(
    model: &ClosedOperatorModel,
    s: &OperatorRep,
    cfg: &RadiusConfig,
) -> Result<RestrictedRadiusReport> {
    if let Some(probe) = OperatorRep::commutator_witness(s, &model.operator(), &commutation_probes()) {
        return Err(SpectraError::NonCommuting { probe });
    }
    let Some(w) = s.as_diagonal() else {
        return Err(SpectraError::UnsupportedCombination("restricted radii need a diagonal operator".into()));
    };
    let banach = w.sup_abs_from(1);
    let restricted = estimate_radius(RadiusKind::NN, s, &model.space(), cfg)?;
    let slack = restricted.bracket().abs_width() + 1e-12;
    let holds = restricted.upper.to_f64() <= banach.upper.to_f64() + slack;
    Ok(RestrictedRadiusReport { banach_radius: banach, restricted, holds })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventRadiusReport {
    pub lambda: Scalar,
    pub k: usize,
    pub m_k: f64,
    /// `r(R) = |R|` for the diagonal resolvent.
    pub banach_radius: Bracket,
    /// Root bracket of `M_k |R^(n-k)|`, an upper bound for `r_nb` on the core.
    pub nb_bound: Bracket,
    /// Largest `|R^n x|_k / (M_k |R^(n-k) x|)` over probes and `n >= k`.
    pub max_ratio: f64,
    pub holds: bool,
}

/// `r_nb(R restricted to the core) <= r(R)` through
/// `m_{m,k}(R^n) <= M_k |R^(n-k)|` for `n >= k`.
pub fn resolvent_radius_check(
    model: &ClosedOperatorModel,
    lambda: Scalar,
    k: usize,
    depth: usize,
    probes: &[SparseVector],
) -> Result<ResolventRadiusReport> {
    let rb = model.resolvent_norm(lambda)?;
    let rn = rb.upper.to_f64();
    let m_k = m_constant(lambda, k, rn);
    let seq: Vec<ExtReal> =
        (1..=depth).map(|n| ExtReal::new(m_k) * rb.upper.powi(n.saturating_sub(k) as u64)).collect();
    let nb_bound = limsup_root(&seq)?;
    let mut max_ratio: f64 = 0.0;
    for x in probes {
        let mut y = x.to_wide();
        let mut powers = vec![y.clone()];
        for _ in 0..k + 6 {
            y = model.apply_resolvent(lambda, &y)?;
            powers.push(y.clone());
        }
        for n in k..powers.len() {
            let lhs = model.graph_norm(k, &powers[n])?;
            let rhs = model.base_norm.eval_wide(&powers[n - k])? * ExtReal::new(m_k);
            if !rhs.is_zero() {
                max_ratio = max_ratio.max((lhs / rhs).to_f64());
            }
        }
    }
    let holds = nb_bound.upper.to_f64() <= rb.upper.to_f64() + nb_bound.abs_width() + 1e-12 && max_ratio <= 1.0 + 1e-12;
    Ok(ResolventRadiusReport { lambda, k, m_k, banach_radius: rb, nb_bound, max_ratio, holds })
}

/// Finitely supported probes with entries of mixed sign and size.
pub fn standard_probes(count: usize, seed: u64) -> Vec<SparseVector> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=6);
            let mut x = SparseVector::zero();
            for _ in 0..len {
                let k = rng.gen_range(1..=30);
                x.add_at(k, Scalar::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0)));
            }
            x
        })
        .collect()
}
