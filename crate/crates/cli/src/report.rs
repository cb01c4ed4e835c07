//! Report assembly for scenario runs and the gallery.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tvspec_core::classify::{classify_boundedness_at, BoundednessClass};
use tvspec_core::corpus;
use tvspec_core::neumann::{converge_monitor, residual_identity_check, spectrum_probe, NeumannReport};
use tvspec_core::radii::{estimate_radius, verify_ordering, RadiusConfig, RadiusEstimate};
use tvspec_core::space::SpaceModel;
use tvspec_core::{OperatorRep, SpectraError};

use crate::error::CliError;
use crate::gallery;
use crate::scenario::{Scenario, TaskSpec};

pub const REPORT_SCHEMA: &str = "tvspec.report/1";

/// Residual identity deviations above this fail a Neumann task.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Command-line overrides. `None` keeps the scenario or gallery default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Params {
    pub seed: Option<u64>,
    pub depth: Option<usize>,
    pub level: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub seed: u64,
    pub depth: Option<usize>,
    pub level: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, expected: impl Into<String>, observed: impl Into<String>, passed: bool) -> Check {
        Check { name: name.into(), expected: expected.into(), observed: observed.into(), passed }
    }
}

/// One task of a scenario or one gallery example.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub radii: Vec<RadiusEstimate>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub neumann: Vec<NeumannReport>,
    #[serde(skip_serializing_if = "Value::is_null", default)]
    pub details: Value,
    /// One-line findings for the text summary.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub findings: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub passed: bool,
}

impl Section {
    pub fn new(label: impl Into<String>) -> Section {
        Section { label: label.into(), ..Section::default() }
    }

    pub fn check(&mut self, name: &str, expected: impl Into<String>, observed: impl Into<String>, passed: bool) {
        self.checks.push(Check::new(name, expected, observed, passed));
    }

    /// Passed iff there is no error and every check passed.
    pub fn finish(mut self) -> Section {
        self.passed = self.error.is_none() && self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn failed(label: impl Into<String>, err: impl std::fmt::Display) -> Section {
        Section { label: label.into(), error: Some(err.to_string()), ..Section::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    pub parameters: Parameters,
    pub sections: Vec<Section>,
    pub passed: bool,
}

impl Report {
    fn new(kind: &str, scenario: Option<Scenario>, parameters: Parameters, sections: Vec<Section>) -> Report {
        let passed = sections.iter().all(|s| s.passed);
        Report { schema: REPORT_SCHEMA.into(), kind: kind.into(), scenario, parameters, sections, passed }
    }
}

/// Runs independent jobs on scoped threads and keeps their order.
fn run_ordered<T: Send, F: Fn(usize) -> T + Sync>(count: usize, f: F) -> Vec<T> {
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..count).map(|i| s.spawn({
            let f = &f;
            move || f(i)
        })).collect();
        handles.into_iter().map(|h| h.join().expect("task thread panicked")).collect()
    })
}

pub fn run_gallery(params: &Params) -> Report {
    let ids: Vec<&str> = gallery::REGISTRY.iter().map(|e| e.id).collect();
    run_gallery_ids(&ids, params)
}

pub fn run_gallery_ids(ids: &[&str], params: &Params) -> Report {
    let sections = run_ordered(ids.len(), |i| gallery::run(ids[i], params));
    let parameters =
        Parameters { seed: params.seed.unwrap_or(corpus::DEFAULT_SEED), depth: params.depth, level: params.level };
    Report::new("gallery", None, parameters, sections)
}

struct Context {
    operator: OperatorRep,
    space: SpaceModel,
    cfg: RadiusConfig,
    seed: u64,
}

pub fn run_scenario(scenario: &Scenario, params: &Params) -> Result<Report, CliError> {
    scenario.validate()?;
    let seed = params.seed.unwrap_or(scenario.seed);
    let depth = params.depth.unwrap_or(scenario.depth);
    let level = params.level.unwrap_or(scenario.level);
    let ctx = Context {
        operator: scenario.operator.build()?,
        space: scenario.space.build(),
        cfg: RadiusConfig::new(depth, level),
        seed,
    };
    let gallery_params = Params { seed: Some(seed), ..*params };
    let sections = run_ordered(scenario.tasks.len(), |i| match &scenario.tasks[i] {
        TaskSpec::Gallery { id } => gallery::run(id, &gallery_params),
        task => run_task(task, &ctx),
    });
    let parameters = Parameters { seed, depth: Some(depth), level: Some(level) };
    Ok(Report::new("scenario", Some(scenario.clone()), parameters, sections))
}

// unsupported combinations are reported, not failed
fn is_unsupported(e: &SpectraError) -> bool {
    matches!(e, SpectraError::UnsupportedCombination(_) | SpectraError::NoClosedForm(_))
}

fn run_task(task: &TaskSpec, ctx: &Context) -> Section {
    let mut sec = Section::new(task.label());
    match task {
        TaskSpec::Classify => match classify_boundedness_at(&ctx.operator, &ctx.space, ctx.cfg.level) {
            Ok(r) => {
                sec.check("hierarchy", "nb => nn => continuous => bb", "consistent", true);
                for c in BoundednessClass::CHAIN {
                    let v = r.get(c);
                    sec.findings.push(format!("{c}: {:?} ({})", v.verdict, v.witness));
                }
                sec.details = serde_json::to_value(r).unwrap();
            }
            Err(e) => sec.error = Some(e.to_string()),
        },
        TaskSpec::Radii { kinds } => {
            for &k in kinds {
                match estimate_radius(k, &ctx.operator, &ctx.space, &ctx.cfg) {
                    Ok(est) => sec.radii.push(est),
                    Err(e) if is_unsupported(&e) => sec.notes.push(format!("{k}: {e}")),
                    Err(e) => sec.error = Some(format!("{k}: {e}")),
                }
            }
            let ord = verify_ordering(&sec.radii);
            let observed = if ord.holds { "no violations".to_string() } else { format!("{} violations", ord.violations.len()) };
            sec.check("ordering", "certified bounds respect r_l <= r_bb <= r_c <= r_nn <= r_nb", observed, ord.holds);
            sec.details = serde_json::to_value(ord).unwrap();
        }
        TaskSpec::Neumann { lambdas, kinds } => {
            let probes = corpus::probes(ctx.seed, 5);
            let mut worst: f64 = 0.0;
            for lam in lambdas.iter().map(|l| l.value()) {
                for &k in kinds {
                    match converge_monitor(&ctx.operator, lam, k, &ctx.space, &ctx.cfg) {
                        Ok(r) => sec.neumann.push(r),
                        Err(e) if is_unsupported(&e) => sec.notes.push(format!("{k} at {lam}: {e}")),
                        Err(e) => sec.error = Some(format!("{k} at {lam}: {e}")),
                    }
                }
                for x in &probes {
                    match residual_identity_check(&ctx.operator, lam, ctx.cfg.depth, x) {
                        Ok(d) => worst = worst.max(d.to_f64()),
                        Err(e) => sec.error = Some(format!("residual at {lam}: {e}")),
                    }
                }
            }
            sec.check(
                "residual identity",
                format!("max relative deviation <= {RESIDUAL_TOLERANCE:e}"),
                format!("{worst:e}"),
                worst <= RESIDUAL_TOLERANCE,
            );
        }
        TaskSpec::Spectrum { lambdas } => {
            let mut out = Vec::new();
            for lam in lambdas.iter().map(|l| l.value()) {
                match spectrum_probe(&ctx.operator, lam, &ctx.space) {
                    Ok(r) => {
                        let m: Vec<String> = r.memberships.iter().map(|m| format!("{} {:?}", m.kind, m.in_resolvent_set)).collect();
                        sec.findings.push(format!("lambda = {lam} in resolvent set: {}", m.join(", ")));
                        out.push(serde_json::to_value(r).unwrap());
                    }
                    Err(e) if is_unsupported(&e) => sec.notes.push(format!("{lam}: {e}")),
                    Err(e) => sec.error = Some(format!("{lam}: {e}")),
                }
            }
            sec.details = Value::Array(out);
        }
        TaskSpec::Gallery { .. } => unreachable!("gallery tasks are dispatched separately"),
    }
    sec.finish()
}
