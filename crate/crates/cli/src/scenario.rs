//! Scenario files: a TOML document naming a space, an operator and a list
//! of tasks. See `docs/scenario-format.md` for the grammar.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tvspec_core::num::{re, Scalar};
use tvspec_core::radii::RadiusKind;
use tvspec_core::seminorm::Seminorm;
use tvspec_core::space::{SequenceClass, SpaceModel};
use tvspec_core::{OperatorRep, SparseVector, Weight};

use crate::error::CliError;
use crate::gallery;

pub const SCENARIO_SCHEMA: &str = "tvspec.scenario/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_level")]
    pub level: usize,
    pub space: SpaceSpec,
    pub operator: OperatorSpec,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

fn default_seed() -> u64 {
    tvspec_core::corpus::DEFAULT_SEED
}

fn default_depth() -> usize {
    60
}

fn default_level() -> usize {
    8
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilySpec {
    /// `|x_k|` for each `k`, directed by finite maxima.
    Coordinate,
    /// The single norm `sup_k |x_k|`.
    SupNorm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub family: FamilySpec,
    pub class: SequenceClass,
    pub complete: Option<bool>,
    pub locally_bounded: Option<bool>,
    /// Box weights `w`, each giving the bounded set `{ |x_k| <= w(k) }`.
    #[serde(default)]
    pub bounded_sets: Vec<Weight>,
}

impl SpaceSpec {
    pub fn build(&self) -> SpaceModel {
        let name = format!("{:?} sequences, {:?}", self.class, self.family).to_lowercase();
        let mut s = match self.family {
            FamilySpec::Coordinate => SpaceModel::coordinatewise(&name, self.class),
            FamilySpec::SupNorm => SpaceModel::normed(&name, self.class),
        };
        if let Some(c) = self.complete {
            s.complete = c;
        }
        if let Some(l) = self.locally_bounded {
            s.locally_bounded = l;
        }
        if !self.bounded_sets.is_empty() {
            s = s.with_bounded_sets(self.bounded_sets.iter().cloned().map(Seminorm::minkowski).collect());
        }
        s
    }
}

/// A real number or a `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Real(f64),
    Complex([f64; 2]),
}

impl ScalarSpec {
    pub fn value(&self) -> Scalar {
        match *self {
            ScalarSpec::Real(x) => re(x),
            ScalarSpec::Complex([a, b]) => Scalar::new(a, b),
        }
    }
}

fn dense(v: &[ScalarSpec]) -> SparseVector {
    SparseVector::from_pairs(v.iter().enumerate().map(|(i, z)| (i + 1, z.value()))).expect("indices start at 1")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    Identity,
    Zero,
    LeftShift,
    ForwardShift,
    /// The weighted backward shift with weights `(k-1)^(k-1) / k^k`.
    SelfPowerShift,
    Diagonal { weight: Weight },
    WeightedShift { offset: i64, weight: Weight },
    /// `sum_r <f_r, x> y_r`; vectors are dense from index 1.
    FiniteRank { range: Vec<Vec<ScalarSpec>>, functionals: Vec<Vec<ScalarSpec>> },
    /// Leading block, zero elsewhere.
    Matrix { rows: Vec<Vec<ScalarSpec>> },
    Sum { terms: Vec<OperatorSpec> },
    /// Composition; the last factor acts first.
    Product { factors: Vec<OperatorSpec> },
    Scale { factor: ScalarSpec, operator: Box<OperatorSpec> },
}

impl OperatorSpec {
    pub fn build(&self) -> Result<OperatorRep, CliError> {
        Ok(match self {
            OperatorSpec::Identity => OperatorRep::identity(),
            OperatorSpec::Zero => OperatorRep::zero(),
            OperatorSpec::LeftShift => OperatorRep::left_shift(),
            OperatorSpec::ForwardShift => OperatorRep::forward_shift(),
            OperatorSpec::SelfPowerShift => OperatorRep::self_power_shift(),
            OperatorSpec::Diagonal { weight } => OperatorRep::diagonal(weight.clone()),
            OperatorSpec::WeightedShift { offset, weight } => OperatorRep::weighted_shift(*offset, weight.clone()),
            OperatorSpec::FiniteRank { range, functionals } => {
                if range.len() != functionals.len() {
                    return Err(CliError::config("operator.range", "range and functionals differ in length"));
                }
                OperatorRep::FiniteRank {
                    functionals: functionals.iter().map(|v| dense(v)).collect(),
                    range: range.iter().map(|v| dense(v)).collect(),
                }
            }
            OperatorSpec::Matrix { rows } => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::config("operator.rows", "matrix must be square"));
                }
                let rows: Vec<Vec<Scalar>> = rows.iter().map(|r| r.iter().map(ScalarSpec::value).collect()).collect();
                OperatorRep::from_matrix(&rows)
            }
            OperatorSpec::Sum { terms } => OperatorRep::sum(terms.iter().map(|t| t.build()).collect::<Result<_, _>>()?),
            OperatorSpec::Product { factors } => {
                OperatorRep::product(factors.iter().map(|t| t.build()).collect::<Result<_, _>>()?)
            }
            OperatorSpec::Scale { factor, operator } => OperatorRep::scale(factor.value(), operator.build()?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    Classify,
    Radii {
        #[serde(default = "all_kinds")]
        kinds: Vec<RadiusKind>,
    },
    Neumann {
        lambdas: Vec<ScalarSpec>,
        #[serde(default = "all_kinds")]
        kinds: Vec<RadiusKind>,
    },
    Spectrum {
        lambdas: Vec<ScalarSpec>,
    },
    Gallery {
        id: String,
    },
}

fn all_kinds() -> Vec<RadiusKind> {
    RadiusKind::ALL.to_vec()
}

impl TaskSpec {
    pub fn label(&self) -> String {
        match self {
            TaskSpec::Classify => "classify".into(),
            TaskSpec::Radii { .. } => "radii".into(),
            TaskSpec::Neumann { .. } => "neumann".into(),
            TaskSpec::Spectrum { .. } => "spectrum".into(),
            TaskSpec::Gallery { id } => format!("gallery:{id}"),
        }
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, CliError> {
        let s: Scenario = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|sp| text[..sp.start].lines().count().max(1));
            CliError::Config { field: line.map_or("document".into(), |l| format!("line {l}")), message: e.message().to_string() }
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        Scenario::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(CliError::config("schema", format!("expected {SCENARIO_SCHEMA:?}, found {:?}", self.schema)));
        }
        if self.depth < 8 {
            return Err(CliError::config("depth", "depth must be at least 8"));
        }
        if self.level == 0 {
            return Err(CliError::config("level", "level must be at least 1"));
        }
        for (i, t) in self.tasks.iter().enumerate() {
            match t {
                TaskSpec::Gallery { id } if gallery::find(id).is_none() => {
                    return Err(CliError::config(format!("tasks[{i}].id"), format!("unknown gallery id {id:?}")));
                }
                TaskSpec::Neumann { lambdas, .. } | TaskSpec::Spectrum { lambdas } if lambdas.is_empty() => {
                    return Err(CliError::config(format!("tasks[{i}].lambdas"), "empty lambda grid"));
                }
                _ => {}
            }
        }
        self.operator.build()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
schema = "tvspec.scenario/1"
name = "half"
depth = 40

[space]
family = "sup-norm"
class = "bounded"

[operator]
kind = "diagonal"
weight = { kind = "geo-power", coef = [0.5, 0.0], base = 1.0, exponent = 0.0 }

[[tasks]]
task = "radii"

[[tasks]]
task = "neumann"
lambdas = [2.0, [0.0, 1.0]]
kinds = ["nb"]
"#;

    #[test]
    fn parses_and_builds() {
        let s = Scenario::parse(SAMPLE).unwrap();
        assert_eq!(s.depth, 40);
        assert_eq!(s.level, 8);
        assert_eq!(s.tasks.len(), 2);
        assert_eq!(s.operator.build().unwrap(), OperatorRep::diagonal(Weight::real_constant(0.5)));
        assert!(s.space.build().is_normed());
        let TaskSpec::Neumann { lambdas, kinds } = &s.tasks[1] else { panic!() };
        assert_eq!(lambdas[1].value(), Scalar::new(0.0, 1.0));
        assert_eq!(kinds, &vec![RadiusKind::NB]);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = SAMPLE.replace("tvspec.scenario/1", "other/2");
        assert!(matches!(Scenario::parse(&bad), Err(CliError::Config { field, .. }) if field == "schema"));
        let bad = SAMPLE.replace("depth = 40", "depth = \"deep\"");
        let Err(CliError::Config { field, .. }) = Scenario::parse(&bad) else { panic!() };
        assert_eq!(field, "line 4");
        let bad = format!("{SAMPLE}\n[[tasks]]\ntask = \"gallery\"\nid = \"nope\"\n");
        assert!(matches!(Scenario::parse(&bad), Err(CliError::Config { field, .. }) if field == "tasks[2].id"));
    }
}
