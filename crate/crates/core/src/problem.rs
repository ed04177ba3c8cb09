//! Problem files and the loaded, immutable [`Problem`].

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adg::{
    classify, Adg, AdgError, Classification, CompiledAdg, DesignPoint, DesignVariable, DvKind,
    MappingRegistry, NodeKind, QoiValues, Requirement,
};
use crate::robot::{register_arm_mappings, Constants, Task};

/// Version of the problem-file schema accepted by [`ProblemFile`].
pub const SCHEMA_VERSION: u32 = 1;

/// On-disk problem description (JSON). Unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub variables: Vec<DesignVariable>,
    pub adg: Adg,
    #[serde(default)]
    pub requirements: Vec<Requirement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
    /// Literal baseline design; bypasses the baseline optimizer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_baseline: Option<Vec<f64>>,
    /// Scalarization weights for the baseline optimizer, keyed by QoI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<BTreeMap<String, f64>>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        serde_json::from_str(text).map_err(|e| ProblemError::Parse(e.to_string()))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("cannot read problem file: {0}")]
    Io(String),
    #[error("malformed problem file: {0}")]
    Parse(String),
    #[error("design variable {name}: lower bound {lower} must be below upper bound {upper}")]
    DegenerateBounds { name: String, lower: f64, upper: f64 },
    #[error("design variable {0} is declared twice")]
    DuplicateVariable(String),
    #[error(transparent)]
    Adg(#[from] AdgError),
    #[error("requirement {id} refers to {qoi}, which is not a qoi node")]
    UnknownQoi { id: String, qoi: String },
    #[error("requirement {0} has a non-finite threshold")]
    NonFiniteThreshold(String),
    #[error("requirement id {0} is used twice")]
    DuplicateRequirement(String),
    #[error("invalid task: {0}")]
    Task(String),
    #[error("design point has {found} components, problem has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("design variable {name} = {value} lies outside [{lower}, {upper}]")]
    OutOfBounds {
        name: String,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("weight for {0} must be finite and non-negative")]
    BadWeight(String),
}

/// A validated problem: variables, compiled graph and active requirements.
///
/// Immutable after construction; evaluation is pure and `Problem` is cheap to
/// clone and safe to share between threads.
#[derive(Debug, Clone)]
pub struct Problem {
    file: Arc<ProblemFile>,
    adg: Arc<CompiledAdg>,
    requirements: Arc<Vec<Requirement>>,
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        Self::from_file(ProblemFile::from_json(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProblemError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| ProblemError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    /// Validates `file` and binds it to the standard mapping registry, plus
    /// the arm mappings when the file carries a task.
    pub fn from_file(file: ProblemFile) -> Result<Self, ProblemError> {
        let mut registry = MappingRegistry::standard();
        if let Some(task) = file.task {
            task.validate().map_err(ProblemError::Task)?;
            register_arm_mappings(&mut registry, task, file.constants.unwrap_or_default());
        }
        Self::with_registry(file, &registry)
    }

    pub fn with_registry(file: ProblemFile, registry: &MappingRegistry) -> Result<Self, ProblemError> {
        let mut seen = HashSet::new();
        for v in &file.variables {
            if !(v.lower < v.upper) {
                return Err(ProblemError::DegenerateBounds {
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            if !seen.insert(v.name.as_str()) {
                return Err(ProblemError::DuplicateVariable(v.name.clone()));
            }
        }
        let adg = CompiledAdg::new(&file.adg, registry, &file.variables)?;
        if let Some(weights) = &file.weights {
            for (k, w) in weights {
                if !(w.is_finite() && *w >= 0.0) {
                    return Err(ProblemError::BadWeight(k.clone()));
                }
            }
        }
        let mut problem = Self {
            adg: Arc::new(adg),
            requirements: Arc::new(Vec::new()),
            file: Arc::new(file),
        };
        let reqs = problem.file.requirements.clone();
        problem = problem.with_requirements(reqs)?;
        Ok(problem)
    }

    /// Same problem judged against `requirements` instead.
    pub fn with_requirements(&self, requirements: Vec<Requirement>) -> Result<Self, ProblemError> {
        let qois: HashSet<&str> = self.adg.qoi_names().collect();
        let mut ids = HashSet::new();
        for r in &requirements {
            if !qois.contains(r.qoi.as_str()) {
                return Err(ProblemError::UnknownQoi {
                    id: r.id.clone(),
                    qoi: r.qoi.clone(),
                });
            }
            if !r.threshold.is_finite() {
                return Err(ProblemError::NonFiniteThreshold(r.id.clone()));
            }
            if !ids.insert(r.id.as_str()) {
                return Err(ProblemError::DuplicateRequirement(r.id.clone()));
            }
        }
        Ok(Self {
            file: self.file.clone(),
            adg: self.adg.clone(),
            requirements: Arc::new(requirements),
        })
    }

    pub fn file(&self) -> &ProblemFile {
        &self.file
    }

    pub fn variables(&self) -> &[DesignVariable] {
        &self.file.variables
    }

    pub fn dim(&self) -> usize {
        self.file.variables.len()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.file.variables.iter().position(|v| v.name == name)
    }

    /// Indices of the variables of `kind`.
    pub fn indices_of_kind(&self, kind: DvKind) -> Vec<usize> {
        self.file
            .variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == kind)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn requirements(&self) -> &[Requirement] {
        &self.requirements
    }

    /// QoI names in the order the graph declares them.
    pub fn qoi_names(&self) -> Vec<String> {
        self.adg.qoi_names().map(str::to_string).collect()
    }

    /// Design-space center.
    pub fn center(&self) -> DesignPoint {
        DesignPoint(
            self.file
                .variables
                .iter()
                .map(|v| 0.5 * (v.lower + v.upper))
                .collect(),
        )
    }

    pub fn check_point(&self, x: &DesignPoint) -> Result<(), ProblemError> {
        if x.dim() != self.dim() {
            return Err(ProblemError::Dimension {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        for (v, &value) in self.file.variables.iter().zip(&x.0) {
            if !v.contains(value) {
                return Err(ProblemError::OutOfBounds {
                    name: v.name.clone(),
                    value,
                    lower: v.lower,
                    upper: v.upper,
                });
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &DesignPoint) -> Result<QoiValues, ProblemError> {
        self.check_point(x)?;
        Ok(self.adg.evaluate(&x.0))
    }

    pub fn classify_qois(&self, qois: &QoiValues) -> Classification {
        classify(qois, &self.requirements)
    }

    pub fn classify_point(&self, x: &DesignPoint) -> Result<Classification, ProblemError> {
        Ok(self.classify_qois(&self.evaluate(x)?))
    }

    /// Evaluates a batch in parallel; results keep the input order.
    pub fn evaluate_batch(&self, xs: &[DesignPoint]) -> Result<Vec<QoiValues>, ProblemError> {
        xs.par_iter().map(|x| self.evaluate(x)).collect()
    }

    /// Classifies a batch in parallel; results keep the input order.
    pub fn classify_batch(&self, xs: &[DesignPoint]) -> Result<Vec<Classification>, ProblemError> {
        xs.par_iter().map(|x| self.classify_point(x)).collect()
    }

    /// Priority rank of each requirement id for rendering: the position of
    /// its QoI among the graph's QoI nodes.
    pub fn requirement_rank(&self, id: &str) -> Option<usize> {
        let r = self.requirements.iter().find(|r| r.id == id)?;
        self.adg.qoi_names().position(|q| q == r.qoi)
    }

    /// Whether a QoI node of this name exists.
    pub fn has_qoi(&self, name: &str) -> bool {
        self.file
            .adg
            .nodes
            .iter()
            .any(|n| n.kind == NodeKind::Qoi && n.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = include_str!("../problems/toy_sum.json");

    #[test]
    fn loads_toy_problem() {
        let p = Problem::from_json(TOY).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.requirements().len(), 1);
        assert!(p.classify_point(&DesignPoint(vec![0.2, 0.3])).unwrap().is_good());
        assert!(!p.classify_point(&DesignPoint(vec![0.8, 0.3])).unwrap().is_good());
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(TOY).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(matches!(
            Problem::from_json(&v.to_string()),
            Err(ProblemError::Parse(_))
        ));
        let mut v: serde_json::Value = serde_json::from_str(TOY).unwrap();
        v["variables"][0]["colour"] = serde_json::json!("red");
        assert!(matches!(
            Problem::from_json(&v.to_string()),
            Err(ProblemError::Parse(_))
        ));
    }

    #[test]
    fn degenerate_bounds_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(TOY).unwrap();
        v["variables"][0]["upper"] = serde_json::json!(0.0);
        assert!(matches!(
            Problem::from_json(&v.to_string()),
            Err(ProblemError::DegenerateBounds { .. })
        ));
    }

    #[test]
    fn duplicate_variable_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(TOY).unwrap();
        let first = v["variables"][0].clone();
        v["variables"][1] = first;
        assert!(matches!(
            Problem::from_json(&v.to_string()),
            Err(ProblemError::DuplicateVariable(_))
        ));
    }

    #[test]
    fn requirement_on_unknown_qoi_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(TOY).unwrap();
        v["requirements"][0]["qoi"] = serde_json::json!("x1");
        assert!(matches!(
            Problem::from_json(&v.to_string()),
            Err(ProblemError::UnknownQoi { .. })
        ));
    }

    #[test]
    fn cyclic_graph_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(TOY).unwrap();
        v["adg"]["edges"]
            .as_array_mut()
            .unwrap()
            .push(serde_json::json!(["s", "s"]));
        let err = Problem::from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("cycle"), "{err}");
    }

    #[test]
    fn out_of_bounds_point_rejected_before_evaluation() {
        let p = Problem::from_json(TOY).unwrap();
        assert!(matches!(
            p.evaluate(&DesignPoint(vec![1.2, 0.0])),
            Err(ProblemError::OutOfBounds { .. })
        ));
        assert!(matches!(
            p.evaluate(&DesignPoint(vec![0.2])),
            Err(ProblemError::Dimension { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn infinite_threshold_rejected() {
        let p = Problem::from_json(TOY).unwrap();
        let err = p
            .with_requirements(vec![Requirement::less_equal("s", f64::INFINITY)])
            .unwrap_err();
        assert!(matches!(err, ProblemError::NonFiniteThreshold(_)));
    }

    #[test]
    fn file_round_trips() {
        let f = ProblemFile::from_json(TOY).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(ProblemFile::from_json(&text).unwrap(), f);
    }
}
