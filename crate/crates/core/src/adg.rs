//! Attribute dependency graphs.
//!
//! An [`Adg`] maps design variables (source nodes) through intermediate
//! quantities to quantities of interest (sink nodes). Every non-variable node
//! names a mapping from a [`MappingRegistry`]; the graph itself stays purely
//! declarative so it can be stored in a problem file.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Role a design variable plays in the robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DvKind {
    Control,
    Actuation,
    Geometry,
}

/// A named, bounded design variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignVariable {
    pub name: String,
    pub unit: String,
    pub kind: DvKind,
    /// Lower design-space bound.
    pub lower: f64,
    /// Upper design-space bound.
    pub upper: f64,
}

impl DesignVariable {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

/// One concrete design: a value per design variable, in problem order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DesignPoint(pub Vec<f64>);

impl DesignPoint {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<f64>> for DesignPoint {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    LessEqual,
    GreaterEqual,
}

impl Comparator {
    /// NaN never satisfies a comparator.
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::LessEqual => value <= threshold,
            Comparator::GreaterEqual => value >= threshold,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::LessEqual => "<=",
            Comparator::GreaterEqual => ">=",
        })
    }
}

/// Threshold inequality on a quantity of interest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Requirement {
    pub id: String,
    pub qoi: String,
    pub comparator: Comparator,
    pub threshold: f64,
}

impl Requirement {
    pub fn less_equal(qoi: &str, threshold: f64) -> Self {
        Self {
            id: qoi.to_string(),
            qoi: qoi.to_string(),
            comparator: Comparator::LessEqual,
            threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Dv,
    Intermediate,
    Qoi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
}

impl Node {
    pub fn new(name: &str, kind: NodeKind) -> Self {
        Self {
            name: name.to_string(),
            kind,
        }
    }
}

/// Declarative graph: nodes, directed edges and mapping names.
///
/// The argument order of a mapping follows the order in which its incoming
/// edges appear in `edges`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Adg {
    pub nodes: Vec<Node>,
    pub edges: Vec<(String, String)>,
    pub mappings: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasibleReason {
    UnreachableWorkspace,
    SimulationFailed,
}

/// Raised by a mapping when its inputs lie outside the mapping's domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("target ({}, {}) is outside the workspace", target[0], target[1])]
    Unreachable { target: [f64; 2] },
    #[error("simulation failed: {0}")]
    SimulationFailed(String),
}

impl DomainError {
    pub fn reason(&self) -> InfeasibleReason {
        match self {
            DomainError::Unreachable { .. } => InfeasibleReason::UnreachableWorkspace,
            DomainError::SimulationFailed(_) => InfeasibleReason::SimulationFailed,
        }
    }
}

/// Value produced by a mapping. Most nodes are scalar; simulation nodes may
/// emit several components that downstream `select_k` mappings pick apart.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingOutput {
    pub values: Vec<f64>,
    /// The producing simulation hit its time cap.
    pub timed_out: bool,
}

impl MappingOutput {
    pub fn scalar(v: f64) -> Self {
        Self {
            values: vec![v],
            timed_out: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

impl Arity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Exactly(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Exactly(k) => write!(f, "{k}"),
            Arity::AtLeast(k) => write!(f, ">= {k}"),
        }
    }
}

pub type MappingFn =
    Arc<dyn Fn(&[&[f64]]) -> Result<MappingOutput, DomainError> + Send + Sync + 'static>;

#[derive(Clone)]
pub struct Mapping {
    pub arity: Arity,
    pub func: MappingFn,
}

impl fmt::Debug for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mapping").field("arity", &self.arity).finish()
    }
}

/// Named pure functions that problem files can refer to.
#[derive(Debug, Clone, Default)]
pub struct MappingRegistry {
    entries: HashMap<String, Mapping>,
}

fn first(args: &[&[f64]]) -> f64 {
    args[0][0]
}

impl MappingRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry with the arithmetic mappings used by analytic problems:
    /// `identity`, `square`, `plus_one`, `negate`, `sum`, `product`,
    /// `sum_squares` and `select_0` .. `select_7`.
    pub fn standard() -> Self {
        let mut reg = Self::empty();
        reg.register_scalar("identity", Arity::Exactly(1), first);
        reg.register_scalar("square", Arity::Exactly(1), |a| first(a) * first(a));
        reg.register_scalar("plus_one", Arity::Exactly(1), |a| first(a) + 1.0);
        reg.register_scalar("negate", Arity::Exactly(1), |a| -first(a));
        reg.register_scalar("sum", Arity::AtLeast(1), |a| {
            a.iter().flat_map(|p| p.iter()).sum()
        });
        reg.register_scalar("product", Arity::AtLeast(1), |a| {
            a.iter().flat_map(|p| p.iter()).product()
        });
        reg.register_scalar("sum_squares", Arity::AtLeast(1), |a| {
            a.iter().flat_map(|p| p.iter()).map(|v| v * v).sum()
        });
        for k in 0..8 {
            reg.register(
                &format!("select_{k}"),
                Arity::Exactly(1),
                Arc::new(move |args: &[&[f64]]| {
                    let parent = args[0];
                    let v = parent.get(k).copied().ok_or_else(|| {
                        DomainError::SimulationFailed(format!(
                            "select_{k} applied to a {}-component value",
                            parent.len()
                        ))
                    })?;
                    Ok(MappingOutput::scalar(v))
                }),
            );
        }
        reg
    }

    pub fn register(&mut self, name: &str, arity: Arity, func: MappingFn) {
        self.entries
            .insert(name.to_string(), Mapping { arity, func });
    }

    pub fn register_scalar<F>(&mut self, name: &str, arity: Arity, f: F)
    where
        F: Fn(&[&[f64]]) -> f64 + Send + Sync + 'static,
    {
        self.register(
            name,
            arity,
            Arc::new(move |args: &[&[f64]]| Ok(MappingOutput::scalar(f(args)))),
        );
    }

    pub fn get(&self, name: &str) -> Option<&Mapping> {
        self.entries.get(name)
    }
}

/// A structural problem found by [`validate_adg`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "defect", rename_all = "snake_case")]
pub enum Defect {
    DuplicateNode { node: String },
    DanglingEdge { from: String, to: String },
    Cycle { nodes: Vec<String> },
    DvHasParents { node: String },
    QoiHasChildren { node: String },
    MissingMapping { node: String },
    UnknownMapping { node: String, mapping: String },
    MappingOnDv { node: String },
    ArityMismatch { node: String, expected: String, found: usize },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::DuplicateNode { node } => write!(f, "duplicate node {node}"),
            Defect::DanglingEdge { from, to } => write!(f, "dangling edge {from} -> {to}"),
            Defect::Cycle { nodes } => write!(f, "cycle {{{}}}", nodes.join(",")),
            Defect::DvHasParents { node } => write!(f, "design-variable node {node} has parents"),
            Defect::QoiHasChildren { node } => write!(f, "qoi node {node} has children"),
            Defect::MissingMapping { node } => write!(f, "node {node} has no mapping"),
            Defect::UnknownMapping { node, mapping } => {
                write!(f, "node {node} refers to unknown mapping {mapping}")
            }
            Defect::MappingOnDv { node } => {
                write!(f, "design-variable node {node} must not carry a mapping")
            }
            Defect::ArityMismatch {
                node,
                expected,
                found,
            } => write!(
                f,
                "arity mismatch at {node}: mapping takes {expected}, node has {found} parents"
            ),
        }
    }
}

/// Outcome of [`validate_adg`]: a topological order when the graph is sound,
/// otherwise the list of defects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdgReport {
    pub order: Option<Vec<String>>,
    pub defects: Vec<Defect>,
}

impl AdgReport {
    pub fn is_ok(&self) -> bool {
        self.defects.is_empty()
    }
}

/// Checks the structural invariants of `adg` against `registry`.
///
/// The returned order is deterministic: among ready nodes the
/// lexicographically smallest name is emitted first, so it does not depend
/// on node insertion order.
pub fn validate_adg(adg: &Adg, registry: &MappingRegistry) -> AdgReport {
    let mut defects = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, node) in adg.nodes.iter().enumerate() {
        if index.insert(node.name.as_str(), i).is_some() {
            defects.push(Defect::DuplicateNode {
                node: node.name.clone(),
            });
        }
    }

    let n = adg.nodes.len();
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (from, to) in &adg.edges {
        match (index.get(from.as_str()), index.get(to.as_str())) {
            (Some(&a), Some(&b)) => {
                parents[b].push(a);
                children[a].push(b);
            }
            _ => defects.push(Defect::DanglingEdge {
                from: from.clone(),
                to: to.clone(),
            }),
        }
    }

    for (i, node) in adg.nodes.iter().enumerate() {
        match node.kind {
            NodeKind::Dv => {
                if !parents[i].is_empty() {
                    defects.push(Defect::DvHasParents {
                        node: node.name.clone(),
                    });
                }
                if adg.mappings.contains_key(&node.name) {
                    defects.push(Defect::MappingOnDv {
                        node: node.name.clone(),
                    });
                }
            }
            NodeKind::Intermediate | NodeKind::Qoi => {
                if node.kind == NodeKind::Qoi && !children[i].is_empty() {
                    defects.push(Defect::QoiHasChildren {
                        node: node.name.clone(),
                    });
                }
                match adg.mappings.get(&node.name) {
                    None => defects.push(Defect::MissingMapping {
                        node: node.name.clone(),
                    }),
                    Some(m) => match registry.get(m) {
                        None => defects.push(Defect::UnknownMapping {
                            node: node.name.clone(),
                            mapping: m.clone(),
                        }),
                        Some(mapping) => {
                            if !mapping.arity.accepts(parents[i].len()) {
                                defects.push(Defect::ArityMismatch {
                                    node: node.name.clone(),
                                    expected: mapping.arity.to_string(),
                                    found: parents[i].len(),
                                });
                            }
                        }
                    },
                }
            }
        }
    }
    for name in adg.mappings.keys() {
        if !index.contains_key(name.as_str()) {
            defects.push(Defect::MissingMapping { node: name.clone() });
        }
    }

    // Kahn's algorithm with a name-ordered ready set.
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<(&str, usize)> = (0..n)
        .filter(|&i| indegree[i] == 0)
        .map(|i| (adg.nodes[i].name.as_str(), i))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&(name, i)) = ready.iter().next() {
        ready.remove(&(name, i));
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert((adg.nodes[c].name.as_str(), c));
            }
        }
    }
    if order.len() < n {
        // Peel nodes that cannot reach a cycle so only cycle members remain.
        let mut alive: Vec<bool> = indegree.iter().map(|&d| d > 0).collect();
        let mut outdeg: Vec<usize> = (0..n)
            .map(|i| children[i].iter().filter(|&&c| alive[c]).count())
            .collect();
        let mut queue: VecDeque<usize> =
            (0..n).filter(|&i| alive[i] && outdeg[i] == 0).collect();
        while let Some(i) = queue.pop_front() {
            alive[i] = false;
            for &p in &parents[i] {
                if alive[p] {
                    outdeg[p] -= 1;
                    if outdeg[p] == 0 {
                        queue.push_back(p);
                    }
                }
            }
        }
        let mut nodes: Vec<String> = (0..n)
            .filter(|&i| alive[i])
            .map(|i| adg.nodes[i].name.clone())
            .collect();
        nodes.sort();
        defects.push(Defect::Cycle { nodes });
    }

    let order = defects.is_empty().then(|| {
        order
            .into_iter()
            .map(|i| adg.nodes[i].name.clone())
            .collect()
    });
    AdgReport { order, defects }
}

#[derive(Debug, Error, PartialEq)]
pub enum AdgError {
    #[error("invalid attribute dependency graph: {}", join_defects(.0))]
    Invalid(Vec<Defect>),
    #[error("design-variable node {0} does not name a design variable")]
    UnknownVariable(String),
    #[error("design variable {0} has no node in the graph")]
    UnboundVariable(String),
}

fn join_defects(defects: &[Defect]) -> String {
    defects
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Values of the quantities of interest for one design.
///
/// A `None` entry marks a QoI left undefined because a mapping upstream of it
/// raised a [`DomainError`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QoiValues {
    pub values: BTreeMap<String, Option<f64>>,
    pub infeasible: Option<InfeasibleReason>,
    pub timed_out: bool,
}

impl QoiValues {
    pub fn get(&self, qoi: &str) -> Option<f64> {
        self.values.get(qoi).copied().flatten()
    }

    /// All QoIs are defined and no simulation hit its time cap.
    pub fn is_feasible(&self) -> bool {
        self.infeasible.is_none() && !self.timed_out && self.values.values().all(Option::is_some)
    }
}

#[derive(Clone)]
struct CompiledNode {
    name: String,
    parents: Vec<usize>,
    source: NodeSource,
}

#[derive(Clone)]
enum NodeSource {
    Variable(usize),
    Mapping(MappingFn),
}

/// An [`Adg`] bound to a variable list and resolved against a registry,
/// ready for repeated evaluation. Immutable and shareable across threads.
#[derive(Clone)]
pub struct CompiledAdg {
    /// Nodes in topological order.
    nodes: Vec<CompiledNode>,
    /// (qoi name, position in `nodes`), in graph declaration order.
    qois: Vec<(String, usize)>,
}

impl fmt::Debug for CompiledAdg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompiledAdg")
            .field("order", &self.nodes.iter().map(|n| &n.name).collect::<Vec<_>>())
            .field("qois", &self.qois)
            .finish()
    }
}

impl CompiledAdg {
    pub fn new(
        adg: &Adg,
        registry: &MappingRegistry,
        variables: &[DesignVariable],
    ) -> Result<Self, AdgError> {
        let report = validate_adg(adg, registry);
        let order = match report.order {
            Some(order) => order,
            None => return Err(AdgError::Invalid(report.defects)),
        };
        let position: HashMap<&str, usize> = order
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let kind_of: HashMap<&str, NodeKind> =
            adg.nodes.iter().map(|n| (n.name.as_str(), n.kind)).collect();
        let var_index: HashMap<&str, usize> = variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect();

        let mut nodes: Vec<CompiledNode> = order
            .iter()
            .map(|name| {
                let source = match kind_of[name.as_str()] {
                    NodeKind::Dv => NodeSource::Variable(
                        *var_index
                            .get(name.as_str())
                            .ok_or_else(|| AdgError::UnknownVariable(name.clone()))?,
                    ),
                    _ => {
                        let mapping = &adg.mappings[name];
                        NodeSource::Mapping(registry.get(mapping).expect("validated").func.clone())
                    }
                };
                Ok(CompiledNode {
                    name: name.clone(),
                    parents: Vec::new(),
                    source,
                })
            })
            .collect::<Result<_, AdgError>>()?;
        for (from, to) in &adg.edges {
            let (a, b) = (position[from.as_str()], position[to.as_str()]);
            nodes[b].parents.push(a);
        }
        for v in variables {
            if kind_of.get(v.name.as_str()) != Some(&NodeKind::Dv) {
                return Err(AdgError::UnboundVariable(v.name.clone()));
            }
        }
        let qois = adg
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Qoi)
            .map(|n| (n.name.clone(), position[n.name.as_str()]))
            .collect();
        Ok(Self { nodes, qois })
    }

    /// QoI names in graph declaration order.
    pub fn qoi_names(&self) -> impl Iterator<Item = &str> {
        self.qois.iter().map(|(n, _)| n.as_str())
    }

    /// Composes the mappings along the topological order.
    ///
    /// The caller is responsible for checking `x` against the design-space
    /// bounds; see [`crate::problem::Problem::evaluate`].
    pub fn evaluate(&self, x: &[f64]) -> QoiValues {
        let mut values: Vec<Option<Vec<f64>>> = Vec::with_capacity(self.nodes.len());
        let mut infeasible = None;
        let mut timed_out = false;
        for node in &self.nodes {
            let out = match &node.source {
                NodeSource::Variable(i) => Some(vec![x[*i]]),
                NodeSource::Mapping(f) => {
                    let args: Option<Vec<&[f64]>> =
                        node.parents.iter().map(|&p| values[p].as_deref()).collect();
                    match args.map(|a| f(&a)) {
                        Some(Ok(out)) => {
                            timed_out |= out.timed_out;
                            Some(out.values)
                        }
                        Some(Err(e)) => {
                            infeasible.get_or_insert(e.reason());
                            None
                        }
                        None => None,
                    }
                }
            };
            values.push(out);
        }
        let values = self
            .qois
            .iter()
            .map(|(name, i)| (name.clone(), values[*i].as_ref().map(|v| v[0])))
            .collect();
        QoiValues {
            values,
            infeasible,
            timed_out,
        }
    }
}

/// Which requirements a design violates. Empty `violated` means good.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Classification {
    pub violated: BTreeSet<String>,
    pub infeasible_reason: Option<InfeasibleReason>,
}

impl Classification {
    pub fn good() -> Self {
        Self::default()
    }

    pub fn is_good(&self) -> bool {
        self.violated.is_empty()
    }
}

/// Labels a design against `requirements`. An undefined (or missing) QoI
/// violates every requirement placed on it.
pub fn classify(qois: &QoiValues, requirements: &[Requirement]) -> Classification {
    let violated: BTreeSet<String> = requirements
        .iter()
        .filter(|r| match qois.get(&r.qoi) {
            Some(v) => !r.comparator.holds(v, r.threshold),
            None => true,
        })
        .map(|r| r.id.clone())
        .collect();
    let infeasible_reason = if violated.is_empty() {
        None
    } else {
        qois.infeasible
    };
    Classification {
        violated,
        infeasible_reason,
    }
}
