//! Problem instances: a directed social graph with Independent-Cascade edge
//! probabilities, per-user incentive costs, the advertiser budget and the
//! cost-per-engagement rate.
//!
//! Nodes are identified by strings on the outside and by dense indices on the
//! inside. Indices follow the lexicographic order of the identifiers, which is
//! the tie-breaking order used by every selection routine in this crate.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::distributions::{Distribution, Uniform};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Dense node index (position in the lexicographic node order).
pub type NodeId = usize;
/// Position of an edge in the instance's fixed edge order.
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` declared twice")]
    DuplicateNode(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("edge {from} -> {to}: probability {value} is outside [0, 1]")]
    ProbabilityOutOfRange {
        from: String,
        to: String,
        value: f64,
    },
    #[error("node `{node}`: cost {value} must be a finite non-negative number")]
    InvalidCost { node: String, value: f64 },
    #[error("budget {0} must be a finite positive number")]
    InvalidBudget(f64),
    #[error("cost per engagement {0} must be a finite non-negative number")]
    InvalidCpe(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error(transparent)]
    Invalid(#[from] InstanceError),
}

/// Failure while reading an instance document, with the offending line (1-based).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct LoadError {
    pub line: usize,
    pub kind: LoadErrorKind,
}

impl LoadError {
    fn syntax(line: usize, msg: impl Into<String>) -> Self {
        LoadError {
            line,
            kind: LoadErrorKind::Syntax(msg.into()),
        }
    }

    fn invalid(line: usize, err: InstanceError) -> Self {
        LoadError {
            line,
            kind: LoadErrorKind::Invalid(err),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("cannot place {requested} distinct directed edges on {nodes} nodes (at most {max})")]
    InfeasibleEdgeCount {
        nodes: usize,
        requested: usize,
        max: usize,
    },
    #[error("{name} range [{lo}, {hi}] is empty or outside its domain")]
    InvalidRange { name: &'static str, lo: f64, hi: f64 },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub probability: f64,
}

/// Sorted, duplicate-free set of node indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn new() -> Self {
        NodeSet(Vec::new())
    }

    pub fn singleton(v: NodeId) -> Self {
        NodeSet(vec![v])
    }

    /// Nodes whose bit is set in `mask` (bit `i` is node `i`).
    pub fn from_mask(mask: u64) -> Self {
        NodeSet((0..64).filter(|i| mask >> i & 1 == 1).collect())
    }

    /// Bitmask form; only valid for node indices below 64.
    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &v| m | 1 << v)
    }

    pub fn insert(&mut self, v: NodeId) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, v);
                true
            }
        }
    }

    pub fn with(&self, v: NodeId) -> Self {
        let mut out = self.clone();
        out.insert(v);
        out
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut v: Vec<NodeId> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }
}

/// A validated, immutable problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    names: Vec<String>,
    costs: Vec<f64>,
    edges: Vec<Edge>,
    budget: f64,
    cpe: f64,
    out_edges: Vec<Vec<EdgeId>>,
    index: HashMap<String, NodeId>,
}

impl Instance {
    /// Builds an instance from named nodes `(id, cost)` and named edges
    /// `(source, target, probability)`. Edge order is preserved; nodes are
    /// re-ordered lexicographically.
    pub fn new<N, E>(
        nodes: impl IntoIterator<Item = (N, f64)>,
        edges: impl IntoIterator<Item = (E, E, f64)>,
        budget: f64,
        cpe: f64,
    ) -> Result<Self, InstanceError>
    where
        N: Into<String>,
        E: AsRef<str>,
    {
        let mut named: Vec<(String, f64)> = nodes.into_iter().map(|(n, c)| (n.into(), c)).collect();
        named.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in named.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(InstanceError::DuplicateNode(pair[0].0.clone()));
            }
        }
        for (name, cost) in &named {
            if !(cost.is_finite() && *cost >= 0.0) {
                return Err(InstanceError::InvalidCost {
                    node: name.clone(),
                    value: *cost,
                });
            }
        }
        if !(budget.is_finite() && budget > 0.0) {
            return Err(InstanceError::InvalidBudget(budget));
        }
        if !(cpe.is_finite() && cpe >= 0.0) {
            return Err(InstanceError::InvalidCpe(cpe));
        }

        let index: HashMap<String, NodeId> = named
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.clone(), i))
            .collect();
        let mut seen = HashSet::new();
        let mut resolved = Vec::new();
        for (src, dst, p) in edges {
            let (src, dst) = (src.as_ref(), dst.as_ref());
            let s = *index
                .get(src)
                .ok_or_else(|| InstanceError::UnknownNode(src.to_string()))?;
            let t = *index
                .get(dst)
                .ok_or_else(|| InstanceError::UnknownNode(dst.to_string()))?;
            if s == t {
                return Err(InstanceError::SelfLoop(src.to_string()));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(InstanceError::ProbabilityOutOfRange {
                    from: src.to_string(),
                    to: dst.to_string(),
                    value: p,
                });
            }
            if !seen.insert((s, t)) {
                return Err(InstanceError::DuplicateEdge(src.to_string(), dst.to_string()));
            }
            resolved.push(Edge {
                source: s,
                target: t,
                probability: p,
            });
        }

        let mut out_edges = vec![Vec::new(); named.len()];
        for (i, e) in resolved.iter().enumerate() {
            out_edges[e.source].push(i);
        }
        let (names, costs) = named.into_iter().unzip();
        Ok(Instance {
            names,
            costs,
            edges: resolved,
            budget,
            cpe,
            out_edges,
            index,
        })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn cpe(&self) -> f64 {
        self.cpe
    }

    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node_index(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    /// Resolves a list of identifiers into a node set.
    pub fn node_set<S: AsRef<str>>(&self, names: &[S]) -> Result<NodeSet, InstanceError> {
        names
            .iter()
            .map(|n| {
                self.node_index(n.as_ref())
                    .ok_or_else(|| InstanceError::UnknownNode(n.as_ref().to_string()))
            })
            .collect()
    }

    pub fn names_of(&self, set: &NodeSet) -> Vec<String> {
        set.iter().map(|v| self.names[v].clone()).collect()
    }

    pub fn cost(&self, v: NodeId) -> f64 {
        self.costs[v]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn set_cost(&self, set: &NodeSet) -> f64 {
        set.iter().map(|v| self.costs[v]).sum()
    }

    pub fn max_cost(&self) -> f64 {
        self.costs.iter().copied().fold(0.0, f64::max)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    /// True when every edge probability is 0 or 1, i.e. there is a single realization.
    pub fn is_deterministic(&self) -> bool {
        self.edges
            .iter()
            .all(|e| e.probability == 0.0 || e.probability == 1.0)
    }

    /// Edges whose label is genuinely random (0 < ρ < 1).
    pub fn random_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.probability > 0.0 && e.probability < 1.0)
            .map(|(i, _)| i)
    }

    /// `{e | c(e) <= x}`.
    pub fn users_within_cost(&self, x: f64) -> NodeSet {
        self.costs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c <= x)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn all_nodes(&self) -> NodeSet {
        (0..self.node_count()).collect()
    }

    /// Serializes into the line-oriented instance format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "ic {} {} {} {}",
            self.node_count(),
            self.edge_count(),
            self.budget,
            self.cpe
        );
        for (name, cost) in self.names.iter().zip(&self.costs) {
            let _ = writeln!(out, "node {name} {cost}");
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "edge {} {} {}",
                self.names[e.source], self.names[e.target], e.probability
            );
        }
        out
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Instance {
    type Err = LoadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        load_instance(s)
    }
}

fn parse_number(line: usize, field: &str, token: Option<&str>) -> Result<f64, LoadError> {
    let token = token.ok_or_else(|| LoadError::syntax(line, format!("missing {field}")))?;
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(LoadError::syntax(
            line,
            format!("{field}: `{token}` is not a decimal number"),
        )),
    }
}

fn parse_count(line: usize, field: &str, token: Option<&str>) -> Result<usize, LoadError> {
    let token = token.ok_or_else(|| LoadError::syntax(line, format!("missing {field}")))?;
    token
        .parse::<usize>()
        .map_err(|_| LoadError::syntax(line, format!("{field}: `{token}` is not a count")))
}

/// Parses and validates an instance document.
///
/// ```text
/// ic <n> <m> <B> <cpe>
/// node <id> <cost>        (n lines)
/// edge <src> <dst> <rho>  (m lines)
/// ```
///
/// `#` starts a comment that runs to the end of the line.
pub fn load_instance(source: &str) -> Result<Instance, LoadError> {
    let mut header: Option<(usize, usize, usize, f64, f64)> = None;
    let mut nodes: Vec<(usize, String, f64)> = Vec::new();
    let mut edges: Vec<(usize, String, String, f64)> = Vec::new();

    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        match keyword {
            "ic" => {
                if header.is_some() {
                    return Err(LoadError::syntax(line, "duplicate `ic` header"));
                }
                let n = parse_count(line, "node count", tokens.next())?;
                let m = parse_count(line, "edge count", tokens.next())?;
                let budget = parse_number(line, "budget", tokens.next())?;
                let cpe = parse_number(line, "cost per engagement", tokens.next())?;
                header = Some((line, n, m, budget, cpe));
            }
            "node" | "edge" if header.is_none() => {
                return Err(LoadError::syntax(line, "expected `ic` header first"));
            }
            "node" => {
                if !edges.is_empty() {
                    return Err(LoadError::syntax(line, "node declared after edges"));
                }
                let id = tokens
                    .next()
                    .ok_or_else(|| LoadError::syntax(line, "missing node id"))?;
                let cost = parse_number(line, "cost", tokens.next())?;
                nodes.push((line, id.to_string(), cost));
            }
            "edge" => {
                let src = tokens
                    .next()
                    .ok_or_else(|| LoadError::syntax(line, "missing edge source"))?;
                let dst = tokens
                    .next()
                    .ok_or_else(|| LoadError::syntax(line, "missing edge target"))?;
                let rho = parse_number(line, "probability", tokens.next())?;
                edges.push((line, src.to_string(), dst.to_string(), rho));
            }
            other => {
                return Err(LoadError::syntax(line, format!("unknown record `{other}`")));
            }
        }
        if let Some(extra) = tokens.next() {
            return Err(LoadError::syntax(line, format!("unexpected token `{extra}`")));
        }
    }

    let (header_line, n, m, budget, cpe) =
        header.ok_or_else(|| LoadError::syntax(1, "missing `ic` header"))?;
    if nodes.len() != n {
        return Err(LoadError::syntax(
            header_line,
            format!("header declares {n} nodes, found {}", nodes.len()),
        ));
    }
    if edges.len() != m {
        return Err(LoadError::syntax(
            header_line,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }

    // Per-record validation first so errors point at the right line.
    let mut declared = HashSet::new();
    for (line, id, cost) in &nodes {
        if !declared.insert(id.as_str()) {
            return Err(LoadError::invalid(*line, InstanceError::DuplicateNode(id.clone())));
        }
        if cost.is_nan() || *cost < 0.0 {
            return Err(LoadError::invalid(
                *line,
                InstanceError::InvalidCost {
                    node: id.clone(),
                    value: *cost,
                },
            ));
        }
    }
    let mut pairs = HashSet::new();
    for (line, src, dst, rho) in &edges {
        let err = if !declared.contains(src.as_str()) {
            Some(InstanceError::UnknownNode(src.clone()))
        } else if !declared.contains(dst.as_str()) {
            Some(InstanceError::UnknownNode(dst.clone()))
        } else if src == dst {
            Some(InstanceError::SelfLoop(src.clone()))
        } else if !(0.0..=1.0).contains(rho) {
            Some(InstanceError::ProbabilityOutOfRange {
                from: src.clone(),
                to: dst.clone(),
                value: *rho,
            })
        } else if !pairs.insert((src.as_str(), dst.as_str())) {
            Some(InstanceError::DuplicateEdge(src.clone(), dst.clone()))
        } else {
            None
        };
        if let Some(err) = err {
            return Err(LoadError::invalid(*line, err));
        }
    }

    Instance::new(
        nodes.into_iter().map(|(_, id, c)| (id, c)),
        edges.into_iter().map(|(_, s, t, p)| (s, t, p)),
        budget,
        cpe,
    )
    .map_err(|e| LoadError::invalid(header_line, e))
}

/// Parameters for [`generate_random_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstanceSpec {
    pub nodes: usize,
    pub edges: usize,
    pub prob_range: (f64, f64),
    pub cost_range: (f64, f64),
    pub budget: f64,
    pub cpe: f64,
    pub seed: u64,
}

impl RandomInstanceSpec {
    pub fn new(nodes: usize, edges: usize, budget: f64, seed: u64) -> Self {
        RandomInstanceSpec {
            nodes,
            edges,
            prob_range: (0.0, 1.0),
            cost_range: (1.0, budget),
            budget,
            cpe: 1.0,
            seed,
        }
    }

    pub fn probabilities(mut self, lo: f64, hi: f64) -> Self {
        self.prob_range = (lo, hi);
        self
    }

    pub fn costs(mut self, lo: f64, hi: f64) -> Self {
        self.cost_range = (lo, hi);
        self
    }
}

/// Node identifiers `v0..v{n-1}`, zero-padded so that lexicographic order
/// matches numeric order.
pub fn generated_name(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len();
    format!("v{i:0width$}")
}

/// Draws `m` distinct non-loop directed edges uniformly, with probabilities and
/// costs uniform on their ranges. Deterministic in `spec.seed`.
pub fn generate_random_instance(spec: &RandomInstanceSpec) -> Result<Instance, GenerateError> {
    let n = spec.nodes;
    let max = n * n.saturating_sub(1);
    if spec.edges > max {
        return Err(GenerateError::InfeasibleEdgeCount {
            nodes: n,
            requested: spec.edges,
            max,
        });
    }
    let (plo, phi) = spec.prob_range;
    if !(0.0 <= plo && plo <= phi && phi <= 1.0) {
        return Err(GenerateError::InvalidRange {
            name: "probability",
            lo: plo,
            hi: phi,
        });
    }
    let (clo, chi) = spec.cost_range;
    if !(0.0 <= clo && clo <= chi && chi.is_finite()) {
        return Err(GenerateError::InvalidRange {
            name: "cost",
            lo: clo,
            hi: chi,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let cost_dist = Uniform::new_inclusive(clo, chi);
    let prob_dist = Uniform::new_inclusive(plo, phi);
    let names: Vec<String> = (0..n).map(|i| generated_name(i, n)).collect();
    let nodes: Vec<(String, f64)> = names
        .iter()
        .map(|name| (name.clone(), cost_dist.sample(&mut rng)))
        .collect();

    // Slot k encodes source k / (n-1) and the k % (n-1)-th other node.
    let mut slots = if max == 0 {
        Vec::new()
    } else {
        index::sample(&mut rng, max, spec.edges).into_vec()
    };
    slots.sort_unstable();
    let edges: Vec<(&str, &str, f64)> = slots
        .into_iter()
        .map(|k| {
            let s = k / (n - 1);
            let mut t = k % (n - 1);
            if t >= s {
                t += 1;
            }
            (names[s].as_str(), names[t].as_str(), prob_dist.sample(&mut rng))
        })
        .collect();

    Ok(Instance::new(nodes, edges, spec.budget, spec.cpe)?)
}
