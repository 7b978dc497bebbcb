//! Live-edge realizations of the Independent Cascade model, partial
//! realizations revealed by a seed set, and exact engagement counting.

use std::collections::VecDeque;

use bitvec::prelude::*;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::network::{EdgeId, Instance, NodeId, NodeSet};

pub type EdgeBits = BitVec<u64, Lsb0>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CascadeError {
    #[error("node index {0} is not part of the instance")]
    UnknownNode(NodeId),
    #[error("edge index {0} is not part of the instance")]
    UnknownEdge(EdgeId),
    #[error("realization has {found} labels, instance has {expected} edges")]
    LengthMismatch { expected: usize, found: usize },
    #[error("partial realization is not closed: {0}")]
    NotClosed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Label {
    Live,
    Blocked,
}

impl Label {
    pub fn from_live(live: bool) -> Self {
        if live {
            Label::Live
        } else {
            Label::Blocked
        }
    }
}

/// A full live/blocked labeling of every edge, indexed by the instance's edge order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Realization {
    live: EdgeBits,
}

impl Realization {
    pub fn from_bits(live: EdgeBits) -> Self {
        Realization { live }
    }

    pub fn all_live(edges: usize) -> Self {
        Realization {
            live: bitvec![u64, Lsb0; 1; edges],
        }
    }

    pub fn all_blocked(edges: usize) -> Self {
        Realization {
            live: bitvec![u64, Lsb0; 0; edges],
        }
    }

    /// Bit `e` of `mask` is the label of edge `e` (requires at most 64 edges).
    pub fn from_mask(edges: usize, mask: u64) -> Self {
        Realization::from_fn(edges, |e| mask >> e & 1 == 1)
    }

    pub fn from_fn(edges: usize, mut live: impl FnMut(EdgeId) -> bool) -> Self {
        Realization {
            live: (0..edges).map(&mut live).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn is_live(&self, e: EdgeId) -> bool {
        self.live[e]
    }

    pub fn label(&self, e: EdgeId) -> Label {
        Label::from_live(self.live[e])
    }

    pub fn bits(&self) -> &EdgeBits {
        &self.live
    }

    fn check(&self, instance: &Instance) -> Result<(), CascadeError> {
        if self.live.len() != instance.edge_count() {
            return Err(CascadeError::LengthMismatch {
                expected: instance.edge_count(),
                found: self.live.len(),
            });
        }
        Ok(())
    }
}

/// Labels every edge Live independently with its probability.
pub fn sample_realization<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Realization {
    Realization::from_fn(instance.edge_count(), |e| {
        rng.gen::<f64>() < instance.edge(e).probability
    })
}

fn check_seeds(instance: &Instance, seeds: &NodeSet) -> Result<(), CascadeError> {
    match seeds.iter().find(|&v| v >= instance.node_count()) {
        Some(v) => Err(CascadeError::UnknownNode(v)),
        None => Ok(()),
    }
}

/// Breadth-first traversal over live edges; returns the reached flags.
/// `live` decides whether an edge may be crossed.
pub(crate) fn reach_from(
    instance: &Instance,
    seeds: impl IntoIterator<Item = NodeId>,
    mut live: impl FnMut(EdgeId) -> bool,
) -> Vec<bool> {
    let mut reached = vec![false; instance.node_count()];
    let mut queue = VecDeque::new();
    for s in seeds {
        if !reached[s] {
            reached[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &e in instance.out_edges(u) {
            let t = instance.edge(e).target;
            if !reached[t] && live(e) {
                reached[t] = true;
                queue.push_back(t);
            }
        }
    }
    reached
}

pub(crate) fn count_engaged(instance: &Instance, seeds: &NodeSet, realization: &Realization) -> usize {
    if seeds.is_empty() {
        return 0;
    }
    reach_from(instance, seeds.iter(), |e| realization.is_live(e))
        .into_iter()
        .filter(|&r| r)
        .count()
}

/// Reach set of a single node as a bitmask (instances with at most 64 nodes).
pub(crate) fn reach_mask(instance: &Instance, v: NodeId, realization: &Realization) -> u64 {
    reach_from(instance, [v], |e| realization.is_live(e))
        .into_iter()
        .enumerate()
        .filter(|(_, r)| *r)
        .fold(0u64, |m, (i, _)| m | 1 << i)
}

/// `g(S, φ)`: number of users reachable from `seeds` over live edges, seeds included.
pub fn engagements(
    instance: &Instance,
    seeds: &NodeSet,
    realization: &Realization,
) -> Result<usize, CascadeError> {
    check_seeds(instance, seeds)?;
    realization.check(instance)?;
    Ok(count_engaged(instance, seeds, realization))
}

/// Seeds plus the edge labels their cascades reveal. Unrevealed edges are `?`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialRealization {
    dom: NodeSet,
    revealed: EdgeBits,
    live: EdgeBits,
}

impl PartialRealization {
    pub fn empty(instance: &Instance) -> Self {
        let m = instance.edge_count();
        PartialRealization {
            dom: NodeSet::new(),
            revealed: bitvec![u64, Lsb0; 0; m],
            live: bitvec![u64, Lsb0; 0; m],
        }
    }

    /// Builds a partial realization from explicit labels and checks that it is
    /// closed, i.e. exactly what `dom` would reveal.
    pub fn from_labels(
        instance: &Instance,
        dom: NodeSet,
        labels: impl IntoIterator<Item = (EdgeId, Label)>,
    ) -> Result<Self, CascadeError> {
        check_seeds(instance, &dom)?;
        let mut psi = PartialRealization::empty(instance);
        psi.dom = dom;
        for (e, label) in labels {
            if e >= instance.edge_count() {
                return Err(CascadeError::UnknownEdge(e));
            }
            psi.revealed.set(e, true);
            psi.live.set(e, label == Label::Live);
        }
        psi.validate(instance)?;
        Ok(psi)
    }

    /// Checks the closure property: the revealed edges are exactly the
    /// out-edges of the nodes reachable from `dom` through revealed live edges.
    pub fn validate(&self, instance: &Instance) -> Result<(), CascadeError> {
        check_seeds(instance, &self.dom)?;
        if self.revealed.len() != instance.edge_count() {
            return Err(CascadeError::LengthMismatch {
                expected: instance.edge_count(),
                found: self.revealed.len(),
            });
        }
        let reached = reach_from(instance, self.dom.iter(), |e| {
            self.revealed[e] && self.live[e]
        });
        for (e, edge) in instance.edges().iter().enumerate() {
            let should = reached[edge.source];
            if should != self.revealed[e] {
                return Err(CascadeError::NotClosed(format!(
                    "edge {e} is {} but its source is {}",
                    if self.revealed[e] { "revealed" } else { "unrevealed" },
                    if should { "engaged" } else { "not engaged" },
                )));
            }
        }
        Ok(())
    }

    pub fn dom(&self) -> &NodeSet {
        &self.dom
    }

    pub fn is_revealed(&self, e: EdgeId) -> bool {
        self.revealed[e]
    }

    pub fn label(&self, e: EdgeId) -> Option<Label> {
        self.revealed[e].then(|| Label::from_live(self.live[e]))
    }

    pub fn observed(&self) -> impl Iterator<Item = (EdgeId, Label)> + '_ {
        self.revealed
            .iter_ones()
            .map(|e| (e, Label::from_live(self.live[e])))
    }

    pub fn observed_count(&self) -> usize {
        self.revealed.count_ones()
    }

    /// Users engaged under this observation (seeds and everything reached
    /// through revealed live edges).
    pub fn engaged(&self, instance: &Instance) -> NodeSet {
        reach_from(instance, self.dom.iter(), |e| self.revealed[e] && self.live[e])
            .into_iter()
            .enumerate()
            .filter(|(_, r)| *r)
            .map(|(v, _)| v)
            .collect()
    }

    /// `self ⊆ other`: smaller domain and agreement on every label `self` reveals.
    pub fn is_subrealization_of(&self, other: &PartialRealization) -> bool {
        self.dom.is_subset(&other.dom)
            && self
                .revealed
                .iter_ones()
                .all(|e| other.revealed[e] && other.live[e] == self.live[e])
    }

    /// Labels revealed here but not in `earlier`.
    pub fn newly_revealed(&self, earlier: &PartialRealization) -> Vec<(EdgeId, Label)> {
        self.observed()
            .filter(|(e, _)| !earlier.revealed[*e])
            .collect()
    }
}

/// Observation produced by selecting `seeds` when the world is `realization`:
/// labels of every out-edge of every engaged user.
pub fn observe(
    instance: &Instance,
    seeds: &NodeSet,
    realization: &Realization,
) -> Result<PartialRealization, CascadeError> {
    check_seeds(instance, seeds)?;
    realization.check(instance)?;
    Ok(observe_unchecked(instance, seeds, realization))
}

pub(crate) fn observe_unchecked(
    instance: &Instance,
    seeds: &NodeSet,
    realization: &Realization,
) -> PartialRealization {
    let reached = reach_from(instance, seeds.iter(), |e| realization.is_live(e));
    let mut psi = PartialRealization::empty(instance);
    psi.dom = seeds.clone();
    for (e, edge) in instance.edges().iter().enumerate() {
        if reached[edge.source] {
            psi.revealed.set(e, true);
            psi.live.set(e, realization.is_live(e));
        }
    }
    psi
}

/// `φ ∼ ψ`: selecting `dom(ψ)` under `φ` reproduces exactly ψ's labels.
///
/// Because a valid ψ is closed, this reduces to agreement on ψ's revealed edges.
pub fn is_consistent(realization: &Realization, partial: &PartialRealization) -> bool {
    realization.len() == partial.revealed.len()
        && partial
            .revealed
            .iter_ones()
            .all(|e| realization.is_live(e) == partial.live[e])
}

/// Draws from `p(φ | Φ ∼ ψ)`: revealed edges keep their labels, every other
/// edge is drawn independently.
pub fn conditional_sample<R: Rng + ?Sized>(
    instance: &Instance,
    partial: &PartialRealization,
    rng: &mut R,
) -> Result<Realization, CascadeError> {
    partial.validate(instance)?;
    Ok(conditional_sample_unchecked(instance, partial, rng))
}

pub(crate) fn conditional_sample_unchecked<R: Rng + ?Sized>(
    instance: &Instance,
    partial: &PartialRealization,
    rng: &mut R,
) -> Realization {
    Realization::from_fn(instance.edge_count(), |e| {
        if partial.revealed[e] {
            partial.live[e]
        } else {
            rng.gen::<f64>() < instance.edge(e).probability
        }
    })
}
