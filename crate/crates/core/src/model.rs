//! Network data model: scalar subsystems `x_i' = -a_i x_i + sum_j m_ij x_j + d_i`.
//!
//! A [`Network`] is the pair `(A, M)`: a strictly positive self-feedback rate
//! per node and a set of positively weighted directed edges. An edge `(i, j)`
//! means node `j` (the `from` end) influences node `i` (the `to` end), so the
//! weight sits in row `i`, column `j` of `M`.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1-based node label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "usize", try_from = "usize")]
pub struct NodeId(usize);

impl TryFrom<usize> for NodeId {
    type Error = String;

    fn try_from(label: usize) -> std::result::Result<Self, String> {
        if label == 0 {
            Err("node labels are 1-based".into())
        } else {
            Ok(NodeId(label))
        }
    }
}

impl From<NodeId> for usize {
    fn from(n: NodeId) -> usize {
        n.0
    }
}

impl NodeId {
    /// Panics on zero; node labels start at 1.
    pub fn new(label: usize) -> Self {
        assert!(label >= 1, "node labels are 1-based");
        NodeId(label)
    }

    pub fn from_index(index: usize) -> Self {
        NodeId(index + 1)
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// 0-based position in vectors and matrices.
    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    /// Influenced node `i`.
    pub to: NodeId,
    /// Influencing node `j`.
    pub from: NodeId,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Empty,
    NonPositiveSelfFeedback { node: NodeId, value: f64 },
    SelfLoop { node: NodeId },
    NonPositiveWeight { to: NodeId, from: NodeId, weight: f64 },
    EdgeOutOfRange { to: NodeId, from: NodeId },
    DuplicateEdge { to: NodeId, from: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "network has no nodes"),
            Violation::NonPositiveSelfFeedback { node, value } => {
                write!(f, "self_feedback[{node}] ≤ 0 (value {value})")
            }
            Violation::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            Violation::NonPositiveWeight { to, from, weight } => {
                write!(f, "edge ({to},{from}) has non-positive weight {weight}")
            }
            Violation::EdgeOutOfRange { to, from } => {
                write!(f, "edge ({to},{from}) references a node out of range")
            }
            Violation::DuplicateEdge { to, from } => write!(f, "duplicate edge ({to},{from})"),
        }
    }
}

/// Maps old node labels to new ones after a deletion compacts the labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMap {
    /// `new_label[old.index()]`, `None` for the removed node.
    pub new_label: Vec<Option<NodeId>>,
}

impl IndexMap {
    pub fn get(&self, old: NodeId) -> Option<NodeId> {
        self.new_label.get(old.index()).copied().flatten()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    self_feedback: Vec<f64>,
    /// Sorted by `(to, from)`; rows of `M` are contiguous.
    edges: Vec<Edge>,
}

impl Network {
    /// Builds a network and rejects it unless every model invariant holds.
    pub fn new(self_feedback: Vec<f64>, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let net = Self::from_parts(self_feedback, edges);
        net.validate().map_err(Error::InvalidNetwork)?;
        Ok(net)
    }

    /// Builds a network without checking invariants. Use [`Network::validate`]
    /// before handing the result to any analysis.
    pub fn from_parts(self_feedback: Vec<f64>, edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        edges.sort_by_key(|e| (e.to, e.from));
        Network {
            self_feedback,
            edges,
        }
    }

    /// Convenience constructor taking `(to, from, weight)` triples with 1-based labels.
    pub fn from_triples(self_feedback: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(
            self_feedback,
            edges.iter().map(|&(to, from, weight)| Edge {
                to: NodeId::new(to),
                from: NodeId::new(from),
                weight,
            }),
        )
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let n = self.node_count();
        let mut out = Vec::new();
        if n == 0 {
            out.push(Violation::Empty);
        }
        for (i, &a) in self.self_feedback.iter().enumerate() {
            if !(a > 0.0 && a.is_finite()) {
                out.push(Violation::NonPositiveSelfFeedback {
                    node: NodeId::from_index(i),
                    value: a,
                });
            }
        }
        let mut prev: Option<(NodeId, NodeId)> = None;
        for e in &self.edges {
            if e.to == e.from {
                out.push(Violation::SelfLoop { node: e.to });
            }
            if e.to.get() > n || e.from.get() > n {
                out.push(Violation::EdgeOutOfRange {
                    to: e.to,
                    from: e.from,
                });
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                out.push(Violation::NonPositiveWeight {
                    to: e.to,
                    from: e.from,
                    weight: e.weight,
                });
            }
            if prev == Some((e.to, e.from)) {
                out.push(Violation::DuplicateEdge {
                    to: e.to,
                    from: e.from,
                });
            }
            prev = Some((e.to, e.from));
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn node_count(&self) -> usize {
        self.self_feedback.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId::from_index)
    }

    pub fn self_feedback(&self) -> &[f64] {
        &self.self_feedback
    }

    pub fn a(&self, node: NodeId) -> f64 {
        self.self_feedback[node.index()]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if node.get() > self.node_count() {
            return Err(Error::NodeOutOfRange {
                node: node.get(),
                node_count: self.node_count(),
            });
        }
        Ok(())
    }

    fn edge_position(&self, to: NodeId, from: NodeId) -> std::result::Result<usize, usize> {
        self.edges.binary_search_by_key(&(to, from), |e| (e.to, e.from))
    }

    /// Weight `m_ij` of edge `(to, from)`, if present.
    pub fn weight(&self, to: NodeId, from: NodeId) -> Option<f64> {
        self.edge_position(to, from).ok().map(|p| self.edges[p].weight)
    }

    pub fn has_edge(&self, to: NodeId, from: NodeId) -> bool {
        self.edge_position(to, from).is_ok()
    }

    /// Edges pointing into `node`: row `i` of `M`.
    pub fn in_edges(&self, node: NodeId) -> &[Edge] {
        let lo = self.edges.partition_point(|e| e.to < node);
        let hi = self.edges.partition_point(|e| e.to <= node);
        &self.edges[lo..hi]
    }

    /// In-neighbours `{ j : (i, j) is an edge }`.
    pub fn neighbors_in(&self, node: NodeId) -> Result<BTreeSet<NodeId>> {
        self.check_node(node)?;
        Ok(self.in_edges(node).iter().map(|e| e.from).collect())
    }

    /// Out-neighbour lists indexed by 0-based node, in ascending order.
    pub fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            out[e.from.index()].push(e.to.index());
        }
        for v in &mut out {
            v.sort_unstable();
        }
        out
    }

    pub fn in_adjacency(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            inc[e.to.index()].push(e.from.index());
        }
        inc
    }

    pub fn is_isolated(&self, node: NodeId) -> bool {
        self.edges.iter().all(|e| e.to != node && e.from != node)
    }

    /// Dense `M`: `(i, j) = m_ij` when the edge exists, zero elsewhere.
    pub fn weighted_adjacency(&self) -> DMatrix<f64> {
        let n = self.node_count();
        let mut m = DMatrix::zeros(n, n);
        for e in &self.edges {
            m[(e.to.index(), e.from.index())] = e.weight;
        }
        m
    }

    /// Dense `A - M`.
    pub fn system_matrix(&self) -> DMatrix<f64> {
        let mut k = -self.weighted_adjacency();
        for (i, &a) in self.self_feedback.iter().enumerate() {
            k[(i, i)] = a;
        }
        k
    }

    /// Dense `M A^{-1}`, the weighted adjacency of the walk graph.
    pub fn walk_matrix(&self) -> DMatrix<f64> {
        let n = self.node_count();
        let mut b = DMatrix::zeros(n, n);
        for e in &self.edges {
            b[(e.to.index(), e.from.index())] = e.weight / self.a(e.from);
        }
        b
    }

    /// `(A - M) v` evaluated row by row.
    pub fn apply_system(&self, v: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .self_feedback
            .iter()
            .zip(v)
            .map(|(a, x)| a * x)
            .collect();
        for e in &self.edges {
            out[e.to.index()] -= e.weight * v[e.from.index()];
        }
        out
    }

    // Structural edits used by the change engine. Callers check preconditions.

    pub(crate) fn with_edge(&self, edge: Edge) -> Network {
        let mut next = self.clone();
        match next.edge_position(edge.to, edge.from) {
            Ok(p) => next.edges[p] = edge,
            Err(p) => next.edges.insert(p, edge),
        }
        next
    }

    pub(crate) fn without_edge(&self, to: NodeId, from: NodeId) -> Network {
        let mut next = self.clone();
        if let Ok(p) = next.edge_position(to, from) {
            next.edges.remove(p);
        }
        next
    }

    pub(crate) fn with_node(&self, a: f64) -> Network {
        let mut next = self.clone();
        next.self_feedback.push(a);
        next
    }

    pub(crate) fn with_self_feedback(&self, node: NodeId, a: f64) -> Network {
        let mut next = self.clone();
        next.self_feedback[node.index()] = a;
        next
    }

    /// Drops `node` and every edge touching it, compacting the labels above it.
    pub(crate) fn without_node(&self, node: NodeId) -> (Network, IndexMap) {
        let k = node.index();
        let new_label: Vec<Option<NodeId>> = (0..self.node_count())
            .map(|i| match i.cmp(&k) {
                std::cmp::Ordering::Less => Some(NodeId::from_index(i)),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(NodeId::from_index(i - 1)),
            })
            .collect();
        let map = IndexMap { new_label };
        let mut a = self.self_feedback.clone();
        a.remove(k);
        let edges = self.edges.iter().filter_map(|e| {
            Some(Edge {
                to: map.get(e.to)?,
                from: map.get(e.from)?,
                weight: e.weight,
            })
        });
        (Network::from_parts(a, edges), map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example() -> Network {
        Network::from_triples(vec![1.0, 1.0, 1.0], &[(2, 1, 1.0), (3, 1, 1.0), (3, 2, 1.0)])
            .unwrap()
    }

    #[test]
    fn minimal_network_is_valid() {
        assert!(Network::new(vec![1.0], []).is_ok());
    }

    #[test]
    fn rejects_non_positive_rate() {
        let net = Network::from_parts(vec![1.0, -1.0], []);
        let v = net.validate().unwrap_err();
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("self_feedback[2] ≤ 0"));
    }

    #[test]
    fn rejects_self_loop() {
        let net = Network::from_parts(
            vec![1.0, 1.0],
            [Edge {
                to: NodeId::new(1),
                from: NodeId::new(1),
                weight: 0.5,
            }],
        );
        let v = net.validate().unwrap_err();
        assert_eq!(v, vec![Violation::SelfLoop { node: NodeId::new(1) }]);
        assert!(v[0].to_string().contains("self-loop"));
    }

    #[test]
    fn reports_every_violation() {
        let net = Network::from_parts(
            vec![0.0],
            [
                Edge {
                    to: NodeId::new(1),
                    from: NodeId::new(3),
                    weight: 0.0,
                },
                Edge {
                    to: NodeId::new(1),
                    from: NodeId::new(3),
                    weight: 1.0,
                },
            ],
        );
        let v = net.validate().unwrap_err();
        assert_eq!(v.len(), 5);
    }

    #[test]
    fn neighbours_of_example() {
        let net = example();
        let n3: Vec<_> = net.neighbors_in(NodeId::new(3)).unwrap().into_iter().collect();
        assert_eq!(n3, vec![NodeId::new(1), NodeId::new(2)]);
        assert!(net.neighbors_in(NodeId::new(1)).unwrap().is_empty());
        assert!(matches!(
            net.neighbors_in(NodeId::new(4)),
            Err(Error::NodeOutOfRange { node: 4, .. })
        ));
        let single = Network::new(vec![1.0], []).unwrap();
        assert!(single.neighbors_in(NodeId::new(1)).unwrap().is_empty());
    }

    #[test]
    fn adjacency_of_example() {
        let m = example().weighted_adjacency();
        let expected = DMatrix::from_row_slice(3, 3, &[0., 0., 0., 1., 0., 0., 1., 1., 0.]);
        assert_eq!(m, expected);

        let edgeless = Network::new(vec![1.0, 2.0], []).unwrap();
        assert_eq!(edgeless.weighted_adjacency(), DMatrix::zeros(2, 2));

        let chain = Network::from_triples(vec![1.0, 1.0], &[(2, 1, 0.5)]).unwrap();
        assert_eq!(
            chain.weighted_adjacency(),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.5, 0.0])
        );
    }

    #[test]
    fn removing_a_node_compacts_labels() {
        let net = Network::from_triples(vec![1.0, 2.0, 3.0], &[(3, 1, 0.5)]).unwrap();
        let (next, map) = net.without_node(NodeId::new(2));
        assert_eq!(next.self_feedback(), &[1.0, 3.0]);
        assert_eq!(next.weight(NodeId::new(2), NodeId::new(1)), Some(0.5));
        assert_eq!(map.get(NodeId::new(3)), Some(NodeId::new(2)));
        assert_eq!(map.get(NodeId::new(2)), None);
    }

    #[test]
    fn system_matrix_matches_apply() {
        let net = example();
        let v = [1.0, 2.0, 4.0];
        let k = net.system_matrix();
        let kv = &k * nalgebra::DVector::from_row_slice(&v);
        assert_eq!(kv.as_slice(), net.apply_system(&v).as_slice());
        assert_eq!(net.apply_system(&v), vec![1.0, 1.0, 1.0]);
    }
}
