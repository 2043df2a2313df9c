//! Structural changes and their scalability verdicts.
//!
//! A change is scalable when every gain level the original network achieves
//! is still achieved afterwards. Since `max u` is the smallest achievable
//! gain, this reduces to: the changed network is stable and
//! `max ū <= max u`.
//!
//! Edge changes are rank-one updates of `A - M`, so `ū` follows from `u` and
//! one resolvent column `(A - M)^{-1} e_i` by the Sherman-Morrison formula.
//! A from-scratch solve is available as a cross-check
//! ([`VerdictOptions::verify_direct`]).

use serde::{Deserialize, Serialize};

use crate::analysis::{
    analyze, analyze_with_factor, check_certificate, is_gamma_robust, max_and_argmax,
    robustness_vector, stability, Certificate, RobustnessReport,
};
use crate::config::{within_level, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{reaches_any, SystemFactor};
use crate::model::{Edge, IndexMap, Network, NodeId};

/// An edge `(to, from)` about to be added.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewEdge {
    pub to: NodeId,
    pub from: NodeId,
    pub weight: f64,
}

impl NewEdge {
    pub fn new(to: usize, from: usize, weight: f64) -> Self {
        NewEdge {
            to: NodeId::new(to),
            from: NodeId::new(from),
            weight,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum StructuralChange {
    /// Delete a node that has no incident edges.
    RemoveNode { node: NodeId },
    /// Delete edge `(to, from)`.
    RemoveEdge { to: NodeId, from: NodeId },
    /// Append an isolated node with self-feedback `a`; it gets label `N + 1`.
    AddNode {
        #[serde(with = "crate::decimal")]
        a: f64,
    },
    /// Insert edge `(to, from)` with a positive weight.
    AddEdge {
        to: NodeId,
        from: NodeId,
        #[serde(with = "crate::decimal")]
        weight: f64,
    },
    /// Remove every edge touching `node`, then the node itself.
    RemoveNodeCascade { node: NodeId },
    /// Replace the self-feedback rate of `node` (e.g. to apply a repair).
    SetSelfFeedback {
        node: NodeId,
        #[serde(with = "crate::decimal")]
        a: f64,
    },
}

impl StructuralChange {
    pub fn add_edge(edge: NewEdge) -> Self {
        StructuralChange::AddEdge {
            to: edge.to,
            from: edge.from,
            weight: edge.weight,
        }
    }

    /// True for the four elementary changes.
    pub fn is_elementary(&self) -> bool {
        !matches!(
            self,
            StructuralChange::RemoveNodeCascade { .. } | StructuralChange::SetSelfFeedback { .. }
        )
    }

    /// Elementary changes equivalent to a cascade removal: every incident
    /// edge in `(to, from)` order, then the node.
    pub fn expand(&self, net: &Network) -> Result<Vec<StructuralChange>> {
        match *self {
            StructuralChange::RemoveNodeCascade { node } => {
                net.check_node(node)?;
                let mut steps: Vec<StructuralChange> = net
                    .edges()
                    .iter()
                    .filter(|e| e.to == node || e.from == node)
                    .map(|e| StructuralChange::RemoveEdge {
                        to: e.to,
                        from: e.from,
                    })
                    .collect();
                steps.push(StructuralChange::RemoveNode { node });
                Ok(steps)
            }
            _ => Ok(vec![self.clone()]),
        }
    }
}

fn check_new_edge(net: &Network, edge: &NewEdge) -> Result<()> {
    net.check_node(edge.to)?;
    net.check_node(edge.from)?;
    if edge.to == edge.from {
        return Err(Error::precondition(format!(
            "self-loop ({}, {}) is not allowed",
            edge.to, edge.from
        )));
    }
    if !(edge.weight > 0.0 && edge.weight.is_finite()) {
        return Err(Error::precondition(format!(
            "edge weight must be positive, got {}",
            edge.weight
        )));
    }
    if net.has_edge(edge.to, edge.from) {
        return Err(Error::precondition(format!(
            "edge ({}, {}) already present",
            edge.to, edge.from
        )));
    }
    Ok(())
}

fn check_rate(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "self-feedback must be positive, got {a}"
        )))
    }
}

/// Checks a change's preconditions against `net`.
pub fn check_preconditions(net: &Network, change: &StructuralChange) -> Result<()> {
    match *change {
        StructuralChange::RemoveNode { node } => {
            net.check_node(node)?;
            if !net.is_isolated(node) {
                return Err(Error::precondition(format!(
                    "node {node} has incident edges; remove them first or use remove_node_cascade"
                )));
            }
            if net.node_count() == 1 {
                return Err(Error::precondition("cannot remove the last node"));
            }
        }
        StructuralChange::RemoveNodeCascade { node } => {
            net.check_node(node)?;
            if net.node_count() == 1 {
                return Err(Error::precondition("cannot remove the last node"));
            }
        }
        StructuralChange::RemoveEdge { to, from } => {
            net.check_node(to)?;
            net.check_node(from)?;
            if !net.has_edge(to, from) {
                return Err(Error::precondition(format!("edge ({to}, {from}) is absent")));
            }
        }
        StructuralChange::AddNode { a } => check_rate(a)?,
        StructuralChange::AddEdge { to, from, weight } => {
            check_new_edge(net, &NewEdge { to, from, weight })?
        }
        StructuralChange::SetSelfFeedback { node, a } => {
            net.check_node(node)?;
            check_rate(a)?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Applied {
    pub network: Network,
    /// Old-to-new label map, present when a node was removed.
    pub index_map: Option<IndexMap>,
}

/// Returns the network after `change`.
pub fn apply(net: &Network, change: &StructuralChange) -> Result<Applied> {
    check_preconditions(net, change)?;
    let plain = |network| Applied {
        network,
        index_map: None,
    };
    Ok(match *change {
        StructuralChange::RemoveNode { node } | StructuralChange::RemoveNodeCascade { node } => {
            let (network, map) = net.without_node(node);
            Applied {
                network,
                index_map: Some(map),
            }
        }
        StructuralChange::RemoveEdge { to, from } => plain(net.without_edge(to, from)),
        StructuralChange::AddNode { a } => plain(net.with_node(a)),
        StructuralChange::AddEdge { to, from, weight } => {
            plain(net.with_edge(Edge { to, from, weight }))
        }
        StructuralChange::SetSelfFeedback { node, a } => plain(net.with_self_feedback(node, a)),
    })
}

/// Raising `a_i` so that an added edge keeps a certificate valid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfFeedbackRepair {
    pub node: NodeId,
    #[serde(with = "crate::decimal")]
    pub a_old: f64,
    #[serde(with = "crate::decimal")]
    pub a_new: f64,
    /// Gain level the repair is meant to preserve.
    #[serde(with = "crate::decimal")]
    pub gamma: f64,
    /// Re-analysis of the repaired network confirmed the level.
    pub verified: bool,
}

impl SelfFeedbackRepair {
    pub fn as_change(&self) -> StructuralChange {
        StructuralChange::SetSelfFeedback {
            node: self.node,
            a: self.a_new,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChangeVerdict {
    pub change: StructuralChange,
    pub scalable: bool,
    pub stable_after: bool,
    #[serde(with = "crate::decimal")]
    pub spectral_radius_after: f64,
    #[serde(with = "crate::decimal::vec")]
    pub u_before: Vec<f64>,
    #[serde(with = "crate::decimal::opt_vec")]
    pub u_after: Option<Vec<f64>>,
    #[serde(with = "crate::decimal")]
    pub gamma_before: f64,
    #[serde(with = "crate::decimal::opt")]
    pub gamma_after: Option<f64>,
    /// `u_after - u_before` per node of the changed network. Nodes without a
    /// counterpart before the change (an added node) carry `0`. Negative
    /// entries are improvements.
    #[serde(with = "crate::decimal::opt_vec")]
    pub performance_loss: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax_after: Option<Vec<NodeId>>,
    /// Edge additions only: the head of the new edge reaches a maximiser of
    /// `u`, which rules scalability out.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_to_argmax: Option<bool>,
    /// Edge additions only: certified lower bound on `ū` at the edge head.
    #[serde(with = "crate::decimal::opt", skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    /// Largest relative gap between the incremental `ū` and a direct solve,
    /// when verification was requested.
    #[serde(with = "crate::decimal::opt", skip_serializing_if = "Option::is_none")]
    pub direct_discrepancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repair: Option<SelfFeedbackRepair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_map: Option<IndexMap>,
}

impl ChangeVerdict {
    /// The changed network is gamma-robust (and so, if the original was, the
    /// change is gamma-scalable).
    pub fn is_gamma_scalable(&self, gamma: f64) -> bool {
        self.stable_after && self.gamma_after.is_some_and(|g| within_level(g, gamma))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerdictOptions {
    /// Also solve the changed system from scratch and record the discrepancy.
    pub verify_direct: bool,
    /// Attach a self-feedback repair (certificate `v = u`) to non-scalable edge additions.
    pub suggest_repair: bool,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions {
            verify_direct: false,
            suggest_repair: true,
        }
    }
}

/// Decides scalability of one change against a stable network.
pub fn verdict(
    net: &Network,
    change: &StructuralChange,
    tol: &Tolerances,
    opts: VerdictOptions,
) -> Result<ChangeVerdict> {
    check_preconditions(net, change)?;
    let (before, factor) = analyze_with_factor(net, tol)?;
    match *change {
        StructuralChange::RemoveNode { node } => remove_node(net, node, change, &before, tol, opts),
        StructuralChange::RemoveEdge { to, from } => {
            let weight = net.weight(to, from).expect("checked present");
            edge_update(net, change, &before, &factor, to, from, -weight, tol, opts)
        }
        StructuralChange::AddNode { a } => add_node(net, a, change, &before, tol, opts),
        StructuralChange::AddEdge { to, from, weight } => {
            edge_update(net, change, &before, &factor, to, from, weight, tol, opts)
        }
        StructuralChange::RemoveNodeCascade { .. } | StructuralChange::SetSelfFeedback { .. } => {
            let applied = apply(net, change)?;
            resolve_verdict(change, &before, applied, tol)
        }
    }
}

/// Maps each node of the changed network to its node before the change.
fn new_to_old(after_len: usize, before_len: usize, map: Option<&IndexMap>) -> Vec<Option<usize>> {
    match map {
        None => (0..after_len).map(|k| (k < before_len).then_some(k)).collect(),
        Some(m) => {
            let mut back = vec![None; after_len];
            for (old, new) in m.new_label.iter().enumerate() {
                if let Some(new) = new {
                    back[new.index()] = Some(old);
                }
            }
            back
        }
    }
}

struct After {
    index_map: Option<IndexMap>,
    stable: bool,
    spectral_radius: f64,
    u: Option<Vec<f64>>,
}

fn assemble(change: &StructuralChange, before: &RobustnessReport, after: After) -> ChangeVerdict {
    let u_before = before.u().to_vec();
    let gamma_before = before.gamma();
    let (gamma_after, argmax_after) = match &after.u {
        Some(u) => {
            let (g, a) = max_and_argmax(u);
            (Some(g), Some(a))
        }
        None => (None, None),
    };
    let performance_loss = after.u.as_ref().map(|u| {
        new_to_old(u.len(), u_before.len(), after.index_map.as_ref())
            .iter()
            .zip(u)
            .map(|(old, x)| old.map_or(0.0, |o| x - u_before[o]))
            .collect()
    });
    let scalable = after.stable && gamma_after.is_some_and(|g| within_level(g, gamma_before));
    ChangeVerdict {
        change: change.clone(),
        scalable,
        stable_after: after.stable,
        spectral_radius_after: after.spectral_radius,
        u_before,
        u_after: after.u,
        gamma_before,
        gamma_after,
        performance_loss,
        argmax_after,
        path_to_argmax: None,
        lower_bound: None,
        direct_discrepancy: None,
        repair: None,
        index_map: after.index_map,
    }
}

fn max_relative_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

fn direct_gap(network: &Network, u: &[f64], tol: &Tolerances) -> Result<f64> {
    let direct = robustness_vector(network, tol)?;
    Ok(max_relative_gap(u, direct.u()))
}

fn remove_node(
    net: &Network,
    node: NodeId,
    change: &StructuralChange,
    before: &RobustnessReport,
    tol: &Tolerances,
    opts: VerdictOptions,
) -> Result<ChangeVerdict> {
    let (network, map) = net.without_node(node);
    let mut u = before.u().to_vec();
    u.remove(node.index());
    let st = stability(&network, tol);
    let discrepancy = if opts.verify_direct {
        Some(direct_gap(&network, &u, tol)?)
    } else {
        None
    };
    let mut v = assemble(
        change,
        before,
        After {
            index_map: Some(map),
            stable: st.stable,
            spectral_radius: st.spectral_radius,
            u: Some(u),
        },
    );
    v.direct_discrepancy = discrepancy;
    Ok(v)
}

fn add_node(
    net: &Network,
    a: f64,
    change: &StructuralChange,
    before: &RobustnessReport,
    tol: &Tolerances,
    opts: VerdictOptions,
) -> Result<ChangeVerdict> {
    let network = net.with_node(a);
    let mut u = before.u().to_vec();
    u.push(1.0 / a);
    let discrepancy = if opts.verify_direct {
        Some(direct_gap(&network, &u, tol)?)
    } else {
        None
    };
    let mut v = assemble(
        change,
        before,
        After {
            index_map: None,
            stable: true,
            spectral_radius: before.spectral_radius,
            u: Some(u),
        },
    );
    v.direct_discrepancy = discrepancy;
    Ok(v)
}

/// `ū` after `A - M` becomes `A - M - delta e_i e_j^T`
/// (`delta = m_ij` adds the edge, `delta = -m_ij` removes it).
///
/// Returns `None` when `1 - delta c <= eps`, i.e. the update destroys the
/// Hurwitz property; `c = e_j^T (A - M)^{-1} e_i`.
pub(crate) fn rank_one_update(
    u: &[f64],
    column: &[f64],
    j: usize,
    delta: f64,
    eps: f64,
) -> Option<Vec<f64>> {
    let c = column[j];
    let denom = 1.0 - delta * c;
    if denom <= eps {
        return None;
    }
    let scale = delta * u[j] / denom;
    Some(u.iter().zip(column).map(|(x, z)| x + scale * z).collect())
}

#[allow(clippy::too_many_arguments)]
fn edge_update(
    net: &Network,
    change: &StructuralChange,
    before: &RobustnessReport,
    factor: &SystemFactor,
    to: NodeId,
    from: NodeId,
    delta: f64,
    tol: &Tolerances,
    opts: VerdictOptions,
) -> Result<ChangeVerdict> {
    let (i, j) = (to.index(), from.index());
    let network = if delta > 0.0 {
        net.with_edge(Edge {
            to,
            from,
            weight: delta,
        })
    } else {
        net.without_edge(to, from)
    };
    let column = factor.resolvent_column(i)?;
    let updated = rank_one_update(before.u(), &column, j, delta, tol.eps_stab);
    let st = stability(&network, tol);
    let stable = updated.is_some() && st.stable;
    let u = if stable { updated } else { None };
    let discrepancy = match (&u, opts.verify_direct) {
        (Some(u), true) => Some(direct_gap(&network, u, tol)?),
        _ => None,
    };
    let mut v = assemble(
        change,
        before,
        After {
            index_map: None,
            stable,
            spectral_radius: st.spectral_radius,
            u,
        },
    );
    v.direct_discrepancy = discrepancy;

    if delta > 0.0 {
        let argmax: Vec<usize> = before
            .argmax
            .as_deref()
            .unwrap_or_default()
            .iter()
            .map(|n| n.index())
            .collect();
        let path = reaches_any(net, &argmax)[i];
        v.path_to_argmax = Some(path);
        if path && v.scalable {
            // ū at a maximiser grows by a strictly positive amount that the
            // comparison slack can swallow; the reachability argument is exact.
            log::debug!("edge ({to}, {from}) increase at the maximiser is below rounding level");
            v.scalable = false;
        }
        let u = before.u();
        v.lower_bound = Some(u[i] + delta / net.a(to) * u[j]);
        if !v.scalable && opts.suggest_repair {
            let cert = Certificate::from_report(before).expect("stable report");
            let edge = NewEdge {
                to,
                from,
                weight: delta,
            };
            v.repair = Some(propose_repair(net, &edge, &cert, tol)?);
        }
    }
    Ok(v)
}

/// Verdict computed by re-solving the changed network from scratch.
fn resolve_verdict(
    change: &StructuralChange,
    before: &RobustnessReport,
    applied: Applied,
    tol: &Tolerances,
) -> Result<ChangeVerdict> {
    let report = analyze(&applied.network, tol)?;
    Ok(assemble(
        change,
        before,
        After {
            index_map: applied.index_map,
            stable: report.stable,
            spectral_radius: report.spectral_radius,
            u: report.u,
        },
    ))
}

fn require_certificate(net: &Network, cert: &Certificate) -> Result<()> {
    if check_certificate(net, cert)? {
        Ok(())
    } else {
        Err(Error::InvalidCertificate)
    }
}

/// Sufficient test for an edge addition that reads only row `i` and the
/// certificate entries of `i`, its in-neighbours and `j`:
/// `a_i >= (sum_k m_ik v_k + m_ij v_j + 1) / v_i`.
///
/// A pass means `v` stays a certificate after the change, so the changed
/// network is robust at `cert.gamma`. A failure proves nothing.
pub fn sufficient_local_check(net: &Network, edge: &NewEdge, cert: &Certificate) -> Result<bool> {
    check_new_edge(net, edge)?;
    require_certificate(net, cert)?;
    let v = &cert.v;
    let i = edge.to;
    let inflow: f64 = net
        .in_edges(i)
        .iter()
        .map(|e| e.weight * v[e.from.index()])
        .sum();
    let rhs = (inflow + edge.weight * v[edge.from.index()] + 1.0) / v[i.index()];
    Ok(net.a(i) >= rhs)
}

/// The local test with `v = gamma 1`, valid when `A - M` is strictly
/// diagonally dominant: `a_i >= sum_k m_ik + m_ij + 1/gamma`.
pub fn diagonal_dominance_check(net: &Network, edge: &NewEdge, gamma: f64) -> Result<bool> {
    check_new_edge(net, edge)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    for node in net.nodes() {
        let row: f64 = net.in_edges(node).iter().map(|e| e.weight).sum();
        if !(net.a(node) > row) {
            return Err(Error::NotDiagonallyDominant { node });
        }
    }
    let uniform = Certificate {
        v: vec![gamma; net.node_count()],
        gamma,
    };
    require_certificate(net, &uniform)?;
    let row: f64 = net.in_edges(edge.to).iter().map(|e| e.weight).sum();
    Ok(net.a(edge.to) >= row + edge.weight + 1.0 / gamma)
}

/// Self-feedback `ā_i = a_i + m_ij v_j / v_i` that keeps `cert` valid once
/// the edge is added. The result is re-analysed and flagged `verified`.
pub fn propose_repair(
    net: &Network,
    edge: &NewEdge,
    cert: &Certificate,
    tol: &Tolerances,
) -> Result<SelfFeedbackRepair> {
    check_new_edge(net, edge)?;
    require_certificate(net, cert)?;
    let i = edge.to;
    let a_old = net.a(i);
    let a_new = a_old + edge.weight * cert.v[edge.from.index()] / cert.v[i.index()];
    let repaired = net
        .with_edge(Edge {
            to: edge.to,
            from: edge.from,
            weight: edge.weight,
        })
        .with_self_feedback(i, a_new);
    let verified =
        check_certificate(&repaired, cert)? && is_gamma_robust(&repaired, cert.gamma, tol)?;
    Ok(SelfFeedbackRepair {
        node: i,
        a_old,
        a_new,
        gamma: cert.gamma,
        verified,
    })
}

/// `u_i + (m_ij / a_i) u_j`, a lower bound on `ū_i` after adding edge `(i, j)`.
pub fn lower_bound_added_edge(net: &Network, edge: &NewEdge, tol: &Tolerances) -> Result<f64> {
    check_new_edge(net, edge)?;
    let report = robustness_vector(net, tol)?;
    let u = report.u();
    Ok(u[edge.to.index()] + edge.weight / net.a(edge.to) * u[edge.from.index()])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceReport {
    /// Level the final network is judged against.
    #[serde(with = "crate::decimal")]
    pub gamma: f64,
    pub initial: RobustnessReport,
    pub steps: Vec<ChangeVerdict>,
    /// Index of the step that destabilised the network, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halted_at: Option<usize>,
    #[serde(rename = "final")]
    pub final_report: RobustnessReport,
    pub gamma_robust: bool,
    #[serde(skip)]
    pub final_network: Network,
}

pub type SequenceStep = StructuralChange;

/// Applies `changes` in order with a verdict per step, then judges the final
/// network at `gamma` (default: the initial minimal gain). Stops at the first
/// destabilising step; non-scalable steps are flagged and passed.
pub fn check_sequence(
    net: &Network,
    changes: &[StructuralChange],
    gamma: Option<f64>,
    tol: &Tolerances,
    opts: VerdictOptions,
) -> Result<SequenceReport> {
    let initial = robustness_vector(net, tol)?;
    let gamma = gamma.unwrap_or(initial.gamma());
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let mut current = net.clone();
    let mut steps = Vec::with_capacity(changes.len());
    let mut halted_at = None;
    for (index, change) in changes.iter().enumerate() {
        let wrap = |e: Error| Error::Step {
            index,
            source: Box::new(e),
        };
        let v = verdict(&current, change, tol, opts).map_err(wrap)?;
        let stable = v.stable_after;
        current = apply(&current, change).map_err(wrap)?.network;
        steps.push(v);
        if !stable {
            halted_at = Some(index);
            break;
        }
    }
    let final_report = analyze(&current, tol)?;
    let gamma_robust = final_report
        .gamma_min
        .is_some_and(|g| within_level(g, gamma));
    Ok(SequenceReport {
        gamma,
        initial,
        steps,
        halted_at,
        final_report,
        gamma_robust,
        final_network: current,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::{four_node, three_node};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn checked() -> VerdictOptions {
        VerdictOptions {
            verify_direct: true,
            suggest_repair: true,
        }
    }

    fn n(i: usize) -> NodeId {
        NodeId::new(i)
    }

    #[test]
    fn apply_examples() {
        let added = apply(&three_node(), &StructuralChange::AddNode { a: 0.25 }).unwrap();
        assert_eq!(added.network, four_node());

        let with_edge = apply(
            &four_node(),
            &StructuralChange::add_edge(NewEdge::new(4, 2, 0.1)),
        )
        .unwrap();
        assert_eq!(with_edge.network.weighted_adjacency()[(3, 1)], 0.1);

        let err = apply(
            &three_node(),
            &StructuralChange::RemoveEdge { to: n(1), from: n(2) },
        );
        assert!(matches!(err, Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn remove_node_examples() {
        let v = verdict(&four_node(), &StructuralChange::RemoveNode { node: n(4) }, &tol(), checked())
            .unwrap();
        assert!(v.scalable);
        assert_eq!(v.u_after.as_deref(), Some(&[1.0, 2.0, 4.0][..]));
        assert_eq!(v.direct_discrepancy, Some(0.0));

        let edgeless = Network::new(vec![1.0, 2.0], []).unwrap();
        let v = verdict(&edgeless, &StructuralChange::RemoveNode { node: n(1) }, &tol(), checked())
            .unwrap();
        assert!(v.scalable);
        assert_eq!(v.u_after.as_deref(), Some(&[0.5][..]));

        assert!(matches!(
            verdict(&three_node(), &StructuralChange::RemoveNode { node: n(3) }, &tol(), checked()),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn remove_edge_examples() {
        let v = verdict(
            &three_node(),
            &StructuralChange::RemoveEdge { to: n(3), from: n(2) },
            &tol(),
            checked(),
        )
        .unwrap();
        assert!(v.scalable);
        assert_eq!(v.u_after.as_deref(), Some(&[1.0, 2.0, 2.0][..]));

        let v = verdict(
            &three_node(),
            &StructuralChange::RemoveEdge { to: n(2), from: n(1) },
            &tol(),
            checked(),
        )
        .unwrap();
        assert!(v.scalable);
        assert_eq!(v.u_after.as_deref(), Some(&[1.0, 1.0, 3.0][..]));
        assert!(v.performance_loss.unwrap().iter().all(|&x| x <= 0.0));

        let chain = Network::from_triples(vec![1.0, 1.0], &[(2, 1, 0.5)]).unwrap();
        let v = verdict(&chain, &StructuralChange::RemoveEdge { to: n(2), from: n(1) }, &tol(), checked())
            .unwrap();
        assert_eq!(v.u_after.as_deref(), Some(&[1.0, 1.0][..]));
    }

    #[test]
    fn add_node_examples() {
        let v = verdict(&three_node(), &StructuralChange::AddNode { a: 0.25 }, &tol(), checked()).unwrap();
        assert!(v.scalable);
        assert_eq!(v.u_after.as_deref(), Some(&[1.0, 2.0, 4.0, 4.0][..]));
        assert_eq!(v.gamma_after, Some(4.0));
        assert_eq!(v.performance_loss.as_deref(), Some(&[0.0; 4][..]));

        let v = verdict(&three_node(), &StructuralChange::AddNode { a: 0.2 }, &tol(), checked()).unwrap();
        assert!(!v.scalable);
        assert_eq!(v.gamma_after, Some(5.0));

        let v = verdict(&three_node(), &StructuralChange::AddNode { a: 1.0 }, &tol(), checked()).unwrap();
        assert!(v.scalable);
        assert_eq!(v.u_after.unwrap()[3], 1.0);
    }

    #[test]
    fn add_edge_examples() {
        let v = verdict(
            &four_node(),
            &StructuralChange::add_edge(NewEdge::new(4, 2, 0.1)),
            &tol(),
            checked(),
        )
        .unwrap();
        assert!(!v.scalable);
        assert!(v.stable_after);
        let u = v.u_after.as_deref().unwrap();
        assert!((u[3] - 4.8).abs() < 1e-12);
        assert!((v.gamma_after.unwrap() - 4.8).abs() < 1e-12);
        assert_eq!(v.path_to_argmax, Some(true));
        assert!(v.direct_discrepancy.unwrap() < 1e-12);
        let repair = v.repair.unwrap();
        assert_eq!(repair.node, n(4));
        assert!((repair.a_new - 0.3).abs() < 1e-15);
        assert!(repair.verified);

        assert!(matches!(
            verdict(
                &three_node(),
                &StructuralChange::add_edge(NewEdge::new(3, 1, 2.0)),
                &tol(),
                checked()
            ),
            Err(Error::PreconditionViolated(_))
        ));

        let edgeless = Network::new(vec![1.0, 1.0], []).unwrap();
        let v = verdict(
            &edgeless,
            &StructuralChange::add_edge(NewEdge::new(2, 1, 0.5)),
            &tol(),
            checked(),
        )
        .unwrap();
        assert_eq!(v.u_after.as_deref(), Some(&[1.0, 1.5][..]));
        assert!(!v.scalable);
    }

    #[test]
    fn destabilising_edge() {
        let chain = Network::from_triples(vec![1.0, 1.0], &[(2, 1, 2.0)]).unwrap();
        let v = verdict(
            &chain,
            &StructuralChange::add_edge(NewEdge::new(1, 2, 0.5)),
            &tol(),
            checked(),
        )
        .unwrap();
        assert!(!v.stable_after && !v.scalable);
        assert!(v.u_after.is_none());
        assert!(v.spectral_radius_after >= 1.0);
        assert!(v.repair.unwrap().verified);
    }

    #[test]
    fn local_check_examples() {
        let cert = Certificate {
            v: vec![1.0, 2.0, 4.0],
            gamma: 4.0,
        };
        for w in [1e-6, 0.5, 3.0] {
            assert!(!sufficient_local_check(&three_node(), &NewEdge::new(1, 2, w), &cert).unwrap());
        }

        let net = Network::new(vec![3.0, 1.0], []).unwrap();
        let cert = Certificate {
            v: vec![1.0, 1.0],
            gamma: 1.0,
        };
        let edge = NewEdge::new(1, 2, 1.0);
        assert!(sufficient_local_check(&net, &edge, &cert).unwrap());
        let v = verdict(&net, &StructuralChange::add_edge(edge), &tol(), checked()).unwrap();
        assert!(v.is_gamma_scalable(cert.gamma));

        let bad = Certificate {
            v: vec![0.1, 1.0],
            gamma: 1.0,
        };
        assert!(matches!(
            sufficient_local_check(&net, &edge, &bad),
            Err(Error::InvalidCertificate)
        ));
    }

    #[test]
    fn diagonal_dominance_examples() {
        let net = Network::from_triples(vec![2.0, 2.0], &[(2, 1, 0.5)]).unwrap();
        assert!(diagonal_dominance_check(&net, &NewEdge::new(1, 2, 0.5), 1.0).unwrap());
        assert!(!diagonal_dominance_check(&net, &NewEdge::new(1, 2, 1.5), 1.0).unwrap());
        assert!(matches!(
            diagonal_dominance_check(&three_node(), &NewEdge::new(1, 2, 0.5), 4.0),
            Err(Error::NotDiagonallyDominant { node }) if node == n(2)
        ));
    }

    #[test]
    fn repair_examples() {
        let cert = Certificate {
            v: vec![1.0, 2.0, 4.0, 4.0],
            gamma: 4.0,
        };
        let r = propose_repair(&four_node(), &NewEdge::new(4, 2, 0.1), &cert, &tol()).unwrap();
        assert_eq!(r.node, n(4));
        assert_eq!(r.a_old, 0.25);
        assert_eq!(r.a_new, 0.3);
        assert!(r.verified);

        let tiny = propose_repair(&four_node(), &NewEdge::new(4, 2, 1e-300), &cert, &tol()).unwrap();
        assert_eq!(tiny.a_new, tiny.a_old);

        let net = Network::new(vec![1.0, 1.0], []).unwrap();
        let cert = Certificate {
            v: vec![1.0, 1.0],
            gamma: 1.0,
        };
        let r = propose_repair(&net, &NewEdge::new(2, 1, 0.5), &cert, &tol()).unwrap();
        assert_eq!(r.a_new, 1.5);
        let repaired = apply(
            &apply(&net, &StructuralChange::add_edge(NewEdge::new(2, 1, 0.5))).unwrap().network,
            &r.as_change(),
        )
        .unwrap()
        .network;
        assert_eq!(robustness_vector(&repaired, &tol()).unwrap().u(), &[1.0, 1.0]);
    }

    #[test]
    fn lower_bound_examples() {
        let b = lower_bound_added_edge(&four_node(), &NewEdge::new(4, 2, 0.1), &tol()).unwrap();
        assert!((b - 4.8).abs() < 1e-12);
        let net = Network::new(vec![1.0, 1.0], []).unwrap();
        assert_eq!(lower_bound_added_edge(&net, &NewEdge::new(2, 1, 0.5), &tol()).unwrap(), 1.5);
    }

    #[test]
    fn sequence_examples() {
        let script = vec![
            StructuralChange::AddNode { a: 0.25 },
            StructuralChange::add_edge(NewEdge::new(4, 2, 0.1)),
        ];
        let rep = check_sequence(&three_node(), &script, None, &tol(), checked()).unwrap();
        assert!(rep.steps[0].scalable);
        assert!(!rep.steps[1].scalable);
        assert!(!rep.gamma_robust);
        assert!((rep.final_report.gamma() - 4.8).abs() < 1e-12);

        let mut repaired = script.clone();
        repaired.push(StructuralChange::SetSelfFeedback { node: n(4), a: 0.3 });
        let rep = check_sequence(&three_node(), &repaired, Some(4.0), &tol(), checked()).unwrap();
        assert_eq!(rep.steps.len(), 3);
        assert!(rep.gamma_robust);
        assert!((rep.final_report.gamma() - 4.0).abs() < 1e-12);

        let rep = check_sequence(&three_node(), &[], None, &tol(), checked()).unwrap();
        assert_eq!(rep.final_report, rep.initial);
        assert!(rep.gamma_robust);
    }

    #[test]
    fn sequence_reports_failing_step() {
        let script = vec![
            StructuralChange::AddNode { a: 1.0 },
            StructuralChange::RemoveEdge { to: n(1), from: n(2) },
        ];
        match check_sequence(&three_node(), &script, None, &tol(), checked()) {
            Err(Error::Step { index: 1, source }) => {
                assert!(matches!(*source, Error::PreconditionViolated(_)))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sequence_halts_on_instability() {
        let chain = Network::from_triples(vec![1.0, 1.0], &[(2, 1, 2.0)]).unwrap();
        let script = vec![
            StructuralChange::add_edge(NewEdge::new(1, 2, 0.5)),
            StructuralChange::AddNode { a: 1.0 },
        ];
        let rep = check_sequence(&chain, &script, None, &tol(), checked()).unwrap();
        assert_eq!(rep.halted_at, Some(0));
        assert_eq!(rep.steps.len(), 1);
        assert!(!rep.final_report.stable && !rep.gamma_robust);
    }

    #[test]
    fn cascade_expands_and_removes() {
        let c = StructuralChange::RemoveNodeCascade { node: n(2) };
        let steps = c.expand(&three_node()).unwrap();
        assert_eq!(
            steps,
            vec![
                StructuralChange::RemoveEdge { to: n(2), from: n(1) },
                StructuralChange::RemoveEdge { to: n(3), from: n(2) },
                StructuralChange::RemoveNode { node: n(2) },
            ]
        );
        let v = verdict(&three_node(), &c, &tol(), checked()).unwrap();
        assert!(v.scalable);
        assert_eq!(v.u_after.as_deref(), Some(&[1.0, 2.0][..]));
        assert_eq!(v.performance_loss.as_deref(), Some(&[0.0, -2.0][..]));
    }

    #[test]
    fn change_json_shapes() {
        let c: StructuralChange =
            serde_json::from_str(r#"{"op": "add_edge", "to": 4, "from": 2, "weight": "0.1"}"#).unwrap();
        assert_eq!(c, StructuralChange::add_edge(NewEdge::new(4, 2, 0.1)));
        let c: StructuralChange = serde_json::from_str(r#"{"op": "add_node", "a": "0.25"}"#).unwrap();
        assert_eq!(c, StructuralChange::AddNode { a: 0.25 });
        let c: StructuralChange = serde_json::from_str(r#"{"op": "remove_node", "node": 4}"#).unwrap();
        assert_eq!(c, StructuralChange::RemoveNode { node: n(4) });
        let c: StructuralChange =
            serde_json::from_str(r#"{"op": "remove_edge", "to": 3, "from": 2}"#).unwrap();
        assert_eq!(c, StructuralChange::RemoveEdge { to: n(3), from: n(2) });
        assert!(serde_json::from_str::<StructuralChange>(r#"{"op": "add_node", "a": "1", "x": 1}"#).is_err());
        assert_eq!(
            serde_json::to_string(&StructuralChange::add_edge(NewEdge::new(4, 2, 0.1))).unwrap(),
            r#"{"op":"add_edge","to":4,"from":2,"weight":"0.1"}"#
        );
    }
}
