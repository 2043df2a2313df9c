//! Stability, robustness vector, certificates, walk sums and the cycle
//! small-gain condition.
//!
//! For a stable network the vector `u = (A - M)^{-1} 1` is the equilibrium
//! under a unit constant disturbance, and `max_i u_i` is the smallest `gamma`
//! for which every trajectory from rest obeys
//! `max_i |x_i(t)| <= gamma * max_i ‖d_i‖∞`.

use serde::{Deserialize, Serialize};

use crate::config::{within_level, Tolerances, ARGMAX_TIE};
use crate::cycles::simple_cycles;
use crate::error::{Error, Result};
use crate::linalg::{max_walk_length_into, spectral_radius, SystemFactor};
use crate::model::{Network, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stability {
    pub stable: bool,
    #[serde(with = "crate::decimal")]
    pub spectral_radius: f64,
    /// The radius lies within the stability margin of 1, or power iteration
    /// did not settle on which side of 1 it lies.
    pub near_boundary: bool,
}

/// Decides whether `-(A - M)` is Hurwitz through `rho(M A^{-1}) < 1`.
pub fn stability(net: &Network, tol: &Tolerances) -> Stability {
    let est = spectral_radius(&net.walk_matrix(), tol.power);
    let rho = est.upper;
    let stable = rho < 1.0 - tol.eps_stab;
    let near_boundary = (rho - 1.0).abs() <= tol.eps_stab || (!est.converged && !stable && est.lower < 1.0);
    if !est.converged {
        log::warn!(
            "power iteration hit its cap after {} steps; radius bracket [{}, {}]",
            est.iterations,
            est.lower,
            est.upper
        );
    }
    Stability {
        stable,
        spectral_radius: rho,
        near_boundary,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub stable: bool,
    #[serde(with = "crate::decimal")]
    pub spectral_radius: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub near_boundary: bool,
    #[serde(with = "crate::decimal::opt_vec", default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(
        rename = "gamma",
        with = "crate::decimal::opt",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub gamma_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmax: Option<Vec<NodeId>>,
}

impl RobustnessReport {
    /// The robustness vector; panics for an unstable report.
    pub fn u(&self) -> &[f64] {
        self.u.as_deref().expect("unstable network has no robustness vector")
    }

    /// Minimal gain; panics for an unstable report.
    pub fn gamma(&self) -> f64 {
        self.gamma_min.expect("unstable network has no finite gain")
    }
}

/// Full analysis. Never fails on instability; the report then carries
/// `stable = false` and no vector.
pub fn analyze(net: &Network, tol: &Tolerances) -> Result<RobustnessReport> {
    match analyze_with_factor(net, tol) {
        Ok((report, _)) => Ok(report),
        Err(Error::Unstable { .. }) => {
            let st = stability(net, tol);
            Ok(RobustnessReport {
                stable: false,
                spectral_radius: st.spectral_radius,
                near_boundary: st.near_boundary,
                u: None,
                gamma_min: None,
                argmax: None,
            })
        }
        Err(e) => Err(e),
    }
}

/// Solves `(A - M) u = 1`; fails with [`Error::Unstable`] when no finite gain exists.
pub fn robustness_vector(net: &Network, tol: &Tolerances) -> Result<RobustnessReport> {
    analyze_with_factor(net, tol).map(|(r, _)| r)
}

pub(crate) fn analyze_with_factor(
    net: &Network,
    tol: &Tolerances,
) -> Result<(RobustnessReport, SystemFactor)> {
    let st = stability(net, tol);
    if !st.stable {
        return Err(Error::Unstable {
            spectral_radius: st.spectral_radius,
        });
    }
    let factor = SystemFactor::new(net);
    let ones = vec![1.0; net.node_count()];
    let u = factor.solve(&ones)?;
    let norm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let residual = factor.residual(&u, &ones);
    if residual > tol.solve_tol * (1.0 + norm) {
        return Err(Error::SolveFailed(format!(
            "residual {residual:e} exceeds tolerance"
        )));
    }
    if u.iter().any(|&x| x <= 0.0) {
        return Err(Error::SolveFailed(
            "robustness vector has a non-positive entry".into(),
        ));
    }
    let (gamma_min, argmax) = max_and_argmax(&u);
    let report = RobustnessReport {
        stable: true,
        spectral_radius: st.spectral_radius,
        near_boundary: st.near_boundary,
        u: Some(u),
        gamma_min: Some(gamma_min),
        argmax: Some(argmax),
    };
    Ok((report, factor))
}

pub(crate) fn max_and_argmax(u: &[f64]) -> (f64, Vec<NodeId>) {
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = max * (1.0 - ARGMAX_TIE);
    let argmax = u
        .iter()
        .enumerate()
        .filter(|(_, &x)| x >= cut)
        .map(|(i, _)| NodeId::from_index(i))
        .collect();
    (max, argmax)
}

/// Witness of gamma-robustness: `v > 0`, `(A - M) v >= 1`, `v <= gamma 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    #[serde(with = "crate::decimal::vec")]
    pub v: Vec<f64>,
    #[serde(with = "crate::decimal")]
    pub gamma: f64,
}

impl Certificate {
    /// The tightest certificate, `v = u` at `gamma = max u`.
    pub fn from_report(report: &RobustnessReport) -> Option<Self> {
        Some(Certificate {
            v: report.u.clone()?,
            gamma: report.gamma_min?,
        })
    }
}

/// Checks the certificate inequalities as stated, without slack.
///
/// Each row of `(A - M) v >= 1` is a short dot product; a row passes when its
/// computed value is at least `1` minus the worst-case rounding error of that
/// evaluation (a few units in the last place of the row's magnitude). The
/// sign and `v <= gamma` conditions are compared exactly.
pub fn check_certificate(net: &Network, cert: &Certificate) -> Result<bool> {
    let n = net.node_count();
    if cert.v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: cert.v.len(),
        });
    }
    if !(cert.gamma > 0.0 && cert.gamma.is_finite()) {
        return Ok(false);
    }
    if cert.v.iter().any(|&x| !(x > 0.0 && x <= cert.gamma)) {
        return Ok(false);
    }
    Ok(net.nodes().all(|i| row_dominates(net, &cert.v, i, 0.0)))
}

/// Row `i` of `(A - M) v - extra >= 1` up to evaluation rounding, where
/// `extra` is an additional nonnegative term subtracted from the row.
pub(crate) fn row_dominates(net: &Network, v: &[f64], i: NodeId, extra: f64) -> bool {
    let mut value = net.a(i) * v[i.index()];
    let mut magnitude = value.abs() + 1.0 + extra.abs();
    let edges = net.in_edges(i);
    for e in edges {
        let t = e.weight * v[e.from.index()];
        value -= t;
        magnitude += t.abs();
    }
    value -= extra;
    let terms = edges.len() as f64 + 3.0;
    value - 1.0 >= -terms * f64::EPSILON * magnitude
}

/// True iff the network is stable and its minimal gain does not exceed `gamma`.
pub fn is_gamma_robust(net: &Network, gamma: f64, tol: &Tolerances) -> Result<bool> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let report = analyze(net, tol)?;
    Ok(report.gamma_min.is_some_and(|g| within_level(g, gamma)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkSum {
    pub target: NodeId,
    pub max_length: usize,
    /// Total weight of walks of length `1..=max_length` ending at `target`.
    #[serde(with = "crate::decimal")]
    pub sum: f64,
    /// `partial_sums[k - 1]` covers lengths `1..=k`.
    #[serde(with = "crate::decimal::vec")]
    pub partial_sums: Vec<f64>,
    /// Upper bound on the weight of all longer walks ending at `target`.
    #[serde(with = "crate::decimal")]
    pub tail_bound: f64,
    #[serde(with = "crate::decimal")]
    pub spectral_radius: f64,
}

/// Truncated weighted-walk sum `sum_{k=1}^{K} e_target^T (M A^{-1})^k 1`.
///
/// In a stable network the untruncated sum equals `u_target a_target - 1`.
/// The tail bound is exactly zero when no cycle reaches `target` and
/// `max_length` covers its longest incoming walk; otherwise it comes from a
/// Collatz-Wielandt vector `p > 0` with `B p <= r p`, `r < 1`, which gives
/// `B^k 1 <= r^k p / min(p)` for every `k`.
pub fn walk_sum_oracle(
    net: &Network,
    target: NodeId,
    max_length: usize,
    tol: &Tolerances,
) -> Result<WalkSum> {
    net.check_node(target)?;
    if max_length == 0 {
        return Err(Error::InvalidArgument("max_length must be at least 1".into()));
    }
    let st = stability(net, tol);
    if !st.stable {
        return Err(Error::Unstable {
            spectral_radius: st.spectral_radius,
        });
    }
    let b = net.walk_matrix();
    let t = target.index();
    let mut y = nalgebra::DVector::from_element(net.node_count(), 1.0);
    let mut sum = 0.0;
    let mut partial_sums = Vec::with_capacity(max_length);
    for _ in 0..max_length {
        y = &b * y;
        sum += y[t];
        partial_sums.push(sum);
    }
    let tail_bound = walk_tail_bound(net, &b, t, max_length, st.spectral_radius);
    Ok(WalkSum {
        target,
        max_length,
        sum,
        partial_sums,
        tail_bound,
        spectral_radius: st.spectral_radius,
    })
}

fn walk_tail_bound(
    net: &Network,
    b: &nalgebra::DMatrix<f64>,
    t: usize,
    max_length: usize,
    rho: f64,
) -> f64 {
    if let Some(longest) = max_walk_length_into(net)[t] {
        if max_length >= longest {
            return 0.0;
        }
    }
    let n = net.node_count();
    let ident = nalgebra::DMatrix::<f64>::identity(n, n);
    let ones = nalgebra::DVector::from_element(n, 1.0);
    let mut best = f64::INFINITY;
    for frac in [0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        let sigma = rho + (1.0 - rho) * frac;
        let Some(p) = (&ident - b / sigma).lu().solve(&ones) else {
            continue;
        };
        if p.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            continue;
        }
        let bp = b * &p;
        let r = bp
            .iter()
            .zip(p.iter())
            .map(|(num, den)| num / den)
            .fold(0.0f64, f64::max)
            * (1.0 + 1e-12);
        if r >= 1.0 {
            continue;
        }
        let min_p = p.min();
        let bound = r.powi(max_length as i32 + 1) / (1.0 - r) * (p[t] / min_p) * (1.0 + 1e-12);
        best = best.min(bound);
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeCheck {
    pub node: NodeId,
    /// `a_i * gamma`.
    #[serde(with = "crate::decimal")]
    pub limit: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleEntry {
    /// Nodes in walk order starting at the smallest; the cycle closes back to the first.
    pub nodes: Vec<NodeId>,
    /// Product of `m_{next, cur} / a_cur` around the cycle (dimensionless).
    #[serde(with = "crate::decimal")]
    pub weight: f64,
    /// `1 / (1 - weight)`, infinite when `weight >= 1`.
    #[serde(with = "crate::decimal")]
    pub bound: f64,
    pub checks: Vec<NodeCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleReport {
    #[serde(with = "crate::decimal")]
    pub gamma: f64,
    pub cycles: Vec<CycleEntry>,
}

impl CycleReport {
    /// `(cycle index, node)` pairs violating `1/(1 - w) <= a_i gamma`.
    pub fn violations(&self) -> Vec<(usize, NodeId)> {
        self.cycles
            .iter()
            .enumerate()
            .flat_map(|(k, c)| {
                c.checks
                    .iter()
                    .filter(|ch| !ch.passes)
                    .map(move |ch| (k, ch.node))
            })
            .collect()
    }

    /// Necessary condition for gamma-robustness; never sufficient on its own.
    pub fn passes(&self) -> bool {
        self.cycles.iter().all(|c| c.checks.iter().all(|ch| ch.passes))
    }
}

/// Evaluates the cycle small-gain condition on every simple cycle of the
/// walk graph. Any violation proves the network is not gamma-robust.
pub fn cycle_small_gain(net: &Network, gamma: f64, tol: &Tolerances) -> Result<CycleReport> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let st = stability(net, tol);
    if !st.stable {
        return Err(Error::Unstable {
            spectral_radius: st.spectral_radius,
        });
    }
    let raw = simple_cycles(&net.out_adjacency(), tol.cycle_cap)?;
    let cycles = raw
        .into_iter()
        .map(|seq| {
            let k = seq.len();
            let weight: f64 = (0..k)
                .map(|l| {
                    let cur = NodeId::from_index(seq[l]);
                    let next = NodeId::from_index(seq[(l + 1) % k]);
                    net.weight(next, cur).expect("cycle follows edges") / net.a(cur)
                })
                .product();
            let bound = if weight < 1.0 {
                1.0 / (1.0 - weight)
            } else {
                f64::INFINITY
            };
            let nodes: Vec<NodeId> = seq.iter().map(|&i| NodeId::from_index(i)).collect();
            let checks = nodes
                .iter()
                .map(|&node| {
                    let limit = net.a(node) * gamma;
                    NodeCheck {
                        node,
                        limit,
                        passes: within_level(bound, limit),
                    }
                })
                .collect();
            CycleEntry {
                nodes,
                weight,
                bound,
                checks,
            }
        })
        .collect();
    Ok(CycleReport { gamma, cycles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::{symmetric_pair, three_node};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn stability_examples() {
        let st = stability(&three_node(), &tol());
        assert!(st.stable);
        assert_eq!(st.spectral_radius, 0.0);

        let st = stability(&symmetric_pair(0.5), &tol());
        assert!(st.stable);
        assert_eq!(st.spectral_radius, 0.5);

        let st = stability(&symmetric_pair(1.0), &tol());
        assert!(!st.stable);
        assert_eq!(st.spectral_radius, 1.0);
        assert!(st.near_boundary);
    }

    #[test]
    fn robustness_examples() {
        let r = robustness_vector(&three_node(), &tol()).unwrap();
        assert_eq!(r.u(), &[1.0, 2.0, 4.0]);
        assert_eq!(r.gamma(), 4.0);
        assert_eq!(r.argmax, Some(vec![NodeId::new(3)]));

        let single = Network::new(vec![2.0], []).unwrap();
        assert_eq!(robustness_vector(&single, &tol()).unwrap().u(), &[0.5]);

        let r = robustness_vector(&symmetric_pair(0.5), &tol()).unwrap();
        for x in r.u() {
            assert!((x - 2.0).abs() < 1e-15);
        }
        assert_eq!(r.argmax.unwrap().len(), 2);
    }

    #[test]
    fn unstable_has_no_vector() {
        let net = symmetric_pair(1.0);
        assert!(matches!(
            robustness_vector(&net, &tol()),
            Err(Error::Unstable { .. })
        ));
        let r = analyze(&net, &tol()).unwrap();
        assert!(!r.stable && r.u.is_none() && r.gamma_min.is_none() && r.argmax.is_none());
    }

    #[test]
    fn certificate_examples() {
        let net = three_node();
        let cert = |v: [f64; 3], gamma| Certificate { v: v.to_vec(), gamma };
        assert!(check_certificate(&net, &cert([1.0, 2.0, 4.0], 4.0)).unwrap());
        assert!(!check_certificate(&net, &cert([1.0, 2.0, 4.0], 3.9)).unwrap());
        assert!(!check_certificate(&net, &cert([1.0, 2.0, 3.9], 4.0)).unwrap());
        assert!(!check_certificate(&net, &cert([0.0, 2.0, 4.0], 4.0)).unwrap());
        let short = Certificate { v: vec![1.0], gamma: 1.0 };
        assert!(matches!(
            check_certificate(&net, &short),
            Err(Error::DimensionMismatch { expected: 3, found: 1 })
        ));
    }

    #[test]
    fn gamma_robust_examples() {
        let net = three_node();
        assert!(is_gamma_robust(&net, 4.0, &tol()).unwrap());
        assert!(!is_gamma_robust(&net, 3.99, &tol()).unwrap());
        assert!(!is_gamma_robust(&symmetric_pair(1.0), 1e9, &tol()).unwrap());
        assert!(is_gamma_robust(&net, 0.0, &tol()).is_err());
    }

    #[test]
    fn walk_sum_examples() {
        let chain = Network::from_triples(vec![1.0, 1.0], &[(2, 1, 0.5)]).unwrap();
        let w = walk_sum_oracle(&chain, NodeId::new(2), 5, &tol()).unwrap();
        assert_eq!(w.sum, 0.5);
        assert_eq!(w.tail_bound, 0.0);

        let net = three_node();
        for k in [1, 3, 10] {
            assert_eq!(walk_sum_oracle(&net, NodeId::new(1), k, &tol()).unwrap().sum, 0.0);
        }
        let w = walk_sum_oracle(&net, NodeId::new(3), 2, &tol()).unwrap();
        assert_eq!(w.sum, 3.0);
        assert_eq!(w.partial_sums, vec![2.0, 3.0]);
        assert_eq!(w.tail_bound, 0.0);

        // Truncated below the longest walk: the tail bound must be positive.
        let w = walk_sum_oracle(&net, NodeId::new(3), 1, &tol()).unwrap();
        assert_eq!(w.sum, 2.0);
        assert!(w.tail_bound >= 1.0);

        assert!(matches!(
            walk_sum_oracle(&symmetric_pair(1.0), NodeId::new(1), 3, &tol()),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn tail_bound_holds_for_non_normal_walk_matrix() {
        // B has eigenvalues ±0.1 but a large entry, so N rho^{K+1}/(1-rho)
        // would understate the tail.
        let net = Network::from_triples(vec![1.0, 1.0], &[(2, 1, 10.0), (1, 2, 0.001)]).unwrap();
        let r = robustness_vector(&net, &tol()).unwrap();
        for k in [1, 2, 5] {
            let w = walk_sum_oracle(&net, NodeId::new(2), k, &tol()).unwrap();
            let exact = r.u()[1] - 1.0;
            assert!(exact - w.sum <= w.tail_bound, "k={k}");
            assert!(exact - w.sum > 2.0 * 0.1f64.powi(k as i32 + 1) / 0.9);
        }
    }

    #[test]
    fn cycle_examples() {
        let rep = cycle_small_gain(&three_node(), 4.0, &tol()).unwrap();
        assert!(rep.cycles.is_empty());

        let pair = symmetric_pair(0.5);
        let rep = cycle_small_gain(&pair, 2.0, &tol()).unwrap();
        assert_eq!(rep.cycles.len(), 1);
        let c = &rep.cycles[0];
        assert_eq!(c.nodes, vec![NodeId::new(1), NodeId::new(2)]);
        assert_eq!(c.weight, 0.25);
        assert!((c.bound - 4.0 / 3.0).abs() < 1e-15);
        assert!(rep.passes());

        let rep = cycle_small_gain(&pair, 1.3, &tol()).unwrap();
        assert_eq!(
            rep.violations(),
            vec![(0, NodeId::new(1)), (0, NodeId::new(2))]
        );
    }
}
