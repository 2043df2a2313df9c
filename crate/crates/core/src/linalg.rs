//! Dense linear algebra and graph primitives behind the analysis.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::model::Network;

/// LU factorisation (partial pivoting) of `A - M`, reused for every
/// right-hand side needed by one analysis.
pub struct SystemFactor {
    k: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

impl SystemFactor {
    pub fn new(net: &Network) -> Self {
        let k = net.system_matrix();
        let lu = LU::new(k.clone());
        SystemFactor { k, lu }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    /// Solves `(A - M) x = rhs` with one step of iterative refinement.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b = DVector::from_row_slice(rhs);
        let mut x = self
            .lu
            .solve(&b)
            .ok_or_else(|| Error::SolveFailed("A - M is singular".into()))?;
        let r = &b - &self.k * &x;
        if let Some(dx) = self.lu.solve(&r) {
            x += dx;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolveFailed("non-finite solution".into()));
        }
        Ok(x.as_slice().to_vec())
    }

    /// Column `(A - M)^{-1} e_i`.
    pub fn resolvent_column(&self, i: usize) -> Result<Vec<f64>> {
        let mut e = vec![0.0; self.k.nrows()];
        e[i] = 1.0;
        self.solve(&e)
    }

    /// `‖(A - M) x - rhs‖∞`.
    pub fn residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let r = &self.k * DVector::from_row_slice(x) - DVector::from_row_slice(rhs);
        r.amax()
    }
}

/// Strongly connected components of a directed graph given by out-adjacency
/// lists, in topological order (sources first).
pub fn components_topological(out: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(out.len(), 0);
    let ids: Vec<_> = (0..out.len()).map(|_| g.add_node(())).collect();
    for (u, succ) in out.iter().enumerate() {
        for &v in succ {
            g.add_edge(ids[u], ids[v], ());
        }
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    comps.reverse();
    comps
}

/// Power-iteration bracket for the spectral radius of a nonnegative matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralEstimate {
    /// Collatz-Wielandt upper bound; this is the reported value.
    pub upper: f64,
    pub lower: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct PowerIteration {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            rel_tol: 1e-12,
            max_iter: 100_000,
        }
    }
}

/// Spectral radius of a nonnegative square matrix.
///
/// The radius is the maximum over strongly connected components of the
/// component radius. Trivial components without a self-loop contribute zero,
/// so nilpotent (acyclic) matrices report exactly `0`. Each nontrivial
/// component is irreducible; iterating `B + I` from the all-ones vector makes
/// it primitive, and the Collatz-Wielandt ratios `min/max (Bx)_i / x_i`
/// bracket the radius at every step.
pub fn spectral_radius(b: &DMatrix<f64>, opts: PowerIteration) -> SpectralEstimate {
    let n = b.nrows();
    let out: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..n).filter(|&i| i != j && b[(i, j)] != 0.0).collect())
        .collect();
    let mut total = SpectralEstimate {
        upper: 0.0,
        lower: 0.0,
        converged: true,
        iterations: 0,
    };
    for comp in components_topological(&out) {
        let est = if comp.len() == 1 {
            let d = b[(comp[0], comp[0])].abs();
            SpectralEstimate {
                upper: d,
                lower: d,
                converged: true,
                iterations: 0,
            }
        } else {
            component_radius(b, &comp, opts)
        };
        total.upper = total.upper.max(est.upper);
        total.lower = total.lower.max(est.lower);
        total.converged &= est.converged;
        total.iterations = total.iterations.max(est.iterations);
    }
    total
}

fn component_radius(b: &DMatrix<f64>, comp: &[usize], opts: PowerIteration) -> SpectralEstimate {
    let k = comp.len();
    let sub = DMatrix::from_fn(k, k, |r, c| b[(comp[r], comp[c])]);
    let mut x = DVector::from_element(k, 1.0);
    let mut est = SpectralEstimate {
        upper: f64::INFINITY,
        lower: 0.0,
        converged: false,
        iterations: 0,
    };
    for it in 1..=opts.max_iter {
        let bx = &sub * &x;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (num, den) in bx.iter().zip(x.iter()) {
            let r = num / den;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        est.upper = est.upper.min(hi);
        est.lower = est.lower.max(lo);
        est.iterations = it;
        if est.upper - est.lower <= opts.rel_tol * est.upper {
            est.converged = true;
            break;
        }
        let y = bx + &x;
        let scale = y.max();
        x = y / scale;
    }
    est
}

/// For each node, the length of the longest walk ending there, or `None`
/// when walks of unbounded length end there (a cycle can reach the node).
pub fn max_walk_length_into(net: &Network) -> Vec<Option<usize>> {
    let out = net.out_adjacency();
    let inc = net.in_adjacency();
    let mut len: Vec<Option<usize>> = vec![Some(0); net.node_count()];
    for comp in components_topological(&out) {
        if comp.len() > 1 {
            for &v in &comp {
                len[v] = None;
            }
            continue;
        }
        let v = comp[0];
        let mut best = Some(0);
        for &u in &inc[v] {
            best = match (best, len[u]) {
                (Some(b), Some(l)) => Some(b.max(l + 1)),
                _ => None,
            };
        }
        len[v] = best;
    }
    len
}

/// Nodes from which some node in `targets` is reachable along edge direction
/// (`from -> to`), found by breadth-first search on the reversed graph.
/// Targets themselves are included.
pub fn reaches_any(net: &Network, targets: &[usize]) -> Vec<bool> {
    let inc = net.in_adjacency();
    let mut seen = vec![false; net.node_count()];
    let mut queue = std::collections::VecDeque::new();
    for &t in targets {
        if !seen[t] {
            seen[t] = true;
            queue.push_back(t);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &u in &inc[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_pair_radius() {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        let est = spectral_radius(&b, PowerIteration::default());
        assert!(est.converged);
        assert_eq!(est.upper, 0.5);
    }

    #[test]
    fn nilpotent_radius_is_zero() {
        let b = DMatrix::from_row_slice(3, 3, &[0., 0., 0., 1., 0., 0., 1., 1., 0.]);
        let est = spectral_radius(&b, PowerIteration::default());
        assert_eq!(est.upper, 0.0);
    }

    #[test]
    fn periodic_cycle_converges() {
        // 3-cycle with unequal weights: eigenvalues are the cube roots of the
        // weight product, so plain power iteration would oscillate.
        let b = DMatrix::from_row_slice(3, 3, &[0., 0., 0.2, 0.9, 0., 0., 0., 0.5, 0.]);
        let est = spectral_radius(&b, PowerIteration::default());
        assert!(est.converged);
        let exact = (0.2f64 * 0.9 * 0.5).cbrt();
        assert!((est.upper - exact).abs() < 1e-11, "{} vs {exact}", est.upper);
        assert!(est.lower <= exact + 1e-15);
    }

    #[test]
    fn radius_is_max_over_components() {
        // Two disjoint 2-cycles with radii 0.3 and 0.6, plus a bridge.
        let mut b = DMatrix::zeros(4, 4);
        b[(0, 1)] = 0.3;
        b[(1, 0)] = 0.3;
        b[(2, 3)] = 0.6;
        b[(3, 2)] = 0.6;
        b[(2, 0)] = 5.0;
        let est = spectral_radius(&b, PowerIteration::default());
        assert!((est.upper - 0.6).abs() < 1e-12);
    }

    #[test]
    fn walk_lengths() {
        let net = crate::golden::three_node();
        assert_eq!(max_walk_length_into(&net), vec![Some(0), Some(1), Some(2)]);
        let cyc = Network::from_triples(vec![1.0; 3], &[(1, 2, 0.5), (2, 1, 0.5), (3, 2, 0.1)])
            .unwrap();
        assert_eq!(max_walk_length_into(&cyc), vec![None, None, None]);
    }

    #[test]
    fn reachability() {
        let net = crate::golden::three_node();
        assert_eq!(reaches_any(&net, &[2]), vec![true, true, true]);
        assert_eq!(reaches_any(&net, &[0]), vec![true, false, false]);
    }
}
