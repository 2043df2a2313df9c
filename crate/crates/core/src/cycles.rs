//! Simple-cycle enumeration (Johnson, 1975).

use crate::error::{Error, Result};
use crate::linalg::components_topological;

/// Enumerates every simple cycle of the directed graph `out` (out-adjacency
/// lists). Each cycle starts at its smallest node and lists nodes in edge
/// order without repeating the first. The result is sorted by length, then
/// lexicographically.
///
/// Fails with [`Error::CycleBudgetExceeded`] once more than `cap` cycles exist.
pub fn simple_cycles(out: &[Vec<usize>], cap: usize) -> Result<Vec<Vec<usize>>> {
    let n = out.len();
    let mut search = Search {
        out,
        in_comp: vec![false; n],
        blocked: vec![false; n],
        blocked_by: vec![Vec::new(); n],
        stack: Vec::new(),
        found: Vec::new(),
        cap,
        start: 0,
    };
    for s in 0..n {
        // Component of s in the subgraph induced by {s, .., n-1}.
        let sub: Vec<Vec<usize>> = (s..n)
            .map(|u| out[u].iter().filter(|&&v| v >= s).map(|&v| v - s).collect())
            .collect();
        let comp = components_topological(&sub)
            .into_iter()
            .find(|c| c.contains(&0))
            .unwrap_or_default();
        if comp.len() < 2 {
            continue;
        }
        for &c in &comp {
            let v = c + s;
            search.in_comp[v] = true;
            search.blocked[v] = false;
            search.blocked_by[v].clear();
        }
        search.start = s;
        search.circuit(s)?;
        for &c in &comp {
            search.in_comp[c + s] = false;
        }
    }
    let mut found = search.found;
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(found)
}

struct Search<'a> {
    out: &'a [Vec<usize>],
    in_comp: Vec<bool>,
    blocked: Vec<bool>,
    blocked_by: Vec<Vec<usize>>,
    stack: Vec<usize>,
    found: Vec<Vec<usize>>,
    cap: usize,
    start: usize,
}

impl Search<'_> {
    fn circuit(&mut self, v: usize) -> Result<bool> {
        let mut closed = false;
        self.stack.push(v);
        self.blocked[v] = true;
        for &w in &self.out[v] {
            if !self.in_comp[w] {
                continue;
            }
            if w == self.start {
                if self.found.len() >= self.cap {
                    return Err(Error::CycleBudgetExceeded { cap: self.cap });
                }
                self.found.push(self.stack.clone());
                closed = true;
            } else if !self.blocked[w] && self.circuit(w)? {
                closed = true;
            }
        }
        if closed {
            self.unblock(v);
        } else {
            for &w in &self.out[v] {
                if self.in_comp[w] && !self.blocked_by[w].contains(&v) {
                    self.blocked_by[w].push(v);
                }
            }
        }
        self.stack.pop();
        Ok(closed)
    }

    fn unblock(&mut self, u: usize) {
        self.blocked[u] = false;
        while let Some(w) = self.blocked_by[u].pop() {
            if self.blocked[w] {
                self.unblock(w);
            }
        }
    }
}
