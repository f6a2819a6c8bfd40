//! Rooted directed graphs and the quantities measured on them: distances
//! from the root, rooted ball spread, closed components and walks.
//!
//! A graph may be a finite truncation of an infinite one (a Cayley ball).
//! Truncated vertices are present but their out-edges are unknown; every
//! computation that would need those edges either refuses or flags its
//! result as inexact.

pub mod cayley;
pub mod escape;
pub mod scc;
pub mod spread;

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub use cayley::{cayley_ball, CayleySemigroup, CayleySpec, FreeSemigroup, ResetSemigroup, RewritingSemigroup};
pub use escape::{
    cayley_walk, crossing_counts, crossing_counts_cayley, crossing_threshold, digraph_walk, spread_values,
    CrossingCount,
};
pub use scc::{finite_sccs, sccs_to_json, ComponentStatus, SccComponent};
pub use spread::{
    ball_spread, ball_spread_at, spread_table, spread_table_csv, verify_spread_growth, SpreadGrowthReport, SpreadResult,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    out: Vec<Vec<usize>>,
    labels: Vec<String>,
    truncated: Vec<bool>,
    dist: Vec<u64>,
    /// Out-distance from each vertex to the nearest truncated vertex
    /// (`u64::MAX` if none is reachable).
    to_truncated: Vec<u64>,
}

impl Digraph {
    /// Build a graph rooted at vertex 0. `labels` may be empty.
    pub fn new(out: Vec<Vec<usize>>, labels: Vec<String>, truncated: Vec<bool>) -> Result<Self> {
        let n = out.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "a rooted graph needs at least one vertex".into(),
            ));
        }
        if truncated.len() != n || (!labels.is_empty() && labels.len() != n) {
            return Err(Error::InvalidParameter("per-vertex arrays differ in length".into()));
        }
        if let Some(&bad) = out.iter().flatten().find(|&&w| w >= n) {
            return Err(Error::InvalidParameter(format!("edge to missing vertex {bad}")));
        }
        if let Some(v) = (0..n).find(|&v| truncated[v] && !out[v].is_empty()) {
            return Err(Error::InvalidParameter(format!("truncated vertex {v} has out-edges")));
        }
        let dist = bfs_from(&out, 0, u64::MAX);
        if let Some(v) = dist.iter().position(|&d| d == u64::MAX) {
            return Err(Error::UnreachableVertex(v));
        }
        let to_truncated = distance_to_truncated(&out, &truncated);
        Ok(Digraph {
            out,
            labels,
            truncated,
            dist,
            to_truncated,
        })
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn label(&self, v: usize) -> String {
        self.labels.get(v).cloned().unwrap_or_else(|| v.to_string())
    }

    pub fn is_truncated(&self, v: usize) -> bool {
        self.truncated[v]
    }

    /// True if no vertex is truncated.
    pub fn is_complete(&self) -> bool {
        !self.truncated.iter().any(|&t| t)
    }

    /// `dist(o, v)`.
    pub fn dist(&self, v: usize) -> u64 {
        self.dist[v]
    }

    pub fn max_dist(&self) -> u64 {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    /// Largest out-degree among materialized vertices.
    pub fn d_max(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Whether the out-ball of radius `n` around `v` is fully known, i.e.
    /// no truncated vertex lies at out-distance `< n` from `v`.
    pub fn ball_is_sound(&self, v: usize, n: u64) -> bool {
        self.to_truncated[v] >= n
    }

    /// `|B(o, r)|`, or `None` if the ball reaches past the truncation.
    pub fn root_ball_size(&self, r: u64) -> Option<usize> {
        // every vertex at distance <= r is known iff none at distance < r is truncated
        if !self.ball_is_sound(0, r) {
            return None;
        }
        Some(self.dist.iter().filter(|&&d| d <= r).count())
    }

    /// Parse `u v` lines (blank lines and `#` comments allowed); vertex 0
    /// is the root and every vertex must be reachable from it.
    pub fn load_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut n = 1;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse = |tok: Option<&str>| -> Result<usize> {
                let tok = tok.ok_or_else(|| Error::Parse {
                    line: i + 1,
                    message: "expected two vertex ids".into(),
                })?;
                tok.parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("{tok:?} is not a nonnegative integer"),
                })
            };
            let mut toks = line.split_whitespace();
            let u = parse(toks.next())?;
            let v = parse(toks.next())?;
            if toks.next().is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "trailing tokens".into(),
                });
            }
            n = n.max(u + 1).max(v + 1);
            edges.push((u, v));
        }
        let mut out = vec![Vec::new(); n];
        for (u, v) in edges {
            out[u].push(v);
        }
        Digraph::new(out, Vec::new(), vec![false; n])
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (u, targets) in self.out.iter().enumerate() {
            for v in targets {
                let _ = writeln!(s, "{u} {v}");
            }
        }
        s
    }

    /// Add the reverse of every edge. Truncated vertices keep no edges of
    /// their own, so only complete graphs are accepted.
    pub fn symmetrized(&self) -> Result<Digraph> {
        if !self.is_complete() {
            return Err(Error::InvalidParameter("cannot symmetrize a truncated graph".into()));
        }
        let mut out = self.out.clone();
        for (u, targets) in self.out.iter().enumerate() {
            for &v in targets {
                out[v].push(u);
            }
        }
        Digraph::new(out, self.labels.clone(), self.truncated.clone())
    }

    /// Out-distances from `v`, up to `limit` steps (`u64::MAX` = unreached).
    pub fn distances_from(&self, v: usize, limit: u64) -> Vec<u64> {
        bfs_from(&self.out, v, limit)
    }
}

fn bfs_from(out: &[Vec<usize>], src: usize, limit: u64) -> Vec<u64> {
    let mut dist = vec![u64::MAX; out.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        if dist[u] >= limit {
            continue;
        }
        for &w in &out[u] {
            if dist[w] == u64::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Multi-source BFS on the reversed graph from all truncated vertices.
fn distance_to_truncated(out: &[Vec<usize>], truncated: &[bool]) -> Vec<u64> {
    let n = out.len();
    let mut rev = vec![Vec::new(); n];
    for (u, targets) in out.iter().enumerate() {
        for &v in targets {
            rev[v].push(u);
        }
    }
    let mut dist = vec![u64::MAX; n];
    let mut queue = VecDeque::new();
    for v in (0..n).filter(|&v| truncated[v]) {
        dist[v] = 0;
        queue.push_back(v);
    }
    while let Some(u) = queue.pop_front() {
        for &w in &rev[u] {
            if dist[w] == u64::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_examples() {
        let path = Digraph::load_edge_list("0 1\n1 2").unwrap();
        assert_eq!((path.len(), path.d_max()), (3, 1));
        assert_eq!(path.dist(2), 2);
        let cycle = Digraph::load_edge_list("0 1\n1 0").unwrap();
        assert_eq!(cycle.out_edges(1), &[0]);
        assert_eq!(Digraph::load_edge_list("0 1\n2 0"), Err(Error::UnreachableVertex(2)));
    }

    #[test]
    fn edge_list_errors_and_comments() {
        let g = Digraph::load_edge_list("# header\n\n0 1 # first\n0 0\n").unwrap();
        assert_eq!(g.out_edges(0), &[1, 0]);
        assert!(matches!(
            Digraph::load_edge_list("0 x"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Digraph::load_edge_list("0 1\n1"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(Digraph::load_edge_list("0 1 2"), Err(Error::Parse { .. })));
        assert_eq!(Digraph::load_edge_list("").unwrap().len(), 1);
        let text = "0 1\n1 2\n2 0\n";
        assert_eq!(Digraph::load_edge_list(text).unwrap().to_edge_list(), text);
    }

    #[test]
    fn truncation_bookkeeping() {
        // 0 -> 1 -> 2 (truncated)
        let g = Digraph::new(vec![vec![1], vec![2], vec![]], vec![], vec![false, false, true]).unwrap();
        assert!(g.ball_is_sound(0, 2) && !g.ball_is_sound(0, 3));
        assert!(g.ball_is_sound(2, 0) && !g.ball_is_sound(2, 1));
        assert_eq!(g.root_ball_size(1), Some(2));
        assert_eq!(g.root_ball_size(2), Some(3));
        assert_eq!(g.root_ball_size(3), None);
        assert!(g.symmetrized().is_err());
        assert!(Digraph::new(vec![vec![0]], vec![], vec![true]).is_err());
    }

    #[test]
    fn symmetrize_path() {
        let g = Digraph::load_edge_list("0 1\n1 2\n2 3").unwrap().symmetrized().unwrap();
        assert_eq!(g.out_edges(1), &[2, 0]);
        assert_eq!(g.distances_from(3, u64::MAX), vec![3, 2, 1, 0]);
    }
}
