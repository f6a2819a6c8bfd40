//! Strongly connected components and trap detection.
//!
//! A component is a trap when no edge leaves it: a walk that enters never
//! returns, and the rooted ball spread is bounded. A vertex with no
//! out-edges in a complete graph is such a trap on its own.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use super::Digraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentStatus {
    /// No edge leaves the component and all its edges are known.
    Closed,
    /// Some edge leaves the component.
    Open,
    /// Contains a truncated vertex and no known edge leaves it; whether
    /// it is closed depends on the unmaterialized part.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SccComponent {
    /// Sorted vertex ids.
    pub vertices: Vec<usize>,
    pub status: ComponentStatus,
}

/// All strongly connected components, each classified. Components are
/// listed in order of their smallest vertex.
pub fn finite_sccs(g: &Digraph) -> Vec<SccComponent> {
    let mut pg: DiGraph<(), ()> = DiGraph::with_capacity(g.len(), 0);
    let nodes: Vec<_> = (0..g.len()).map(|_| pg.add_node(())).collect();
    for u in 0..g.len() {
        for &v in g.out_edges(u) {
            pg.add_edge(nodes[u], nodes[v], ());
        }
    }
    let mut comp_of = vec![0usize; g.len()];
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&pg)
        .into_iter()
        .map(|c| {
            let mut vs: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            vs.sort_unstable();
            vs
        })
        .collect();
    comps.sort_unstable_by_key(|c| c[0]);
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    comps
        .into_iter()
        .enumerate()
        .map(|(i, vertices)| {
            let leaves = vertices
                .iter()
                .any(|&u| g.out_edges(u).iter().any(|&w| comp_of[w] != i));
            let status = if leaves {
                ComponentStatus::Open
            } else if vertices.iter().any(|&u| g.is_truncated(u)) {
                ComponentStatus::Indeterminate
            } else {
                ComponentStatus::Closed
            };
            SccComponent { vertices, status }
        })
        .collect()
}

/// Components as JSON.
pub fn sccs_to_json(comps: &[SccComponent]) -> String {
    serde_json::to_string_pretty(comps).expect("plain data")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::cayley::{cayley_ball, ResetSemigroup};

    fn closed(g: &Digraph) -> Vec<Vec<usize>> {
        finite_sccs(g)
            .into_iter()
            .filter(|c| c.status == ComponentStatus::Closed)
            .map(|c| c.vertices)
            .collect()
    }

    #[test]
    fn two_cycle_is_closed() {
        let g = Digraph::load_edge_list("0 1\n1 0").unwrap();
        assert_eq!(closed(&g), vec![vec![0, 1]]);
    }

    #[test]
    fn truncated_path_has_only_an_indeterminate_end() {
        let out = vec![vec![1], vec![2], vec![3], vec![]];
        let g = Digraph::new(out, vec![], vec![false, false, false, true]).unwrap();
        let comps = finite_sccs(&g);
        assert_eq!(comps.len(), 4);
        assert!(comps[..3].iter().all(|c| c.status == ComponentStatus::Open));
        assert_eq!(comps[3].status, ComponentStatus::Indeterminate);
        // the same path loaded as a complete graph ends in a dead end
        let h = Digraph::load_edge_list("0 1\n1 2\n2 3").unwrap();
        assert_eq!(closed(&h), vec![vec![3]]);
    }

    #[test]
    fn reset_ball_has_no_trap() {
        let g = cayley_ball(&ResetSemigroup, 24).unwrap();
        assert!(closed(&g).is_empty());
        // y has a loop but escapes through x
        let y = (0..g.len()).find(|&v| g.label(v) == "y").unwrap();
        let c = finite_sccs(&g).into_iter().find(|c| c.vertices.contains(&y)).unwrap();
        assert_eq!(c.status, ComponentStatus::Open);
    }

    #[test]
    fn tail_into_cycle() {
        let g = Digraph::load_edge_list("0 1\n1 2\n2 3\n3 4\n4 2\n1 5\n5 5").unwrap();
        assert_eq!(closed(&g), vec![vec![2, 3, 4], vec![5]]);
        let json = sccs_to_json(&finite_sccs(&g));
        assert!(json.contains("\"closed\""));
    }
}
