//! Rooted ball spread
//!
//! ```text
//! F(v, n) = max { dist(o, w) : w reachable from v in <= n steps }
//! F(n)    = min_v F(v, n)
//! ```

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

use super::scc::{finite_sccs, ComponentStatus};
use super::Digraph;

/// Reusable BFS state; `stamp` avoids clearing the visited array.
struct Bfs {
    seen: Vec<u32>,
    depth: Vec<u64>,
    stamp: u32,
    queue: VecDeque<usize>,
}

impl Bfs {
    fn new(len: usize) -> Self {
        Bfs {
            seen: vec![0; len],
            depth: vec![0; len],
            stamp: 0,
            queue: VecDeque::new(),
        }
    }

    /// Max `dist(o, w)` over the out-ball of radius `n` around `v`.
    fn spread(&mut self, g: &Digraph, v: usize, n: u64) -> u64 {
        self.stamp += 1;
        let s = self.stamp;
        self.seen[v] = s;
        self.depth[v] = 0;
        self.queue.clear();
        self.queue.push_back(v);
        let mut best = g.dist(v);
        while let Some(u) = self.queue.pop_front() {
            best = best.max(g.dist(u));
            if self.depth[u] == n {
                continue;
            }
            for &w in g.out_edges(u) {
                if self.seen[w] != s {
                    self.seen[w] = s;
                    self.depth[w] = self.depth[u] + 1;
                    self.queue.push_back(w);
                }
            }
        }
        best
    }
}

/// `F(v, n)`; fails if the ball around `v` reaches past a truncation.
pub fn ball_spread_at(g: &Digraph, v: usize, n: u64) -> Result<u64> {
    if v >= g.len() {
        return Err(Error::InvalidParameter(format!("no vertex {v}")));
    }
    if !g.ball_is_sound(v, n) {
        return Err(Error::TruncationUnsound { vertex: v, radius: n });
    }
    Ok(Bfs::new(g.len()).spread(g, v, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpreadResult {
    pub n: u64,
    /// Minimum over the vertices whose `n`-ball is fully materialized;
    /// `None` when there is no such vertex.
    pub value: Option<u64>,
    /// True when every vertex was sound, so `value` is `F(n)` itself.
    /// Otherwise it is only an upper bound for the true minimum.
    pub exact: bool,
}

fn spread_with(g: &Digraph, n: u64, bfs: &mut Bfs) -> SpreadResult {
    let mut value: Option<u64> = None;
    let mut exact = true;
    for v in 0..g.len() {
        if !g.ball_is_sound(v, n) {
            exact = false;
            continue;
        }
        // F(v, n) >= dist(o, v), so v cannot improve on a smaller minimum
        if value.is_some_and(|m| g.dist(v) >= m) {
            continue;
        }
        let f = bfs.spread(g, v, n);
        value = Some(value.map_or(f, |m| m.min(f)));
    }
    SpreadResult { n, value, exact }
}

/// `F(n)`, restricted to sound vertices on truncated graphs.
pub fn ball_spread(g: &Digraph, n: u64) -> SpreadResult {
    spread_with(g, n, &mut Bfs::new(g.len()))
}

/// `F(0), ..., F(n_max)`.
pub fn spread_table(g: &Digraph, n_max: u64) -> Vec<SpreadResult> {
    let mut bfs = Bfs::new(g.len());
    (0..=n_max).map(|n| spread_with(g, n, &mut bfs)).collect()
}

/// CSV `n,F,exact`; an empty `F` means no vertex was sound.
pub fn spread_table_csv(config: &str, rows: &[SpreadResult]) -> String {
    let mut s = format!("# {config}\nn,F,exact\n");
    for r in rows {
        let v = r.value.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{}", r.n, v, r.exact);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadGrowthReport {
    /// Inequalities evaluated.
    pub checked: usize,
    pub holds: bool,
    /// First failing inequality, if any.
    pub counterexample: Option<String>,
}

/// Check `F(|B(o, n-1)|) >= n` and `F(n) >= log_d n - 1` (with `d` the
/// largest out-degree) wherever the graph determines the left side.
///
/// On truncated graphs `F` is the minimum over sound vertices, so a pass
/// there certifies the inequality only for those vertices.
pub fn verify_spread_growth(g: &Digraph) -> Result<SpreadGrowthReport> {
    if let Some(c) = finite_sccs(g).into_iter().find(|c| c.status == ComponentStatus::Closed) {
        return Err(Error::FiniteTrapDetected(c.vertices[0]));
    }
    let mut report = SpreadGrowthReport {
        checked: 0,
        holds: true,
        counterexample: None,
    };
    let fail = |report: &mut SpreadGrowthReport, msg: String| {
        report.holds = false;
        report.counterexample.get_or_insert(msg);
    };
    let mut bfs = Bfs::new(g.len());
    for n in 1u64.. {
        let Some(size) = g.root_ball_size(n - 1) else { break };
        let r = spread_with(g, size as u64, &mut bfs);
        let Some(f) = r.value else { break };
        report.checked += 1;
        if f < n {
            fail(&mut report, format!("F(|B(o,{})|) = F({size}) = {f} < {n}", n - 1));
        }
    }
    let d = g.d_max().max(2) as f64;
    for n in 1u64.. {
        let r = spread_with(g, n, &mut bfs);
        let Some(f) = r.value else { break };
        report.checked += 1;
        let bound = (n as f64).ln() / d.ln() - 1.0;
        if (f as f64) < bound {
            fail(&mut report, format!("F({n}) = {f} < log_{d} {n} - 1 = {bound:.3}"));
        }
        if n > g.len() as u64 {
            // every sound ball is the whole reachable set from here on
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::cayley::{cayley_ball, FreeSemigroup, ResetSemigroup};

    fn truncated_path(len: usize) -> Digraph {
        let mut out: Vec<Vec<usize>> = (0..len).map(|v| vec![v + 1]).collect();
        out.push(Vec::new());
        let mut truncated = vec![false; len + 1];
        truncated[len] = true;
        Digraph::new(out, vec![], truncated).unwrap()
    }

    #[test]
    fn path_examples() {
        let g = truncated_path(20);
        assert_eq!(ball_spread_at(&g, 5, 3).unwrap(), 8);
        for v in 0..=20 {
            assert_eq!(ball_spread_at(&g, v, 0).unwrap(), g.dist(v));
        }
        assert!(matches!(
            ball_spread_at(&g, 18, 3),
            Err(Error::TruncationUnsound { vertex: 18, radius: 3 })
        ));
        let r = ball_spread(&g, 4);
        assert_eq!((r.value, r.exact), (Some(4), false));
    }

    #[test]
    fn reset_ball_spread_is_linear() {
        let g = cayley_ball(&ResetSemigroup, 24).unwrap();
        for v in 0..g.len() {
            for n in 0..=24 - g.dist(v) {
                assert_eq!(ball_spread_at(&g, v, n).unwrap(), g.dist(v) + n);
            }
        }
        for r in spread_table(&g, 12) {
            assert_eq!(r.value, Some(r.n));
        }
        let rep = verify_spread_growth(&g).unwrap();
        assert!(rep.holds && rep.checked > 20, "{rep:?}");
    }

    #[test]
    fn cycle_spread_is_bounded() {
        // tail 0 -> 1 -> 2 into the cycle 2 -> 3 -> 2
        let g = Digraph::load_edge_list("0 1\n1 2\n2 3\n3 2").unwrap();
        for r in spread_table(&g, 30) {
            assert!(r.exact);
            assert!(r.value.unwrap() <= 3);
        }
        assert_eq!(ball_spread(&g, 30).value, Some(3));
        assert!(matches!(verify_spread_growth(&g), Err(Error::FiniteTrapDetected(_))));
    }

    #[test]
    fn binary_tree_growth() {
        let g = cayley_ball(&FreeSemigroup { d: 2 }, 16).unwrap();
        for r in spread_table(&g, 16) {
            assert_eq!(r.value, Some(r.n));
        }
        assert_eq!(ball_spread(&g, 17).value, None);
        let rep = verify_spread_growth(&g).unwrap();
        assert!(rep.holds, "{rep:?}");
    }

    #[test]
    fn symmetrized_path_spreads_at_least_half() {
        let g = Digraph::load_edge_list(&(0..30).map(|i| format!("{i} {}\n", i + 1)).collect::<String>())
            .unwrap()
            .symmetrized()
            .unwrap();
        for r in spread_table(&g, 40) {
            assert!(r.value.unwrap() as f64 >= (r.n as f64 / 2.0).min(15.0));
        }
        // no dead ends in the symmetrized graph: F(n) = n while the path lasts
        for r in spread_table(&g, 30) {
            assert_eq!(r.value, Some(r.n.min(30)));
        }
    }

    #[test]
    fn root_and_distance_inequalities_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let n = rng.gen_range(2..30);
            // a spanning path from 0 keeps everything reachable
            let mut text: String = (0..n - 1).map(|i| format!("{i} {}\n", i + 1)).collect();
            for _ in 0..rng.gen_range(0..2 * n) {
                text.push_str(&format!("{} {}\n", rng.gen_range(0..n), rng.gen_range(0..n)));
            }
            let g = Digraph::load_edge_list(&text).unwrap();
            let table = spread_table(&g, 35);
            for w in table.windows(2) {
                assert!(w[0].value <= w[1].value);
            }
            for r in &table {
                let f = r.value.unwrap();
                let at_root = ball_spread_at(&g, 0, r.n).unwrap();
                assert!(f <= at_root && at_root <= r.n);
                for v in 0..g.len() {
                    assert!(ball_spread_at(&g, v, r.n).unwrap() >= g.dist(v));
                }
            }
        }
    }

    #[test]
    fn csv_layout() {
        let g = truncated_path(2);
        let rows = spread_table(&g, 3);
        assert_eq!(
            spread_table_csv("path", &rows),
            "# path\nn,F,exact\n0,0,true\n1,1,false\n2,2,false\n3,,false\n"
        );
    }
}
