//! Simple walks on rooted digraphs and the threshold-crossing count
//!
//! ```text
//! dist(o, R_t) >= F(floor(log_d t + log_d log_d t))
//! ```
//!
//! Out-degrees are padded to exactly `d` with self-loops, so every step
//! picks one of `d` options uniformly and the missing ones stay put.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{stream, CoinFlips};

use super::cayley::CayleySemigroup;
use super::scc::{finite_sccs, ComponentStatus};
use super::spread::spread_table;
use super::Digraph;

/// Uniform choice among `d` out-edge slots.
enum Picker {
    Coin(CoinFlips),
    General(ChaCha8Rng, usize),
}

impl Picker {
    fn new(d: usize, seed: u64) -> Self {
        if d == 2 {
            Picker::Coin(CoinFlips::new(seed))
        } else {
            Picker::General(stream(seed), d)
        }
    }

    #[inline]
    fn pick(&mut self) -> usize {
        match self {
            Picker::Coin(c) => usize::from(c.flip()),
            Picker::General(r, d) => r.gen_range(0..*d),
        }
    }
}

fn check_degree(d: usize, max_degree: usize) -> Result<()> {
    if d < 2 || d < max_degree {
        return Err(Error::InvalidParameter(format!(
            "padding degree {d} must be >= 2 and >= the largest out-degree {max_degree}"
        )));
    }
    Ok(())
}

/// Walk `steps` steps from the root of `g`, calling `visit(t, dist(o, R_t))`
/// for `t = 1..=steps`. Fails if the walk reaches a truncated vertex
/// before the last step.
pub fn digraph_walk(g: &Digraph, d: usize, steps: u64, seed: u64, mut visit: impl FnMut(u64, u64)) -> Result<()> {
    check_degree(d, g.d_max())?;
    let mut picker = Picker::new(d, seed);
    let mut v = g.root();
    for t in 1..=steps {
        if g.is_truncated(v) {
            return Err(Error::WalkEscapedBall(v));
        }
        let r = picker.pick();
        if let Some(&w) = g.out_edges(v).get(r) {
            v = w;
        }
        visit(t, g.dist(v));
    }
    Ok(())
}

/// Walk on a semigroup directly (no ball needed), generator `i` chosen
/// when slot `i` is drawn; slots past the generators are loops.
pub fn cayley_walk<S: CayleySemigroup>(
    sg: &S,
    d: usize,
    steps: u64,
    seed: u64,
    mut visit: impl FnMut(u64, u64),
) -> Result<()> {
    check_degree(d, sg.generator_count())?;
    let mut picker = Picker::new(d, seed);
    let mut e = sg.identity();
    for t in 1..=steps {
        let r = picker.pick();
        if r < sg.generator_count() {
            e = sg.mul_generator(&e, r)?;
        }
        visit(t, sg.word_length(&e));
    }
    Ok(())
}

/// `floor(log_d t + log_d log_d t)` for `t >= d`, `None` below.
pub fn crossing_threshold(t: u64, d: usize) -> Option<u64> {
    if (t as f64) < d as f64 || d < 2 {
        return None;
    }
    let log = |x: f64| if d == 2 { x.log2() } else { x.ln() / (d as f64).ln() };
    let lt = log(t as f64);
    // the epsilon keeps exact powers such as t = d^(d^k) from rounding down
    Some((lt + log(lt) + 1e-9).floor().max(0.0) as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossingCount {
    pub seed: u64,
    /// Number of `t` in `[d, steps]` with `dist(o, R_t) >= F(threshold(t))`.
    pub crossings: u64,
    pub first_crossing: Option<u64>,
    pub last_crossing: Option<u64>,
    pub max_dist: u64,
}

fn count_crossings(
    d: usize,
    seed: u64,
    f_hat: &[u64],
    walk: impl FnOnce(&mut dyn FnMut(u64, u64)) -> Result<()>,
) -> Result<CrossingCount> {
    let mut rec = CrossingCount {
        seed,
        crossings: 0,
        first_crossing: None,
        last_crossing: None,
        max_dist: 0,
    };
    let mut missing = None;
    walk(&mut |t, dist| {
        rec.max_dist = rec.max_dist.max(dist);
        let Some(a) = crossing_threshold(t, d) else { return };
        match f_hat.get(a as usize) {
            Some(&f) if dist >= f => {
                rec.crossings += 1;
                rec.first_crossing.get_or_insert(t);
                rec.last_crossing = Some(t);
            }
            Some(_) => {}
            None => {
                missing.get_or_insert(a);
            }
        }
    })?;
    if let Some(a) = missing {
        return Err(Error::InvalidParameter(format!("F is not tabulated at {a}")));
    }
    Ok(rec)
}

/// Sound `F(0..=n_max)` of a (possibly truncated) graph.
pub fn spread_values(g: &Digraph, n_max: u64) -> Result<Vec<u64>> {
    spread_table(g, n_max)
        .into_iter()
        .map(|r| {
            r.value.ok_or(Error::TruncationUnsound {
                vertex: g.root(),
                radius: r.n,
            })
        })
        .collect()
}

fn refuse_traps(g: &Digraph) -> Result<()> {
    match finite_sccs(g).into_iter().find(|c| c.status == ComponentStatus::Closed) {
        Some(c) => Err(Error::FiniteTrapDetected(c.vertices[0])),
        None => Ok(()),
    }
}

/// Per-seed crossing counts for walks on `g` itself.
pub fn crossing_counts(g: &Digraph, d: usize, steps: u64, seeds: &[u64], f_hat: &[u64]) -> Result<Vec<CrossingCount>> {
    refuse_traps(g)?;
    seeds
        .par_iter()
        .map(|&seed| count_crossings(d, seed, f_hat, |visit| digraph_walk(g, d, steps, seed, visit)))
        .collect()
}

/// Per-seed crossing counts for walks on a semigroup, with `F` taken from
/// one of its balls (`ball` must have no closed component).
pub fn crossing_counts_cayley<S: CayleySemigroup + Sync>(
    sg: &S,
    ball: &Digraph,
    d: usize,
    steps: u64,
    seeds: &[u64],
    f_hat: &[u64],
) -> Result<Vec<CrossingCount>> {
    refuse_traps(ball)?;
    seeds
        .par_iter()
        .map(|&seed| count_crossings(d, seed, f_hat, |visit| cayley_walk(sg, d, steps, seed, visit)))
        .collect()
}
