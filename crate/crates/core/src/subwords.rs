//! Prefix-dependent pattern occurrence.
//!
//! For an i.i.d. uniform word `X_1 ... X_n` over `d` letters and a rule `g`
//! that maps every prefix to a target word of length `k`, the event is
//!
//! ```text
//! exists 1 <= j <= n - k :  X_{j+1} ... X_{j+k} = g(X_1 ... X_j)
//! ```
//!
//! and for `k <= n/2` its probability is at least `1 / (4 (d^k / n + 1))`
//! for every `g`. Here `g` ranges over a sampled family of rules.

use std::fmt;
use std::fmt::Write as _;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{mix64, stream};

/// Largest word space enumerated exactly.
pub const MAX_ENUMERATION: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubwordStrategy {
    /// The same target after every prefix.
    Constant(Vec<u8>),
    /// Target chosen by the last letter of the prefix (`table[c]`).
    LastLetterMap(Vec<Vec<u8>>),
    /// Target derived from a hash of the whole prefix.
    Pseudorandom { seed: u64, k: usize },
}

impl SubwordStrategy {
    pub fn k(&self) -> usize {
        match self {
            SubwordStrategy::Constant(w) => w.len(),
            SubwordStrategy::LastLetterMap(t) => t.first().map_or(0, Vec::len),
            SubwordStrategy::Pseudorandom { k, .. } => *k,
        }
    }

    /// Check that every target has length `k` over a `d`-letter alphabet.
    pub fn validate(&self, d: usize, k: usize) -> Result<()> {
        let ok_word = |w: &Vec<u8>| w.len() == k && w.iter().all(|&c| (c as usize) < d);
        let ok = match self {
            SubwordStrategy::Constant(w) => ok_word(w),
            SubwordStrategy::LastLetterMap(t) => t.len() == d && t.iter().all(ok_word),
            SubwordStrategy::Pseudorandom { k: kk, .. } => *kk == k,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "strategy {self} does not emit length-{k} words over {d} letters"
            )))
        }
    }

    /// `g(prefix)`, written into `out`. `prefix` is never empty.
    pub fn target_into(&self, prefix: &[u8], d: usize, out: &mut Vec<u8>) {
        out.clear();
        match self {
            SubwordStrategy::Constant(w) => out.extend_from_slice(w),
            SubwordStrategy::LastLetterMap(t) => {
                let last = *prefix.last().expect("prefixes have length >= 1");
                out.extend_from_slice(&t[last as usize]);
            }
            SubwordStrategy::Pseudorandom { seed, k } => {
                let mut h = mix64(*seed, prefix.len() as u64);
                for &c in prefix {
                    h = mix64(h, c as u64);
                }
                out.extend((0..*k as u64).map(|i| (mix64(h, i) % d as u64) as u8));
            }
        }
    }
}

fn word_string(w: &[u8]) -> String {
    w.iter().map(|&c| letter_char(c)).collect()
}

/// Letters print as `x, y` for the first two, then `a, b, ...`.
fn letter_char(c: u8) -> char {
    match c {
        0 => 'x',
        1 => 'y',
        _ => (b'a' + c - 2) as char,
    }
}

impl fmt::Display for SubwordStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubwordStrategy::Constant(w) => write!(f, "const:{}", word_string(w)),
            SubwordStrategy::LastLetterMap(t) => {
                let parts: Vec<String> = t.iter().map(|w| word_string(w)).collect();
                write!(f, "last:{}", parts.join("/"))
            }
            SubwordStrategy::Pseudorandom { seed, .. } => write!(f, "hash:{seed}"),
        }
    }
}

/// Parse a word such as `xy` in the display alphabet.
pub fn parse_word(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|ch| match ch {
            'x' => Ok(0),
            'y' => Ok(1),
            'a'..='x' => Ok(ch as u8 - b'a' + 2),
            _ => Err(Error::InvalidParameter(format!("bad letter {ch:?}"))),
        })
        .collect()
}

/// `1 / (4 (d^k / n + 1))`, defined for `d >= 2` and `1 <= k <= n/2`.
pub fn subword_bound(d: usize, k: usize, n: usize) -> Result<f64> {
    if d < 2 || k == 0 || 2 * k > n {
        return Err(Error::InvalidParameter(format!(
            "need d >= 2 and 1 <= k <= n/2 (d={d}, k={k}, n={n})"
        )));
    }
    let dk = (d as f64).powi(k as i32);
    Ok(1.0 / (4.0 * (dk / n as f64 + 1.0)))
}

/// Exact probability as `hits / d^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HitProbability {
    pub hits: u64,
    pub total: u64,
}

impl HitProbability {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.hits, self.total)
    }

    pub fn value(&self) -> f64 {
        self.hits as f64 / self.total as f64
    }
}

fn word_space(d: usize, n: usize) -> Option<u64> {
    (d as u64).checked_pow(n as u32).filter(|&t| t <= MAX_ENUMERATION)
}

/// Enumerate all `d^n` words. Words are generated depth-first; once a
/// prefix contains a hit, all its completions are counted at once.
pub fn exact_hit_probability(d: usize, n: usize, k: usize, g: &SubwordStrategy) -> Result<HitProbability> {
    if d < 2 || k == 0 {
        return Err(Error::InvalidParameter("need d >= 2 and k >= 1".into()));
    }
    g.validate(d, k)?;
    let total = word_space(d, n).ok_or_else(|| Error::TooLarge(format!("{d}^{n} words")))?;
    let mut ctx = Enumeration {
        d,
        n,
        k,
        g,
        word: Vec::with_capacity(n),
        targets: vec![Vec::new(); n + 1],
        hits: 0,
    };
    ctx.descend();
    Ok(HitProbability { hits: ctx.hits, total })
}

struct Enumeration<'a> {
    d: usize,
    n: usize,
    k: usize,
    g: &'a SubwordStrategy,
    word: Vec<u8>,
    /// `targets[j] = g(word[..j])`, valid for `1 <= j <= len`.
    targets: Vec<Vec<u8>>,
    hits: u64,
}

impl Enumeration<'_> {
    fn descend(&mut self) {
        let len = self.word.len();
        // the window ending here starts after the prefix of length len - k
        if len > self.k {
            let j = len - self.k;
            if j <= self.n - self.k && self.word[j..] == self.targets[j][..] {
                self.hits += (self.d as u64).pow((self.n - len) as u32);
                return;
            }
        }
        if len == self.n {
            return;
        }
        for c in 0..self.d as u8 {
            self.word.push(c);
            let l = self.word.len();
            if l <= self.n - self.k {
                let mut t = std::mem::take(&mut self.targets[l]);
                self.g.target_into(&self.word, self.d, &mut t);
                self.targets[l] = t;
            }
            self.descend();
            self.word.pop();
        }
    }
}

/// Whether `word` contains a hit (direct definition, used by the sampler).
pub fn has_hit(word: &[u8], d: usize, k: usize, g: &SubwordStrategy) -> bool {
    let n = word.len();
    let mut target = Vec::with_capacity(k);
    (1..=n.saturating_sub(k)).any(|j| {
        g.target_into(&word[..j], d, &mut target);
        word[j..j + k] == target[..]
    })
}

/// Monte Carlo estimate with binomial standard error
/// `sqrt(p (1 - p) / trials)`, from one seeded stream.
pub fn mc_hit_probability(
    d: usize,
    n: usize,
    k: usize,
    g: &SubwordStrategy,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    g.validate(d, k)?;
    let mut rng = stream(seed);
    let mut word = vec![0u8; n];
    let mut hits = 0u64;
    for _ in 0..trials {
        for c in word.iter_mut() {
            *c = rng.gen_range(0..d as u8);
        }
        hits += u64::from(has_hit(&word, d, k, g));
    }
    let p = hits as f64 / trials as f64;
    Ok((p, (p * (1.0 - p) / trials as f64).sqrt()))
}

/// All `d^k` constant strategies.
pub fn constant_strategies(d: usize, k: usize) -> Vec<SubwordStrategy> {
    let count = (d as u64).pow(k as u32);
    (0..count)
        .map(|mut i| {
            let mut w = vec![0u8; k];
            for c in w.iter_mut().rev() {
                *c = (i % d as u64) as u8;
                i /= d as u64;
            }
            SubwordStrategy::Constant(w)
        })
        .collect()
}

/// `count` random last-letter tables.
pub fn sampled_last_letter_maps(d: usize, k: usize, count: usize, seed: u64) -> Vec<SubwordStrategy> {
    let mut rng = stream(seed);
    (0..count)
        .map(|_| {
            SubwordStrategy::LastLetterMap(
                (0..d)
                    .map(|_| (0..k).map(|_| rng.gen_range(0..d as u8)).collect())
                    .collect(),
            )
        })
        .collect()
}

/// `count` hash strategies with seeds derived from `seed`.
pub fn sampled_pseudorandom(k: usize, count: usize, seed: u64) -> Vec<SubwordStrategy> {
    (0..count as u64)
        .map(|i| SubwordStrategy::Pseudorandom {
            seed: mix64(seed, i),
            k,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubwordRow {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub strategy: String,
    pub exact: f64,
    pub mc: f64,
    pub stderr: f64,
    pub bound: f64,
    /// `exact >= bound` and `|mc - exact| <= 4 stderr`.
    pub pass: bool,
}

/// Evaluate each strategy exactly and by sampling. Strategy `i` uses
/// Monte Carlo seed `mix64(seed, i)`.
pub fn subword_sweep(
    d: usize,
    n: usize,
    k: usize,
    strategies: &[SubwordStrategy],
    trials: u64,
    seed: u64,
) -> Result<Vec<SubwordRow>> {
    let bound = subword_bound(d, k, n)?;
    strategies
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let exact = exact_hit_probability(d, n, k, g)?.value();
            let (mc, stderr) = mc_hit_probability(d, n, k, g, trials, mix64(seed, i as u64))?;
            Ok(SubwordRow {
                d,
                n,
                k,
                strategy: g.to_string(),
                exact,
                mc,
                stderr,
                bound,
                pass: exact >= bound && (mc - exact).abs() <= 4.0 * stderr,
            })
        })
        .collect()
}

pub fn rows_to_csv(config: &str, rows: &[SubwordRow]) -> String {
    let mut s = format!("# {config}\nd,n,k,strategy,exact,mc,stderr,bound,pass\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.d, r.n, r.k, r.strategy, r.exact, r.mc, r.stderr, r.bound, r.pass
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn c(s: &str) -> SubwordStrategy {
        SubwordStrategy::Constant(parse_word(s).unwrap())
    }

    /// Count by generating every word and applying the definition.
    fn brute_force(d: usize, n: usize, k: usize, g: &SubwordStrategy) -> u64 {
        let total = (d as u64).pow(n as u32);
        (0..total)
            .filter(|&i| {
                let mut x = i;
                let word: Vec<u8> = (0..n)
                    .map(|_| {
                        let c = (x % d as u64) as u8;
                        x /= d as u64;
                        c
                    })
                    .collect();
                has_hit(&word, d, k, g)
            })
            .count() as u64
    }

    #[test]
    fn bound_examples() {
        assert!((subword_bound(2, 2, 8).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((subword_bound(2, 1, 2).unwrap() - 1.0 / 8.0).abs() < 1e-15);
        // d^k = n
        assert!((subword_bound(2, 3, 8).unwrap() - 1.0 / 8.0).abs() < 1e-15);
        assert!(subword_bound(2, 5, 8).is_err());
        assert!(subword_bound(1, 1, 8).is_err());
    }

    #[test]
    fn exact_examples() {
        let p = exact_hit_probability(2, 2, 1, &c("x")).unwrap();
        assert_eq!(p.ratio(), Ratio::new(1, 2));
        // no admissible window when n = k
        assert_eq!(exact_hit_probability(2, 2, 2, &c("xy")).unwrap().hits, 0);
        assert!(matches!(
            exact_hit_probability(2, 25, 2, &c("xy")),
            Err(Error::TooLarge(_))
        ));
        assert!(exact_hit_probability(2, 8, 2, &c("x")).is_err());
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let mut strategies = constant_strategies(2, 2);
        strategies.extend(sampled_last_letter_maps(2, 2, 5, 1));
        strategies.extend(sampled_pseudorandom(2, 5, 2));
        for g in &strategies {
            for n in 4..=10 {
                let e = exact_hit_probability(2, n, 2, g).unwrap();
                assert_eq!(e.hits, brute_force(2, n, 2, g), "{g} n={n}");
            }
        }
        for g in constant_strategies(3, 2).iter().chain(&sampled_pseudorandom(2, 3, 5)) {
            let e = exact_hit_probability(3, 6, 2, g).unwrap();
            assert_eq!(e.hits, brute_force(3, 6, 2, g));
        }
    }

    #[test]
    fn bound_holds_on_strategy_family() {
        for (n, k) in [(4, 1), (4, 2), (6, 2), (6, 3), (8, 2), (9, 3)] {
            let mut strategies = constant_strategies(2, k);
            strategies.extend(sampled_last_letter_maps(2, k, 20, n as u64));
            strategies.extend(sampled_pseudorandom(k, 20, n as u64));
            let bound = subword_bound(2, k, n).unwrap();
            for g in &strategies {
                assert!(
                    exact_hit_probability(2, n, k, g).unwrap().value() >= bound,
                    "{g} n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn constant_targets_monotone_in_n() {
        for g in constant_strategies(2, 2) {
            let mut prev = 0.0;
            for n in 3..=14 {
                let p = exact_hit_probability(2, n, 2, &g).unwrap().value();
                assert!(p >= prev, "{g}");
                prev = p;
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_with_enumeration() {
        let g = c("xy");
        let exact = exact_hit_probability(2, 8, 2, &g).unwrap().value();
        let (mc, se) = mc_hit_probability(2, 8, 2, &g, 100_000, 7).unwrap();
        assert!((mc - exact).abs() <= 4.0 * se, "{mc} vs {exact}");
        assert_eq!(
            mc_hit_probability(2, 8, 2, &g, 100, 3).unwrap(),
            mc_hit_probability(2, 8, 2, &g, 100, 3).unwrap()
        );
        let (one, _) = mc_hit_probability(2, 8, 2, &g, 1, 3).unwrap();
        assert!(one == 0.0 || one == 1.0);
    }

    #[test]
    fn strategies_emit_length_k() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut out = Vec::new();
        for g in sampled_pseudorandom(3, 5, 9)
            .iter()
            .chain(&sampled_last_letter_maps(2, 3, 5, 9))
        {
            for len in 1..10 {
                let prefix: Vec<u8> = (0..len).map(|_| rng.gen_range(0..2)).collect();
                g.target_into(&prefix, 2, &mut out);
                assert_eq!(out.len(), 3);
                assert!(out.iter().all(|&c| c < 2));
            }
        }
        assert_eq!(constant_strategies(2, 3).len(), 8);
        assert_eq!(c("xy").to_string(), "const:xy");
    }

    #[test]
    fn sweep_csv() {
        let rows = subword_sweep(2, 4, 1, &constant_strategies(2, 1), 2000, 1).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.pass));
        let csv = rows_to_csv("d=2 n=4 k=1", &rows);
        assert!(csv.starts_with("# d=2 n=4 k=1\nd,n,k,strategy,exact,mc,stderr,bound,pass\n2,4,1,const:x,0.875,"));
    }
}
