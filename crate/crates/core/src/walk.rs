//! Simple random walks `R_n = X_1 ... X_n` with `X_i` uniform on `{x, y}`,
//! tracked through their normal forms.
//!
//! Trial `i` of a run draws its letters from `CoinFlips::new(mix64(seed, i))`;
//! a `true` flip is `y`. Per-trial results are collected in trial order and
//! summed as integers, so a curve is bit-identical for a given seed no
//! matter how rayon schedules the trials.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::normal_form::{BlockStats, FreeWord, Letter, ReducedWord, Variant};
use crate::partition::MSequence;
use crate::rng::{mix64, CoinFlips};

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
}

impl Summary {
    /// From exact integer sums `sum x` and `sum x^2` over `trials` samples,
    /// using the unbiased sample variance; a single trial has stderr 0.
    pub fn from_sums(sum: u128, sum_sq: u128, trials: u64) -> Summary {
        let t = trials as u128;
        if t == 0 {
            return Summary { mean: 0.0, stderr: 0.0 };
        }
        let mean = sum as f64 / t as f64;
        if t == 1 {
            return Summary { mean, stderr: 0.0 };
        }
        // t * sum_sq - sum^2 >= 0 by Cauchy-Schwarz, exact in integers
        let centered = (t * sum_sq - sum * sum) as f64;
        let var = centered / (t as f64 * (t - 1) as f64);
        Summary {
            mean,
            stderr: (var / t as f64).sqrt(),
        }
    }

    /// Summary of a list of real samples.
    pub fn of_samples(xs: &[f64]) -> Summary {
        let t = xs.len();
        if t == 0 {
            return Summary { mean: 0.0, stderr: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / t as f64;
        if t == 1 {
            return Summary { mean, stderr: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1) as f64;
        Summary {
            mean,
            stderr: (var / t as f64).sqrt(),
        }
    }
}

/// Integer accumulator behind [`Summary`].
#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    sum: u128,
    sum_sq: u128,
}

impl Accum {
    fn add(&mut self, x: u64) {
        let x = x as u128;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn summary(self, trials: u64) -> Summary {
        Summary::from_sums(self.sum, self.sum_sq, trials)
    }
}

#[derive(Debug, Clone)]
pub struct WalkConfig {
    pub seq: MSequence,
    pub variant: Variant,
    pub n_grid: Vec<u64>,
    pub trials: u64,
    pub master_seed: u64,
}

impl WalkConfig {
    pub fn new(seq: MSequence, variant: Variant, n_grid: Vec<u64>, trials: u64, master_seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("n_grid must be strictly increasing".into()));
        }
        Ok(WalkConfig {
            seq,
            variant,
            n_grid,
            trials,
            master_seed,
        })
    }

    pub fn n_max(&self) -> u64 {
        self.n_grid.last().copied().unwrap_or(0)
    }

    /// One-line description of everything that determines the output.
    pub fn fingerprint(&self) -> String {
        let grid: Vec<String> = self.n_grid.iter().map(u64::to_string).collect();
        format!(
            "seq={} variant={} trials={} seed={} grid={}",
            self.seq.spec(),
            self.variant,
            self.trials,
            self.master_seed,
            grid.join(",")
        )
    }
}

/// A walk in progress.
#[derive(Debug, Clone)]
pub struct Walker {
    pub state: ReducedWord,
    coins: CoinFlips,
}

impl Walker {
    pub fn new(variant: Variant, seed: u64) -> Self {
        Walker {
            state: ReducedWord::identity(variant),
            coins: CoinFlips::new(seed),
        }
    }

    /// Take one step; returns the letter and the change in length.
    #[inline]
    pub fn step(&mut self, seq: &MSequence) -> Result<(Letter, i64)> {
        let letter = if self.coins.flip() { Letter::Y } else { Letter::X };
        let d = self.state.push(letter, seq)?;
        Ok((letter, d))
    }

    /// Take `count` steps.
    pub fn advance(&mut self, count: u64, seq: &MSequence) -> Result<()> {
        for _ in 0..count {
            self.step(seq)?;
        }
        Ok(())
    }
}

/// Lengths `|R_0|, ..., |R_{n_max}|` of one seeded walk.
pub fn simulate_walk(n_max: u64, seq: &MSequence, variant: Variant, seed: u64) -> Result<Vec<u64>> {
    let mut w = Walker::new(variant, seed);
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(0);
    for _ in 0..n_max {
        w.step(seq)?;
        out.push(w.state.length());
    }
    Ok(out)
}

/// [`simulate_walk`] that also returns the letters drawn, for cross-checks
/// against the reference normalizer on short walks.
pub fn simulate_walk_with_word(
    n_max: u64,
    seq: &MSequence,
    variant: Variant,
    seed: u64,
) -> Result<(Vec<u64>, FreeWord)> {
    if n_max > 10_000 {
        return Err(Error::TooLarge(format!("keeping the letters of a {n_max}-step walk")));
    }
    let mut w = Walker::new(variant, seed);
    let mut lengths = vec![0];
    let mut word = Vec::with_capacity(n_max as usize);
    for _ in 0..n_max {
        let (l, _) = w.step(seq)?;
        word.push(l);
        lengths.push(w.state.length());
    }
    Ok((lengths, FreeWord(word)))
}

/// Normal-form block statistics of `R_n`.
pub fn walk_block_stats(n: u64, seq: &MSequence, variant: Variant, seed: u64) -> Result<BlockStats> {
    let mut w = Walker::new(variant, seed);
    w.advance(n, seq)?;
    w.state.block_stats(seq)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedPoint {
    pub n: u64,
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Estimated `E|R_n|` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedCurve {
    pub config: String,
    pub points: Vec<SpeedPoint>,
}

impl SpeedCurve {
    pub fn at(&self, n: u64) -> Option<&SpeedPoint> {
        self.points.iter().find(|p| p.n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# {}\nn,mean,stderr,trials\n", self.config);
        for p in &self.points {
            s.push_str(&format!("{},{},{},{}\n", p.n, p.mean, p.stderr, p.trials));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMoments {
    /// `N_k`, the number of blocks of class `k`.
    pub count: Summary,
    /// `|pi_k|`, their total length.
    pub length: Summary,
}

/// Block statistics of `R_n` averaged over trials. Classes that never
/// occur are absent; their moments are zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockMoments {
    pub n: u64,
    pub n0: Summary,
    pub n_inf: Summary,
    pub per_class: BTreeMap<u64, ClassMoments>,
}

#[derive(Debug, Clone, Default)]
struct BlockAccum {
    n0: Accum,
    n_inf: Accum,
    per_class: BTreeMap<u64, (Accum, Accum)>,
}

impl BlockAccum {
    fn add(&mut self, b: &BlockStats) {
        self.n0.add(b.n0);
        self.n_inf.add(b.n_inf);
        for (&k, c) in &b.per_class {
            let e = self.per_class.entry(k).or_default();
            e.0.add(c.count);
            e.1.add(c.length);
        }
    }

    fn moments(&self, n: u64, trials: u64) -> BlockMoments {
        BlockMoments {
            n,
            n0: self.n0.summary(trials),
            n_inf: self.n_inf.summary(trials),
            per_class: self
                .per_class
                .iter()
                .map(|(&k, (c, l))| {
                    (
                        k,
                        ClassMoments {
                            count: c.summary(trials),
                            length: l.summary(trials),
                        },
                    )
                })
                .collect(),
        }
    }
}

/// Walk one trial to the end of the grid, recording the length (and the
/// block statistics if asked) at every grid point.
fn run_trial(cfg: &WalkConfig, trial: u64, with_blocks: bool) -> Result<TrialPoints> {
    let mut w = Walker::new(cfg.variant, mix64(cfg.master_seed, trial));
    let mut out = Vec::with_capacity(cfg.n_grid.len());
    let mut at = 0;
    for &n in &cfg.n_grid {
        w.advance(n - at, &cfg.seq)?;
        at = n;
        let blocks = if with_blocks {
            Some(w.state.block_stats(&cfg.seq)?)
        } else {
            None
        };
        out.push((w.state.length(), blocks));
    }
    Ok(out)
}

/// Length and optional block statistics at each grid point of one trial.
type TrialPoints = Vec<(u64, Option<BlockStats>)>;

fn run_all(cfg: &WalkConfig, with_blocks: bool) -> Result<(SpeedCurve, Vec<BlockMoments>)> {
    let per_trial: Vec<Result<TrialPoints>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, i, with_blocks))
        .collect();
    let g = cfg.n_grid.len();
    let mut lengths = vec![Accum::default(); g];
    let mut blocks = vec![BlockAccum::default(); g];
    for trial in per_trial {
        for (idx, (len, b)) in trial?.into_iter().enumerate() {
            lengths[idx].add(len);
            if let Some(b) = b {
                blocks[idx].add(&b);
            }
        }
    }
    let points = cfg
        .n_grid
        .iter()
        .zip(&lengths)
        .map(|(&n, a)| {
            let s = a.summary(cfg.trials);
            SpeedPoint {
                n,
                mean: s.mean,
                stderr: s.stderr,
                trials: cfg.trials,
            }
        })
        .collect();
    let moments = if with_blocks {
        cfg.n_grid
            .iter()
            .zip(&blocks)
            .map(|(&n, b)| b.moments(n, cfg.trials))
            .collect()
    } else {
        Vec::new()
    };
    Ok((
        SpeedCurve {
            config: cfg.fingerprint(),
            points,
        },
        moments,
    ))
}

/// Monte Carlo estimate of `E|R_n|` at every grid point.
pub fn estimate_speed(cfg: &WalkConfig) -> Result<SpeedCurve> {
    run_all(cfg, false).map(|(c, _)| c)
}

/// [`estimate_speed`] plus averaged block statistics from the same walks.
pub fn estimate_speed_with_blocks(cfg: &WalkConfig) -> Result<(SpeedCurve, Vec<BlockMoments>)> {
    run_all(cfg, true)
}

/// Largest `log(mean) / log(n)` over the given grid points, a finite-sample
/// stand-in for `limsup log_n E|R_n|`.
pub fn estimate_exponent(curve: &SpeedCurve, n_subset: &[u64]) -> Result<f64> {
    if n_subset.is_empty() {
        return Err(Error::InvalidParameter("empty subset".into()));
    }
    let mut best = f64::NEG_INFINITY;
    for &n in n_subset {
        let p = curve
            .at(n)
            .ok_or_else(|| Error::InvalidParameter(format!("n = {n} is not on the curve")))?;
        if n < 2 || p.mean <= 0.0 {
            return Err(Error::InvalidParameter(format!("log_n mean undefined at n = {n}")));
        }
        best = best.max(p.mean.ln() / (n as f64).ln());
    }
    Ok(best)
}

/// Peak points `n = 2^{m_t}` with `2 <= n <= n_max`.
pub fn peak_points(seq: &MSequence, n_max: u64) -> Vec<u64> {
    if n_max < 2 {
        return Vec::new();
    }
    let (terms, _) = seq.prefix_through(u64::from(n_max.ilog2()));
    terms.into_iter().map(|m| 1u64 << m).collect()
}

/// [`estimate_exponent`] over the peak points present in the curve.
pub fn estimate_exponent_at_peaks(curve: &SpeedCurve, seq: &MSequence) -> Result<f64> {
    let n_max = curve.points.last().map_or(0, |p| p.n);
    let peaks: Vec<u64> = peak_points(seq, n_max)
        .into_iter()
        .filter(|&n| curve.at(n).is_some())
        .collect();
    estimate_exponent(curve, &peaks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_form::normalize_reference;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn id() -> MSequence {
        MSequence::identity()
    }

    #[test]
    fn trivial_walks() {
        assert_eq!(simulate_walk(0, &id(), Variant::Strict, 1).unwrap(), vec![0]);
        for seed in 0..20 {
            assert_eq!(simulate_walk(1, &id(), Variant::Strict, seed).unwrap(), vec![0, 1]);
        }
        assert_eq!(
            walk_block_stats(0, &id(), Variant::Weak, 3).unwrap(),
            BlockStats::default()
        );
    }

    #[test]
    fn lengths_match_reference_normalizer() {
        for (seed, variant) in [(1, Variant::Strict), (2, Variant::Weak)] {
            let (lengths, word) = simulate_walk_with_word(1000, &id(), variant, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for n in (0..=1000).step_by(37) {
                let prefix = FreeWord(word.0[..n].to_vec());
                let r = normalize_reference(&prefix, &id(), variant, &mut rng).unwrap();
                assert_eq!(lengths[n], r.length(), "n = {n}");
            }
        }
        assert!(simulate_walk_with_word(10_001, &id(), Variant::Strict, 0).is_err());
    }

    #[test]
    fn step_deltas_lie_in_allowed_set() {
        let seq = MSequence::beta(0.5).unwrap();
        let mut w = Walker::new(Variant::Strict, 11);
        for _ in 0..100_000 {
            let jt = w.state.jt;
            let (letter, d) = w.step(&seq).unwrap();
            match letter {
                Letter::Y => assert_eq!(d, 1),
                Letter::X => assert!(d == 0 || d == 1 || d == -(jt as i64)),
            }
        }
    }

    #[test]
    fn single_trial_has_zero_stderr() {
        let cfg = WalkConfig::new(id(), Variant::Strict, vec![1, 10, 100], 1, 5).unwrap();
        let c = estimate_speed(&cfg).unwrap();
        assert!(c.points.iter().all(|p| p.stderr == 0.0 && p.trials == 1));
        assert_eq!(c.points[0].mean, 1.0);
    }

    #[test]
    fn invalid_configs() {
        assert!(WalkConfig::new(id(), Variant::Strict, vec![4, 4], 10, 0).is_err());
        assert!(WalkConfig::new(id(), Variant::Strict, vec![4], 0, 0).is_err());
    }

    #[test]
    fn curve_is_deterministic_and_bounded() {
        let cfg = WalkConfig::new(id(), Variant::Strict, vec![0, 1, 16, 256], 300, 99).unwrap();
        let a = estimate_speed(&cfg).unwrap();
        let b = estimate_speed(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        for p in &a.points {
            assert!(p.mean >= 0.0 && p.mean <= p.n as f64);
            assert!(p.stderr >= 0.0);
        }
        assert_eq!(a.points[0].mean, 0.0);
        assert_eq!(a.points[1].mean, 1.0);
        assert!(a
            .to_csv()
            .starts_with("# seq=identity variant=strict trials=300 seed=99 grid=0,1,16,256\nn,mean,stderr,trials\n"));
    }

    #[test]
    fn curve_matches_trajectories() {
        // the curve at n must be the plain average of independent trajectories
        let cfg = WalkConfig::new(id(), Variant::Weak, vec![5, 50], 40, 7).unwrap();
        let c = estimate_speed(&cfg).unwrap();
        let mut sum5 = 0u64;
        let mut sum50 = 0u64;
        for i in 0..40 {
            let traj = simulate_walk(50, &id(), Variant::Weak, mix64(7, i)).unwrap();
            sum5 += traj[5];
            sum50 += traj[50];
        }
        assert_eq!(c.points[0].mean, sum5 as f64 / 40.0);
        assert_eq!(c.points[1].mean, sum50 as f64 / 40.0);
    }

    #[test]
    fn summary_matches_two_pass_formula() {
        let xs = [3u64, 7, 7, 1, 0, 12];
        let mut a = Accum::default();
        xs.iter().for_each(|&x| a.add(x));
        let s = a.summary(xs.len() as u64);
        let f: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
        let t = Summary::of_samples(&f);
        assert!((s.mean - t.mean).abs() < 1e-12);
        assert!((s.stderr - t.stderr).abs() < 1e-12);
    }

    #[test]
    fn block_moments_sum_to_mean_length() {
        let cfg = WalkConfig::new(id(), Variant::Strict, vec![64, 1024], 200, 3).unwrap();
        let (curve, moments) = estimate_speed_with_blocks(&cfg).unwrap();
        for (p, m) in curve.points.iter().zip(&moments) {
            // E|R_n| = E n0 + E n_inf + P(has x) + sum_k E|pi_k|; P(has x) <= 1
            let partial = m.n0.mean + m.n_inf.mean + m.per_class.values().map(|c| c.length.mean).sum::<f64>();
            assert!(p.mean >= partial - 1e-9 && p.mean <= partial + 1.0 + 1e-9);
        }
    }

    #[test]
    fn exponent_examples() {
        let curve = |f: fn(f64) -> f64| SpeedCurve {
            config: String::new(),
            points: [4u64, 16, 256]
                .iter()
                .map(|&n| SpeedPoint {
                    n,
                    mean: f(n as f64),
                    stderr: 0.0,
                    trials: 1,
                })
                .collect(),
        };
        let sqrt = curve(f64::sqrt);
        assert!((estimate_exponent(&sqrt, &[4, 16, 256]).unwrap() - 0.5).abs() < 1e-12);
        let lin = curve(|n| n);
        assert!((estimate_exponent(&lin, &[16]).unwrap() - 1.0).abs() < 1e-12);
        assert!(estimate_exponent(&lin, &[]).is_err());
        assert!(estimate_exponent(&lin, &[8]).is_err());
        assert_eq!(
            peak_points(&MSequence::beta(0.5).unwrap(), 1 << 15),
            vec![2, 8, 128, 1 << 15]
        );
        assert_eq!(peak_points(&id(), 20), vec![2, 4, 8, 16]);
    }
}
