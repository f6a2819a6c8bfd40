//! The recipe catalogue. Each recipe reads its parameters from the spec,
//! derives every random stream from the master seed with a fixed tag, and
//! records its criteria in a fixed order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::bounds::{envelopes_to_csv, gamma_lemma_bounds, peak_report, sandwich_bounds, weak_bounds, DEFAULT_C0};
use crate::digraph::{
    ball_spread_at, cayley_ball, cayley_walk, crossing_counts_cayley, spread_table, spread_table_csv, spread_values,
    verify_spread_growth, CayleySemigroup, Digraph, FreeSemigroup, ResetSemigroup,
};
use crate::error::{Error, Result};
use crate::normal_form::{check_confluence_sample, Variant};
use crate::partition::{MSequence, SequenceKind, Term};
use crate::rng::mix64;
use crate::subwords::{
    constant_strategies, rows_to_csv, sampled_last_letter_maps, sampled_pseudorandom, subword_sweep, SubwordRow,
};
use crate::walk::{estimate_speed, estimate_speed_with_blocks, BlockMoments, Summary, WalkConfig};

use super::{parse_count, ExperimentSpec, Report};

pub const RECIPES: &[&str] = &[
    "confluence",
    "sandwich",
    "log_squared",
    "peak_exponents",
    "slow_speed",
    "weak_speed",
    "spread",
    "escape",
    "bounded_speed",
    "patterns",
];

const EVEN_GRID: &str = "2^4,2^6,2^8,2^10,2^12,2^14";

/// Frozen defaults; these are the values the acceptance suite runs.
pub fn default_params(name: &str) -> Result<BTreeMap<String, String>> {
    let pairs: &[(&str, &str)] = match name {
        "confluence" => &[
            ("samples", "100000"),
            ("max_len", "40"),
            ("sequences", "identity;beta:1/2;explicit:1,3,4,9:tail=frozen"),
        ],
        "sandwich" => &[
            ("sequences", "identity;beta:1/2"),
            ("grid", EVEN_GRID),
            ("trials", "4000"),
            ("delta", "1"),
        ],
        "log_squared" => &[
            ("grid", "2^4,2^5,2^6,2^7,2^8,2^9,2^10,2^11,2^12,2^13,2^14"),
            ("trials", "4000"),
        ],
        "peak_exponents" => &[("alpha", "1/2"), ("trials", "2000")],
        "slow_speed" => &[
            ("omega", "log2"),
            ("trials", "100000"),
            ("trend_grid", "2^6,2^10,2^14"),
            ("trend_trials", "20000"),
        ],
        "weak_speed" => &[("grid", EVEN_GRID), ("trials", "4000")],
        "spread" => &[("radius", "24"), ("exact_through", "12"), ("tree_depth", "16")],
        "escape" => &[("steps", "1000000"), ("seeds", "10"), ("radius", "30")],
        "bounded_speed" => &[
            ("grid", "100,10000,1000000"),
            ("trials", "1000"),
            ("exact_max", "16"),
            ("mc_trials", "100000"),
        ],
        "patterns" => &[
            ("points", "8:2,10:2,12:3"),
            ("d", "2"),
            ("sampled", "50"),
            ("trials", "100000"),
        ],
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown recipe {name:?}; expected one of {}",
                RECIPES.join(", ")
            )))
        }
    };
    Ok(pairs.iter().map(|&(k, v)| (k.to_string(), v.to_string())).collect())
}

pub fn run_recipe(spec: &ExperimentSpec) -> Result<Report> {
    let mut report = Report::new(spec);
    match spec.name.as_str() {
        "confluence" => confluence(spec, &mut report)?,
        "sandwich" => sandwich(spec, &mut report)?,
        "log_squared" => log_squared(spec, &mut report)?,
        "peak_exponents" => peak_exponents(spec, &mut report)?,
        "slow_speed" => slow_speed(spec, &mut report)?,
        "weak_speed" => weak_speed(spec, &mut report)?,
        "spread" => spread(spec, &mut report)?,
        "escape" => escape(spec, &mut report)?,
        "bounded_speed" => bounded_speed(spec, &mut report)?,
        "patterns" => patterns(spec, &mut report)?,
        other => return Err(Error::InvalidParameter(format!("unknown recipe {other:?}"))),
    }
    Ok(report)
}

/// Counts checks and keeps the first few failures for the report.
#[derive(Default)]
struct Tally {
    checked: usize,
    failed: usize,
    examples: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.examples.len() < 3 {
                self.examples.push(what());
            }
        }
    }

    fn pass(&self) -> bool {
        self.failed == 0
    }

    fn detail(&self, what: &str) -> String {
        let mut s = format!("{} of {} {what} hold", self.checked - self.failed, self.checked);
        if !self.examples.is_empty() {
            let _ = write!(s, "; first failures: {}", self.examples.join(" | "));
        }
        s
    }
}

fn sequences(spec: &ExperimentSpec) -> Result<Vec<MSequence>> {
    let raw: String = spec.get("sequences")?;
    raw.split(';').map(|s| s.trim().parse()).collect()
}

/// File-name friendly form of a sequence spec.
fn tag(seq: &MSequence) -> String {
    seq.spec()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn confluence(spec: &ExperimentSpec, report: &mut Report) -> Result<()> {
    let samples: usize = spec.get("samples")?;
    let max_len: usize = spec.get("max_len")?;
    let mut agree = Tally::default();
    let mut lengths = Tally::default();
    let mut csv = format!(
        "# {}\nsequence,variant,samples,all_agree,length_mismatches\n",
        spec.fingerprint()
    );
    for (i, seq) in sequences(spec)?.iter().enumerate() {
        for (j, variant) in [Variant::Strict, Variant::Weak].into_iter().enumerate() {
            let seed = mix64(spec.master_seed, (2 * i + j) as u64);
            let r = check_confluence_sample(seq, variant, samples, max_len, seed)?;
            let _ = writeln!(
                csv,
                "{seq},{variant},{},{},{}",
                r.samples, r.all_agree, r.length_mismatches
            );
            agree.check(r.all_agree, || {
                let c = r.counterexample.as_ref().expect("disagreement has a witness");
                format!(
                    "{seq} {variant} word {}: {} / {} / {}",
                    c.word, c.first_order, c.second_order, c.incremental
                )
            });
            lengths.check(r.length_mismatches == 0, || {
                format!("{seq} {variant}: {} words", r.length_mismatches)
            });
        }
    }
    report.criterion(
        "1",
        "confluence of random-order reduction",
        agree.pass(),
        format!(
            "{samples} words per combination; {}",
            agree.detail("combinations agree")
        ),
    );
    report.criterion(
        "2",
        "normal form length equals letter count",
        lengths.pass(),
        lengths.detail("combinations without mismatches"),
    );
    report.artifact("confluence.csv", csv);
    Ok(())
}

/// `2^e` for any integer `e`, flushing to zero far below 1.
fn pow2(e: i64) -> f64 {
    2f64.powi(e.clamp(-2000, 2000) as i32)
}

/// `(m_k, m_{k+1})` with an infinite successor as `None`.
fn class_bounds(seq: &MSequence, k: u64) -> Result<(u64, Option<u64>)> {
    let m_k = seq.exact_term(k as usize)?;
    let next = match seq.term(k as usize + 1)? {
        Term::Exact(m) => Some(m),
        Term::Above(_) => None,
    };
    Ok((m_k, next))
}

/// `min{2^{m_{k+1}}, n} / 2^{m_k + 3}`.
fn class_count_lower(n: u64, m_k: u64, next: Option<u64>) -> f64 {
    match next {
        Some(m) if m < 64 && (1u64 << m) < n => pow2(m as i64 - m_k as i64 - 3),
        _ => n as f64 * pow2(-(m_k as i64) - 3),
    }
}

/// `(m_k + 2) min{2^{m_{k+1} - m_k}, n / 2^{m_k + 1}}`.
fn class_length_upper(n: u64, m_k: u64, next: Option<u64>) -> f64 {
    let by_n = n as f64 * pow2(-(m_k as i64) - 1);
    let by_gap = next.map_or(f64::INFINITY, |m| pow2(m as i64 - m_k as i64));
    (m_k + 2) as f64 * by_n.min(by_gap)
}

fn blocks_csv(config: &str, seq: &MSequence, moments: &[BlockMoments]) -> Result<String> {
    let mut s =
        format!("# {config}\nn,class,m_k,count_mean,count_stderr,count_lower,length_mean,length_stderr,length_upper\n");
    for b in moments {
        for (&k, c) in &b.per_class {
            let (m_k, next) = class_bounds(seq, k)?;
            let _ = writeln!(
                s,
                "{},{k},{m_k},{},{},{},{},{},{}",
                b.n,
                c.count.mean,
                c.count.stderr,
                class_count_lower(b.n, m_k, next),
                c.length.mean,
                c.length.stderr,
                class_length_upper(b.n, m_k, next)
            );
        }
    }
    Ok(s)
}

/// The growth ratio `beta` used in the lemma envelope.
fn growth_ratio(seq: &MSequence) -> Result<f64> {
    match seq.kind() {
        SequenceKind::Identity => Ok(1.0),
        SequenceKind::Beta => Ok(seq.beta_value().expect("beta sequence")),
        _ => Err(Error::InvalidParameter(format!("no growth ratio known for {seq}"))),
    }
}

fn sandwich(spec: &ExperimentSpec, report: &mut Report) -> Result<()> {
    let grid = spec.get_list("grid")?;
    let trials: u64 = spec.get("trials")?;
    let delta: f64 = spec.get("delta")?;
    let mut speed = Tally::default();
    let mut ends = Tally::default();
    let mut counts = Tally::default();
    let mut resolvable = Tally::default();
    let mut lengths = Tally::default();
    let mut lemma = Tally::default();
    for (i, seq) in sequences(spec)?.into_iter().enumerate() {
        let beta = growth_ratio(&seq)?;
        let cfg = WalkConfig::new(
            seq.clone(),
            Variant::Strict,
            grid.clone(),
            trials,
            mix64(spec.master_seed, i as u64),
        )?;
        let (curve, moments) = estimate_speed_with_blocks(&cfg)?;
        let mut envelopes = Vec::new();
        for (p, b) in curve.points.iter().zip(&moments) {
            let n = p.n;
            let sw = sandwich_bounds(&seq, n)?;
            speed.check(
                sw.lower - 3.0 * p.stderr <= p.mean && p.mean <= sw.upper + 3.0 * p.stderr,
                || {
                    format!(
                        "{seq} n={n}: mean {:.4} outside [{:.4}, {:.4}]",
                        p.mean, sw.lower, sw.upper
                    )
                },
            );
            let gl = gamma_lemma_bounds(&seq, n, beta, delta)?;
            lemma.check(
                gl.lower - 3.0 * p.stderr <= p.mean && p.mean <= gl.upper + 3.0 * p.stderr,
                || {
                    format!(
                        "{seq} n={n}: mean {:.4} outside [{:.4}, {:.4}]",
                        p.mean, gl.lower, gl.upper
                    )
                },
            );
            envelopes.push(sw);
            envelopes.push(gl);

            for (name, s) in [("N_0", b.n0), ("N_inf", b.n_inf)] {
                ends.check(s.mean <= 1.0 + 3.0 * s.stderr, || {
                    format!("{seq} n={n}: mean {name} = {:.4}", s.mean)
                });
            }

            // every class with m_k <= n - 2, observed or not
            let zero = Summary { mean: 0.0, stderr: 0.0 };
            let mut k = 1u64;
            while let Term::Exact(m_k) = seq.term(k as usize)? {
                if m_k + 2 > n {
                    break;
                }
                let (_, next) = class_bounds(&seq, k)?;
                let lower = class_count_lower(n, m_k, next);
                let s = b.per_class.get(&k).map_or(zero, |c| c.count);
                let ok = s.mean >= lower - 3.0 * s.stderr;
                let what = || format!("{seq} n={n} k={k}: mean N_k {:.3e} < bound {lower:.3e}", s.mean);
                counts.check(ok, what);
                if lower >= 1.0 / trials as f64 {
                    resolvable.check(ok, what);
                }
                k += 1;
            }

            for (&k, c) in &b.per_class {
                let (m_k, next) = class_bounds(&seq, k)?;
                let upper = class_length_upper(n, m_k, next);
                let s = c.length;
                lengths.check(s.mean <= upper + 3.0 * s.stderr, || {
                    format!("{seq} n={n} k={k}: mean |pi_k| {:.4} > bound {upper:.4}", s.mean)
                });
            }
        }
        let t = tag(&seq);
        report.artifact(&format!("speed_{t}.csv"), curve.to_csv());
        report.artifact(
            &format!("bounds_{t}.csv"),
            envelopes_to_csv(&cfg.fingerprint(), &envelopes),
        );
        report.artifact(
            &format!("blocks_{t}.csv"),
            blocks_csv(&cfg.fingerprint(), &seq, &moments)?,
        );
    }
    report.criterion(
        "3",
        "sandwich bounds on the mean length",
        speed.pass(),
        speed.detail("grid checks"),
    );
    report.criterion(
        "4a",
        "end blocks N_0 and N_inf",
        ends.pass(),
        ends.detail("mean checks"),
    );
    report.criterion(
        "4b",
        "per-class block count lower bound",
        counts.pass(),
        format!(
            "{}; restricted to bounds >= 1/trials: {}",
            counts.detail("class checks"),
            resolvable.detail("class checks")
        ),
    );
    report.criterion(
        "4c",
        "per-class block length upper bound",
        lengths.pass(),
        lengths.detail("class checks"),
    );
    report.criterion("6", "gamma lemma envelope", lemma.pass(), lemma.detail("grid checks"));
    Ok(())
}

fn log_squared(spec: &ExperimentSpec, report: &mut Report) -> Result<()> {
    let grid = spec.get_list("grid")?;
    let trials: u64 = spec.get("trials")?;
    let cfg = WalkConfig::new(
        MSequence::identity(),
        Variant::Strict,
        grid,
        trials,
        mix64(spec.master_seed, 0),
    )?;
    let curve = estimate_speed(&cfg)?;
    let at = |n: u64| {
        curve
            .at(n)
            .map(|p| p.mean)
            .ok_or_else(|| Error::InvalidParameter(format!("grid must contain {n}")))
    };
    let ratio = at(1 << 14)? / at(1 << 7)?;
    let scaled: Vec<f64> = curve
        .points
        .iter()
        .map(|p| p.mean / (p.n as f64).log2().powi(2))
        .collect();
    let c = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let top = scaled.iter().copied().fold(0.0, f64::max);
    let mut csv = format!("# {}\nn,mean,stderr,mean_over_log2_squared\n", cfg.fingerprint());
    for (p, s) in curve.points.iter().zip(&scaled) {
        let _ = writeln!(csv, "{},{},{},{s}", p.n, p.mean, p.stderr);
    }
    report.criterion(
        "5",
        "squared-log growth for the identity sequence",
        (2.0..=8.0).contains(&ratio) && top <= 16.0 * c,
        format!(
            "mean(2^14)/mean(2^7) = {ratio:.4} (need [2, 8]); mean/log2^2 n in [{c:.4}, {top:.4}], c = {c:.4}, max/c = {:.3} (need <= 16)",
            top / c
        ),
    );
    report.artifact("log_squared.csv", csv);
    Ok(())
}

/// Tabulated `log_n gamma(n)` at the third and fourth peaks for alpha = 1/2.
const GAMMA_PROXIES: [(usize, f64); 2] = [(3, 0.815), (4, 0.723)];

fn peak_exponents(spec: &ExperimentSpec, report: &mut Report) -> Result<()> {
    let alpha: String = spec.get("alpha")?;
    let trials: u64 = spec.get("trials")?;
    let seq: MSequence = format!("beta:{alpha}").parse()?;
    let peaks: Vec<u64> = GAMMA_PROXIES
        .iter()
        .map(|&(t, _)| seq.exact_term(t).map(|m| 1u64 << m))
        .collect::<Result<_>>()?;
    let cfg = WalkConfig::new(seq.clone(), Variant::Strict, peaks, trials, mix64(spec.master_seed, 0))?;
    let curve = estimate_speed(&cfg)?;
    let rows = peak_report(&seq, GAMMA_PROXIES.len() + 2, Some(&curve))?;
    let mut proxies_ok = true;
    let mut gamma_ok = true;
    let mut detail = Vec::new();
    let mut prev_gamma = f64::INFINITY;
    let mut prev_proxy = f64::INFINITY;
    let mut mc_decreasing = true;
    for &(t, target) in &GAMMA_PROXIES {
        let row = &rows[t - 1];
        let proxy = row.exponent_proxy.unwrap_or(f64::NAN);
        let g = row.log_n_gamma.unwrap_or(f64::NAN);
        proxies_ok &= (0.3..=0.85).contains(&proxy);
        gamma_ok &= (g - target).abs() <= 0.02 && g < prev_gamma;
        mc_decreasing &= proxy < prev_proxy;
        prev_gamma = g;
        prev_proxy = proxy;
        detail.push(format!(
            "n=2^{}: proxy {proxy:.4}, log_n gamma {g:.4} (target {target})",
            row.m_t
        ));
    }
    let mut csv = format!("# {}\nt,m_t,n,gamma,log_n_gamma,exponent_proxy\n", cfg.fingerprint());
    for r in &rows {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.t,
            r.m_t,
            r.n,
            r.gamma,
            opt(r.log_n_gamma),
            opt(r.exponent_proxy)
        );
    }
    report.criterion(
        "7",
        "peak exponents trend toward alpha",
        proxies_ok && gamma_ok,
        format!(
            "{}; measured proxy {} between the peaks",
            detail.join("; "),
            if mc_decreasing {
                "decreases"
            } else {
                "does not decrease"
            }
        ),
    );
    report.artifact("peak_exponents.csv", csv);
    report.artifact("peak_exponents_speed.csv", curve.to_csv());
    Ok(())
}

fn slow_speed(spec: &ExperimentSpec, report: &mut Report) -> Result<()> {
    let omega: String = spec.get("omega")?;
    let trials: u64 = spec.get("trials")?;
    let seq: MSequence = format!("slow:{omega}").parse()?;
    let m1 = seq.term(1)?;
    let m2 = seq.term(2)?;
    let m3 = seq.term(3)?;
    let prefix_ok = m1 == Term::Exact(1) && m2 == Term::Exact(65) && matches!(m3, Term::Above(_));
    let m2 = seq.exact_term(2)?;
    let threshold = weak_bounds(&seq, m2, DEFAULT_C0)?.upper;
    let omega_at = seq.omega().expect("slow sequence").eval(m2);

    let cfg = WalkConfig::new(seq.clone(), Variant::Weak, vec![m2], trials, mix64(spec.master_seed, 0))?;
    let at_m2 = estimate_speed(&cfg)?.points[0];
    let trend_cfg = WalkConfig::new(
        seq.clone(),
        Variant::Weak,
        spec.get_list("trend_grid")?,
        spec.get("trend_trials")?,
        mix64(spec.master_seed, 1),
    )?;
    let trend = estimate_speed(&trend_cfg)?;
    let increasing = trend.points.windows(2).all(|w| w[0].mean < w[1].mean);
    let below = at_m2.mean <= threshold + 3.0 * at_m2.stderr;
    let means: Vec<String> = trend.points.iter().map(|p| format!("{}: {:.4}", p.n, p.mean)).collect();

    report.criterion(
        "8",
        "slow sequence stays below omega at its second term",
        prefix_ok && below && increasing,
        format!(
            "prefix ({m1:?}, {:?}, {m3:?}) {}; mean|R_{m2}| = {:.4} +- {:.4} vs threshold {threshold} (omega = {omega_at:.4}); trend {} [{}]",
            Term::Exact(m2),
            if prefix_ok { "ok" } else { "wrong" },
            at_m2.mean,
            at_m2.stderr,
            if increasing { "strictly increasing" } else { "not strictly increasing" },
            means.join(", ")
        ),
    );
    report.artifact(
        "slow_speed.csv",
        format!(
            "# {}\nn,threshold,omega,mean,stderr,trials\n{m2},{threshold},{omega_at},{},{},{trials}\n",
            cfg.fingerprint(),
            at_m2.mean,
            at_m2.stderr
        ),
    );
    report.artifact("slow_speed_trend.csv", trend.to_csv());
    Ok(())
}

fn weak_speed(spec: &ExperimentSpec, report: &mut Report) -> Result<()> {
    let seq = MSequence::identity();
    let cfg = WalkConfig::new(
        seq.clone(),
        Variant::Weak,
        spec.get_list("grid")?,
        spec.get("trials")?,
        mix64(spec.master_seed, 0),
    )?;
    let curve = estimate_speed(&cfg)?;
    let mut tally = Tally::default();
    let mut envelopes = Vec::new();
    for p in &curve.points {
        let env = weak_bounds(&seq, p.n, DEFAULT_C0)?;
        tally.check(p.mean <= env.upper + 3.0 * p.stderr, || {
            format!("n={}: mean {:.4} > {:.4}", p.n, p.mean, env.upper)
        });
        envelopes.push(env);
    }
    report.criterion(
        "9",
        "weak variant upper bound",
        tally.pass(),
        tally.detail("grid checks"),
    );
    report.artifact("weak_speed.csv", curve.to_csv());
    report.artifact(
        "weak_speed_bounds.csv",
        envelopes_to_csv(&cfg.fingerprint(), &envelopes),
    );
    Ok(())
}

/// `F(n) <= F(o, n) <= n` and `F(v, n) >= dist(o, v)` wherever sound.
fn check_spread_inequalities(name: &str, g: &Digraph, n_max: u64, vertex_step: usize, tally: &mut Tally) -> Result<()> {
    for r in spread_table(g, n_max) {
        let n = r.n;
        let (Some(f), true) = (r.value, g.ball_is_sound(g.root(), n)) else {
            continue;
        };
        let at_root = ball_spread_at(g, g.root(), n)?;
        tally.check(f <= at_root && at_root <= n, || {
            format!("{name}: F({n}) = {f}, F(o,{n}) = {at_root}")
        });
        for v in (0..g.len()).step_by(vertex_step) {
            if g.ball_is_sound(v, n) {
                let fv = ball_spread_at(g, v, n)?;
                tally.check(fv >= g.dist(v), || {
                    format!("{name}: F({v},{n}) = {fv} < dist {}", g.dist(v))
                });
            }
        }
    }
    Ok(())
}

fn spread(spec: &ExperimentSpec, report: &mut Report) -> Result<()> {
    let radius: u64 = spec.get("radius")?;
    let exact_through: u64 = spec.get("exact_through")?;
    let depth: u64 = spec.get("tree_depth")?;
    let reset = cayley_ball(&ResetSemigroup, radius)?;
    let tree = cayley_ball(&FreeSemigroup { d: 2 }, depth)?;
    let cycle = Digraph::load_edge_list("0 1\n1 0\n")?;
    let tail_cycle = Digraph::load_edge_list("0 1\n1 2\n2 3\n3 2\n")?;

    let table = spread_table(&reset, exact_through);
    let linear = table.iter().all(|r| r.value == Some(r.n));

    let mut inequalities = Tally::default();
    check_spread_inequalities("reset", &reset, radius, 1, &mut inequalities)?;
    check_spread_inequalities("tree", &tree, depth, 1021, &mut inequalities)?;
    check_spread_inequalities("cycle", &cycle, 3 * radius, 1, &mut inequalities)?;
    check_spread_inequalities("tail-cycle", &tail_cycle, 3 * radius, 1, &mut inequalities)?;

    let mut growth = Vec::new();
    let mut growth_ok = true;
    for (name, g) in [("reset", &reset), ("tree", &tree)] {
        let r = verify_spread_growth(g)?;
        growth_ok &= r.holds && r.checked > 0;
        growth.push(format!(
            "{name}: {} inequalities {}{}",
            r.checked,
            if r.holds { "hold" } else { "fail" },
            r.counterexample.map(|c| format!(" ({c})")).unwrap_or_default()
        ));
    }

    let mut bounded = true;
    let mut traps = Vec::new();
    for (name, g) in [("cycle", &cycle), ("tail-cycle", &tail_cycle)] {
        let top = spread_table(g, 3 * radius)
            .iter()
            .filter_map(|r| r.value)
            .max()
            .unwrap_or(0);
        let refused = verify_spread_growth(g).is_err();
        bounded &= top <= g.max_dist() && refused;
        traps.push(format!("{name}: max F = {top}, trap refused {refused}"));
    }

    report.criterion(
        "10",
        "rooted ball spread",
        linear && inequalities.pass() && growth_ok && bounded,
        format!(
            "reset ball radius {radius}: F(n) = n for n <= {exact_through} {}; {}; {}; {}",
            if linear { "holds" } else { "fails" },
            inequalities.detail("spread inequalities"),
            growth.join("; "),
            traps.join("; ")
        ),
    );
    report.artifact(
        "spread_reset.csv",
        spread_table_csv(&format!("reset radius {radius}"), &spread_table(&reset, radius)),
    );
    report.artifact(
        "spread_tree.csv",
        spread_table_csv(&format!("free:2 radius {depth}"), &spread_table(&tree, depth)),
    );
    report.artifact(
        "spread_cycle.csv",
        spread_table_csv("2-cycle", &spread_table(&cycle, 3 * radius)),
    );
    Ok(())
}

/// `log2 n + 4 log2 log2 n`.
fn run_ceiling(n: u64) -> f64 {
    let l = (n as f64).log2();
    l + 4.0 * l.log2()
}

fn median(xs: &[u64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_unstable();
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h] as f64
    } else {
        (v[h - 1] + v[h]) as f64 / 2.0
    }
}

fn escape(spec: &ExperimentSpec, report: &mut Report) -> Result<()> {
    let steps: u64 = spec.get("steps")?;
    let count: u64 = spec.get("seeds")?;
    let radius: u64 = spec.get("radius")?;
    let ball = cayley_ball(&ResetSemigroup, radius)?;
    let f_hat = spread_values(&ball, radius)?;
    let seeds: Vec<u64> = (0..count).map(|i| mix64(spec.master_seed, i)).collect();
    let crossings = crossing_counts_cayley(&ResetSemigroup, &ball, 2, steps, &seeds, &f_hat)?;
    let lo = 1u64 << 10;
    let exceed: Vec<u64> = seeds
        .par_iter()
        .map(|&seed| {
            let mut hits = 0u64;
            cayley_walk(&ResetSemigroup, 2, steps, seed, |t, dist| {
                if t >= lo && dist as f64 > run_ceiling(t) {
                    hits += 1;
                }
            })
            .map(|_| hits)
        })
        .collect::<Result<_>>()?;

    let counts: Vec<u64> = crossings.iter().map(|c| c.crossings).collect();
    let med = median(&counts);
    let all_cross = counts.iter().all(|&c| c >= 1);
    let clean = exceed.iter().filter(|&&e| e == 0).count();
    report.criterion(
        "11",
        "walk distance reaches the spread threshold",
        all_cross && med >= 3.0,
        format!("{count} seeds x {steps} steps: crossings {counts:?}, median {med}"),
    );
    report.criterion(
        "12",
        "run length stays below log2 n + 4 log2 log2 n",
        clean as u64 * 10 >= count * 9,
        format!("{clean} of {count} seeds with no exceedance in [2^10, {steps}]; exceedances {exceed:?}"),
    );
    let mut csv = String::from("seed,crossings,first_crossing,last_crossing,max_dist,exceedances\n");
    for (c, e) in crossings.iter().zip(&exceed) {
        let opt = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{e}",
            c.seed,
            c.crossings,
            opt(c.first_crossing),
            opt(c.last_crossing),
            c.max_dist
        );
    }
    report.artifact("escape.csv", format!("# {}\n{csv}", spec.fingerprint()));
    Ok(())
}

/// Distribution of `|R_n|` over all `2^n` walks on the reset semigroup,
/// as counts indexed by length.
pub(crate) fn enumerate_reset_lengths(n: u32) -> Result<Vec<u64>> {
    let sg = ResetSemigroup;
    let mut counts = vec![0u64; n as usize + 1];
    for mask in 0u64..1 << n {
        let mut e = sg.identity();
        for i in 0..n {
            e = sg.mul_generator(&e, ((mask >> i) & 1) as usize)?;
        }
        counts[sg.word_length(&e) as usize] += 1;
    }
    Ok(counts)
}

/// `Pr(|R_n| = r)`: `2^-r` below `n`, `2^{1-n}` at `n`.
pub(crate) fn run_length_law(n: u32, r: u32) -> Ratio<u64> {
    match r {
        0 => Ratio::from_integer(0),
        r if r < n => Ratio::new(1, 1 << r),
        r if r == n => Ratio::new(2, 1 << n),
        _ => Ratio::from_integer(0),
    }
}

fn bounded_speed(spec: &ExperimentSpec, report: &mut Report) -> Result<()> {
    let grid = spec.get_list("grid")?;
    let trials: u64 = spec.get("trials")?;
    let exact_max: u32 = spec.get("exact_max")?;
    let mc_trials: u64 = spec.get("mc_trials")?;
    if exact_max > 24 {
        return Err(Error::TooLarge(format!("enumerating 2^{exact_max} walks")));
    }

    // one walk per trial, read off at every grid point
    let far = mix64(spec.master_seed, 0);
    let n_max = grid.iter().copied().max().unwrap_or(0);
    let per_trial: Vec<Vec<u64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity(grid.len());
            cayley_walk(&ResetSemigroup, 2, n_max, mix64(far, i), |t, d| {
                if grid.contains(&t) {
                    out.push(d);
                }
            })
            .map(|_| out)
        })
        .collect::<Result<_>>()?;
    let mut sorted = grid.clone();
    sorted.sort_unstable();
    let far_means: Vec<(u64, Summary)> = sorted
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let (s, sq) = per_trial.iter().fold((0u128, 0u128), |(s, sq), v| {
                let x = v[j] as u128;
                (s + x, sq + x * x)
            });
            (n, Summary::from_sums(s, sq, trials))
        })
        .collect();
    let lo = far_means.iter().map(|m| m.1.mean).fold(f64::INFINITY, f64::min);
    let hi = far_means.iter().map(|m| m.1.mean).fold(0.0, f64::max);
    let spread = (hi - lo) / lo;

    // exact law against enumeration, then Monte Carlo against the exact mean
    let mut law = Tally::default();
    let near = mix64(spec.master_seed, 1);
    let short: Vec<Vec<u64>> = (0..mc_trials)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity(exact_max as usize);
            cayley_walk(&ResetSemigroup, 2, exact_max as u64, mix64(near, i), |_, d| out.push(d)).map(|_| out)
        })
        .collect::<Result<_>>()?;
    let mut mc = Tally::default();
    let mut csv = format!("# {}\nn,exact_mean,mc_mean,mc_stderr\n", spec.fingerprint());
    for n in 1..=exact_max {
        let counts = enumerate_reset_lengths(n)?;
        let total = 1u64 << n;
        for (r, &c) in counts.iter().enumerate() {
            let got = Ratio::new(c, total);
            let want = run_length_law(n, r as u32);
            law.check(got == want, || format!("n={n} r={r}: {got} vs {want}"));
        }
        let exact_mean = counts
            .iter()
            .enumerate()
            .map(|(r, &c)| r as f64 * c as f64)
            .sum::<f64>()
            / total as f64;
        let (s, sq) = short.iter().fold((0u128, 0u128), |(s, sq), v| {
            let x = v[n as usize - 1] as u128;
            (s + x, sq + x * x)
        });
        let m = Summary::from_sums(s, sq, mc_trials);
        mc.check((m.mean - exact_mean).abs() <= 4.0 * m.stderr, || {
            format!("n={n}: mc {:.4} +- {:.4} vs exact {exact_mean:.4}", m.mean, m.stderr)
        });
        let _ = writeln!(csv, "{n},{exact_mean},{},{}", m.mean, m.stderr);
    }
    let means: Vec<String> = far_means
        .iter()
        .map(|(n, s)| format!("{n}: {:.4} +- {:.4}", s.mean, s.stderr))
        .collect();
    report.criterion(
        "13",
        "bounded speed and the run-length law",
        spread < 0.1 && law.pass() && mc.pass(),
        format!(
            "means [{}] vary by {:.2}% (need < 10%); {}; {}",
            means.join(", "),
            100.0 * spread,
            law.detail("exact probabilities"),
            mc.detail("Monte Carlo means")
        ),
    );
    let mut far_csv = format!("# {}\nn,mean,stderr,trials\n", spec.fingerprint());
    for (n, s) in &far_means {
        let _ = writeln!(far_csv, "{n},{},{},{trials}", s.mean, s.stderr);
    }
    report.artifact("bounded_speed_speed.csv", far_csv);
    report.artifact("bounded_speed_run_law.csv", csv);
    Ok(())
}

fn patterns(spec: &ExperimentSpec, report: &mut Report) -> Result<()> {
    let d: usize = spec.get("d")?;
    let sampled: usize = spec.get("sampled")?;
    let trials: u64 = spec.get("trials")?;
    let points: String = spec.get("points")?;
    let mut rows: Vec<SubwordRow> = Vec::new();
    for (i, p) in points.split(',').enumerate() {
        let (n, k) = p
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("point {p:?} is not n:k")))?;
        let (n, k) = (parse_count(n)? as usize, parse_count(k)? as usize);
        let base = mix64(spec.master_seed, i as u64);
        let mut strategies = constant_strategies(d, k);
        strategies.extend(sampled_last_letter_maps(d, k, sampled, mix64(base, 0)));
        strategies.extend(sampled_pseudorandom(k, sampled, mix64(base, 1)));
        rows.extend(subword_sweep(d, n, k, &strategies, trials, mix64(base, 2))?);
    }
    let mut bound = Tally::default();
    let mut agree = Tally::default();
    for r in &rows {
        let at = || format!("n={} k={} {}", r.n, r.k, r.strategy);
        bound.check(r.exact >= r.bound, || format!("{}: {} < {}", at(), r.exact, r.bound));
        agree.check((r.mc - r.exact).abs() <= 4.0 * r.stderr, || {
            format!("{}: mc {} +- {} vs {}", at(), r.mc, r.stderr, r.exact)
        });
    }
    report.criterion(
        "14",
        "pattern occurrence lower bound",
        bound.pass() && agree.pass(),
        format!(
            "{}; {}",
            bound.detail("exact bounds"),
            agree.detail("Monte Carlo comparisons")
        ),
    );
    report.artifact("patterns.csv", rows_to_csv(&spec.fingerprint(), &rows));
    Ok(())
}
