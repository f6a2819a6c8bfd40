//! Closed-form envelopes for `E|R_n|`.
//!
//! All sums run over classes `k` and are evaluated in `f64`. Factors of the
//! form `min{2^{m_{k+1}}, n}` compare exponents with `log2 n` first, so huge
//! terms (the slow sequences have `m_2 = 65`) never overflow.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::{MSequence, Term};
use crate::walk::SpeedCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Per-class sums bracketing the strict walk.
    StrictSandwich,
    /// `gamma(n)/8` below, `3 gamma(n) + 3 C n^{1-1/beta} log2 n + 3` above.
    GammaLemma,
    /// Weak walk; `lower` is `c0` times the raw sum.
    WeakUpper,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::StrictSandwich => "strict_sandwich",
            BoundKind::GammaLemma => "gamma_lemma",
            BoundKind::WeakUpper => "weak_upper",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEnvelope {
    pub n: u64,
    pub lower: f64,
    pub upper: f64,
    pub kind: BoundKind,
    /// Named constants that went into the envelope.
    pub constants: BTreeMap<String, f64>,
    /// Number of summands in the lower and upper sums (summands with
    /// `m_k` above 1100 are negligible and not evaluated).
    pub lower_terms: usize,
    pub upper_terms: usize,
}

impl BoundEnvelope {
    pub fn csv_header() -> &'static str {
        "n,lower,upper,kind"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.n, self.lower, self.upper, self.kind)
    }
}

/// Write envelopes as CSV under a `#` config line.
pub fn envelopes_to_csv(config: &str, envelopes: &[BoundEnvelope]) -> String {
    let mut s = format!("# {config}\n{}\n", BoundEnvelope::csv_header());
    for e in envelopes {
        s.push_str(&e.csv_row());
        s.push('\n');
    }
    s
}

/// `min{2^e, n}` where `e` is the exponent `m_{k+1}` (possibly only
/// bounded below).
fn min_pow2(next: Term, n: u64, seq: &MSequence) -> Result<f64> {
    let log = n.ilog2() as u64;
    match next {
        Term::Exact(e) if e <= log => Ok((1u64 << e) as f64),
        Term::Exact(_) => Ok(n as f64),
        // e > b, so 2^e >= 2^(b+1) >= n once b >= log2 n
        Term::Above(b) if b >= log => Ok(n as f64),
        Term::Above(_) => Err(Error::SequenceCapExceeded {
            what: "next term needed for min{2^m, n}".into(),
            cap: seq.cap(),
        }),
    }
}

/// Summands with `m_k` beyond this are below `2^-1000 n` and are dropped.
const NEGLIGIBLE_EXPONENT: u64 = 1100;

/// `2^{-m}` as `f64`.
fn inv_pow2(m: u64) -> f64 {
    2f64.powi(-(m.min(NEGLIGIBLE_EXPONENT) as i32))
}

/// Terms `m_k <= x` paired with their successors `m_{k+1}`, stopping at
/// [`NEGLIGIBLE_EXPONENT`].
fn terms_with_successors(seq: &MSequence, x: u64) -> Result<Vec<(u64, Term)>> {
    let x = x.min(NEGLIGIBLE_EXPONENT);
    let mut out = Vec::new();
    let mut k = 1;
    let mut cur = seq.term(1)?;
    while let Term::Exact(m) = cur {
        if m > x {
            break;
        }
        let next = seq.term(k + 1)?;
        out.push((m, next));
        cur = next;
        k += 1;
    }
    Ok(out)
}

fn require_n(n: u64) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidParameter(format!("n = {n} must be at least 2")))
    } else {
        Ok(())
    }
}

/// Sandwich for the strict walk:
///
/// ```text
/// sum_{m_k <= n-2} (m_k+1)/2^(m_k+3) min{2^m_{k+1}, n}
///     <= E|R_n| <=
/// sum_{m_k <= n-2} (m_k+2)/2^m_k min{2^m_{k+1}, n} + 3
/// ```
pub fn sandwich_bounds(seq: &MSequence, n: u64) -> Result<BoundEnvelope> {
    require_n(n)?;
    let terms = terms_with_successors(seq, n - 2)?;
    let mut lower = 0.0;
    let mut upper = 0.0;
    for &(m, next) in &terms {
        let cap = min_pow2(next, n, seq)?;
        let scale = inv_pow2(m);
        lower += (m + 1) as f64 * scale / 8.0 * cap;
        upper += (m + 2) as f64 * scale * cap;
    }
    Ok(BoundEnvelope {
        n,
        lower,
        upper: upper + 3.0,
        kind: BoundKind::StrictSandwich,
        constants: BTreeMap::new(),
        lower_terms: terms.len(),
        upper_terms: terms.len(),
    })
}

/// Check `m_i <= beta m_{i-1} + delta` on the first 30 terms (or as many
/// as are known exactly).
pub fn check_growth(seq: &MSequence, beta: f64, delta: f64) -> Result<()> {
    let mut prev = seq.exact_term(1)?;
    for i in 2..=30 {
        let Term::Exact(m) = seq.term(i)? else { break };
        if m as f64 > beta * prev as f64 + delta + 1e-9 {
            return Err(Error::HypothesisViolated(format!(
                "m_{i} = {m} > {beta} * {prev} + {delta}"
            )));
        }
        prev = m;
    }
    Ok(())
}

/// Envelope in terms of `gamma(n)`, with the explicit constants
/// `1/8` below and `3, 3C, 3` above, `C = 2^(delta/beta) / beta`.
pub fn gamma_lemma_bounds(seq: &MSequence, n: u64, beta: f64, delta: f64) -> Result<BoundEnvelope> {
    require_n(n)?;
    if beta.is_nan() || beta < 1.0 || delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need beta >= 1, delta >= 0 (got {beta}, {delta})"
        )));
    }
    check_growth(seq, beta, delta)?;
    let g = seq.gamma(n);
    let c = 2f64.powf(delta / beta) / beta;
    let nf = n as f64;
    let tail = 3.0 * c * nf.powf(1.0 - 1.0 / beta) * nf.log2();
    let constants = BTreeMap::from([
        ("beta".to_string(), beta),
        ("delta".to_string(), delta),
        ("C".to_string(), c),
        ("gamma".to_string(), g.value),
    ]);
    Ok(BoundEnvelope {
        n,
        lower: g.value / 8.0,
        upper: 3.0 * g.value + tail + 3.0,
        kind: BoundKind::GammaLemma,
        constants,
        lower_terms: g.terms,
        upper_terms: g.terms,
    })
}

/// Default for the unspecified constant in the weak lower bound. Purely
/// empirical; lower-side checks should not rely on it.
pub const DEFAULT_C0: f64 = 0.01;

/// Weak-walk envelope:
///
/// ```text
/// c0 sum_{m_k <= log2 n} (m_k+1) <= E|R_n| <= sum_{m_k <= n-2} (m_k+2) min{1, n/2^m_k} + 3
/// ```
///
/// The raw lower sum is kept in `constants["lower_raw"]`.
pub fn weak_bounds(seq: &MSequence, n: u64, c0: f64) -> Result<BoundEnvelope> {
    require_n(n)?;
    let upper_terms = terms_with_successors(seq, n - 2)?;
    let log = n.ilog2() as u64;
    let nf = n as f64;
    let upper: f64 = upper_terms
        .iter()
        .map(|&(m, _)| (m + 2) as f64 * (nf * inv_pow2(m)).min(1.0))
        .sum();
    // m_k <= log2 n for integer m_k means m_k <= floor(log2 n)
    let (lower_terms, _) = seq.prefix_through(log);
    let raw: f64 = lower_terms.iter().map(|&m| (m + 1) as f64).sum();
    Ok(BoundEnvelope {
        n,
        lower: c0 * raw,
        upper: upper + 3.0,
        kind: BoundKind::WeakUpper,
        constants: BTreeMap::from([("c0".to_string(), c0), ("lower_raw".to_string(), raw)]),
        lower_terms: lower_terms.len(),
        upper_terms: upper_terms.len(),
    })
}

/// One row of the peak-point table for a beta sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakRow {
    pub t: usize,
    pub m_t: u64,
    /// `n = 2^{m_t}`.
    pub n: u64,
    pub gamma: f64,
    /// `log_n gamma(n)`; `None` when `gamma(n) = 0`.
    pub log_n_gamma: Option<f64>,
    /// `log_n mean` from a speed curve containing `n`.
    pub exponent_proxy: Option<f64>,
    /// Set when either log is undefined.
    pub flagged: bool,
}

/// Tabulate `gamma` and measured exponents at `n = 2^{m_t}`, `t = 1..=t_max`.
pub fn peak_report(seq: &MSequence, t_max: usize, curve: Option<&SpeedCurve>) -> Result<Vec<PeakRow>> {
    let mut rows = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let m_t = seq.exact_term(t)?;
        if m_t >= 64 {
            return Err(Error::SequenceCapExceeded {
                what: format!("peak 2^{m_t}"),
                cap: 63,
            });
        }
        let n = 1u64 << m_t;
        let gamma = seq.gamma(n).value;
        let ln_n = (n as f64).ln();
        let log_n_gamma = (gamma > 0.0).then(|| gamma.ln() / ln_n);
        let exponent_proxy = curve
            .and_then(|c| c.at(n))
            .filter(|p| p.mean > 0.0)
            .map(|p| p.mean.ln() / ln_n);
        rows.push(PeakRow {
            t,
            m_t,
            n,
            gamma,
            flagged: log_n_gamma.is_none() || (curve.is_some() && exponent_proxy.is_none()),
            log_n_gamma,
            exponent_proxy,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{Omega, TailPolicy};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    /// Exact rational evaluation straight from the displayed formulas,
    /// with `m_{k+1}` looked up by index rather than via successors.
    fn sandwich_exact(seq: &MSequence, n: u64) -> (f64, f64) {
        let mut summands = Vec::new();
        let mut k = 1;
        while let Term::Exact(m) = seq.term(k).unwrap() {
            if m > n - 2 {
                break;
            }
            // a frozen tail makes the last class infinite
            let cap = match seq.term(k + 1).unwrap() {
                Term::Exact(next) if next < 64 && (1u64 << next) < n => BigInt::one() << next,
                _ => BigInt::from(n),
            };
            summands.push((m, cap));
            k += 1;
        }
        // every summand has a power-of-two denominator dividing 2^(top + 3)
        let top = summands.last().map_or(0, |(m, _)| *m);
        let mut lower = BigInt::zero();
        let mut upper = BigInt::from(3) << (top + 3);
        for (m, cap) in &summands {
            lower += (BigInt::from(m + 1) * cap) << (top - m);
            upper += (BigInt::from(m + 2) * cap) << (top - m + 3);
        }
        let den = BigInt::one() << (top + 3);
        (
            BigRational::new(lower, den.clone()).to_f64().unwrap(),
            BigRational::new(upper, den).to_f64().unwrap(),
        )
    }

    #[test]
    fn sandwich_examples() {
        let id = MSequence::identity();
        let e = sandwich_bounds(&id, 4).unwrap();
        assert!(close(e.lower, 0.875) && close(e.upper, 13.0));
        assert_eq!(e.lower_terms, 2);
        let e = sandwich_bounds(&id, 2).unwrap();
        assert_eq!((e.lower, e.upper, e.lower_terms), (0.0, 3.0, 0));
        assert!(sandwich_bounds(&id, 1).is_err());
        let half = MSequence::beta(0.5).unwrap();
        let e = sandwich_bounds(&half, 128).unwrap();
        // m_k <= 126 for m = 1, 3, 7, 15, 31, 63; only k = 1 has 2^{m_{k+1}} < n
        assert_eq!(e.lower_terms, 6);
        let lower = 2.0 / 16.0 * 8.0
            + [3.0f64, 7.0, 15.0, 31.0, 63.0]
                .iter()
                .map(|&m| (m + 1.0) / 2f64.powf(m + 3.0) * 128.0)
                .sum::<f64>();
        let upper = 3.0 / 2.0 * 8.0
            + [3.0f64, 7.0, 15.0, 31.0, 63.0]
                .iter()
                .map(|&m| (m + 2.0) / 2f64.powf(m) * 128.0)
                .sum::<f64>()
            + 3.0;
        assert!(close(e.lower, lower) && close(e.upper, upper), "{e:?}");
    }

    #[test]
    fn sandwich_matches_exact_rationals() {
        let seqs = [
            MSequence::identity(),
            MSequence::beta(0.5).unwrap(),
            MSequence::beta_ratio(2, 3).unwrap(),
            MSequence::explicit(&[1, 2, 6, 7, 20, 200], TailPolicy::Frozen).unwrap(),
        ];
        for seq in &seqs {
            for n in [2u64, 3, 4, 5, 9, 16, 17, 100, 128, 1000, 1 << 12, 1 << 14] {
                let e = sandwich_bounds(seq, n).unwrap();
                let (lo, hi) = sandwich_exact(seq, n);
                assert!(
                    close(e.lower, lo) && close(e.upper, hi),
                    "{seq} n={n}: {e:?} vs {lo} {hi}"
                );
                assert!(e.lower <= e.upper);
            }
        }
    }

    #[test]
    fn sandwich_monotone_on_powers_of_two() {
        for seq in [
            MSequence::identity(),
            MSequence::beta(0.5).unwrap(),
            MSequence::beta(0.25).unwrap(),
        ] {
            let mut prev = sandwich_bounds(&seq, 2).unwrap();
            for e in 2..40 {
                let cur = sandwich_bounds(&seq, 1 << e).unwrap();
                assert!(cur.lower >= prev.lower && cur.upper >= prev.upper);
                prev = cur;
            }
        }
    }

    #[test]
    fn gamma_lemma_examples() {
        let id = MSequence::identity();
        let e = gamma_lemma_bounds(&id, 16, 1.0, 1.0).unwrap();
        assert!(close(e.lower, 1.5));
        // beta = 1: C = 2, n^0 = 1
        assert!(close(e.upper, 3.0 * 12.0 + 3.0 * 2.0 * 4.0 + 3.0));
        let half = MSequence::beta(0.5).unwrap();
        let e = gamma_lemma_bounds(&half, 128, 2.0, 1.0).unwrap();
        assert!(close(e.lower, 6.5));
        let c = 2f64.sqrt() / 2.0;
        assert!(close(e.upper, 3.0 * 52.0 + 3.0 * c * 128f64.sqrt() * 7.0 + 3.0));
        assert!(close(e.constants["C"], c));
        assert!(matches!(
            gamma_lemma_bounds(&half, 128, 1.5, 1.0),
            Err(Error::HypothesisViolated(_))
        ));
        // fractional beta breaks the hypothesis with delta = 1
        let quarter = MSequence::beta(0.25).unwrap();
        assert!(gamma_lemma_bounds(&quarter, 64, 4.0 / 3.0, 1.0).is_err());
        // m = 1, 2, 3, 5, 8, 12, ...: the worst excess over the first 30 terms is 5
        assert!(gamma_lemma_bounds(&quarter, 64, 4.0 / 3.0, 5.0).is_ok());
        assert!(gamma_lemma_bounds(&quarter, 64, 4.0 / 3.0, 4.9).is_err());
    }

    #[test]
    fn weak_examples() {
        let id = MSequence::identity();
        let e = weak_bounds(&id, 4, DEFAULT_C0).unwrap();
        assert!(close(e.upper, 10.0));
        assert_eq!(e.constants["lower_raw"], 5.0); // m = 1, 2 <= log2 4
        let e = weak_bounds(&id, 3, DEFAULT_C0).unwrap();
        assert_eq!(e.constants["lower_raw"], 2.0);
        let slow = MSequence::slow(Omega::Log2, 1 << 40).unwrap();
        let e = weak_bounds(&slow, 65, DEFAULT_C0).unwrap();
        assert!(close(e.upper, 6.0));
        assert_eq!(e.upper_terms, 1);
    }

    #[test]
    fn weak_upper_below_strict_upper() {
        for seq in [MSequence::identity(), MSequence::beta(0.5).unwrap()] {
            for e in 1..=20 {
                let n = 1u64 << e;
                let w = weak_bounds(&seq, n, DEFAULT_C0).unwrap();
                let s = sandwich_bounds(&seq, n).unwrap();
                assert!(w.upper <= s.upper + 1e-9, "n = {n}");
            }
        }
    }

    #[test]
    fn peak_table() {
        let half = MSequence::beta(0.5).unwrap();
        let rows = peak_report(&half, 4, None).unwrap();
        assert!(rows[0].flagged && rows[0].n == 2 && rows[0].gamma == 0.0);
        assert_eq!((rows[2].n, rows[2].gamma), (128, 52.0));
        assert!((rows[2].log_n_gamma.unwrap() - 0.8143).abs() < 1e-3);
        assert_eq!((rows[3].n, rows[3].gamma), (1 << 15, 1844.0));
        assert!((rows[3].log_n_gamma.unwrap() - 0.7233).abs() < 1e-3);
        assert_eq!(peak_report(&half, 6, None).unwrap()[5].n, 1 << 63);
        assert!(peak_report(&half, 7, None).is_err());
    }

    #[test]
    fn csv_layout() {
        let e = sandwich_bounds(&MSequence::identity(), 4).unwrap();
        assert_eq!(
            envelopes_to_csv("seq=identity", &[e]),
            "# seq=identity\nn,lower,upper,kind\n4,0.875,13,strict_sandwich\n"
        );
    }
}
