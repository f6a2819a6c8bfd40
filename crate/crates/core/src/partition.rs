//! Increasing integer sequences `1 = m_1 < m_2 < ...` and the partition of
//! the positive integers into classes `[m_k, m_{k+1})`.
//!
//! Sequences are materialized lazily. Generated kinds (identity, beta, slow)
//! stop at a saturation cap; once a sequence is exhausted the next term is
//! only known through a lower bound, which is still enough to answer class
//! queries for every `j` up to the cap.

use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default saturation cap, `2^63 - 1`.
pub const DEFAULT_CAP: u64 = i64::MAX as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Identity,
    Beta,
    Slow,
    Explicit,
}

/// What an explicit sequence does past its last listed term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailPolicy {
    /// The last class is unbounded: `[m_K, infinity)`.
    #[default]
    Frozen,
    /// Nothing is known past the list; class queries there fail.
    Error,
}

/// Monotone target function used by the slow-sequence construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Omega {
    Log2,
    Sqrt,
    Linear,
    Constant(f64),
}

impl Omega {
    pub fn eval(&self, n: u64) -> f64 {
        let x = n as f64;
        match *self {
            Omega::Log2 => x.log2(),
            Omega::Sqrt => x.sqrt(),
            Omega::Linear => x,
            Omega::Constant(c) => c,
        }
    }
}

impl fmt::Display for Omega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Omega::Log2 => write!(f, "log2"),
            Omega::Sqrt => write!(f, "sqrt"),
            Omega::Linear => write!(f, "linear"),
            Omega::Constant(c) => write!(f, "const={c}"),
        }
    }
}

impl FromStr for Omega {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log2" => Ok(Omega::Log2),
            "sqrt" => Ok(Omega::Sqrt),
            "linear" | "id" => Ok(Omega::Linear),
            other => match other.strip_prefix("const=") {
                Some(c) => c
                    .parse::<f64>()
                    .map(Omega::Constant)
                    .map_err(|_| Error::InvalidParameter(format!("bad omega constant {c:?}"))),
                None => Err(Error::InvalidParameter(format!("unknown omega {other:?}"))),
            },
        }
    }
}

/// A sequence term as far as it is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Exact(u64),
    /// The term exists but is only known to exceed the given value.
    /// `Above(u64::MAX)` means the term is infinite (frozen tail).
    Above(u64),
}

impl Term {
    /// Decide `term <= x`, failing when the lower bound cannot settle it.
    pub fn le(self, x: u64, cap: u64) -> Result<bool> {
        match self {
            Term::Exact(m) => Ok(m <= x),
            Term::Above(b) if x <= b => Ok(false),
            Term::Above(_) => Err(Error::SequenceCapExceeded {
                what: format!("comparison with {x}"),
                cap,
            }),
        }
    }
}

#[derive(Debug, Clone)]
enum Generator {
    Identity,
    Beta {
        beta: BigRational,
        /// `beta^(len)` where `len` is the number of materialized terms.
        power: BigRational,
    },
    Slow {
        omega: Omega,
        /// `sum_{i<k} (m_i + 2) + 3` for the next index `k`.
        threshold: f64,
    },
    Explicit,
}

#[derive(Debug, Clone)]
struct Materialized {
    terms: Vec<u64>,
    /// Set once no further term can be generated: the next term is known
    /// to be strictly larger than this value.
    exhausted: Option<u64>,
    generator: Generator,
}

impl Materialized {
    fn last(&self) -> u64 {
        *self.terms.last().expect("m_1 is always present")
    }

    /// Produce one more term or mark the sequence exhausted.
    fn extend_one(&mut self, cap: u64) {
        if self.exhausted.is_some() {
            return;
        }
        let last = self.last();
        match &mut self.generator {
            Generator::Identity => {
                if last >= cap {
                    self.exhausted = Some(cap);
                } else {
                    self.terms.push(last + 1);
                }
            }
            Generator::Beta { beta, power } => {
                // m_{len+1} = m_len + floor(beta^len)
                let step = power.floor().to_integer();
                let next = BigInt::from(last) + step;
                match next.to_u64() {
                    Some(m) if m <= cap => {
                        self.terms.push(m);
                        *power = &*power * &*beta;
                    }
                    _ => self.exhausted = Some(cap),
                }
            }
            Generator::Slow { omega, threshold } => {
                // next term must exceed 2^last
                if last >= 64 || (1u64 << last) >= cap {
                    self.exhausted = Some(cap);
                    return;
                }
                let lo = (1u64 << last) + 1;
                let t = *threshold;
                if omega.eval(cap) <= t {
                    self.exhausted = Some(cap);
                    return;
                }
                // smallest m in [lo, cap] with omega(m) > t, omega nondecreasing
                let (mut a, mut b) = (lo, cap);
                while a < b {
                    let mid = a + (b - a) / 2;
                    if omega.eval(mid) > t {
                        b = mid;
                    } else {
                        a = mid + 1;
                    }
                }
                self.terms.push(a);
                *threshold += a as f64 + 2.0;
            }
            Generator::Explicit => unreachable!("explicit sequences are exhausted at construction"),
        }
    }
}

/// The sequence `m = (m_1 = 1, m_2, ...)` together with its class partition.
#[derive(Debug)]
pub struct MSequence {
    kind: SequenceKind,
    alpha: Option<f64>,
    omega: Option<Omega>,
    cap: u64,
    spec: String,
    state: RwLock<Materialized>,
}

impl Clone for MSequence {
    fn clone(&self) -> Self {
        MSequence {
            kind: self.kind,
            alpha: self.alpha,
            omega: self.omega,
            cap: self.cap,
            spec: self.spec.clone(),
            state: RwLock::new(self.state.read().expect("poisoned").clone()),
        }
    }
}

impl MSequence {
    fn with_generator(kind: SequenceKind, generator: Generator, cap: u64, spec: String) -> Self {
        MSequence {
            kind,
            alpha: None,
            omega: None,
            cap,
            spec,
            state: RwLock::new(Materialized {
                terms: vec![1],
                exhausted: None,
                generator,
            }),
        }
    }

    /// `m_k = k`.
    pub fn identity() -> Self {
        Self::with_generator(
            SequenceKind::Identity,
            Generator::Identity,
            DEFAULT_CAP,
            "identity".into(),
        )
    }

    /// `m_i = 1 + floor(beta) + ... + floor(beta^(i-1))` with
    /// `beta = 1 / (1 - alpha)`. The float is converted exactly.
    pub fn beta(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
        }
        let exact = BigRational::from_float(alpha).expect("finite");
        Self::beta_exact(exact, format!("beta:{alpha}"))
    }

    /// Beta sequence with `alpha = numer / denom` held exactly, so that e.g.
    /// `alpha = 2/3` yields `beta = 3` without rounding.
    pub fn beta_ratio(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 || numer == 0 || numer >= denom {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0,1), got {numer}/{denom}"
            )));
        }
        let alpha = BigRational::new(numer.into(), denom.into());
        Self::beta_exact(alpha, format!("beta:{numer}/{denom}"))
    }

    fn beta_exact(alpha: BigRational, spec: String) -> Result<Self> {
        let one = BigRational::one();
        if alpha <= BigRational::zero() || alpha >= one {
            return Err(Error::InvalidParameter("alpha must lie in (0,1)".into()));
        }
        let beta = &one / (&one - &alpha);
        let alpha_f = alpha.to_f64().unwrap_or(f64::NAN);
        let mut seq = Self::with_generator(
            SequenceKind::Beta,
            Generator::Beta {
                power: beta.clone(),
                beta,
            },
            DEFAULT_CAP,
            spec,
        );
        seq.alpha = Some(alpha_f);
        Ok(seq)
    }

    /// A finite, strictly increasing list starting at 1.
    pub fn explicit(terms: &[u64], tail: TailPolicy) -> Result<Self> {
        if terms.first() != Some(&1) {
            return Err(Error::InvalidParameter("explicit sequence must start at 1".into()));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "explicit sequence must be strictly increasing".into(),
            ));
        }
        let last = *terms.last().expect("nonempty");
        let list = terms.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        let spec = match tail {
            TailPolicy::Frozen => format!("explicit:{list}"),
            TailPolicy::Error => format!("explicit:{list}:tail=error"),
        };
        let seq = MSequence {
            kind: SequenceKind::Explicit,
            alpha: None,
            omega: None,
            cap: DEFAULT_CAP,
            spec,
            state: RwLock::new(Materialized {
                terms: terms.to_vec(),
                exhausted: Some(match tail {
                    TailPolicy::Frozen => u64::MAX,
                    TailPolicy::Error => last,
                }),
                generator: Generator::Explicit,
            }),
        };
        Ok(seq)
    }

    /// Slowly growing sequence: `m_1 = 1` and `m_k` is the smallest integer
    /// above `2^(m_{k-1})` with `omega(m_k) > sum_{i<k} (m_i + 2) + 3`.
    /// Construction stops once the next term would exceed `cap`.
    pub fn slow(omega: Omega, cap: u64) -> Result<Self> {
        if cap == 0 {
            return Err(Error::InvalidParameter("cap must be positive".into()));
        }
        let mut seq = Self::with_generator(
            SequenceKind::Slow,
            Generator::Slow {
                omega,
                threshold: 1.0 + 2.0 + 3.0,
            },
            cap,
            format!("slow:{omega}:cap={cap}"),
        );
        seq.omega = Some(omega);
        // Slow sequences are short; materialize everything up front.
        {
            let st = seq.state.get_mut().expect("fresh lock");
            while st.exhausted.is_none() {
                st.extend_one(cap);
            }
        }
        Ok(seq)
    }

    /// Replace the saturation cap. Only meaningful before any term beyond the
    /// new cap has been materialized; existing terms above it are dropped.
    pub fn with_cap(mut self, cap: u64) -> Result<Self> {
        if cap == 0 {
            return Err(Error::InvalidParameter("cap must be positive".into()));
        }
        if self.kind == SequenceKind::Slow {
            return Err(Error::InvalidParameter(
                "slow sequences take their cap at construction".into(),
            ));
        }
        self.cap = cap;
        let st = self.state.get_mut().expect("unshared");
        if self.kind != SequenceKind::Explicit {
            st.terms.retain(|&m| m <= cap);
            if st.terms.is_empty() {
                st.terms.push(1);
            }
            st.exhausted = None;
        }
        if !self.spec.contains(":cap=") {
            self.spec = format!("{}:cap={cap}", self.spec);
        }
        Ok(self)
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// `beta = 1 / (1 - alpha)` for beta sequences.
    pub fn beta_value(&self) -> Option<f64> {
        self.alpha.map(|a| 1.0 / (1.0 - a))
    }

    pub fn omega(&self) -> Option<Omega> {
        self.omega
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Canonical textual form, parseable by [`FromStr`].
    pub fn spec(&self) -> &str {
        &self.spec
    }

    /// Number of terms materialized so far.
    pub fn materialized_len(&self) -> usize {
        self.state.read().expect("poisoned").terms.len()
    }

    /// True once generation stopped (cap reached or explicit list ended).
    pub fn is_exhausted(&self) -> bool {
        self.state.read().expect("poisoned").exhausted.is_some()
    }

    /// Snapshot of the materialized terms.
    pub fn materialized_terms(&self) -> Vec<u64> {
        self.state.read().expect("poisoned").terms.clone()
    }

    /// Materialize until the last term exceeds `j` or generation stops.
    fn ensure_beyond(&self, j: u64) {
        {
            let st = self.state.read().expect("poisoned");
            if st.last() > j || st.exhausted.is_some() {
                return;
            }
        }
        let mut st = self.state.write().expect("poisoned");
        while st.last() <= j && st.exhausted.is_none() {
            st.extend_one(self.cap);
        }
    }

    /// Materialize until at least `count` terms exist or generation stops.
    fn ensure_len(&self, count: usize) {
        {
            let st = self.state.read().expect("poisoned");
            if st.terms.len() >= count || st.exhausted.is_some() {
                return;
            }
        }
        let mut st = self.state.write().expect("poisoned");
        while st.terms.len() < count && st.exhausted.is_none() {
            st.extend_one(self.cap);
        }
    }

    /// The `k`-th term (1-based).
    pub fn term(&self, k: usize) -> Result<Term> {
        if k == 0 {
            return Err(Error::InvalidParameter("terms are indexed from 1".into()));
        }
        if self.kind == SequenceKind::Identity {
            return Ok(if k as u64 <= self.cap {
                Term::Exact(k as u64)
            } else {
                Term::Above(self.cap)
            });
        }
        self.ensure_len(k);
        let st = self.state.read().expect("poisoned");
        match st.terms.get(k - 1) {
            Some(&m) => Ok(Term::Exact(m)),
            None if k == st.terms.len() + 1 => Ok(Term::Above(st.exhausted.expect("exhausted"))),
            // Terms after the first unknown one are only known to increase.
            None => match st.exhausted {
                Some(u64::MAX) => Ok(Term::Above(u64::MAX)),
                Some(b) => Ok(Term::Above(b.saturating_add((k - st.terms.len() - 1) as u64))),
                None => unreachable!("ensure_len stops only when exhausted"),
            },
        }
    }

    /// The `k`-th term, failing unless it is known exactly.
    pub fn exact_term(&self, k: usize) -> Result<u64> {
        match self.term(k)? {
            Term::Exact(m) => Ok(m),
            Term::Above(_) => Err(Error::SequenceCapExceeded {
                what: format!("term m_{k}"),
                cap: self.cap,
            }),
        }
    }

    /// All terms `m_k <= x`, followed by the first term above `x`.
    pub fn prefix_through(&self, x: u64) -> (Vec<u64>, Term) {
        if self.kind == SequenceKind::Identity {
            let top = x.min(self.cap);
            let terms: Vec<u64> = (1..=top).collect();
            let next = if top < self.cap {
                Term::Exact(top + 1)
            } else {
                Term::Above(self.cap)
            };
            return (terms, next);
        }
        self.ensure_beyond(x);
        let st = self.state.read().expect("poisoned");
        let count = st.terms.partition_point(|&m| m <= x);
        let next = match st.terms.get(count) {
            Some(&m) => Term::Exact(m),
            None => Term::Above(st.exhausted.expect("exhausted")),
        };
        (st.terms[..count].to_vec(), next)
    }

    /// The unique `k` with `m_k <= j < m_{k+1}`.
    pub fn class_of(&self, j: u64) -> Result<u64> {
        if j == 0 {
            return Err(Error::InvalidParameter("0 has no class".into()));
        }
        if self.kind == SequenceKind::Identity {
            return if j <= self.cap {
                Ok(j)
            } else {
                Err(Error::SequenceCapExceeded {
                    what: format!("class of {j}"),
                    cap: self.cap,
                })
            };
        }
        self.ensure_beyond(j);
        let st = self.state.read().expect("poisoned");
        if st.last() > j {
            return Ok(st.terms.partition_point(|&m| m <= j) as u64);
        }
        match st.exhausted {
            Some(b) if j <= b => Ok(st.terms.len() as u64),
            _ => Err(Error::SequenceCapExceeded {
                what: format!("class of {j}"),
                cap: self.cap,
            }),
        }
    }

    /// `j' ≺ j`: the class of `j'` is strictly below the class of `j`.
    pub fn precedes(&self, j_prime: u64, j: u64) -> Result<bool> {
        Ok(self.class_of(j_prime)? < self.class_of(j)?)
    }

    /// `j' ⪯ j`.
    pub fn precedes_eq(&self, j_prime: u64, j: u64) -> Result<bool> {
        Ok(self.class_of(j_prime)? <= self.class_of(j)?)
    }

    /// `j' ∼ j`: both lie in the same class.
    pub fn same_class(&self, j_prime: u64, j: u64) -> Result<bool> {
        Ok(self.class_of(j_prime)? == self.class_of(j)?)
    }

    /// `gamma(n) = sum over k with m_{k+1} <= log2 n of m_k 2^(m_{k+1} - m_k)`.
    pub fn gamma(&self, n: u64) -> GammaSum {
        if n < 2 {
            return GammaSum { value: 0.0, terms: 0 };
        }
        // m_{k+1} <= log2 n  <=>  m_{k+1} <= floor(log2 n) for integer terms
        let (prefix, _) = self.prefix_through(u64::from(n.ilog2()));
        let value = prefix
            .windows(2)
            .map(|w| w[0] as f64 * ((w[1] - w[0]) as f64).exp2())
            .sum();
        GammaSum {
            value,
            terms: prefix.len().saturating_sub(1),
        }
    }
}

/// Value of the gamma sum with the number of summands, so that an empty
/// index set is distinguishable from a genuine zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSum {
    pub value: f64,
    pub terms: usize,
}

impl fmt::Display for MSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

/// Parses the sequence mini-language:
///
/// ```text
/// identity[:cap=N]
/// beta:<alpha>[:cap=N]            alpha a decimal (0.5) or fraction (1/3)
/// explicit:<m1,m2,...>[:tail=frozen|error]
/// slow:<omega>[:cap=N]            omega in log2, sqrt, linear, const=<c>
/// ```
impl FromStr for MSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(format!("sequence spec {s:?}: {msg}"));
        let mut parts = s.trim().split(':');
        let head = parts.next().unwrap_or_default();
        let mut positional = Vec::new();
        let mut cap = None;
        let mut tail = TailPolicy::Frozen;
        for p in parts {
            if let Some(v) = p.strip_prefix("cap=") {
                cap = Some(v.parse::<u64>().map_err(|_| bad(format!("bad cap {v:?}")))?);
            } else if let Some(v) = p.strip_prefix("tail=") {
                tail = match v {
                    "frozen" => TailPolicy::Frozen,
                    "error" => TailPolicy::Error,
                    _ => return Err(bad(format!("bad tail policy {v:?}"))),
                };
            } else {
                positional.push(p);
            }
        }
        let seq = match (head, positional.as_slice()) {
            ("identity", []) => MSequence::identity(),
            ("beta", [a]) => parse_alpha(a).map_err(bad)?,
            ("explicit", [list]) => {
                let terms = list
                    .split(',')
                    .map(|t| t.trim().parse::<u64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| bad(e.to_string()))?;
                return MSequence::explicit(&terms, tail);
            }
            ("slow", [omega]) => {
                return MSequence::slow(omega.parse()?, cap.unwrap_or(DEFAULT_CAP));
            }
            _ => return Err(bad("unrecognized form".into())),
        };
        match cap {
            Some(c) => seq.with_cap(c),
            None => Ok(seq),
        }
    }
}

fn parse_alpha(text: &str) -> std::result::Result<MSequence, String> {
    let ratio = if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator {n:?}"))?;
        let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator {d:?}"))?;
        if d.is_zero() {
            return Err("zero denominator".into());
        }
        BigRational::new(n, d)
    } else {
        decimal_to_ratio(text.trim()).ok_or_else(|| format!("bad alpha {text:?}"))?
    };
    MSequence::beta_exact(ratio, format!("beta:{text}")).map_err(|e| e.to_string())
}

/// Exact value of a plain decimal literal such as `0.25`.
fn decimal_to_ratio(text: &str) -> Option<BigRational> {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = format!("{int}{frac}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let numer: BigInt = digits.parse().ok()?;
    let denom = BigInt::from(10u32).pow(frac.len() as u32);
    let g = numer.gcd(&denom);
    Some(BigRational::new(numer / &g, denom / g))
}
