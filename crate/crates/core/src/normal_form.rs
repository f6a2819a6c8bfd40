//! Words over `{x, y}` and their normal forms in the two rewriting systems
//!
//! ```text
//! x x            -> x
//! x y^j x y^j' x -> x y^j x     when class(j') <  class(j)   (strict)
//!                               when class(j') <= class(j)   (weak)
//! ```
//!
//! Both systems are confluent, so every element has a unique irreducible
//! representative `y^j0 x y^j1 x ... y^j(t-1) x y^jt` whose interior
//! exponents have nondecreasing (strict) or strictly increasing (weak)
//! classes. [`ReducedWord`] stores that representative in run-length form
//! and is maintained incrementally by [`ReducedWord::push`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::MSequence;
use crate::rng::{mix64, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    X,
    Y,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::X => 'x',
            Letter::Y => 'y',
        }
    }
}

/// Which quotient of the free monoid on `{x, y}` a word is reduced in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Absorb a block only when its class is strictly lower.
    Strict,
    /// Absorb a block of lower or equal class.
    Weak,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Strict => "strict",
            Variant::Weak => "weak",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Variant::Strict),
            "weak" => Ok(Variant::Weak),
            _ => Err(Error::InvalidParameter(format!("unknown variant {s:?}"))),
        }
    }
}

impl Variant {
    /// Whether a closing block `x y^j x` is absorbed by the preceding block
    /// `x y^last x`.
    #[inline]
    pub fn absorbs(self, seq: &MSequence, last: u64, j: u64) -> Result<bool> {
        match self {
            Variant::Strict => seq.precedes(j, last),
            Variant::Weak => seq.precedes_eq(j, last),
        }
    }
}

/// A word in the free monoid on `{x, y}`; the empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FreeWord(pub Vec<Letter>);

impl FreeWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Uniform length in `[0, max_len]`, then i.i.d. uniform letters.
    pub fn random<R: Rng>(rng: &mut R, max_len: usize) -> Self {
        let len = rng.gen_range(0..=max_len);
        FreeWord(
            (0..len)
                .map(|_| if rng.gen::<bool>() { Letter::Y } else { Letter::X })
                .collect(),
        )
    }

    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        FreeWord(v)
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for FreeWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'x' => Ok(Letter::X),
                'y' => Ok(Letter::Y),
                other => Err(Error::InvalidParameter(format!("letter {other:?} is not in {{x, y}}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(FreeWord)
    }
}

/// Normal form `y^j0 x y^j1 x ... x y^jt`.
///
/// `interior` holds `j1 .. j(t-1)`; `t` is the number of `x`'s.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    pub j0: u64,
    pub interior: Vec<u64>,
    pub jt: u64,
    pub has_x: bool,
    pub variant: Variant,
}

/// Statistics of one class inside a [`BlockStats`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassBlocks {
    /// Number of interior exponents in the class.
    pub count: u64,
    /// Total length `sum (j + 1)` of the blocks `x y^j`.
    pub length: u64,
}

/// Decomposition `y^n0 (prod_k pi_k) x^delta y^n_inf` of a normal form.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStats {
    pub n0: u64,
    pub n_inf: u64,
    pub delta: u64,
    pub per_class: BTreeMap<u64, ClassBlocks>,
}

impl BlockStats {
    /// `n0 + n_inf + delta + sum_k |pi_k|`; always the word length.
    pub fn total_length(&self) -> u64 {
        self.n0 + self.n_inf + self.delta + self.per_class.values().map(|c| c.length).sum::<u64>()
    }
}

impl ReducedWord {
    pub fn identity(variant: Variant) -> Self {
        ReducedWord {
            j0: 0,
            interior: Vec::new(),
            jt: 0,
            has_x: false,
            variant,
        }
    }

    /// Number of `x`'s, `t`.
    pub fn x_count(&self) -> u64 {
        if self.has_x {
            self.interior.len() as u64 + 1
        } else {
            0
        }
    }

    /// Word length `t + j0 + ... + jt`, which is also the distance from the
    /// identity in the Cayley graph.
    pub fn length(&self) -> u64 {
        self.x_count() + self.j0 + self.interior.iter().sum::<u64>() + self.jt
    }

    pub fn is_identity(&self) -> bool {
        !self.has_x && self.j0 == 0
    }

    /// Append one generator in place and return the change in length:
    /// `+1`, `0` (idempotent `x`) or `-j` (a block `y^j` was absorbed).
    #[inline]
    pub fn push(&mut self, letter: Letter, seq: &MSequence) -> Result<i64> {
        match letter {
            Letter::Y => {
                if self.has_x {
                    self.jt += 1;
                } else {
                    self.j0 += 1;
                }
                Ok(1)
            }
            Letter::X if !self.has_x => {
                self.has_x = true;
                Ok(1)
            }
            Letter::X if self.jt == 0 => Ok(0),
            Letter::X => {
                let j = self.jt;
                self.jt = 0;
                match self.interior.last() {
                    Some(&last) if self.variant.absorbs(seq, last, j)? => Ok(-(j as i64)),
                    Some(_) | None => {
                        // with no interior yet the word was y^j0 x y^j: no rule applies
                        self.interior.push(j);
                        Ok(1)
                    }
                }
            }
        }
    }

    /// Append `y^count`.
    pub fn push_y_run(&mut self, count: u64) {
        if self.has_x {
            self.jt += count;
        } else {
            self.j0 += count;
        }
    }

    /// Normal form of `self · g`.
    pub fn append_generator(&self, letter: Letter, seq: &MSequence) -> Result<ReducedWord> {
        let mut r = self.clone();
        r.push(letter, seq)?;
        Ok(r)
    }

    /// Fold a free word through [`push`](Self::push).
    pub fn from_free_word(word: &FreeWord, seq: &MSequence, variant: Variant) -> Result<Self> {
        let mut r = ReducedWord::identity(variant);
        for &l in &word.0 {
            r.push(l, seq)?;
        }
        Ok(r)
    }

    /// Normal form of the product `self · other`.
    pub fn multiply(&self, other: &ReducedWord, seq: &MSequence) -> Result<ReducedWord> {
        if self.variant != other.variant {
            return Err(Error::InvalidParameter(
                "multiplying words of different variants".into(),
            ));
        }
        let mut r = self.clone();
        r.push_y_run(other.j0);
        if other.has_x {
            for &j in &other.interior {
                r.push(Letter::X, seq)?;
                r.push_y_run(j);
            }
            r.push(Letter::X, seq)?;
            r.push_y_run(other.jt);
        }
        Ok(r)
    }

    /// Letter-by-letter expansion of the normal form.
    pub fn expand(&self) -> FreeWord {
        let mut v = Vec::with_capacity(self.length() as usize);
        v.extend(std::iter::repeat_n(Letter::Y, self.j0 as usize));
        if self.has_x {
            for &j in &self.interior {
                v.push(Letter::X);
                v.extend(std::iter::repeat_n(Letter::Y, j as usize));
            }
            v.push(Letter::X);
            v.extend(std::iter::repeat_n(Letter::Y, self.jt as usize));
        }
        FreeWord(v)
    }

    /// Parse an irreducible word into run-length form.
    pub fn from_irreducible(word: &FreeWord, variant: Variant) -> Result<Self> {
        let mut runs = vec![0u64];
        for &l in &word.0 {
            match l {
                Letter::Y => *runs.last_mut().expect("nonempty") += 1,
                Letter::X => runs.push(0),
            }
        }
        if runs.len() == 1 {
            return Ok(ReducedWord {
                j0: runs[0],
                interior: Vec::new(),
                jt: 0,
                has_x: false,
                variant,
            });
        }
        let jt = runs.pop().expect("nonempty");
        let j0 = runs.remove(0);
        if runs.contains(&0) {
            return Err(Error::InvalidParameter(format!("{word} contains xx")));
        }
        Ok(ReducedWord {
            j0,
            interior: runs,
            jt,
            has_x: true,
            variant,
        })
    }

    /// Aggregate the interior blocks by class.
    pub fn block_stats(&self, seq: &MSequence) -> Result<BlockStats> {
        let mut per_class: BTreeMap<u64, ClassBlocks> = BTreeMap::new();
        for &j in &self.interior {
            let e = per_class.entry(seq.class_of(j)?).or_default();
            e.count += 1;
            e.length += j + 1;
        }
        Ok(BlockStats {
            n0: self.j0,
            n_inf: self.jt,
            delta: u64::from(self.has_x),
            per_class,
        })
    }

    /// Check the structural invariants of a normal form.
    pub fn is_reduced(&self, seq: &MSequence) -> Result<bool> {
        if !self.has_x && (self.jt != 0 || !self.interior.is_empty()) {
            return Ok(false);
        }
        if self.interior.contains(&0) {
            return Ok(false);
        }
        for w in self.interior.windows(2) {
            let (a, b) = (seq.class_of(w[0])?, seq.class_of(w[1])?);
            let ok = match self.variant {
                Variant::Strict => a <= b,
                Variant::Weak => a < b,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// JSON object `{j0, interior, jt, has_x}`.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "j0": self.j0,
            "interior": self.interior,
            "jt": self.jt,
            "has_x": self.has_x,
        })
        .to_string()
    }

    pub fn from_json(text: &str, variant: Variant) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            j0: u64,
            interior: Vec<u64>,
            jt: u64,
            has_x: bool,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(ReducedWord {
            j0: raw.j0,
            interior: raw.interior,
            jt: raw.jt,
            has_x: raw.has_x,
            variant,
        })
    }
}

/// `y^j0 (x y^j1) ... x y^jt`; a word without `x` prints as `y^j0`.
impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^{}", self.j0)?;
        if self.has_x {
            for j in &self.interior {
                write!(f, " (x y^{j})")?;
            }
            write!(f, " x y^{}", self.jt)?;
        }
        Ok(())
    }
}

/// A single applicable rewrite in a letter string.
#[derive(Debug, Clone, Copy)]
struct Redex {
    /// Letters `[start, end)` are deleted.
    start: usize,
    end: usize,
}

fn find_redexes(word: &[Letter], seq: &MSequence, variant: Variant, out: &mut Vec<Redex>) -> Result<()> {
    out.clear();
    let xs: Vec<usize> = word
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == Letter::X)
        .map(|(i, _)| i)
        .collect();
    for w in xs.windows(2) {
        if w[1] == w[0] + 1 {
            out.push(Redex {
                start: w[1],
                end: w[1] + 1,
            });
        }
    }
    for w in xs.windows(3) {
        let (p, q, r) = (w[0], w[1], w[2]);
        let j = (q - p - 1) as u64;
        let jp = (r - q - 1) as u64;
        if j >= 1 && jp >= 1 && variant.absorbs(seq, j, jp)? {
            // x y^j x [y^j' x] -> x y^j x
            out.push(Redex {
                start: q + 1,
                end: r + 1,
            });
        }
    }
    Ok(())
}

/// Rewrite `word` to its irreducible form, choosing a uniformly random
/// redex at every step. This is the slow reference used to test the
/// incremental normalizer.
pub fn normalize_reference<R: Rng>(
    word: &FreeWord,
    seq: &MSequence,
    variant: Variant,
    rng: &mut R,
) -> Result<ReducedWord> {
    let mut letters = word.0.clone();
    let mut redexes = Vec::new();
    loop {
        find_redexes(&letters, seq, variant, &mut redexes)?;
        if redexes.is_empty() {
            break;
        }
        let r = redexes[rng.gen_range(0..redexes.len())];
        letters.drain(r.start..r.end);
    }
    ReducedWord::from_irreducible(&FreeWord(letters), variant)
}

/// First disagreement found by [`check_confluence_sample`].
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub sample: usize,
    pub word: FreeWord,
    pub first_order: ReducedWord,
    pub second_order: ReducedWord,
    pub incremental: ReducedWord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfluenceReport {
    pub samples: usize,
    pub all_agree: bool,
    /// Samples whose normal-form length differs from its letter count.
    pub length_mismatches: usize,
    pub counterexample: Option<Counterexample>,
}

/// Normalize random words three ways (two independently seeded reduction
/// orders and the incremental fold) and compare.
///
/// Sample `i` draws its word from stream `mix64(seed, 3i)` and its two
/// reduction orders from streams `3i + 1` and `3i + 2`.
pub fn check_confluence_sample(
    seq: &MSequence,
    variant: Variant,
    num_samples: usize,
    max_len: usize,
    seed: u64,
) -> Result<ConfluenceReport> {
    let outcomes: Vec<Result<(Option<Counterexample>, bool)>> = (0..num_samples)
        .into_par_iter()
        .map(|i| {
            let base = 3 * i as u64;
            let word = FreeWord::random(&mut stream(mix64(seed, base)), max_len);
            let a = normalize_reference(&word, seq, variant, &mut stream(mix64(seed, base + 1)))?;
            let b = normalize_reference(&word, seq, variant, &mut stream(mix64(seed, base + 2)))?;
            let c = ReducedWord::from_free_word(&word, seq, variant)?;
            let length_ok = [&a, &b, &c].iter().all(|r| r.length() == r.expand().len() as u64);
            let cex = (a != b || a != c).then_some(Counterexample {
                sample: i,
                word,
                first_order: a,
                second_order: b,
                incremental: c,
            });
            Ok((cex, length_ok))
        })
        .collect();
    let mut report = ConfluenceReport {
        samples: num_samples,
        all_agree: true,
        length_mismatches: 0,
        counterexample: None,
    };
    for o in outcomes {
        let (cex, length_ok) = o?;
        if !length_ok {
            report.length_mismatches += 1;
        }
        if let Some(c) = cex {
            report.all_agree = false;
            report.counterexample.get_or_insert(c);
        }
    }
    Ok(report)
}
