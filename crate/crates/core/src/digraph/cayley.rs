//! Right Cayley graphs of finitely generated monoids, materialized out to
//! a radius.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::normal_form::{Letter, ReducedWord, Variant};
use crate::partition::MSequence;

use super::Digraph;

/// A monoid with a finite generating set and a way to multiply on the
/// right by a generator.
pub trait CayleySemigroup {
    type Elem: Clone + Eq + Hash;

    fn identity(&self) -> Self::Elem;

    fn generator_count(&self) -> usize;

    /// `e · t_i`.
    fn mul_generator(&self, e: &Self::Elem, i: usize) -> Result<Self::Elem>;

    /// `dist(o, e)` in the Cayley graph.
    fn word_length(&self, e: &Self::Elem) -> u64;

    fn label(&self, e: &Self::Elem) -> String;
}

/// The monoids `S_m` (strict) and their weak quotients, generated by
/// `x, y` in that order.
#[derive(Debug, Clone)]
pub struct RewritingSemigroup {
    pub seq: MSequence,
    pub variant: Variant,
}

impl CayleySemigroup for RewritingSemigroup {
    type Elem = ReducedWord;

    fn identity(&self) -> ReducedWord {
        ReducedWord::identity(self.variant)
    }

    fn generator_count(&self) -> usize {
        2
    }

    fn mul_generator(&self, e: &ReducedWord, i: usize) -> Result<ReducedWord> {
        let letter = if i == 0 { Letter::X } else { Letter::Y };
        e.append_generator(letter, &self.seq)
    }

    fn word_length(&self, e: &ReducedWord) -> u64 {
        e.length()
    }

    fn label(&self, e: &ReducedWord) -> String {
        if e.is_identity() {
            "1".into()
        } else {
            e.expand().to_string()
        }
    }
}

/// `<x, y | xy = y, y^2 = y>`: every element is `x^m` or `y x^m`, and
/// right multiplication by `y` resets to `y`. A walk's distance from the
/// identity is the length of the current run of `x`'s (plus the `y`).
#[derive(Debug, Clone, Copy, Default)]
pub struct ResetSemigroup;

/// `(starts_with_y, m)` stands for `y x^m` or `x^m`.
pub type ResetElem = (bool, u64);

impl CayleySemigroup for ResetSemigroup {
    type Elem = ResetElem;

    fn identity(&self) -> ResetElem {
        (false, 0)
    }

    fn generator_count(&self) -> usize {
        2
    }

    fn mul_generator(&self, &(has_y, m): &ResetElem, i: usize) -> Result<ResetElem> {
        Ok(if i == 0 { (has_y, m + 1) } else { (true, 0) })
    }

    fn word_length(&self, &(has_y, m): &ResetElem) -> u64 {
        m + u64::from(has_y)
    }

    fn label(&self, &(has_y, m): &ResetElem) -> String {
        let xs = match m {
            0 => String::new(),
            1 => "x".into(),
            _ => format!("x^{m}"),
        };
        match (has_y, m) {
            (false, 0) => "1".into(),
            (false, _) => xs,
            (true, _) => format!("y{xs}"),
        }
    }
}

/// The free monoid on `d` letters; its Cayley graph is the `d`-ary
/// out-tree.
#[derive(Debug, Clone, Copy)]
pub struct FreeSemigroup {
    pub d: usize,
}

impl CayleySemigroup for FreeSemigroup {
    type Elem = Vec<u8>;

    fn identity(&self) -> Vec<u8> {
        Vec::new()
    }

    fn generator_count(&self) -> usize {
        self.d
    }

    fn mul_generator(&self, e: &Vec<u8>, i: usize) -> Result<Vec<u8>> {
        let mut w = e.clone();
        w.push(i as u8);
        Ok(w)
    }

    fn word_length(&self, e: &Vec<u8>) -> u64 {
        e.len() as u64
    }

    fn label(&self, e: &Vec<u8>) -> String {
        if e.is_empty() {
            return "1".into();
        }
        e.iter().map(|&c| (b'a' + c) as char).collect()
    }
}

/// Breadth-first ball of radius `radius` around the identity. Vertices at
/// distance exactly `radius` are truncated; vertex ids follow BFS order
/// with generators tried in order.
pub fn cayley_ball<S: CayleySemigroup>(sg: &S, radius: u64) -> Result<Digraph> {
    let mut index: HashMap<S::Elem, usize> = HashMap::new();
    let mut elems = vec![sg.identity()];
    let mut dist = vec![0u64];
    index.insert(elems[0].clone(), 0);
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    let mut head = 0;
    while head < elems.len() {
        let u = head;
        head += 1;
        if dist[u] >= radius {
            continue;
        }
        for i in 0..sg.generator_count() {
            let next = sg.mul_generator(&elems[u], i)?;
            let v = match index.get(&next) {
                Some(&v) => v,
                None => {
                    let v = elems.len();
                    index.insert(next.clone(), v);
                    elems.push(next);
                    dist.push(dist[u] + 1);
                    out.push(Vec::new());
                    v
                }
            };
            out[u].push(v);
        }
    }
    let truncated = dist.iter().map(|&d| d >= radius).collect();
    let labels = elems.iter().map(|e| sg.label(e)).collect();
    Digraph::new(out, labels, truncated)
}

/// Named Cayley graphs for the command line: `reset`, `free:D`, or
/// `strict:<sequence>` / `weak:<sequence>`.
#[derive(Debug, Clone)]
pub enum CayleySpec {
    Reset,
    Free(usize),
    Rewriting(Box<RewritingSemigroup>),
}

impl CayleySpec {
    pub fn ball(&self, radius: u64) -> Result<Digraph> {
        match self {
            CayleySpec::Reset => cayley_ball(&ResetSemigroup, radius),
            CayleySpec::Free(d) => cayley_ball(&FreeSemigroup { d: *d }, radius),
            CayleySpec::Rewriting(sg) => cayley_ball(sg.as_ref(), radius),
        }
    }

    pub fn generator_count(&self) -> usize {
        match self {
            CayleySpec::Reset => 2,
            CayleySpec::Free(d) => *d,
            CayleySpec::Rewriting(_) => 2,
        }
    }
}

impl fmt::Display for CayleySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CayleySpec::Reset => f.write_str("reset"),
            CayleySpec::Free(d) => write!(f, "free:{d}"),
            CayleySpec::Rewriting(sg) => write!(f, "{}:{}", sg.variant, sg.seq),
        }
    }
}

impl FromStr for CayleySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown Cayley graph {s:?}"));
        if s == "reset" {
            return Ok(CayleySpec::Reset);
        }
        let (head, rest) = s.split_once(':').ok_or_else(bad)?;
        match head {
            "free" => {
                let d: usize = rest.parse().map_err(|_| bad())?;
                if !(1..=26).contains(&d) {
                    return Err(Error::InvalidParameter("free:D needs 1 <= D <= 26".into()));
                }
                Ok(CayleySpec::Free(d))
            }
            "strict" | "weak" => Ok(CayleySpec::Rewriting(Box::new(RewritingSemigroup {
                seq: rest.parse()?,
                variant: head.parse()?,
            }))),
            _ => Err(bad()),
        }
    }
}
