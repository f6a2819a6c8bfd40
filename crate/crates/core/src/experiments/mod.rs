//! Named, reproducible experiments.
//!
//! A recipe is a pure function of an [`ExperimentSpec`] (its parameters
//! and master seed) to a [`Report`]: a list of pass/fail criteria plus CSV
//! and JSON artifacts. Running the same spec twice gives byte-identical
//! artifacts; wall-clock times are kept out of them.
//!
//! Config files are plain text, one `key = value` per line, `#` starts a
//! comment. The keys `seed` and `recipe` are special; every other key is a
//! recipe parameter. Lists are comma separated and accept `2^k` tokens.

mod recipes;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

pub use recipes::{default_params, run_recipe, RECIPES};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub master_seed: u64,
}

impl ExperimentSpec {
    /// Spec with the recipe's frozen defaults.
    pub fn new(name: &str) -> Result<Self> {
        Ok(ExperimentSpec {
            name: name.to_string(),
            params: default_params(name)?,
            master_seed: DEFAULT_SEED,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Apply `key = value` lines on top of the current parameters.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected key = value".into(),
            })?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "seed" => {
                    self.master_seed = v.parse().map_err(|_| Error::Parse {
                        line: i + 1,
                        message: format!("bad seed {v:?}"),
                    })?
                }
                "recipe" if v != self.name => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("config is for recipe {v:?}, not {:?}", self.name),
                    })
                }
                "recipe" => {}
                _ if !self.params.contains_key(k) => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("recipe {:?} has no parameter {k:?}", self.name),
                    })
                }
                _ => {
                    self.params.insert(k.to_string(), v.to_string());
                }
            }
        }
        Ok(())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .params
            .get(key)
            .ok_or_else(|| Error::InvalidParameter(format!("missing parameter {key:?}")))?;
        raw.parse()
            .map_err(|_| Error::InvalidParameter(format!("parameter {key} = {raw:?} does not parse")))
    }

    /// Comma-separated integers; `2^k` is accepted.
    pub fn get_list(&self, key: &str) -> Result<Vec<u64>> {
        let raw: String = self.get(key)?;
        raw.split(',').map(|t| parse_count(t.trim())).collect()
    }

    /// `recipe=... seed=... key=value ...`, sorted by key.
    pub fn fingerprint(&self) -> String {
        let mut s = format!("recipe={} seed={}", self.name, self.master_seed);
        for (k, v) in &self.params {
            let _ = write!(s, " {k}={v}");
        }
        s
    }
}

/// Parse `123` or `2^k`.
pub fn parse_count(t: &str) -> Result<u64> {
    let bad = || Error::InvalidParameter(format!("{t:?} is not a count"));
    match t.split_once('^') {
        Some(("2", e)) => {
            let e: u32 = e.parse().map_err(|_| bad())?;
            1u64.checked_shl(e).filter(|_| e < 64).ok_or_else(bad)
        }
        Some(_) => Err(bad()),
        None => t.parse().map_err(|_| bad()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    /// Acceptance criterion label, e.g. `3` or `4b`.
    pub id: String,
    pub title: String,
    pub pass: bool,
    /// What was measured, including the first failing case if any.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub recipe: String,
    pub fingerprint: String,
    pub criteria: Vec<CriterionResult>,
    /// File name and contents of each artifact.
    #[serde(skip)]
    pub artifacts: Vec<(String, String)>,
}

impl Report {
    fn new(spec: &ExperimentSpec) -> Self {
        Report {
            recipe: spec.name.clone(),
            fingerprint: spec.fingerprint(),
            criteria: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    fn criterion(&mut self, id: &str, title: &str, pass: bool, detail: String) {
        self.criteria.push(CriterionResult {
            id: id.into(),
            title: title.into(),
            pass,
            detail,
        });
    }

    fn artifact(&mut self, name: &str, contents: String) {
        self.artifacts.push((name.into(), contents));
    }

    pub fn get(&self, id: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    /// One line per criterion: `criterion 3 PASS title: detail`.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.criteria {
            let _ = writeln!(
                s,
                "criterion {} {} {}: {}",
                c.id,
                if c.pass { "PASS" } else { "FAIL" },
                c.title,
                c.detail
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    /// Write `report.json`, `criteria.txt` and every artifact into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json())?;
        fs::write(
            dir.join("criteria.txt"),
            format!("# {}\n{}", self.fingerprint, self.summary()),
        )?;
        for (name, contents) in &self.artifacts {
            fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}
