//! Acceptance gate: runs every recipe with its frozen defaults, prints one
//! PASS/FAIL line per criterion and exits non-zero if any criterion fails.
//!
//! Recipes run one after another so the wall-clock budgets measure a
//! single recipe at a time.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use semiwalk_core::experiments::{run_recipe, ExperimentSpec, Report};

/// Recipe, its criteria, and the wall-clock budget if one applies.
const PLAN: &[(&str, &[&str], Option<u64>)] = &[
    ("confluence", &["1", "2"], Some(30)),
    ("sandwich", &["3", "4a", "4b", "4c", "6"], Some(120)),
    ("log_squared", &["5"], None),
    ("peak_exponents", &["7"], None),
    ("slow_speed", &["8"], None),
    ("weak_speed", &["9"], None),
    ("spread", &["10"], None),
    ("escape", &["11", "12"], Some(60)),
    ("bounded_speed", &["13"], None),
    ("patterns", &["14"], Some(60)),
];

fn run(name: &str) -> Result<(Report, Duration), String> {
    let spec = ExperimentSpec::new(name).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let report = run_recipe(&spec).map_err(|e| e.to_string())?;
    Ok((report, start.elapsed()))
}

fn main() -> ExitCode {
    let mut lines: Vec<(String, bool)> = Vec::new();
    for &(recipe, ids, budget) in PLAN {
        match run(recipe) {
            Ok((report, elapsed)) => {
                let secs = elapsed.as_secs_f64();
                let in_budget = budget.is_none_or(|b| secs < b as f64);
                for &id in ids {
                    let line = match report.get(id) {
                        Some(c) => {
                            let pass = c.pass && in_budget;
                            let timing = match budget {
                                Some(b) => format!(" [{recipe} {secs:.1} s, budget {b} s]"),
                                None => format!(" [{recipe} {secs:.1} s]"),
                            };
                            (
                                format!(
                                    "criterion {id:<3} {} {}: {}{timing}",
                                    if pass { "PASS" } else { "FAIL" },
                                    c.title,
                                    c.detail
                                ),
                                pass,
                            )
                        }
                        None => (
                            format!("criterion {id:<3} FAIL recipe {recipe} did not report it"),
                            false,
                        ),
                    };
                    println!("{}", line.0);
                    lines.push(line);
                }
            }
            Err(e) => {
                for &id in ids {
                    let line = (format!("criterion {id:<3} FAIL recipe {recipe} errored: {e}"), false);
                    println!("{}", line.0);
                    lines.push(line);
                }
            }
        }
    }
    let passed = lines.iter().filter(|l| l.1).count();
    println!("\nacceptance summary: {passed} of {} criteria pass", lines.len());
    for (line, _) in &lines {
        println!("  {}", line.split(':').next().unwrap_or(line));
    }
    if passed == lines.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
