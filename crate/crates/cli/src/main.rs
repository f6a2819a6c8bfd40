use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use semiwalk_core::digraph::{spread_table, spread_table_csv, CayleySpec, Digraph};
use semiwalk_core::experiments::{default_params, parse_count, run_recipe, ExperimentSpec, DEFAULT_SEED, RECIPES};
use semiwalk_core::rng::mix64;
use semiwalk_core::subwords::{
    constant_strategies, rows_to_csv, sampled_last_letter_maps, sampled_pseudorandom, subword_sweep,
};
use semiwalk_core::walk::{estimate_speed, WalkConfig};
use semiwalk_core::{MSequence, Result, Variant};

#[derive(Parser)]
#[command(
    name = "semiwalk",
    version,
    about = "Random walks on semigroups defined by class-partition rewriting rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named recipe and print one line per criterion.
    Run {
        recipe: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the recipe's `trials` parameter.
        #[arg(long)]
        trials: Option<u64>,
        /// Write report.json, criteria.txt and the CSV artifacts here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// `key = value` lines applied on top of the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Extra `key=value` overrides, applied last.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the recipes and their default parameters.
    List,
    /// Monte Carlo speed curve as CSV (or JSON).
    Speed {
        /// e.g. `identity`, `beta:1/2`, `explicit:1,3,4,9`, `slow:log2`.
        #[arg(long)]
        seq: String,
        #[arg(long, default_value = "strict")]
        variant: Variant,
        /// Comma-separated, `2^k` accepted.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Rooted ball spread table `n,F,exact`.
    Spread {
        /// Edge list file, one `u v` pair per line, root 0.
        #[arg(long, conflicts_with = "cayley", required_unless_present = "cayley")]
        graph: Option<PathBuf>,
        /// `reset`, `free:D`, `strict:<seq>` or `weak:<seq>`.
        #[arg(long, requires = "radius")]
        cayley: Option<CayleySpec>,
        #[arg(long)]
        radius: Option<u64>,
        /// Largest `n` tabulated; defaults to the radius, or 32 for files.
        #[arg(long)]
        n_max: Option<u64>,
    },
    /// Pattern occurrence probabilities against the lower bound.
    Subword {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Sampled last-letter and hash strategies, each.
        #[arg(long, default_value_t = 10)]
        sampled: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Run {
            recipe,
            seed,
            trials,
            out,
            config,
            overrides,
        } => {
            let mut spec = ExperimentSpec::new(&recipe)?;
            if let Some(path) = config {
                spec.apply_config(&fs::read_to_string(path)?)?;
            }
            if let Some(seed) = seed {
                spec.master_seed = seed;
            }
            if let Some(t) = trials {
                spec.apply_config(&format!("trials = {t}"))?;
            }
            for kv in overrides {
                spec.apply_config(&kv)?;
            }
            let report = run_recipe(&spec)?;
            println!("# {}", report.fingerprint);
            print!("{}", report.summary());
            if let Some(dir) = out {
                report.write_to(&dir)?;
            }
            Ok(report.all_pass())
        }
        Command::List => {
            for name in RECIPES {
                let params = default_params(name)?;
                let shown: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("{name:<11} {}", shown.join(" "));
            }
            Ok(true)
        }
        Command::Speed {
            seq,
            variant,
            grid,
            trials,
            seed,
            json,
        } => {
            let seq: MSequence = seq.parse()?;
            let grid = grid
                .split(',')
                .map(|t| parse_count(t.trim()))
                .collect::<Result<Vec<_>>>()?;
            let curve = estimate_speed(&WalkConfig::new(seq, variant, grid, trials, seed)?)?;
            if json {
                println!("{}", curve.to_json());
            } else {
                print!("{}", curve.to_csv());
            }
            Ok(true)
        }
        Command::Spread {
            graph,
            cayley,
            radius,
            n_max,
        } => {
            let (g, label, default_max) = match (graph, cayley) {
                (Some(path), _) => {
                    let g = Digraph::load_edge_list(&fs::read_to_string(&path)?)?;
                    (g, path.display().to_string(), 32)
                }
                (None, Some(spec)) => {
                    let r = radius.expect("clap enforces --radius");
                    (spec.ball(r)?, format!("{spec} radius {r}"), r)
                }
                (None, None) => unreachable!("clap enforces one source"),
            };
            let rows = spread_table(&g, n_max.unwrap_or(default_max));
            print!("{}", spread_table_csv(&format!("{label} vertices={}", g.len()), &rows));
            Ok(true)
        }
        Command::Subword {
            d,
            n,
            k,
            sampled,
            trials,
            seed,
        } => {
            let mut strategies = constant_strategies(d, k);
            strategies.extend(sampled_last_letter_maps(d, k, sampled, mix64(seed, 0)));
            strategies.extend(sampled_pseudorandom(k, sampled, mix64(seed, 1)));
            let rows = subword_sweep(d, n, k, &strategies, trials, mix64(seed, 2))?;
            let config = format!("d={d} n={n} k={k} sampled={sampled} trials={trials} seed={seed}");
            print!("{}", rows_to_csv(&config, &rows));
            Ok(rows.iter().all(|r| r.pass))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
