use std::fs;
use std::path::Path;

use semiwalk_core::experiments::{run_recipe, ExperimentSpec, RECIPES};
use semiwalk_core::walk::simulate_walk;
use semiwalk_core::{MSequence, Variant};

/// Cheap parameters for every recipe.
fn small(name: &str) -> ExperimentSpec {
    let spec = ExperimentSpec::new(name).unwrap();
    let overrides: &[(&str, &str)] = match name {
        "confluence" => &[("samples", "200")],
        "sandwich" => &[("grid", "2^4,2^6"), ("trials", "100")],
        "log_squared" => &[("grid", "2^4,2^7,2^14"), ("trials", "40")],
        "peak_exponents" => &[("trials", "20")],
        "slow_speed" => &[("trials", "200"), ("trend_trials", "50")],
        "weak_speed" => &[("grid", "2^4,2^8"), ("trials", "100")],
        "spread" => &[("radius", "10"), ("exact_through", "4"), ("tree_depth", "8")],
        "escape" => &[("steps", "20000"), ("seeds", "3"), ("radius", "20")],
        "bounded_speed" => &[
            ("grid", "100,1000"),
            ("trials", "50"),
            ("exact_max", "8"),
            ("mc_trials", "1000"),
        ],
        "patterns" => &[("points", "8:2"), ("sampled", "3"), ("trials", "1000")],
        _ => unreachable!(),
    };
    overrides.iter().fold(spec, |s, &(k, v)| s.set(k, v))
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for name in RECIPES {
        let spec = small(name);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_recipe(&spec).unwrap().write_to(a.path()).unwrap();
        run_recipe(&spec).unwrap().write_to(b.path()).unwrap();
        let (fa, fb) = (files(a.path()), files(b.path()));
        assert!(
            fa.len() >= 3,
            "{name}: {:?}",
            fa.iter().map(|f| &f.0).collect::<Vec<_>>()
        );
        assert_eq!(fa, fb, "{name}");
    }
}

#[test]
fn every_criterion_is_reported_once() {
    let mut ids: Vec<String> = RECIPES
        .iter()
        .flat_map(|name| run_recipe(&small(name)).unwrap().criteria.into_iter().map(|c| c.id))
        .collect();
    ids.sort();
    let mut expected: Vec<String> = [
        "1", "2", "3", "4a", "4b", "4c", "5", "6", "7", "8", "9", "10", "11", "12", "13", "14",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    expected.sort();
    assert_eq!(ids, expected);
}

#[test]
fn report_files_carry_the_fingerprint() {
    let spec = small("weak_speed").with_seed(99);
    let dir = tempfile::tempdir().unwrap();
    let report = run_recipe(&spec).unwrap();
    report.write_to(dir.path()).unwrap();
    let criteria = fs::read_to_string(dir.path().join("criteria.txt")).unwrap();
    assert!(criteria.starts_with("# recipe=weak_speed seed=99 "));
    assert!(criteria.contains("criterion 9 "));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["recipe"], "weak_speed");
    assert_eq!(json["criteria"][0]["id"], "9");
    let speed = fs::read_to_string(dir.path().join("weak_speed.csv")).unwrap();
    assert!(speed.starts_with("# seq=identity variant=weak trials=100 "));
}

#[test]
fn config_files_override_defaults() {
    let mut spec = ExperimentSpec::new("patterns").unwrap();
    spec.apply_config("recipe = patterns\nseed = 5\npoints = 8:2\nsampled = 2\ntrials = 500\n")
        .unwrap();
    let report = run_recipe(&spec).unwrap();
    assert!(report.fingerprint.contains("points=8:2"));
    let csv = &report.artifacts.iter().find(|a| a.0 == "patterns.csv").unwrap().1;
    // 4 constant targets of length 2 plus 2 + 2 sampled strategies
    assert_eq!(csv.lines().count(), 2 + 8);
}

#[test]
fn bad_parameters_are_errors() {
    assert!(run_recipe(&ExperimentSpec::new("sandwich").unwrap().set("grid", "16,abc")).is_err());
    assert!(run_recipe(&ExperimentSpec::new("bounded_speed").unwrap().set("exact_max", "40")).is_err());
    assert!(run_recipe(&ExperimentSpec::new("patterns").unwrap().set("points", "8-2")).is_err());
}

/// Below the first y-run of length 65 the slow sequence for log2 acts like
/// a single infinite class, whose speed is bounded; so the weak-walk mean is
/// flat over any desk-scale grid.
#[test]
fn slow_sequence_matches_single_class_below_its_second_term() {
    let slow: MSequence = "slow:log2".parse().unwrap();
    let single: MSequence = "explicit:1:tail=frozen".parse().unwrap();
    for seed in 0..100 {
        let a = simulate_walk(1 << 14, &slow, Variant::Weak, seed).unwrap();
        let b = simulate_walk(1 << 14, &single, Variant::Weak, seed).unwrap();
        assert_eq!(a, b, "seed {seed}");
    }
}
