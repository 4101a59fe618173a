use std::path::Path;

use plasma_lab::cli::{parse_args, run};
use plasma_lab::Error;

fn args(line: &str) -> Vec<String> {
    std::iter::once("plasma-lab".to_string()).chain(line.split_whitespace().map(String::from)).collect()
}

fn run_in(dir: &Path, line: &str) -> i32 {
    let mut a = args(line);
    a.push("--out".into());
    a.push(dir.display().to_string());
    run(a)
}

#[test]
fn every_recipe_config_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = parse_args(args(&format!("--config {}", path.display()))).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(cfg.out.starts_with("out"), "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 11);
}

#[test]
fn unknown_and_misplaced_keys_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "command = \"emden\"\n[emden]\nN = 3\np = 2.0\nwidth = 4\n").unwrap();
    match parse_args(args(&format!("--config {}", path.display()))) {
        Err(Error::Config { key, .. }) => assert_eq!(key, "emden.width"),
        other => panic!("{other:?}"),
    }
    match parse_args(args("emden --N 3 --p 2 --lambda 4")) {
        Err(Error::Config { key, .. }) => assert_eq!(key, "lambda"),
        other => panic!("{other:?}"),
    }
    std::fs::write(&path, "command = \"emden\"\ncolour = 1\n").unwrap();
    match parse_args(args(&format!("--config {}", path.display()))) {
        Err(Error::Config { key, .. }) => assert_eq!(key, "colour"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "command = \"emden\"\nout = \"from-file\"\nseed = 4\n[emden]\nN = 3\np = 1.5\n").unwrap();
    let cfg = parse_args(args(&format!("emden --config {} --p 2.5 --seed 9", path.display()))).unwrap();
    assert_eq!(cfg.params.p, Some(2.5));
    assert_eq!(cfg.params.n, Some(3));
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.out, Path::new("from-file"));
    assert_eq!(cfg.command(), "emden");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), "emden --N 3 --p 2"), 0);
    assert_eq!(run_in(dir.path(), "emden --N 3 --p 7"), 2);
    assert_eq!(run_in(dir.path(), "solve --domain disk --h 0.0625 --p 1 --lambda 3"), 2);
    assert_eq!(run_in(dir.path(), "emden --N 3"), 2);
    // α > 0 on this branch, so there is nothing to rescale
    assert_eq!(run_in(dir.path(), "ball --N 3 --p 2 --lambda-ratio 0.5"), 0);
    let branch = dir.path().join("branch.json");
    assert_eq!(run_in(dir.path(), &format!("spikes --from {}", branch.display())), 3);
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for line in [
        "solve --domain disk --h 0.0625 --p 2 --lambda 8 --starts 2 --seed 3",
        "continuation --domain square --h 0.0625 --p 2 --lambda-max 20 --steps 5",
        "ball --N 3 --p 2 --lambda-ratio 2,10",
    ] {
        assert_eq!(run_in(a.path(), line), 0);
        assert_eq!(run_in(b.path(), line), 0);
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 6);
    for name in names {
        assert_eq!(std::fs::read(a.path().join(&name)).unwrap(), std::fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn ball_branch_feeds_spike_analysis_and_report() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), "ball --N 3 --p 2 --lambda-ratio 10,100,1000"), 0);
    let branch = dir.path().join("branch.json");
    assert_eq!(run_in(dir.path(), &format!("spikes --from {} --entry last", branch.display())), 0);
    let spikes: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("spikes.json")).unwrap()).unwrap();
    let quantum = spikes["quantum"].as_f64().unwrap();
    assert!((quantum - 1.0).abs() < 1e-3, "{quantum}");
    assert_eq!(spikes["quantization"]["rows"].as_array().unwrap().len(), 3);
    assert_eq!(run_in(dir.path(), "report"), 0);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    for key in ["ball.json", "branch.json", "spikes.json"] {
        assert!(manifest.get(key).is_some(), "{key}");
    }
}

#[test]
fn continuation_csv_has_monotone_alpha() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), "continuation --domain disk --h 0.03125 --p 2 --lambda-max 5.2"), 0);
    let mut reader = csv::Reader::from_path(dir.path().join("branch.csv")).unwrap();
    let alpha: Vec<f64> = reader.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert!(alpha.len() > 3 && alpha.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn field_csv_header_matches_dimension() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), "solve --domain ball --N 3 --h 0.125 --p 2 --lambda 5"), 0);
    let text = std::fs::read_to_string(dir.path().join("psi.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,y,z,value");
}
