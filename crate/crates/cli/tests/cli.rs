use std::path::PathBuf;
use std::process::Command;

use qap_core::linearizations::LinearizationKind;
use qap_core::lpcore::{read_lp, solve};
use qap_core::{fixtures, parse_qaplib, Instance};
use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

/// (exit code, stdout, stderr) from the real binary.
fn qap(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qap")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// Same through the library entry point.
fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qap").chain(args.iter().copied());
    let code = qap_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn fixtures_match_the_built_in_instances() {
    let one: Instance = parse_qaplib(&std::fs::read_to_string(fixture("example1.dat")).unwrap()).unwrap();
    let three: Instance = parse_qaplib(&std::fs::read_to_string(fixture("example3.dat")).unwrap()).unwrap();
    assert_eq!(one, fixtures::example1());
    assert_eq!(three, fixtures::example3());
}

#[test]
fn relax_aj_on_example_one() {
    let ex1 = fixture("example1.dat");
    let aj = json(&["relax", "--lin", "aj", &ex1]);
    let xy = json(&["relax", "--lin", "xy", &ex1]);
    let (aj, xy) = (aj["bound"].as_f64().unwrap(), xy["bound"].as_f64().unwrap());
    assert!(aj >= xy - 1e-6);
    assert!(aj <= 23.0 / 18.0 + 1e-9);
}

#[test]
fn compare_example_one() {
    let v = json(&["compare", &fixture("example1.dat")]);
    let b = &v["bounds"];
    let aj = b["relaxations"]["aj"].as_f64().unwrap();
    let xy = b["relaxations"]["xy"].as_f64().unwrap();
    assert!(aj >= xy - 1e-6);
    assert!(b["root_after_cuts"].as_f64().unwrap() >= xy - 1e-6);
    assert!(b["gap_closed"].as_f64().unwrap() > 0.0);
    assert_eq!(v["incumbent"]["perm"], serde_json::json!([2, 1, 3]));
}

#[test]
fn solve_example_one() {
    let v = json(&["solve", &fixture("example1.dat")]);
    assert_eq!(v["status"], "optimal");
    assert!((v["incumbent"]["value"].as_f64().unwrap() - 23.0 / 18.0).abs() < 1e-9);
    assert_eq!(v["incumbent"]["perm"], serde_json::json!([2, 1, 3]));
    for key in ["bounds", "cuts", "tree", "incumbent", "timings"] {
        assert!(v.get(key).is_some());
    }
    assert!(v["tree"]["nodes"].is_u64() && v["tree"]["depth"].is_u64());
}

#[test]
fn identical_runs_are_byte_identical() {
    for args in [
        vec!["solve".to_string(), fixture("example3.dat")],
        vec!["compare".to_string(), fixture("example1.dat")],
        vec!["solve".to_string(), "random:5".into(), "--seed".into(), "7".into()],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (c1, a, _) = qap(&args);
        let (c2, b, _) = qap(&args);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(a, b);
    }
}

#[test]
fn lp_export_reimports_with_the_same_optimum() {
    for input in [fixture("example1.dat"), "random:4".to_string()] {
        for kind in LinearizationKind::ALL {
            let name = kind.short_name();
            let (code, text, err) = run(&["build", "--lin", name, "--format", "lp", "--seed", "3", &input]);
            assert_eq!(code, 0, "{err}");
            let model = read_lp::<f64>(&text).unwrap();
            let reimported = solve(&model).unwrap().objective_value;
            let direct = json(&["relax", "--lin", name, "--seed", "3", &input])["bound"].as_f64().unwrap();
            let scale = direct.abs().max(1.0);
            assert!((reimported - direct).abs() <= 1e-12 * scale, "{name}: {reimported} vs {direct}");
        }
    }
}

#[test]
fn broken_input_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.dat");
    std::fs::write(&path, "3\n0 1 2\n1 x 1\n").unwrap();
    let (code, out, err) = qap(&["parse", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("token 6"), "{err}");

    std::fs::write(&path, "3\n0 1 2\n").unwrap();
    assert_eq!(run(&["parse", path.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["parse", "/definitely/missing.dat"]).0, 2);
    let bad_json = dir.path().join("bad.json");
    std::fs::write(&bad_json, "{\"n\": 2}").unwrap();
    assert_eq!(run(&["parse", bad_json.to_str().unwrap()]).0, 2);
}

#[test]
fn usage_errors_exit_one() {
    let ex1 = fixture("example1.dat");
    assert_eq!(qap(&["solve", &ex1, "--bogus"]).0, 1);
    assert_eq!(qap(&[]).0, 1);
    assert_eq!(run(&["frobnicate", &ex1]).0, 1);
    assert_eq!(run(&["relax", "--lin", "nope", &ex1]).0, 1);
    assert_eq!(run(&["solve", "--threads", "0", &ex1]).0, 1);
    assert_eq!(run(&["solve", "--format", "lp", &ex1]).0, 1);
    assert_eq!(run(&["cuts", "--max-rounds", "0", &ex1]).0, 1);
    assert_eq!(run(&["solve", "--cuts", "maybe", &ex1]).0, 1);
    assert_eq!(run(&["solve", "random:abc"]).0, 1);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("compare"));
}

#[test]
fn capacity_guard_exits_three() {
    assert_eq!(qap(&["relax", "--lin", "aj", "random:7"]).0, 3);
    assert_eq!(run(&["build", "--lin", "aj", "random:7"]).0, 0);
    assert_eq!(run(&["compare", "random:7"]).0, 3);
    let v = json(&["compare", "random:7", "--skip-four-index", "--max-rounds", "1"]);
    assert!(v["bounds"]["relaxations"]["aj"].is_null());
    assert!(v["bounds"]["relaxations"]["xy"].is_f64());
}

#[test]
fn out_flag_writes_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let (code, out, _) = run(&["solve", &fixture("example3.dat"), "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["status"], "optimal");
}

#[test]
fn json_instances_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let (code, _, _) = run(&["parse", "random:4", "--seed", "12", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let from_json = json(&["solve", path.to_str().unwrap()]);
    let from_random = json(&["solve", "random:4", "--seed", "12"]);
    assert_eq!(from_json, from_random);
    let text = run(&["parse", "--format", "text", path.to_str().unwrap()]).1;
    let back: Instance = parse_qaplib(&text).unwrap();
    assert_eq!(back, Instance::random_uniform(4, 12).unwrap());
}

#[test]
fn swapping_matrices_keeps_the_optimum() {
    let ex3 = fixture("example3.dat");
    let plain = json(&["solve", &ex3])["incumbent"]["value"].as_f64().unwrap();
    let swapped = json(&["solve", "--swap-matrices", &ex3])["incumbent"]["value"].as_f64().unwrap();
    assert!((plain - swapped).abs() < 1e-9);
}

#[test]
fn options_reach_the_solver() {
    let ex3 = fixture("example3.dat");
    let off = json(&["solve", "--cuts", "off", &ex3]);
    assert_eq!(off["cuts"].as_array().unwrap().len(), 0);
    let limited = json(&["solve", "--node-limit", "1", "random:6", "--seed", "2"]);
    assert!(limited["tree"]["nodes"].as_u64().unwrap() <= 1);
    let threaded = json(&["solve", "--threads", "2", &ex3]);
    let serial = json(&["solve", &ex3]);
    assert_eq!(threaded["incumbent"]["value"], serial["incumbent"]["value"]);
    let cuts = json(&["cuts", "--max-rounds", "2", &fixture("example1.dat")]);
    assert!(cuts["rounds"].as_u64().unwrap() <= 2);
    let printed = json(&["relax", "--lin", "fy", "--fy-variant", "printed", &fixture("example1.dat")]);
    let standard = json(&["relax", "--lin", "fy", &fixture("example1.dat")]);
    assert_eq!(standard["status"], "optimal");
    // The printed linkage rows exclude every permutation here.
    assert_eq!(printed["status"], "infeasible");
    assert!(printed["bound"].is_null());
}

#[test]
fn text_formats() {
    let ex1 = fixture("example1.dat");
    for sub in ["build", "relax", "cuts", "compare", "solve"] {
        let (code, out, err) = run(&[sub, "--format", "text", &ex1]);
        assert_eq!(code, 0, "{sub}: {err}");
        assert!(!out.is_empty() && !out.trim_start().starts_with('{'));
    }
}
