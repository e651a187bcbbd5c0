use xsplanes::cli::{run, EXIT_FAIL, EXIT_OK, EXIT_USAGE};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("xsplanes").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn gen_is_deterministic() {
    let a = invoke(&["gen", "--seed", "1", "--count", "3"]);
    let b = invoke(&["gen", "--seed", "0x1", "--count", "3"]);
    assert_eq!(a.0, EXIT_OK);
    assert_eq!(a.1, b.1);
    assert_eq!(a.1.lines().count(), 3);
    let c = invoke(&["gen", "--seed", "2", "--count", "3"]);
    assert_ne!(a.1, c.1);
}

#[test]
fn gen_from_explicit_state() {
    let (code, out, _) = invoke(&["gen", "--state", "1,0", "--count", "3"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines,
        [
            "0x0000000000000001",
            "0x0000000000800041",
            "0x0000000001000082"
        ]
    );
}

#[test]
fn gen_unit_format() {
    let (code, out, _) = invoke(&["gen", "--count", "200", "--format", "unit"]);
    assert_eq!(code, EXIT_OK);
    for l in out.lines() {
        let v: f64 = l.parse().unwrap();
        assert!((0.0..1.0).contains(&v));
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(invoke(&["gen", "--count", "nope"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["gen", "--seed", "xyz"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["gen", "-a", "0"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["gen", "--state", "0,0"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["verify", "--n-max", "13"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["census", "--n-bits", "0"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["planes", "--eps", "0.7"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["--help"]).0, EXIT_OK);
}

#[test]
fn small_shifts_warn() {
    let (code, _, err) = invoke(&["gen", "-b", "5", "--count", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("warning"));
}

#[test]
fn verify_table() {
    let (code, out, _) = invoke(&["verify", "--n-max", "4"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[3].contains("58/64"), "{}", rows[3]);
    assert!(rows[4].contains("196/256"), "{}", rows[4]);
    assert!(rows[1..].iter().all(|r| r.ends_with("match")));
}

#[test]
fn census_json() {
    let args = ["census", "--steps", "20000", "--seed", "7"];
    let (code, out, _) = invoke(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, invoke(&args).1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let est = v["analytic_estimate"].as_f64().unwrap();
    assert!((est - 0.285087).abs() < 1e-6);
    assert_eq!(v["analytic_estimate_rational"], "4782969/16777216");
    for src in ["generator", "uniform"] {
        for row in v[src]["grid"].as_array().unwrap() {
            for cell in row.as_array().unwrap() {
                let c = cell.as_f64().unwrap();
                assert!((0.0..=1.0).contains(&c));
            }
        }
    }
}

#[test]
fn control_only_baseline() {
    let (code, out, _) = invoke(&["planes", "--control-only", "--control-points", "200000"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let f = v["control_hit_fraction"].as_f64().unwrap();
    let analytic = v["control_analytic"].as_f64().unwrap();
    let sigma = v["control_sigma"].as_f64().unwrap();
    assert_eq!(analytic, 16.0 / 1024.0);
    assert!((f - analytic).abs() <= 4.0 * sigma, "{f}");
}

#[test]
fn planes_writes_files_and_records_magnification() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = invoke(&[
        "planes",
        "--magnify-exp",
        "22",
        "--target-points",
        "20",
        "--census-steps",
        "1000",
        "--control-points",
        "1000",
        "--threshold",
        "0",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.iter().filter(|n| n.starts_with("mesh_")).count(), 8);
    assert_eq!(names.iter().filter(|n| n.ends_with(".json")).count(), 1);
    assert!(!names.iter().any(|n| n.ends_with(".tmp")));
    let points = std::fs::read_to_string(dir.path().join("points.csv")).unwrap();
    assert!(points.starts_with("# magnify=4194304 params=23,17,26 seed=0x0000000000000001\n"));
    assert_eq!(points.lines().count(), 21);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["magnify"].as_f64(), Some(4194304.0));
    assert_eq!(v["n_in_slab"], 20);
    let mesh = std::fs::read_to_string(dir.path().join("mesh_m8388609_p_p.csv")).unwrap();
    // strips separated by blank lines; 64x64 grid vertices
    assert!(mesh.contains("\n\n"));
    let rows = mesh
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .count();
    assert_eq!(rows, 64 * 64);
}

#[test]
fn planes_threshold_and_io_failures() {
    let dir = tempfile::tempdir().unwrap();
    let common = [
        "planes",
        "-a",
        "8",
        "--target-points",
        "50",
        "--census-steps",
        "100",
        "--control-points",
        "1000",
    ];
    let out_dir = dir.path().join("out");
    let mut args: Vec<&str> = common.to_vec();
    args.extend([
        "--threshold",
        "1e9",
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(invoke(&args).0, EXIT_FAIL);

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let bad = blocker.join("sub");
    let mut args: Vec<&str> = common.to_vec();
    args.extend(["--threshold", "0", "--output-dir", bad.to_str().unwrap()]);
    let (code, _, err) = invoke(&args);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("I/O"), "{err}");
}

#[test]
fn truncated_scan_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = invoke(&[
        "planes",
        "--magnify-exp",
        "4",
        "--target-points",
        "1000",
        "--scan-cap",
        "1000",
        "--census-steps",
        "10",
        "--control-points",
        "100",
        "--threshold",
        "0",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("scan cap"), "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["truncated"], true);
    assert_eq!(v["n_triples_scanned"], 1000);
    let n = v["n_in_slab"].as_u64().unwrap();
    assert!(n > 0 && n < 1000);
}

#[test]
fn empty_slab_sample_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = invoke(&[
        "planes",
        "--target-points",
        "5",
        "--scan-cap",
        "1000",
        "--census-steps",
        "10",
        "--control-points",
        "100",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("no points"), "{err}");
}
