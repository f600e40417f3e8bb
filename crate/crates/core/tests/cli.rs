use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chiral-rmt"))
        .args(args)
        .env_remove("CHIRAL_RMT_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// CSV body without the `#` provenance lines.
fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn every_command_writes_its_header() {
    let cases: &[(&[&str], &str)] = &[
        (&["density", "--grid", "0:2:5"], "lambda,density"),
        (&["mc-density", "--samples", "2000", "--n", "2"], "bin_center,density,std_error"),
        (&["compare", "--samples", "2000", "--n", "2", "--format", "csv"], "bin_center,analytic,histogram,std_error,z"),
        (&["poly", "--n", "3"], "j,kind,power,coefficient"),
        (&["kernel", "--grid", "0.5:1:2", "--n", "3"], "lambda1,lambda2,k,g,w"),
        (&["corr", "--grid", "0.5:1:2", "--n", "2"], "lambda1,lambda2,r2"),
        (&["groupint", "--a", "0.4,1.1", "--samples", "2000"], "label,analytic,mc_mean,mc_se"),
    ];
    for (args, header) in cases {
        let o = run(args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert!(text.starts_with("# command_line: chiral-rmt "), "{args:?}");
        assert!(text.contains("# seed: 1\n") && text.contains("# version: "));
        assert_eq!(body(&text)[0], *header, "{args:?}");
    }
}

#[test]
fn density_grid_includes_endpoints_and_round_trips() {
    let text = stdout(&run(&["density", "--grid", "0:2:5", "--n", "3", "--mu", "0.7"]));
    let rows = body(&text);
    assert_eq!(rows.len(), 6);
    let first: Vec<f64> = rows[1].split(',').map(|v| v.parse().unwrap()).collect();
    let last: Vec<f64> = rows[5].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(last[0], 2.0);
    let ks = chiral_rmt::kernels::KernelSet::new(3, chiral_rmt::ensemble::make_coupling(0.7).unwrap()).unwrap();
    assert_eq!(last[1], chiral_rmt::kernels::level_density(&ks, 2.0).unwrap());
}

#[test]
fn compare_json_has_provenance_and_summary() {
    let o = run(&["compare", "--samples", "5000", "--n", "3", "--mu", "0.4", "--seed", "11"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["provenance"]["seed"], 11);
    assert_eq!(v["provenance"]["n"], 3);
    assert_eq!(v["bins"].as_array().unwrap().len(), 50);
    assert!(v["chi2_per_dof"].as_f64().unwrap() > 0.0);
}

#[test]
fn svg_output() {
    let o = run(&["density", "--grid", "0:3:31", "--format", "svg"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("<svg") || s.starts_with("<?xml"));
    assert!(s.contains("<polyline") && s.contains("<desc>") && s.trim_end().ends_with("</svg>"));
    assert_eq!(run(&["kernel", "--format", "svg"]).status.code(), Some(1));
}

#[test]
fn output_directory_variable() {
    let dir = std::env::temp_dir().join(format!("chiral-rmt-cli-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let o = Command::new(env!("CARGO_BIN_EXE_chiral-rmt"))
        .args(["density", "--grid", "0:1:3"])
        .env("CHIRAL_RMT_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(o.status.success() && o.stdout.is_empty());
    let written = std::fs::read_to_string(dir.join("density.csv")).unwrap();
    assert_eq!(body(&written).len(), 4);
    let o = Command::new(env!("CARGO_BIN_EXE_chiral-rmt"))
        .args(["poly", "--n", "2", "--output", "sub/p.json", "--format", "json"])
        .env("CHIRAL_RMT_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("sub/p.json")).unwrap()).unwrap();
    assert!(v["provenance"].is_object());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    for args in [
        &["density", "--mu", "1.5"][..],
        &["density", "--n", "0"],
        &["density", "--grid", "1:0"],
        &["mc-density", "--samples", "10"],
        &["groupint", "--a", "0.5,0.5"],
        &["groupint", "--a", "x"],
        &["nonsense"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows = body(&text);
    assert_eq!(rows[0], "check,passed,detail");
    assert!(rows[1..].iter().all(|r| r.split(',').nth(1) == Some("true")));
}

#[test]
fn mc_output_is_reproducible_across_worker_counts() {
    let a = run(&["mc-density", "--samples", "20000", "--n", "3", "--workers", "1"]);
    let b = run(&["mc-density", "--samples", "20000", "--n", "3", "--workers", "3"]);
    assert_eq!(body(&stdout(&a)), body(&stdout(&b)));
}
