use std::process::{Command, Output};

use bounds_cli::{cmd_list, cmd_table, csv_float, Filter, RunConfig, Session};

fn bounds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bounds")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ids_of(listing: &str) -> Vec<String> {
    listing.lines().skip(1).map(|l| l.split_whitespace().next().unwrap().to_owned()).collect()
}

#[test]
fn list_filters_by_target_in_sorted_order() {
    let o = bounds(&["list", "--target", "atan"]);
    assert_eq!(o.status.code(), Some(0));
    let ids = ids_of(&stdout(&o));
    for want in ["shafer-lower", "alirezaei-lower", "alirezaei-upper", "thm4-lower", "thm4-upper", "coro1-arctan-lower", "coro1-arctan-upper"] {
        assert!(ids.iter().any(|i| i == want), "{want}");
    }
    assert!(ids.iter().any(|i| i.starts_with("qi-family")));
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn list_filters_are_conjunctive() {
    let o = bounds(&["list", "--tag", "as-printed-typo", "--target", "acos"]);
    assert_eq!(ids_of(&stdout(&o)), ["guoqi1-upper-as-printed", "thm3-lower-as-printed"]);
    let o = bounds(&["list", "--tag", "as-printed-typo"]);
    let ids = ids_of(&stdout(&o));
    assert!(ids.contains(&"thm3-lower-as-printed".to_owned()));
    assert!(ids.contains(&"lem3-cos-lower-as-printed".to_owned()));
}

#[test]
fn list_of_an_unknown_target_is_empty() {
    let o = bounds(&["list", "--target", "none"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(ids_of(&stdout(&o)).is_empty());
}

#[test]
fn verify_certified_pair_exits_zero() {
    let o = bounds(&["verify", "thm1-lower", "thm1-upper"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let certified = out.lines().filter(|l| l.split_whitespace().nth(1) == Some("certified")).count();
    assert_eq!(certified, 2, "{out}");
}

#[test]
fn expected_violation_prints_a_counterexample_and_exits_zero() {
    let o = bounds(&["verify", "thm3-lower-as-printed"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("violated"));
    assert!(out.contains("counterexample x="), "{out}");
}

#[test]
fn mismatch_exits_one_with_a_counterexample_line() {
    let dir = std::env::temp_dir().join(format!("bounds-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("wrong.catalog");
    std::fs::write(
        &path,
        "entry wrong-claim\ntarget=sinc\nside=lower\ndomain=(0,pi/2)\nexpr=\"1-x^2/7\"\nexpect=certified\nref=\"test\"\nend\n",
    )
    .unwrap();
    let o = bounds(&["--catalog", path.to_str().unwrap(), "verify", "--all"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("MISMATCH"), "{out}");
    assert!(out.contains("counterexample"), "{out}");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["verify", "no-such-entry"][..],
        &["--grid", "10", "list"],
        &["--digits", "20", "list"],
        &["--digits", "65", "verify", "thm1-lower"],
        &["frobnicate"],
        &["verify"],
        &["crossover", "thm1-lower", "carlson-lower"],
        &["--catalog", "/nonexistent/catalog", "list"],
    ] {
        let o = bounds(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn malformed_catalog_is_a_usage_error_not_a_panic() {
    let dir = std::env::temp_dir().join(format!("bounds-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.catalog");
    std::fs::write(&path, "entry x\ntarget=sinc\n").unwrap();
    let o = bounds(&["--catalog", path.to_str().unwrap(), "list"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn crossover_reports_the_crossing() {
    let o = bounds(&["--json", "crossover", "zhu-lower", "thm1-lower"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let x = v["crossings"][0]["x"].as_f64().unwrap();
    assert!((x - 1.28966).abs() < 1e-3);
}

#[test]
fn const_reports_value_and_suspect_flag() {
    let o = bounds(&["const", "b_1702b"]);
    let out = stdout(&o);
    assert!(out.contains("((2*sqrt(2))/(4-pi))"));
    assert!(out.contains("3.29497078115006113205792237632392322533"), "{out}");
    assert!(out.contains("3.81578"));
    assert!(out.contains("SUSPECT"));
    let o = bounds(&["const", "a_1702a"]);
    assert!(stdout(&o).contains("flag         ok"));
}

#[test]
fn table_writes_deterministic_csv() {
    let dir = std::env::temp_dir().join(format!("bounds-cli-table-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fig1.csv");
    let o = bounds(&["table", "acos", "--points", "200", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,carlson-lower,thm3-lower-corrected,carlson-upper,thm3-upper,target");
    assert_eq!(lines.len(), 201);
    assert!(!csv.contains('\r'));
    for l in &lines[1..] {
        let v: Vec<f64> = l.split(',').map(|f| f.parse().unwrap()).collect();
        assert!(v[1] < v[5] && v[2] < v[5] && v[5] < v[3] && v[5] < v[4], "{l}");
        assert!(v[1] <= v[2] && v[4] <= v[3], "{l}");
    }
    let again = cmd_table(&RunConfig::default(), &Session::load(None).unwrap(), "acos", &[], 200).unwrap();
    assert_eq!(again, csv);
}

#[test]
fn csv_numbers_have_17_significant_digits() {
    assert_eq!(csv_float(0.1), "1.0000000000000001e-1");
    assert_eq!(csv_float(-2.0), "-2.0000000000000000e0");
    assert_eq!(csv_float(f64::NAN), "nan");
}

#[test]
fn list_through_the_library_matches_the_binary() {
    let cfg = RunConfig {
        filter: Filter { target: Some("atan".into()), ..Filter::default() },
        ..RunConfig::default()
    };
    let lib = cmd_list(&cfg, &Session::load(None).unwrap().catalog);
    assert_eq!(lib, stdout(&bounds(&["list", "--target", "atan"])));
}

#[test]
fn lemmas_and_substitutions_pass() {
    let o = bounds(&["--grid", "2000", "lemmas"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = bounds(&["substitution", "1802a-lower", "thm4-lower", "--transform", "tant"]);
    assert_eq!(o.status.code(), Some(0));
    let o = bounds(&["substitution", "1802a-lower", "thm4-lower", "--transform", "cos2t"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn limit_command_checks_the_expected_value() {
    let args = ["limit", "x^2*(5+cos(x))/(1-cos(x))", "--interval", "(0,pi/2)", "--end", "hi", "--expect"];
    let mut ok = args.to_vec();
    ok.push("5*pi^2/4");
    assert_eq!(bounds(&ok).status.code(), Some(0));
    let mut bad = args.to_vec();
    bad.push("12");
    assert_eq!(bounds(&bad).status.code(), Some(1));
}
