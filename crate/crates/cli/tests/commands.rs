use std::path::PathBuf;

use rewardsep_cli::{run_command, Outcome};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Outcome {
    let mut argv = vec!["rewardsep".to_string()];
    argv.extend(args.iter().map(|a| {
        if a.ends_with(".json") && !a.contains('/') {
            fixture(a)
        } else {
            a.to_string()
        }
    }));
    run_command(argv)
}

fn json(out: &Outcome) -> serde_json::Value {
    serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}):\n{}", out.stdout))
}

#[test]
fn design_multi_xor_reduces_to_two() {
    let out = run(&["design-multi", "entailment.json", "--soap", "xor_soap.json", "--exact", "--reduce"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("realizable with d = 2"));
    assert!(out.stdout.contains("verified: all 2 good policies feasible, all 2 bad policies infeasible"));
    let j = json(&run(&["design-multi", "entailment.json", "--soap", "xor_soap.json", "--exact", "--reduce", "--json"]));
    assert_eq!(j["dimension"], 2);
    assert_eq!(j["verification"]["realized"], true);
}

#[test]
fn design_scalar_xor_reports_midpoint() {
    let out = run(&["design-scalar", "entailment.json", "--soap", "xor_soap.json", "--exact"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("point = [50/19, 50/19, 45/19, 45/19]"), "{}", out.stdout);
    let j = json(&run(&["design-scalar", "entailment.json", "--soap", "xor_soap.json", "--exact", "--json"]));
    assert_eq!(j["realizable"], false);
    assert_eq!(j["obstruction"]["kind"], "hulls_intersect");
    assert_eq!(j["obstruction"]["good_weights"][0]["weight"], "0.5");
}

#[test]
fn consistency_on_steady_state() {
    let out = run(&["consistency", "steady_state.json", "--soap", "degenerate_soap.json"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("pi21 (good) = pi22 (bad)"));
    let out = run(&["consistency", "entailment.json", "--soap", "xor_soap.json"]);
    assert_eq!(out.code, 0);
}

#[test]
fn design_refuses_inconsistent_soap() {
    let out = run(&["design-multi", "steady_state.json", "--soap", "degenerate_soap.json", "--exact"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("refused"));
    let j = json(&run(&["design-scalar", "steady_state.json", "--soap", "degenerate_soap.json", "--json"]));
    assert_eq!(j["obstruction"]["kind"], "inconsistent");
    assert_eq!(j["obstruction"]["witnesses"][0]["good"], "pi21");
}

#[test]
fn single_good_policy_needs_one_row() {
    for args in [
        vec!["design-scalar", "entailment.json", "--soap", "single_good_soap.json", "--exact", "--json"],
        vec!["design-multi", "entailment.json", "--soap", "single_good_soap.json", "--exact", "--reduce", "--json"],
    ] {
        let out = run(&args);
        assert_eq!(out.code, 0);
        assert_eq!(json(&out)["dimension"], 1);
    }
}

#[test]
fn max_dim_turns_answer_negative() {
    let out = run(&["design-multi", "entailment.json", "--soap", "xor_soap.json", "--exact", "--max-dim", "1"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("not realizable within --max-dim 1"));
    let out = run(&["design-multi", "entailment.json", "--soap", "xor_soap.json", "--exact", "--max-dim", "2"]);
    assert_eq!(out.code, 0);
}

#[test]
fn optimality_examples() {
    let out = run(&["design-scalar-optimal", "steady_state.json", "--soap", "degenerate_soap.json", "--exact"]);
    assert_eq!(out.code, 1);
    let out = run(&["design-scalar-optimal", "entailment.json", "--soap", "xor_soap.json", "--exact"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("Farkas multipliers"));
    let out = run(&["design-scalar-optimal", "entailment.json", "--soap", "single_good_soap.json", "--exact"]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    let out = run(&["design-scalar-optimal", "entailment.json", "--soap", "xor_soap.json", "--limit", "3"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("exceed the limit of 3"));
}

#[test]
fn verify_paper_spec() {
    let out = run(&["verify", "entailment.json", "--soap", "xor_soap.json", "--spec", "paper_spec.json", "--exact"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("pi22         bad  V = [10, -10]  infeasible (fails dim 2)"), "{}", out.stdout);
    let j = json(&run(&["verify", "entailment.json", "--soap", "xor_soap.json", "--spec", "paper_spec.json", "--exact", "--json"]));
    let pols = j["policies"].as_array().unwrap();
    let pi21 = pols.iter().find(|p| p["name"] == "pi21").unwrap();
    assert_eq!(pi21["values"][0], "100/19");
    // Swapping roles makes the same spec wrong.
    let out = run(&["verify", "entailment.json", "--soap", "single_good_soap.json", "--spec", "paper_spec.json", "--exact"]);
    assert_eq!(out.code, 1);
}

#[test]
fn enumerate_marks_feasible() {
    let j = json(&run(&["enumerate", "entailment.json", "--spec", "paper_spec.json", "--exact", "--json"]));
    assert_eq!(j["count"], 4);
    let feasible: Vec<&str> = j["policies"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|p| p["feasible"] == true)
        .map(|p| p["name"].as_str().unwrap())
        .collect();
    assert_eq!(feasible, ["pi12", "pi21"]);
}

#[test]
fn visitation_prints_exact_values() {
    let out = run(&["visitation", "entailment.json", "--exact"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("pi22:\n  rho(s0:a1) = 0\n  rho(s0:a2) = 100/19\n  rho(s1:a1) = 0\n  rho(s1:a2) = 90/19\n  total = 10\n"), "{}", out.stdout);
    let j = json(&run(&["visitation", "steady_state.json", "--json", "--tol", "1e-12"]));
    assert_eq!(j["mode"], "float");
    assert_eq!(j["policies"][3]["name"], "pi22");
    let v: f64 = j["policies"][3]["rho"][1].as_str().unwrap().parse().unwrap();
    assert!((v - 10.0).abs() < 1e-12);
}

#[test]
fn export_plot_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.csv");
    let out = run(&[
        "export-plot", "entailment.json", "--soap", "xor_soap.json", "--spec", "paper_spec.json",
        "--x", "s0:a2", "--y", "s1:a2", "--exact", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("name,label,x,y\npi11,bad,0,0\npi12,good,0,90/19\npi21,good,100/19,0\npi22,bad,100/19,90/19\n"));
    assert!(csv.ends_with("dim,rx,ry,c\n1,1,1,2\n2,-1,-1,-8\n"));
    let out = run(&["export-plot", "steady_state.json", "--x", "s0:a1", "--y", "s1:a1"]);
    assert!(out.stdout.ends_with("\ndim,rx,ry,c\n"));
    let out = run(&["export-plot", "steady_state.json", "--x", "s0:a9", "--y", "s1:a1"]);
    assert_eq!(out.code, 2);
}

#[test]
fn design_out_writes_spec_that_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let out = run(&["design-multi", "entailment.json", "--soap", "xor_soap.json", "--exact", "--out", spec.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    let out = run(&["verify", "entailment.json", "--soap", "xor_soap.json", "--spec", spec.to_str().unwrap(), "--exact"]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let soap = dir.path().join("soap.json");
    std::fs::write(&soap, r#"{"good": ["pi12"], "bad": ["pi99"]}"#).unwrap();
    let out = run(&["consistency", "entailment.json", "--soap", soap.to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("pi99"));
    assert!(out.stderr.contains("bad[0]"));
    assert_eq!(run(&["consistency", "/nonexistent.json", "--soap", "xor_soap.json"]).code, 2);
    assert_eq!(run(&["consistency", "entailment.json"]).code, 2);
    assert_eq!(run(&["design-scalar", "entailment.json", "--soap", "xor_soap.json", "--tol", "-1"]).code, 2);
    assert_eq!(run(&["design-scalar", "entailment.json", "--exact", "--tol", "1e-6"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&[]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn exit_codes_ignore_formatting_flags() {
    let cases: [&[&str]; 4] = [
        &["design-scalar", "entailment.json", "--soap", "xor_soap.json"],
        &["design-multi", "entailment.json", "--soap", "xor_soap.json"],
        &["consistency", "steady_state.json", "--soap", "degenerate_soap.json"],
        &["verify", "entailment.json", "--soap", "xor_soap.json", "--spec", "paper_spec.json"],
    ];
    for base in cases {
        let plain = run(base).code;
        for extra in [&["--json"][..], &["--exact"], &["--exact", "--json"], &["--tol", "1e-7"]] {
            let mut args = base.to_vec();
            args.extend_from_slice(extra);
            assert_eq!(run(&args).code, plain, "{args:?}");
        }
    }
}
