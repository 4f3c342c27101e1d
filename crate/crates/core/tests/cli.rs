use std::process::{Command, Output};

use serde_json::Value;

fn eisenrel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eisenrel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("one JSON document on stdout")
}

#[test]
fn expand_level_one_weight_four() {
    let o = eisenrel(&["expand", "--level", "1", "--weight", "4", "--a", "0,0", "--order", "4", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    assert_eq!(v["level"], 1);
    assert_eq!(v["order"], 4);
    let coeffs = v["coeffs"].as_array().unwrap();
    let got: Vec<(i64, Value)> = coeffs.iter().map(|t| (t["n"].as_i64().unwrap(), t["c"][0].clone())).collect();
    assert_eq!(
        got,
        vec![
            (0, serde_json::json!([-1, 120])),
            (1, serde_json::json!([-2, 1])),
            (2, serde_json::json!([-18, 1])),
            (3, serde_json::json!([-56, 1])),
        ]
    );

    let text = eisenrel(&["expand", "--level", "1", "--weight", "4", "--a", "0,0", "--order", "4"]);
    assert_eq!(code(&text), 0);
    let s = String::from_utf8(text.stdout).unwrap();
    assert!(s.contains("(-1/120) + (-2)*q + (-18)*q^2 + (-56)*q^3 + O(q^4)"), "{s}");
}

#[test]
fn expand_two_torsion_weight_one() {
    // E^(1;2)_(1,0): the two q^(1/2) branches cancel, so the series is zero.
    let o = eisenrel(&["expand", "--level", "2", "--weight", "1", "--a", "1,0", "--order", "2", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    assert_eq!(v["coeffs"].as_array().unwrap().len(), 0);
    // Weight 2 at the same point does have q^(1/2) terms.
    let o = eisenrel(&["expand", "--level", "2", "--weight", "2", "--a", "1,0", "--order", "2", "--json"]);
    let v = json_out(&o);
    assert_eq!(v["coeffs"][1]["n"], 1);
}

#[test]
fn expand_rejects_non_holomorphic() {
    let o = eisenrel(&["expand", "--level", "4", "--weight", "2", "--a", "0,0"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("non-holomorphic series E^(2)_{(0,0)} excluded"), "{err}");
}

#[test]
fn malformed_flags_exit_two() {
    assert_eq!(code(&eisenrel(&["expand", "--level", "x", "--weight", "1", "--a", "0,1"])), 2);
    assert_eq!(code(&eisenrel(&["expand", "--level", "3", "--weight", "1", "--a", "0"])), 2);
    assert_eq!(code(&eisenrel(&["numeric", "--check", "relation", "--tau", "0.3;1.1"])), 2);
    assert_eq!(code(&eisenrel(&["numeric", "--check", "relation", "--tau", "0.3,-1"])), 2);
    assert_eq!(code(&eisenrel(&["frobnicate"])), 2);
}

#[test]
fn residues_are_reduced() {
    let a = eisenrel(&["expand", "--level", "3", "--weight", "3", "--a", "-1,4", "--order", "12", "--json"]);
    let b = eisenrel(&["expand", "--level", "3", "--weight", "3", "--a", "2,1", "--order", "12", "--json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(json_out(&a), json_out(&b));
}

#[test]
fn bg_series_has_integral_exponents() {
    let o = eisenrel(&["bg-series", "--level", "3", "--weight", "3", "--a", "1", "--order", "10", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    assert_eq!(v["order"], 30);
    for t in v["coeffs"].as_array().unwrap() {
        assert_eq!(t["n"].as_u64().unwrap() % 3, 0);
    }
}

#[test]
fn verify_examples() {
    let o = eisenrel(&[
        "verify", "--level", "3", "--weight", "2", "--split", "0,0", "--a", "1,0", "--b", "0,1", "--order", "40", "--json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    assert_eq!(v["residual_zero"], true);
    assert_eq!(v["first_nonzero_exponent"], Value::Null);
    assert_eq!(v["order"], 40);
    assert_eq!(v["instance"]["c"], serde_json::json!([2, 2]));

    // b = -a forces c = 0.
    let o = eisenrel(&["verify", "--level", "3", "--weight", "2", "--split", "0,0", "--a", "1,0", "--b", "2,0"]);
    assert_eq!(code(&o), 2);

    let o = eisenrel(&["verify", "--level", "5", "--weight", "8", "--split", "3,3", "--a", "1,2", "--b", "3,4", "--order", "40"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn scan_examples() {
    let o = eisenrel(&["scan", "--level-max", "4", "--weight-max", "6", "--order", "40", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    assert_eq!(v["failed"], 0);
    assert_eq!(v["passed"], v["instances"]);

    let o = eisenrel(&["scan", "--level-max", "1", "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_out(&o)["instances"], 0);
}

#[test]
fn scan_is_deterministic_across_pool_sizes() {
    let run = |p: &str| {
        eisenrel(&["scan", "--level-max", "4", "--weight-max", "5", "--order", "30", "--parallel", p, "--json"]).stdout
    };
    assert_eq!(run("1"), run("8"));
    let perturbed = |p: &str| {
        eisenrel(&["scan", "--level-max", "3", "--weight-max", "4", "--order", "20", "--parallel", p, "--perturb", "beta", "--json"])
    };
    let (a, b) = (perturbed("1"), perturbed("8"));
    assert_eq!(code(&a), 1);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn recurrences_pass() {
    let o = eisenrel(&["recurrences", "--degree-max", "10", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    assert_eq!(v["all_pass"], true);
    // 66 splits with k1 + k2 <= 10, ten identities each.
    assert_eq!(v["checked"], 660);
}

#[test]
fn numeric_examples() {
    let o = eisenrel(&["numeric", "--check", "diff", "--weight", "1", "--tau", "0.3,1.1", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    assert_eq!(v["check"], "diff");
    assert!(v["residual"].as_f64().unwrap() < 1e-5);

    let o = eisenrel(&["numeric", "--check", "asymptotics", "--weight", "2", "--tau", "0,1", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    assert!(v["residual"].as_f64().unwrap() < 1e-6);
    // -2 G_2(i) = 1/(4 pi).
    let limit = v["params"]["limit"][0].as_f64().unwrap();
    assert!((limit - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-12);

    for check in ["relation", "bracket", "modularity"] {
        let o = eisenrel(&["numeric", "--check", check, "--weight", "3", "--split", "1,2", "--json"]);
        assert_eq!(code(&o), 0, "{check}: {}", String::from_utf8_lossy(&o.stdout));
        let v = json_out(&o);
        for key in ["check", "params", "residual", "tail_estimate", "pass"] {
            assert!(v.get(key).is_some(), "{check} lacks {key}");
        }
    }

    // A tolerance below the achievable error reports failure.
    let o = eisenrel(&["numeric", "--check", "diff", "--weight", "3", "--tol", "1e-30"]);
    assert_eq!(code(&o), 1);
    // Lattice point at weight two.
    let o = eisenrel(&["numeric", "--check", "diff", "--weight", "2", "--z", "0,0"]);
    assert_eq!(code(&o), 2);
}
