use std::process::Command;

use bci_core::cli::run;
use serde_json::Value;

fn bci(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bci").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("{e}: {s}"))
}

fn value_of(result: &Value) -> (f64, f64) {
    let v = result["value"].as_array().unwrap();
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn eval_simple_residue() {
    let (code, out, _) = bci(&["eval", "--alpha", "0.5,0", "--beta", "1,0", "--theta", "pi"]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["verdict"], "Agree");
    for res in r["results"].as_array().unwrap() {
        let (re, im) = value_of(res);
        assert!(re.abs() < 1e-9 && (im - std::f64::consts::PI).abs() < 1e-9, "{res}");
    }
}

#[test]
fn eval_zero_exponent_outside_is_zero() {
    let (code, out, _) = bci(&["eval", "--alpha", "2,0", "--beta", "0,0", "--theta", "1.0"]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["verdict"], "Agree");
    for res in r["results"].as_array().unwrap() {
        let (re, im) = value_of(res);
        assert!(re.hypot(im) < 1e-9);
    }
}

#[test]
fn eval_three_methods_agree() {
    let (code, out, _) = bci(&[
        "eval",
        "--alpha",
        "2,0",
        "--beta",
        "0.5,0",
        "--theta",
        "pi",
        "--methods",
        "theorem,quadrature,rational:1/2",
    ]);
    assert_eq!(code, 0);
    let r = json(&out);
    let results = r["results"].as_array().unwrap();
    let names: Vec<&str> = results.iter().map(|x| x["method"].as_str().unwrap()).collect();
    assert_eq!(names, ["theorem", "quadrature", "rational:1/2"]);
    assert!(r["disagreement"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["verdict"], "Agree");
}

#[test]
fn eval_schema_and_float_format() {
    let (_, out, _) =
        bci(&["eval", "--alpha", "0.5@pi/4", "--beta", "0.3,0.2", "--theta", "3*pi/2", "--format", "jsonl"]);
    assert_eq!(out.lines().count(), 1);
    let r = json(&out);
    let at = |k: &str| out.find(&format!("\"{k}\":")).unwrap_or_else(|| panic!("{k} missing"));
    assert!(at("instance") < at("results") && at("results") < at("disagreement") && at("disagreement") < at("verdict"));
    for res in r["results"].as_array().unwrap() {
        for k in ["method", "value", "error_estimate", "status"] {
            assert!(res.get(k).is_some(), "{k} missing in {res}");
        }
    }
    assert!(out.contains("\"theta\":4.7123889803846897e0"), "{out}");
}

#[test]
fn eval_partial_when_a_method_does_not_apply() {
    let (code, out, _) =
        bci(&["eval", "--alpha", "3,1", "--beta", "0.5", "--theta", "pi", "--methods", "theorem,series"]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["verdict"], "Partial");
    assert_eq!(r["results"][1]["status"], "NotApplicable");
    assert!(r["results"][1]["value"].is_null());
}

#[test]
fn eval_disagree_exits_two() {
    let (code, out, _) = bci(&["eval", "--alpha", "2,0", "--beta", "0.5,0", "--theta", "pi", "--tol", "1e-30"]);
    assert_eq!(code, 2);
    assert_eq!(json(&out)["verdict"], "Disagree");
}

#[test]
fn eval_errors_exit_one() {
    let (code, _, err) = bci(&["eval", "--alpha", "1,0", "--beta", "0.5", "--theta", "pi"]);
    assert_eq!(code, 1);
    assert!(err.contains("AlphaOnCircle"), "{err}");

    let (code, _, err) = bci(&["eval", "--alpha", "0.5", "--beta", "0.5", "--theta", "7"]);
    assert_eq!(code, 1);
    assert!(!err.is_empty());

    let (code, _, err) = bci(&["eval", "--alpha", "0.5", "--beta", "0.5"]);
    assert_eq!(code, 1);
    assert!(err.contains("--theta"), "{err}");

    let (code, _, _) = bci(&["eval", "--alpha", "0.5", "--beta", "0.5", "--theta", "pi", "--methods", "simpson"]);
    assert_eq!(code, 1);

    let (code, out, _) = bci(&["eval", "--alpha", "3", "--beta", "0.5", "--theta", "pi", "--methods", "series"]);
    assert_eq!(code, 1, "all methods failed: {out}");
}

#[test]
fn eval_csv_has_one_row_per_method() {
    let (code, out, _) = bci(&["eval", "--alpha", "0.4,0.1", "--beta", "1/3", "--theta", "pi/2", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("alpha_re,alpha_im,beta_re,beta_im,theta,method"));
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.ends_with(",Agree")));
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = bci(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("sweep"));
    let (code, out, _) = bci(&["--version"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("bci "));
}

#[test]
fn sweep_modulus_grid() {
    let (code, out, _) = bci(&["sweep", "--alpha-mod", "0.2:0.8:0.2", "--beta", "0.5,0", "--theta", "pi"]);
    assert_eq!(code, 0);
    let lines: Vec<Value> = out.lines().map(json).collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0]["kind"], "header");
    let rows = &lines[1..5];
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row["index"], i);
        assert_eq!(row["verdict"], "Agree");
    }
    let summary = &lines[5];
    assert_eq!(summary["kind"], "summary");
    assert_eq!(summary["rows"], 4);
    assert_eq!(summary["failures"], 0);
    assert!(summary["max_disagreement"].as_f64().unwrap() < 1e-8);
}

#[test]
fn sweep_flags_points_on_the_circle() {
    let (code, out, _) = bci(&["sweep", "--alpha-mod", "0.5,1.0,2.0", "--beta", "0.5"]);
    assert_eq!(code, 0);
    let lines: Vec<Value> = out.lines().map(json).collect();
    assert_eq!(lines[2]["status"], "AlphaOnCircle");
    assert!(lines[2].get("results").is_none());
    assert_eq!(lines[1]["verdict"], "Agree");
    assert_eq!(lines[3]["verdict"], "Agree");
    assert_eq!(lines[4]["excluded"], 1);
    assert_eq!(lines[4]["evaluated"], 2);
}

#[test]
fn sweep_empty_grid() {
    for format in ["jsonl", "csv"] {
        let (code, out, _) = bci(&["sweep", "--alpha-mod", "1:0:0.5", "--beta", "0.5", "--format", format]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 2, "{out}");
    }
}

#[test]
fn sweep_row_order_is_stable_across_thread_counts() {
    let args = |jobs: &'static str| {
        vec![
            "sweep",
            "--alpha-mod",
            "0.3:3.3:0.5",
            "--alpha-arg",
            "0.5,2,4",
            "--beta",
            "0.5,0.2",
            "--beta",
            "-1.5",
            "--theta",
            "pi/3",
            "--theta",
            "5",
            "--jobs",
            jobs,
        ]
    };
    let (c1, one, _) = bci(&args("1"));
    let (c4, four, _) = bci(&args("4"));
    assert_eq!((c1, c4), (0, 0));
    assert_eq!(one, four);
    assert_eq!(one.lines().count(), 2 + 7 * 3 * 2 * 2);
}

#[test]
fn sweep_disagreement_exits_two() {
    let (code, out, _) = bci(&["sweep", "--alpha-mod", "0.5,2", "--beta", "0.5", "--tol", "1e-30"]);
    assert_eq!(code, 2);
    let last = json(out.lines().last().unwrap());
    assert_eq!(last["failures"], 2);
}

#[test]
fn verify_single_checks() {
    let (code, out, _) = bci(&["verify", "--check", "ode", "--beta", "0.5,0"]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["checks"].as_array().unwrap().len(), 1);
    assert_eq!(r["checks"][0]["name"], "ode");
    assert!(r["checks"][0]["worst"].as_f64().unwrap() < 1e-4);

    let (code, out, _) = bci(&["verify", "--check", "delta", "--nmax", "64"]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["checks"][0]["cases"], 64 * 1025);
    assert_eq!(r["checks"][0]["failures"], 0);
}

#[test]
fn verify_rejects_unknown_check() {
    let (code, _, err) = bci(&["verify", "--check", "everything"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown check"), "{err}");
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("bci-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("eval.json");
    let p = path.to_str().unwrap();
    let (code, out, _) = bci(&["eval", "--alpha", "0.5", "--beta", "1", "--theta", "pi", "--out", p]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert_eq!(json(&std::fs::read_to_string(&path).unwrap())["verdict"], "Agree");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_exit_codes_and_env_tolerance() {
    let exe = env!("CARGO_BIN_EXE_bci");
    let status = |args: &[&str], tol: Option<&str>| {
        let mut cmd = Command::new(exe);
        cmd.args(args).env_remove("BCI_DEFAULT_TOL");
        if let Some(t) = tol {
            cmd.env("BCI_DEFAULT_TOL", t);
        }
        cmd.output().unwrap()
    };
    let args = ["eval", "--alpha", "2,0", "--beta", "0.5,0", "--theta", "pi"];
    assert_eq!(status(&args, None).status.code(), Some(0));
    let tight = status(&args, Some("1e-30"));
    assert_eq!(tight.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&tight.stdout).contains("\"verdict\": \"Disagree\""));
    let mut overridden = args.to_vec();
    overridden.extend(["--tol", "1e-8"]);
    assert_eq!(status(&overridden, Some("1e-30")).status.code(), Some(0));
    assert_eq!(status(&["eval", "--nope"], None).status.code(), Some(1));
}
