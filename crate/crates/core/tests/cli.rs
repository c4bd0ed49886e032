use std::process::{Command, Output};

use serde_json::Value;

fn newform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newform")).args(args).env_remove("NEWFORM_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn quadratic_gauss_sum_mod_five() {
    let o = newform(&["--format", "json", "gauss", "--field", "1", "--modulus", "(5)", "--char", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schema"], "1");
    let r = &v["result"];
    assert!((r["re"].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-9, "{r}");
    assert!(r["im"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn exit_codes() {
    assert_eq!(newform(&["bogus"]).status.code(), Some(2));
    assert_eq!(newform(&["field"]).status.code(), Some(2));
    let o = newform(&["field", "--field", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NarrowClassNumberNotOne"));
    let o = newform(&["factor", "--field", "5", "--ideal", "(0)"]);
    assert_eq!(o.status.code(), Some(1));
    let o = newform(&["coeffs", "--field", "1", "--level", "(3)", "--char", "/nonexistent/chi.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn coefficient_listing() {
    let o = newform(&["--seed", "4", "--bound", "50", "coeffs", "--field", "5", "--level", "(2)", "--char", "trivial"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with('#') && header.contains("seed=4") && header.contains("bound=50"), "{header}");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split_whitespace().collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 3 && r[0].contains("@d=5")));
    assert_eq!(rows[0], vec!["[[1,0],[0,1]]/1@d=5", "1.000000000000e0", "0.000000000000e0"]);
    for r in &rows {
        r[1].parse::<f64>().unwrap();
        r[2].parse::<f64>().unwrap();
    }
    // the ideals of norm <= 50 in Q(sqrt 5)
    let want = newform_core::oracle::ideals_up_to(newform_core::field::NumberField::new(5).unwrap().ring(), 50);
    assert_eq!(rows.len(), want.len());
}

#[test]
fn json_is_byte_identical_and_seed_overridable() {
    let args = ["--format", "json", "--bound", "100", "coeffs", "--field", "1", "--level", "(9)", "--char", "trivial"];
    let a = newform(&args);
    let b = newform(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["schema"], "1");
    assert_eq!(v["config"]["seed"], 0);
    assert_eq!(v["config"]["bound"], 100);

    let c = Command::new(env!("CARGO_BIN_EXE_newform")).args(args).env("NEWFORM_SEED", "9").output().unwrap();
    let v = json(&c);
    assert_eq!(v["config"]["seed"], 9);
    let mut with_flag = vec!["--seed", "9"];
    with_flag.extend(args);
    assert_eq!(newform(&with_flag).stdout, c.stdout);
    assert_ne!(c.stdout, a.stdout);
}

#[test]
fn character_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chi.json");
    std::fs::write(&path, r#"{"modulus": "(5)", "angles": ["1/2"]}"#).unwrap();
    let p = path.to_str().unwrap();
    let o = newform(&["--format", "json", "conductor", "--field", "1", "--modulus", "(5)", "--char", p]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["result"]["conductor"], "[[5]]/1@d=1");

    let o = newform(&["--bound", "30", "coeffs", "--field", "1", "--level", "(5)", "--char", p]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn regime_report_fields() {
    let o = newform(&["regime", "--field", "1", "--p", "(5)", "--nu", "3", "--ephi", "1", "--epsi", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["regime"], "small-twist");
    assert_eq!(v["level_exactness"], "exact");
    assert_eq!(v["newform_status"], "newform");
    assert_eq!(v["predicted_level"], "[[125]]/1@d=1");
    for key in ["predicted_character", "lcm_bound", "citations"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let o = newform(&["regime", "--field", "1", "--p", "(5)", "--nu", "1", "--ephi", "2", "--epsi", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn decompose_lists_summands() {
    let chars = newform(&["chars", "--field", "1", "--modulus", "(125)", "--conductor", "(25)", "--extendable"]);
    let all = json(&chars);
    let chi = serde_json::to_string(&all[0]).unwrap();
    let o = newform(&["decompose", "--field", "1", "--level", "(125)", "--char", &chi, "--p", "(5)"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let s = v.as_array().unwrap();
    assert_eq!(s.len(), 3);
    assert!(s.iter().all(|x| x["p_primitive"] == true && x["inner_level"] == "[[25]]/1@d=1"));
}

#[test]
fn selftest_single_check() {
    let o = newform(&["selftest", "--field", "1", "--check", "regime-grid"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("regime-grid") && text.contains("all checks passed"), "{text}");
    assert_eq!(newform(&["selftest", "--check", "no-such-check"]).status.code(), Some(2));
}
