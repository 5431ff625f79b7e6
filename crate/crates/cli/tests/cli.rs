use std::path::PathBuf;

use prefcomm_cli::run;
use serde_json::Value;

fn exec(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("prefcomm").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let (code, out, err) = exec(&full);
    assert!(err.is_empty() || code == 2, "unexpected stderr: {err}");
    (code, serde_json::from_str(&out).unwrap_or(Value::Null))
}

fn temp(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("prefcomm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn check_harmonious_example() {
    let (code, v) = json(&["check", "--instance", "b3ct", "--rule", "harmonious", "--set", "1,5,6"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["member"], true);
    assert_eq!(v["command"], "check");
}

#[test]
fn check_reports_gs_witness() {
    let (code, v) = json(&["check", "--instance", "b3ct", "--rule", "gs", "--set", "1,5,6"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["witnesses"]["gs"]["g"], serde_json::json!(["5", "6"]));
}

#[test]
fn axioms_mon_counterexample() {
    let (code, v) = json(&["axioms", "--rule", "b3ct", "--axiom", "Mon", "--paper-instances"]);
    assert_eq!(code, 1);
    let ax = &v["result"]["axioms"][0];
    assert_eq!(ax["violated"], true);
    assert_eq!(ax["counterexample"]["origin"]["kind"], "built-in");
    assert_eq!(ax["counterexample"]["subset"], serde_json::json!(["1", "2", "3"]));
}

#[test]
fn axioms_clique_clean() {
    let (code, v) = json(&["axioms", "--rule", "clique", "--budget", "200", "--seed", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["axioms"].as_array().unwrap().len(), 8);
}

#[test]
fn axiom_instance_check() {
    let (code, _) = json(&["axioms", "--instance", "b3ct", "--rule", "b3ct", "--axiom", "OD", "--set", "1,2,3", "--outsider", "5"]);
    assert_eq!(code, 1);
    let (code, _) = json(&["axioms", "--instance", "b3ct", "--rule", "clique", "--axiom", "GS", "--set", "1,2,3"]);
    assert_eq!(code, 0);
}

#[test]
fn aggregation_axioms_and_gauntlet() {
    let (code, v) = json(&["axioms", "--aggregator", "harmonious", "--aggregation-axiom", "U", "--voters", "2"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["axioms"][0]["violated"], true);
    let (code, v) = json(&["axioms", "--gauntlet", "5,4,3,2,1"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["hit"]["profile"], 2);
    let (code, _) = json(&["axioms", "--gauntlet", "1,1,1,1,0"]);
    assert_eq!(code, 2);
}

#[test]
fn enumerate_hero_sidekick_cliques() {
    let (code, out, _) = exec(&["generate", "hero-sidekick", "--duos", "4"]);
    assert_eq!(code, 0);
    let path = temp("hs4.json", &out);
    let (code, v) = json(&["enumerate", path.to_str().unwrap(), "--rule", "clique"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["count"], 9);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(exec(&["check", "--bogus"]).0, 2);
    assert_eq!(exec(&["frobnicate"]).0, 2);
    assert_eq!(exec(&["check", "--instance", "b3ct", "--rule", "nope", "--set", "1"]).0, 2);
    assert_eq!(exec(&["check", "--instance", "b3ct", "--rule", "clique", "--set", "9"]).0, 2);
    assert_eq!(exec(&["check", "--instance", "nope", "--rule", "clique", "--set", "1"]).0, 2);
    assert_eq!(exec(&["--help"]).0, 0);
}

#[test]
fn validate_reports_diagnostics() {
    let bad = temp("bad.json", "{\n  \"members\": [\"a\", \"b\"],\n  \"preferences\": {\n    \"a\": [\"a\", \"b\"],\n    \"b\": [\"b\", \"b\"]\n  }\n}\n");
    let (code, out, _) = exec(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("line 5") && out.contains("duplicate member \"b\""), "{out}");
    let (code, _, err) = exec(&["check", bad.to_str().unwrap(), "--rule", "clique", "--set", "a"]);
    assert_eq!(code, 2);
    assert!(err.contains("duplicate member"));
    let (code, v) = json(&["validate", "--instance", "weak-gs"]);
    assert_eq!((code, v["result"]["valid"].clone()), (0, Value::Bool(true)));
}

#[test]
fn reports_replay_byte_identical() {
    let args = ["axioms", "--rule", "borda", "--budget", "300", "--seed", "11", "--format", "json"];
    let a = exec(&args);
    let b = exec(&args);
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a.1).unwrap();
    assert_eq!(v["seed"], 11);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    let argv: Vec<String> = v["argv"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect();
    assert_eq!(argv, args);
    let one = json(&["axioms", "--rule", "borda", "--budget", "300", "--seed", "11", "--jobs", "1"]).1;
    let four = json(&["axioms", "--rule", "borda", "--budget", "300", "--seed", "11", "--jobs", "4"]).1;
    assert_eq!(one["result"], four["result"]);
    assert_eq!(one["result"], v["result"]);
}

#[test]
fn stability_margins() {
    let (code, v) = json(&["stability", "--instance", "b3ct", "--set", "1,2,3", "--delta", "1/3", "--exhaustive", "--rule", "b3ct"]);
    assert_eq!(code, 0);
    let r = &v["result"];
    assert_eq!(r["alpha"], "2/3");
    assert_eq!(r["beta"], "1/3");
    assert_eq!(r["perturbation"]["certified"], "1/6");
    assert_eq!(r["strong_b3ct"], false);
    assert!(r["exhaustive"]["breaker"].is_object());
    let (code, _) = json(&["stability", "--instance", "b3ct", "--set", "1,2,3", "--delta", "3/2"]);
    assert_eq!(code, 2);
}

#[test]
fn identify_commands() {
    let (code, v) = json(&["identify", "--instance", "b3ct", "--from", "5,6,5", "--size", "3"]);
    assert_eq!(code, 0);
    assert!(v["result"]["set"].is_array() || v["result"]["set"].is_null());
    let (code, v) = json(&["identify", "--instance", "b3ct", "--delta", "1/6", "--enumerate"]);
    assert_eq!(code, 0);
    assert!(v["result"]["sets"].as_array().unwrap().contains(&serde_json::json!(["1", "5", "6"])));
}

#[test]
fn generators_and_oracles() {
    let cnf = temp("one.cnf", "c one clause\np cnf 3 1\n1 2 3 0\n");
    let (code, v) = json(&["generate", "from-sat", cnf.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["network"]["members"].as_array().unwrap().len(), 11);
    let doc = serde_json::to_string(&v["result"]["network"]).unwrap();
    let net = temp("gadget.json", &doc);
    let set = v["result"]["subset"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect::<Vec<_>>().join(",");
    let (code, _) = json(&["check", net.to_str().unwrap(), "--rule", "sa", "--set", &set]);
    assert_eq!(code, 1, "a satisfiable instance yields a self-approval witness");
    let (code, v) = json(&["oracle", "sat", cnf.to_str().unwrap()]);
    assert_eq!((code, v["result"]["satisfiable"].clone()), (0, Value::Bool(true)));
    let (code, v) = json(&["oracle", "1in3", cnf.to_str().unwrap()]);
    assert_eq!((code, v["result"]["satisfiable"].clone()), (0, Value::Bool(true)));
    let (code, v) = json(&["generate", "cubic-gadget", cnf.to_str().unwrap(), "--lambda", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["blocks"]["T"].as_array().unwrap().len(), 4);
    let (code, v) = json(&["generate", "pad", "--instance", "b3ct", "--set", "1,2,3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["subset"].as_array().unwrap().len(), 6);
    let broken = temp("broken.cnf", "p cnf 3 1\n1 2 0\n");
    assert_eq!(exec(&["oracle", "sat", broken.to_str().unwrap()]).0, 2);
}

#[test]
fn random_generation_is_seeded() {
    let a = exec(&["generate", "random", "--members", "7", "--seed", "9"]);
    let b = exec(&["generate", "random", "--members", "7", "--seed", "9"]);
    let c = exec(&["generate", "random", "--members", "7", "--seed", "10"]);
    assert_eq!(a, b);
    assert_ne!(a.1, c.1);
    let path = temp("rand.json", &a.1);
    assert_eq!(exec(&["validate", path.to_str().unwrap()]).0, 0);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("prefcomm-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let (code, out, _) = exec(&["enumerate", "--instance", "b3ct", "--rule", "b3ct", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (0, ""));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["result"]["sets"].as_array().unwrap().contains(&serde_json::json!(["1", "2", "3"])));
}
