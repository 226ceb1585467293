use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const PARALLEL: &str = r#"{
  "alphas": [2.0],
  "resources": [
    {"id": "e1", "sigma": 1.0, "xis": [1.0]},
    {"id": "e2", "sigma": 1.0, "xis": [1.0]}
  ],
  "graph": {"directed": false, "vertices": ["s", "t"], "edges": [
    {"id": "e1", "tail": "s", "head": "t"},
    {"id": "e2", "tail": "s", "head": "t"}
  ]},
  "requests": [
    {"id": 0, "weight_all": 1, "kind": {"type": "routing", "source": "s", "target": "t"}},
    {"id": 1, "weight_all": 1, "kind": {"type": "routing", "source": "s", "target": "t"}}
  ]
}"#;

const UNREACHABLE: &str = r#"{
  "alphas": [2.0],
  "resources": [{"id": "e1", "sigma": 1.0, "xis": [1.0]}],
  "graph": {"directed": true, "vertices": ["s", "t", "u"], "edges": [
    {"id": "e1", "tail": "s", "head": "t"}
  ]},
  "requests": [
    {"id": 0, "weight_all": 1, "kind": {"type": "routing", "source": "s", "target": "u"}}
  ]
}"#;

struct Dir(PathBuf);

impl Dir {
    fn new(tag: &str) -> Self {
        let p = std::env::temp_dir().join(format!("gnd-cli-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&p);
        std::fs::create_dir_all(&p).unwrap();
        Dir(p)
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Dir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn gnd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gnd")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key}: ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_with_brute_force_reaches_the_optimum() {
    let d = Dir::new("brute");
    let f = d.file("par.json", PARALLEL);
    let o = gnd(&["solve", "--instance", s(&f), "--brute"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(field(&out, "cost"), "4");
    assert_eq!(field(&out, "optimum"), "4");
    assert_eq!(field(&out, "ratio"), "1");
    assert_eq!(field(&out, "converged"), "true");
}

#[test]
fn zero_step_budget_returns_the_initial_profile() {
    let d = Dir::new("zero");
    let f = d.file("par.json", PARALLEL);
    let out = stdout(&gnd(&["solve", "--instance", s(&f), "--max-steps", "0"]));
    assert_eq!(field(&out, "steps"), "0");
    assert_eq!(field(&out, "cost"), "5");
    assert!(field(&out, "guarantee").starts_with("void"));
}

#[test]
fn malformed_file_reports_position() {
    let d = Dir::new("bad");
    let f = d.file("bad.json", "{\n  \"alphas\": [2.0],\n  \"resources\": 7\n}");
    let o = gnd(&["solve", "--instance", s(&f)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn poa_generator_writes_round_trippable_files() {
    let d = Dir::new("poa");
    let out = d.path("poa.json");
    let o = gnd(&["poa-gen", "--sigma", "16", "--xi", "1", "--alpha", "2", "--out", s(&out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["graph"]["edges"].as_array().unwrap().len(), 9);
    assert_eq!(v["requests"].as_array().unwrap().len(), 4);

    let again = d.path("again.json");
    let o = gnd(&["poa-gen", "--sigma", "16", "--xi", "1", "--alpha", "2", "--out", s(&again)]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&again).unwrap(), text.as_bytes());

    let rejected = gnd(&["poa-gen", "--sigma", "1", "--xi", "1", "--alpha", "2", "--out", s(&d.path("x.json"))]);
    assert_eq!(rejected.status.code(), Some(2));
}

#[test]
fn bounds_on_two_parallel_edges() {
    let d = Dir::new("bounds");
    let f = d.file("par.json", PARALLEL);
    let out = stdout(&gnd(&["bounds", "--instance", s(&f)]));
    assert_eq!(field(&out, "T"), "32");
    assert_eq!(field(&out, "A"), "1.5");
    assert_eq!(field(&out, "B"), "2");
}

#[test]
fn nash_and_smoothness_on_parallel_edges() {
    let d = Dir::new("nash");
    let f = d.file("par.json", PARALLEL);
    let out = stdout(&gnd(&["nash", "--instance", s(&f)]));
    assert_eq!(field(&out, "equilibria"), "2");
    assert_eq!(field(&out, "poa"), "1");
    let out = stdout(&gnd(&["smooth", "--instance", s(&f)]));
    assert_eq!(field(&out, "result"), "pass");
    assert_eq!(field(&out, "violations"), "0");
}

#[test]
fn runs_are_byte_identical() {
    let d = Dir::new("det");
    let f = d.file("poa.json", "");
    let o = gnd(&["poa-gen", "--sigma", "16", "--xi", "1", "--alpha", "2", "--q", "2", "--out", s(&f)]);
    assert!(o.status.success());
    for sel in ["det", "rand"] {
        let run = |trace: &Path| {
            gnd(&["solve", "--instance", s(&f), "--selection", sel, "--seed", "7", "--trace", s(trace)])
        };
        let (ta, tb) = (d.path("a.csv"), d.path("b.csv"));
        let (a, b) = (run(&ta), run(&tb));
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
        let ca = std::fs::read_to_string(&ta).unwrap();
        assert_eq!(ca, std::fs::read_to_string(&tb).unwrap());
        assert!(ca.starts_with("step,player,delta_selected,Delta,cost,potential,converged"));
    }
    let a = gnd(&["fpl", "--instance", s(&f), "--rounds", "30", "--seed", "3"]);
    let b = gnd(&["fpl", "--instance", s(&f), "--rounds", "30", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_output_parses() {
    let d = Dir::new("json");
    let f = d.file("par.json", PARALLEL);
    for args in [
        vec!["--json", "solve", "--instance", s(&f)],
        vec!["--json", "bounds", "--instance", s(&f)],
        vec!["--json", "nash", "--instance", s(&f)],
        vec!["--json", "brute", "--instance", s(&f)],
        vec!["--json", "fpl", "--instance", s(&f), "--rounds", "10"],
    ] {
        let o = gnd(&args);
        assert!(o.status.success(), "{args:?}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v.is_object());
    }
    let o = gnd(&["--json", "solve", "--instance", s(&f)]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["cost"], 4.0);
    assert_eq!(v["bounds"]["t"], 32);
}

#[test]
fn error_exit_codes() {
    let d = Dir::new("codes");
    let f = d.file("u.json", UNREACHABLE);
    assert_eq!(gnd(&["solve", "--instance", s(&f)]).status.code(), Some(3));
    let p = d.file("par.json", PARALLEL);
    assert_eq!(gnd(&["brute", "--instance", s(&p), "--max-profiles", "1"]).status.code(), Some(4));
    assert_eq!(gnd(&["solve", "--instance", s(&p), "--epsilon", "0.9"]).status.code(), Some(2));
    assert_eq!(gnd(&["solve", "--instance", s(&d.path("missing.json"))]).status.code(), Some(1));
}

#[test]
fn fpl_reports_a_feasible_profile() {
    let d = Dir::new("fpl");
    let f = d.file("par.json", PARALLEL);
    let out = stdout(&gnd(&["fpl", "--instance", s(&f), "--rounds", "40", "--lower-bound", "4"]));
    assert_eq!(field(&out, "rounds"), "40");
    let cost: f64 = field(&out, "cost").parse().unwrap();
    assert!((4.0..=5.0).contains(&cost));
    assert!(out.contains("reply 1: "));
}
