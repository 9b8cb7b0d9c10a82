use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn wedge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wedge")).args(args).env("WEDGE_THREADS", "1").output().expect("spawn wedge")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.ini");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn run(sub: &str, body: &str) -> (Output, TempDir) {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), body);
    let out = tmp.path().join("out");
    let o = wedge(&[sub, "--config", &cfg, "--out", out.to_str().unwrap()]);
    (o, tmp)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const LIGHT: &str = "\
[domain]
kappa = pi
[weights]
p = 2
pairs = 0.5:1, -1.5:0.5
[run]
seed = 11
";

#[test]
fn config_error_exits_two_with_line() {
    let (o, _t) = run("check-weights", "[domain]\nkappa = pi\n[grid]\nm = 7\n");
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("config error") && e.contains("line 4") && e.contains("grid.m"), "{e}");

    let (o, _t) = run("kernel", "[domain]\nkappa = pi\n[wieghts]\np = 2\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown section [wieghts]"));
}

#[test]
fn rejected_weights_are_reported_with_reason() {
    let (o, t) = run("check-weights", LIGHT);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let jl = fs::read_to_string(t.path().join("out/geometry/reports.jsonl")).unwrap();
    let rejected: Vec<&str> = jl.lines().filter(|l| l.contains("\"outcome\":\"rejected\"")).collect();
    assert_eq!(rejected.len(), 1);
    assert!(rejected[0].contains("γ ≤ −1 non-integrable") && rejected[0].contains("\"gamma\":-1.5"));
    let csv = fs::read_to_string(t.path().join("out/geometry/reports.csv")).unwrap();
    assert!(csv.starts_with("suite,op,params,value,baseline,outcome,seed,note"));
    assert!(t.path().join("out/geometry/metadata.json").exists());
}

#[test]
fn empty_sweep_exits_two() {
    let body = "[domain]\nkappa = pi\n[weights]\np = 2\npairs = -1.5:0, 3:1, 0:0\n";
    let (o, t) = run("check-weights", body);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no admissible parameters"), "{}", stderr(&o));
    let jl = fs::read_to_string(t.path().join("out/geometry/reports.jsonl")).unwrap();
    assert_eq!(jl.lines().count(), 3);
    assert!(jl.lines().all(|l| l.contains("\"outcome\":\"rejected\"")));
}

#[test]
fn excluded_weight_aborts_poisson_with_witness() {
    let body = "[domain]\nkappa = pi\n[weights]\np = 2\npairs = 0:0\n[poisson]\nblowup = false\napriori = false\n";
    let (o, _t) = run("solve-poisson", body);
    assert_eq!(o.status.code(), Some(3));
    let e = stderr(&o);
    assert!(e.contains("n=1") && e.contains("conditioning"), "{e}");
}

#[test]
fn reports_are_deterministic() {
    let body = "[domain]\nkappa = 3pi/4\n[weights]\np = 2\npairs = 0.5:1, 0:0.5\n[run]\nseed = 3\n";
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), body);
    let mut files = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("out{k}"));
        let o = wedge(&["kernel", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let g = wedge(&["check-weights", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(g.status.code(), Some(0), "{}", stderr(&g));
        files.push([
            fs::read(out.join("kernel/reports.jsonl")).unwrap(),
            fs::read(out.join("kernel/reports.csv")).unwrap(),
            fs::read(out.join("geometry/reports.jsonl")).unwrap(),
        ]);
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), LIGHT);
    let out = tmp.path().join("out");
    let o = wedge(&["check-weights", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "99"]);
    assert_eq!(o.status.code(), Some(0));
    let jl = fs::read_to_string(out.join("geometry/reports.jsonl")).unwrap();
    assert!(jl.lines().all(|l| l.contains("\"seed\":99")));
}

#[test]
fn kernel_suite_passes_on_half_plane() {
    let (o, t) = run("kernel", LIGHT);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let jl = fs::read_to_string(t.path().join("out/kernel/reports.jsonl")).unwrap();
    for op in ["images_oracle", "parabolic_scaling", "sub_markov", "refined_bound_negative"] {
        assert!(jl.contains(&format!("\"op\":\"{op}\"")), "missing {op}");
    }
    assert!(!jl.contains("\"outcome\":\"fail\""));
}

#[test]
fn bad_flag_value_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), LIGHT);
    let o = wedge(&["kernel", "--config", &cfg, "--c-gauss=0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--c-gauss"));
}

#[test]
fn default_config_verifies() {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/config/default.ini");
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("reports");
    let o = wedge(&["verify-all", "--config", cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    for s in ["geometry", "poisson", "kernel", "calculus"] {
        let jl = fs::read_to_string(out.join(s).join("reports.jsonl")).unwrap();
        assert!(!jl.contains("\"outcome\":\"fail\""), "{s}");
    }
    assert!(fs::read_dir(out.join("poisson/solutions")).unwrap().count() >= 2);
}
