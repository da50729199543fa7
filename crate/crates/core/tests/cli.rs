use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ahmc::experiment::{ExperimentConfig, TRACE_HEADER};

fn ahmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ahmc")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const GAUSSIAN: &str = r#"
seed = 11
chains = 2

[model]
name = "gaussian"
dim = 3
condition = 10.0

[sampler]
mode = "adaptive"
burnin = 200
samples = 300
eps_bounds = [0.01, 1.0]
steps_bounds = [1, 20]
eps_grid_size = 50
"#;

const LOGISTIC_CSV: &str = r#"
seed = 3

[model]
name = "logistic"
design = "x.csv"
labels = "y.csv"

[sampler]
mode = "fixed"
burnin = 50
samples = 120
eps = 0.1
steps = 5
"#;

fn out(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn run_writes_consistent_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "g.toml", GAUSSIAN);
    let dir = out(tmp.path(), "run");
    let o = ahmc(&["run", &cfg, "--out", &dir]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let original = ExperimentConfig::from_toml(GAUSSIAN).unwrap();
    let echoed = ExperimentConfig::load(&Path::new(&dir).join("config.toml")).unwrap();
    assert_eq!(echoed, original);

    for c in 0..2 {
        let samples = fs::read_to_string(Path::new(&dir).join(format!("chain_{c}_samples.csv"))).unwrap();
        let mut lines = samples.lines();
        assert_eq!(lines.next().unwrap(), "dim_0,dim_1,dim_2");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 300);
        assert!(rows.iter().all(|r| r.split(',').count() == 3));

        let trace = fs::read_to_string(Path::new(&dir).join(format!("chain_{c}_trace.csv"))).unwrap();
        let header: String = trace
            .lines()
            .take_while(|l| l.starts_with("# "))
            .filter(|l| !l.starts_with("# burnin_rounds="))
            .map(|l| format!("{}\n", &l[2..]))
            .collect();
        assert_eq!(ExperimentConfig::from_toml(&header).unwrap(), original);
        assert!(trace.contains("# burnin_rounds=100\n"));
        let body: Vec<&str> = trace.lines().skip_while(|l| l.starts_with('#')).collect();
        assert_eq!(body[0], TRACE_HEADER);
        assert_eq!(body.len() - 1, 500 / 2);
        assert!(body[1].starts_with("1,"));

        let diag = fs::read_to_string(Path::new(&dir).join(format!("chain_{c}_diagnostics.txt"))).unwrap();
        assert!(diag.contains("ess_per_leapfrog_min="));
    }
    let summary = fs::read_to_string(Path::new(&dir).join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn reruns_are_byte_identical_and_chains_are_prefix_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "g.toml", GAUSSIAN);
    let (a, a2, b, c) = (
        out(tmp.path(), "a"),
        out(tmp.path(), "a2"),
        out(tmp.path(), "b"),
        out(tmp.path(), "c"),
    );
    assert!(ahmc(&["run", &cfg, "--out", &a]).status.success());
    assert!(ahmc(&["run", &cfg, "--out", &a2]).status.success());
    assert!(ahmc(&["run", &cfg, "--out", &b, "--workers", "1"]).status.success());
    assert!(ahmc(&["run", &cfg, "--out", &c, "--chains", "3"]).status.success());
    let names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names.len(), 8);
    for name in &names {
        assert_eq!(
            fs::read(Path::new(&a).join(name)).unwrap(),
            fs::read(Path::new(&a2).join(name)).unwrap(),
            "{name}"
        );
    }
    // the worker count changes scheduling only
    for name in ["chain_0_samples.csv", "chain_1_samples.csv", "summary.csv"] {
        assert_eq!(
            fs::read(Path::new(&a).join(name)).unwrap(),
            fs::read(Path::new(&b).join(name)).unwrap(),
            "{name}"
        );
    }
    // adding a chain leaves earlier chains untouched
    for name in ["chain_0_samples.csv", "chain_1_samples.csv"] {
        assert_eq!(
            fs::read(Path::new(&a).join(name)).unwrap(),
            fs::read(Path::new(&c).join(name)).unwrap()
        );
    }
    let d = out(tmp.path(), "d");
    assert!(ahmc(&["run", &cfg, "--out", &d, "--seed", "12"]).status.success());
    assert_ne!(
        fs::read(Path::new(&a).join("chain_0_samples.csv")).unwrap(),
        fs::read(Path::new(&d).join("chain_0_samples.csv")).unwrap()
    );
}

#[test]
fn csv_data_and_fixed_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let (x, y) = ahmc::models::synthetic_logistic_data(40, 2, 5);
    let mut xs = String::from("a,b\n");
    let mut ys = String::from("label\n");
    for i in 0..40 {
        xs.push_str(&format!("{},{}\n", x[(i, 0)], x[(i, 1)]));
        ys.push_str(if y[i] > 0.0 { "1\n" } else { "0\n" });
    }
    fs::write(tmp.path().join("x.csv"), xs).unwrap();
    fs::write(tmp.path().join("y.csv"), ys).unwrap();
    let cfg = write_config(tmp.path(), "l.toml", LOGISTIC_CSV);
    let dir = out(tmp.path(), "run");
    let o = ahmc(&["run", &cfg, "--out", &dir]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let samples = fs::read_to_string(Path::new(&dir).join("chain_0_samples.csv")).unwrap();
    assert_eq!(samples.lines().next().unwrap(), "dim_0,dim_1,dim_2");
    assert_eq!(samples.lines().count(), 121);
}

#[test]
fn compare_against_itself_gives_unit_ratios() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "g.toml", GAUSSIAN);
    let dir = out(tmp.path(), "run");
    assert!(ahmc(&["run", &cfg, "--out", &dir]).status.success());
    let o = ahmc(&["compare", &dir, &dir]);
    assert!(o.status.success());
    let table = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert!(fields[7..].iter().all(|f| *f == "1"), "{line}");
    }
}

#[test]
fn compare_flags_mismatched_models() {
    let tmp = tempfile::tempdir().unwrap();
    let a_cfg = write_config(tmp.path(), "a.toml", GAUSSIAN);
    let b_cfg = write_config(tmp.path(), "b.toml", &GAUSSIAN.replace("dim = 3", "dim = 2"));
    let (a, b) = (out(tmp.path(), "a"), out(tmp.path(), "b"));
    assert!(ahmc(&["run", &a_cfg, "--out", &a]).status.success());
    assert!(ahmc(&["run", &b_cfg, "--out", &b]).status.success());
    let o = ahmc(&["compare", &a, &b]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("different models"));
}

#[test]
fn errors_have_distinct_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = out(tmp.path(), "nowhere");
    let o = ahmc(&["compare", &missing, &missing]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains(&missing));

    let bad = write_config(tmp.path(), "bad.toml", &GAUSSIAN.replace("burnin = 200", "burnin = -1"));
    let o = ahmc(&["run", &bad, "--out", &out(tmp.path(), "x")]);
    assert_eq!(o.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("line") && msg.contains("burnin"), "{msg}");

    let no_data = write_config(tmp.path(), "l.toml", LOGISTIC_CSV);
    let o = ahmc(&["run", &no_data, "--out", &out(tmp.path(), "y")]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("x.csv"));

    fs::write(tmp.path().join("x.csv"), "a\n1\nzz\n").unwrap();
    fs::write(tmp.path().join("y.csv"), "y\n1\n0\n").unwrap();
    let o = ahmc(&["run", &no_data, "--out", &out(tmp.path(), "z")]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn published_search_boxes_are_accepted() {
    let sv = r#"
seed = 1
[model]
name = "sv"
[model.synthetic]
length = 40
beta = 0.65
phi = 0.98
sigma = 0.15
data_seed = 2
[sampler]
mode = "adaptive"
burnin = 20
samples = 20
eps_bounds = [1e-4, 1e-2]
steps_bounds = [1, 300]
eps_grid_size = 20
"#;
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sv.toml", sv);
    let dir = out(tmp.path(), "sv");
    let o = ahmc(&["run", &cfg, "--out", &dir]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(Path::new(&dir).join("chain_0_trace.csv")).unwrap();
    assert!(trace.contains("# steps_bounds = [1, 300]"), "{trace}");

    let lgc = r#"
seed = 1
[model]
name = "lgc"
grid = 4
mu = 4.0
sigma2 = 1.91
beta = 0.0303
[sampler]
mode = "adaptive"
burnin = 0
samples = 10
eps_bounds = [0.001, 0.1]
steps_bounds = [1, 500]
"#;
    let parsed = ExperimentConfig::from_toml(lgc).unwrap();
    assert_eq!(parsed.adaptive_config(0).unwrap().space.steps_bounds, (1, 500));
}
