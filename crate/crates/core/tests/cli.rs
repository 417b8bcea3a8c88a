use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn multifield(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_multifield"));
    cmd.args(args).env_remove("MULTIFIELD_OUTPUT_DIR");
    if let Some(dir) = out_env {
        cmd.env("MULTIFIELD_OUTPUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const FORMULATION: &str = r#"
name = "cli-formulation"
seed = 4
[model]
id = "M1"
params = { k = 0.5 }
[grid]
nodes = [12]
extents = [1.0]
faces = ["natural"]
[[checks]]
kind = "formulation"
samples = 2
"#;

#[test]
fn list_models_prints_the_fixtures() {
    let o = multifield(&["list-models"], None);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("id,manifold,action,summary"));
    for id in ["M1,", "M2-director,S2,SO(3)", "M3-point,", "free-point,"] {
        assert!(text.contains(id), "{id} missing from\n{text}");
    }
}

#[test]
fn run_honours_the_output_env_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "f.toml", FORMULATION);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(multifield(&["run", &cfg], Some(&a)).status.success());
    assert!(multifield(&["run", &cfg], Some(&b)).status.success());
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(summary.starts_with("# multifield scenario=cli-formulation model=M1 seed=4\ncheck,metric,value,tolerance,status\n"));
    assert!(!summary.contains("FAIL"));
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 3);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?} differs");
    }
}

#[test]
fn out_flag_beats_the_env() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "f.toml", FORMULATION);
    let flag = tmp.path().join("flag");
    let env = tmp.path().join("env");
    assert!(multifield(&["run", &cfg, "--out", flag.to_str().unwrap()], Some(&env)).status.success());
    assert!(flag.join("summary.csv").exists());
    assert!(!env.exists());
}

#[test]
fn failed_checks_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.toml",
        "[model]\nid = \"shear-penalty\"\n[[checks]]\nkind = \"material-rotation-identity\"\n[[checks]]\nkind = \"rotation-identity\"\n",
    );
    let o = multifield(&["run", &cfg], Some(&tmp.path().join("o")));
    assert_eq!(o.status.code(), Some(1));
    let summary = fs::read_to_string(tmp.path().join("o/summary.csv")).unwrap();
    assert!(summary.contains("FAIL"));
}

#[test]
fn errors_have_distinct_codes_and_messages() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cases = [
        (d.join("missing.toml").to_str().unwrap().to_string(), 3, "file not found"),
        (write(d, "schema.toml", "[model]\nid = \"M1\"\nbogus = 1\n"), 4, "schema error"),
        (write(d, "model.toml", "[model]\nid = \"M9\"\n"), 5, "M9"),
        (
            write(d, "prereq.toml", "[model]\nid = \"M1\"\n[[checks]]\nkind = \"energy\"\n"),
            6,
            "cannot run",
        ),
        (
            write(d, "nodes.toml", "[model]\nid = \"M1\"\n[grid]\nnodes = [2]\nextents = [1.0]\n"),
            7,
            "nodes",
        ),
    ];
    let mut codes = Vec::new();
    for (cfg, code, needle) in cases {
        let o = multifield(&["run", &cfg], Some(&d.join("o")));
        assert_eq!(o.status.code(), Some(code), "{cfg}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "{cfg}: {}", stderr(&o));
        codes.push(code);
    }
    codes.dedup();
    assert_eq!(codes.len(), 5);
}

#[test]
fn rotation_prerequisites_are_enforced() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let periodic = write(
        d,
        "rot.toml",
        "[model]\nid = \"M2-director\"\n[grid]\nnodes = [8, 8]\nextents = [1.0, 1.0]\n\
         [integrator]\ndt = 0.01\nsteps = 2\nladder = [[0.01, 8], [0.005, 16]]\n\
         [[checks]]\nkind = \"noether:rotation\"\n",
    );
    let o = multifield(&["run", &periodic], Some(&d.join("o")));
    assert_eq!(o.status.code(), Some(6), "{}", stderr(&o));
    let no_action = write(d, "m1.toml", "[model]\nid = \"M1\"\n[[checks]]\nkind = \"rotation-identity\"\n");
    let o = multifield(&["run", &no_action], Some(&d.join("o")));
    assert_eq!(o.status.code(), Some(6));
    assert!(stderr(&o).contains("SO(3)"));
}

#[test]
fn derive_reads_the_run_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "f.toml", FORMULATION);
    let out = tmp.path().join("o");
    assert!(multifield(&["run", &cfg], Some(&out)).status.success());
    let snap = out.join("initial_state.txt");
    let o = multifield(&["derive", "M1", snap.to_str().unwrap(), "--param", "k=0.5"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..3], &["node", "lagrangian", "energy"]);
    assert!(header.contains(&"E22"));
    assert_eq!(lines.count(), 12);

    let o = multifield(&["derive", "M2-director", snap.to_str().unwrap()], None);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("manifold constraint"), "{}", stderr(&o));
    let o = multifield(&["derive", "M3-point", snap.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(8), "{}", stderr(&o));
}
