//! Acceptance run: one PASS/FAIL line per criterion, driven by the shipped
//! scenario files. Lines go straight to the stdout handle so they show up
//! without `--nocapture`; set `ACCEPTANCE_VERBOSE=1` for per-metric detail.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use multifield::checks::Metric;
use multifield::model::registry::Registry;
use multifield::runner::run_scenario;
use multifield::scenario::Scenario;

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn shipped(prefix: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(scenario_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            p.extension().is_some_and(|e| e == "toml")
                && p.file_name().unwrap().to_string_lossy().starts_with(prefix)
        })
        .collect();
    v.sort();
    v
}

struct Verdict {
    ok: bool,
    detail: Vec<String>,
}

/// Runs every scenario with `prefix` and requires each `(check, metric)`
/// in `required` to be present; all metrics must pass.
fn by_scenarios(prefix: &str, required: &[(&str, &str)], scratch: &Path) -> Verdict {
    let registry = Registry::with_defaults();
    let mut metrics: Vec<(String, Metric)> = Vec::new();
    let mut detail = Vec::new();
    let mut ok = true;
    let files = shipped(prefix);
    if files.is_empty() {
        return Verdict {
            ok: false,
            detail: vec![format!("no scenarios named {prefix}*")],
        };
    }
    for path in files {
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        let result = Scenario::load(&path, &registry).and_then(|s| run_scenario(&s, &scratch.join(&stem)));
        match result {
            Ok(report) => metrics.extend(report.metrics.into_iter().map(|m| (stem.clone(), m))),
            Err(e) => {
                ok = false;
                detail.push(format!("{stem}: error: {e}"));
            }
        }
    }
    for (stem, m) in &metrics {
        ok &= m.passed();
        detail.push(format!(
            "{} {stem}: {} {} = {:.3e} ({})",
            if m.passed() { "ok  " } else { "FAIL" },
            m.check,
            m.metric,
            m.value,
            m.bound
        ));
    }
    for (check, metric) in required {
        if !metrics.iter().any(|(_, m)| m.check == *check && m.metric == *metric) {
            ok = false;
            detail.push(format!("FAIL missing {check} {metric}"));
        }
    }
    Verdict { ok, detail }
}

/// Every shipped scenario exits 0 from the binary and two runs write
/// byte-identical reports.
fn cli_runs(scratch: &Path) -> Verdict {
    let mut ok = true;
    let mut detail = Vec::new();
    let files = shipped("");
    for path in &files {
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        let mut outs = Vec::new();
        for round in ["a", "b"] {
            let out = scratch.join(round).join(&stem);
            let status = Command::new(env!("CARGO_BIN_EXE_multifield"))
                .arg("run")
                .arg(path)
                .env("MULTIFIELD_OUTPUT_DIR", &out)
                .output()
                .expect("binary runs")
                .status;
            if !status.success() {
                ok = false;
                detail.push(format!("FAIL {stem}: exit {:?}", status.code()));
            }
            outs.push(out);
        }
        let mut names: Vec<_> = match fs::read_dir(&outs[0]) {
            Ok(d) => d.map(|e| e.unwrap().file_name()).collect(),
            Err(_) => Vec::new(),
        };
        names.sort();
        let same = !names.is_empty()
            && names
                .iter()
                .all(|n| fs::read(outs[0].join(n)).ok() == fs::read(outs[1].join(n)).ok());
        if !same {
            ok = false;
            detail.push(format!("FAIL {stem}: reports differ between runs"));
        } else {
            detail.push(format!("ok   {stem}: exit 0, {} identical files", names.len()));
        }
    }
    if files.len() < 8 {
        ok = false;
        detail.push(format!("FAIL only {} shipped scenarios", files.len()));
    }
    Verdict { ok, detail }
}

fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance() {
    let verbose = std::env::var_os("ACCEPTANCE_VERBOSE").is_some();
    let tmp = tempfile::tempdir().expect("temporary directory");
    let t = tmp.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        (
            "1 AD derivatives vs central differences (<=1e-6, >=100 states)",
            Box::new(|| by_scenarios("01-", &[("ad-check", "piola"), ("ad-check", "microstress"), ("ad-check", "self-force"), ("ad-check", "samples")], &t.join("1"))),
        ),
        (
            "2 Hamilton vs Lagrange rates (<=1e-10 per node)",
            Box::new(|| by_scenarios("02-", &[("formulation", "hamilton-vs-lagrange-rates")], &t.join("2"))),
        ),
        (
            "3 energy balance order >=1, drift <=1e-6 over 1000 steps",
            Box::new(|| by_scenarios("03-", &[("energy", "convergence-order"), ("energy", "relative-drift")], &t.join("3"))),
        ),
        (
            "4 Noether translation and rotation: defect <=1e-10, order >=1",
            Box::new(|| {
                by_scenarios(
                    "04-",
                    &[
                        ("noether:translation", "convergence-order"),
                        ("noether:rotation", "convergence-order"),
                        ("noether:rotation", "max-invariance-defect"),
                    ],
                    &t.join("4"),
                )
            }),
        ),
        (
            "5 rotation identities <=1e-10, broken fixtures >=1e-3",
            Box::new(|| {
                by_scenarios(
                    "05-",
                    &[("rotation-identity", "max-residual"), ("material-rotation-identity", "max-residual")],
                    &t.join("5"),
                )
            }),
        ),
        (
            "6 pseudomomentum order >=1, explicit term isolated within 10%",
            Box::new(|| {
                by_scenarios(
                    "06-",
                    &[("pseudomomentum", "convergence-order"), ("pseudomomentum", "explicit-term-isolation")],
                    &t.join("6"),
                )
            }),
        ),
        (
            "7 brackets: antisymmetry, bilinearity, Jacobi, energy rate, specializations",
            Box::new(|| {
                by_scenarios(
                    "07-",
                    &[
                        ("bracket-audit", "antisymmetry"),
                        ("bracket-audit", "bilinearity"),
                        ("bracket-audit", "relative-energy-rate"),
                        ("bracket-audit", "linear-momentum-vs-assembly"),
                        ("bracket-audit", "micro-rotation-vs-assembly"),
                        ("bracket-audit", "angular-momentum-vs-assembly"),
                        ("bracket-audit", "angular-momentum-rate-uniform"),
                        ("jacobi", "max-residual"),
                        ("jacobi", "triples"),
                    ],
                    &t.join("7"),
                )
            }),
        ),
        (
            "8 Hamilton-Jacobi: free point <=1e-8, spring orders >=1 and >=1.9",
            Box::new(|| {
                by_scenarios(
                    "08-",
                    &[
                        ("hj-verify", "hj-residual"),
                        ("hj-verify", "momentum-defect"),
                        ("hj-verify", "hj-residual-order"),
                        ("hj-verify", "action-order"),
                    ],
                    &t.join("8"),
                )
            }),
        ),
        ("9 CLI: shipped scenarios exit 0 with identical reports", Box::new(|| cli_runs(&t.join("9")))),
    ];

    let mut failed = 0;
    for (title, run) in &criteria {
        let started = std::time::Instant::now();
        let v = run();
        say(&format!(
            "{} criterion {title} [{:.1}s]",
            if v.ok { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        ));
        if verbose || !v.ok {
            for line in &v.detail {
                say(&format!("    {line}"));
            }
        }
        failed += usize::from(!v.ok);
    }
    say(&format!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len()));
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
