//! Runs every check of a scenario and writes the reports.

use std::path::{Path, PathBuf};

use crate::checks::{run_check, validate, Metric};
use crate::error::Result;
use crate::report::{write_file, Table};
use crate::scenario::Scenario;

pub const OUTPUT_ENV: &str = "MULTIFIELD_OUTPUT_DIR";

#[derive(Clone, Debug)]
pub struct RunReport {
    pub metrics: Vec<Metric>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.metrics.iter().all(Metric::passed)
    }
}

/// `$MULTIFIELD_OUTPUT_DIR`, else `[output] dir`, else `output/<name>`.
pub fn output_dir(scn: &Scenario) -> PathBuf {
    if let Some(dir) = std::env::var_os(OUTPUT_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    match &scn.config.output.dir {
        Some(d) => PathBuf::from(d),
        None => Path::new("output").join(scn.name()),
    }
}

fn slug(kind: &str) -> String {
    kind.replace(':', "-")
}

pub fn run_scenario(scn: &Scenario, out: &Path) -> Result<RunReport> {
    for cfg in &scn.config.checks {
        validate(scn, cfg)?;
    }
    let mut metrics = Vec::new();
    let mut files = Vec::new();
    for (k, cfg) in scn.config.checks.iter().enumerate() {
        let outcome = run_check(scn, cfg)?;
        for (name, csv) in &outcome.tables {
            let path = out.join(format!("{:02}-{}-{}.csv", k + 1, slug(&cfg.kind), name));
            write_file(&path, csv)?;
            files.push(path);
        }
        metrics.extend(outcome.metrics);
    }

    if scn.config.grid.is_some() {
        let grid = scn.grid()?;
        let engine = scn.engine(grid.clone());
        let mut s = scn.initial_state(&grid)?;
        engine.prepare(&mut s)?;
        let path = out.join("initial_state.txt");
        s.write_snapshot(&path, &scn.config.model.id, &grid)?;
        files.push(path);
    }

    let mut table = Table::new(&["check", "metric", "value", "tolerance", "status"]);
    for m in &metrics {
        table.push(m.row());
    }
    let summary = format!(
        "# multifield scenario={} model={} seed={}\n{}",
        scn.name(),
        scn.config.model.id,
        scn.config.seed,
        table.to_csv()
    );
    let path = out.join("summary.csv");
    write_file(&path, &summary)?;
    files.push(path);
    Ok(RunReport { metrics, files })
}
