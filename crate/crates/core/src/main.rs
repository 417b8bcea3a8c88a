use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use multifield::engine::{BoundarySpec, Engine, Snapshot};
use multifield::model::registry::{Params, Registry};
use multifield::report::{num, write_file, Table};
use multifield::runner::{output_dir, run_scenario};
use multifield::scenario::Scenario;
use multifield::{Error, Result};

#[derive(Parser)]
#[command(name = "multifield", version, about = "Certify conservation laws of continua with microstructure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check of a scenario file and write CSV reports.
    Run {
        config: PathBuf,
        /// Output directory (overrides MULTIFIELD_OUTPUT_DIR and the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the registered constitutive models.
    ListModels,
    /// Evaluate the derived fields of a model on a state snapshot.
    Derive {
        model: String,
        state_file: PathBuf,
        /// Model parameter, repeatable: --param k=2.0
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        /// Write CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.to_string(), v))
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn run(config: PathBuf, out: Option<PathBuf>) -> Result<bool> {
    let registry = Registry::with_defaults();
    let scn = Scenario::load(&config, &registry)?;
    let dir = out.unwrap_or_else(|| output_dir(&scn));
    let report = run_scenario(&scn, &dir)?;
    for m in &report.metrics {
        let status = if m.passed() { "PASS" } else { "FAIL" };
        emit(&format!("{status} {} {} = {} ({})\n", m.check, m.metric, num(m.value), m.bound));
    }
    let failed = report.metrics.iter().filter(|m| !m.passed()).count();
    emit(&format!(
        "{}: {} metrics, {failed} failed; reports in {}\n",
        scn.name(),
        report.metrics.len(),
        dir.display()
    ));
    Ok(report.passed())
}

fn list_models() -> Result<()> {
    let mut t = Table::new(&["id", "manifold", "action", "summary"]);
    for info in Registry::with_defaults().list()? {
        t.push(vec![info.id, info.manifold, info.action.unwrap_or_else(|| "none".into()), info.summary]);
    }
    emit(&t.to_csv());
    Ok(())
}

fn derive(model: &str, state_file: PathBuf, params: Vec<(String, f64)>, out: Option<PathBuf>) -> Result<()> {
    let params: Params = params.into_iter().collect();
    let model = Registry::with_defaults().build(model, &params)?;
    let snap = Snapshot::read(&state_file)?;
    if snap.state.nu.first().map_or(0, Vec::len) != model.ambient_dim() {
        return Err(Error::Config(format!(
            "snapshot written for `{}` does not match the ambient dimension {} of `{}`",
            snap.model,
            model.ambient_dim(),
            model.name()
        )));
    }
    let n = model.ambient_dim();
    let engine = Engine::new(model, snap.grid.clone(), BoundarySpec::default());
    let (_, derived) = engine.derived(&snap.state)?;

    let mut header: Vec<String> = vec!["node".into(), "lagrangian".into(), "energy".into()];
    let ij = |p: &'static str| (0..3).flat_map(move |i| (0..3).map(move |j| format!("{p}{i}{j}")));
    header.extend(ij("P"));
    header.extend((0..n).flat_map(|a| (0..3).map(move |k| format!("S{a}{k}"))));
    header.extend((0..n).map(|a| format!("z{a}")));
    header.extend((0..3).map(|k| format!("b{k}")));
    header.extend((0..n).map(|a| format!("beta{a}")));
    header.extend((0..3).map(|k| format!("p{k}")));
    header.extend((0..n).map(|a| format!("mu{a}")));
    header.extend(ij("E"));
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&refs);
    for (i, d) in derived.iter().enumerate() {
        let mut row = vec![i.to_string(), num(d.lagrangian), num(d.energy)];
        row.extend(d.piola.iter().flatten().map(|v| num(*v)));
        row.extend(d.microstress.iter().flatten().map(|v| num(*v)));
        row.extend(d.self_force.iter().map(|v| num(*v)));
        row.extend(d.body_force.iter().map(|v| num(*v)));
        row.extend(d.micro_force.iter().map(|v| num(*v)));
        row.extend(d.momentum.iter().map(|v| num(*v)));
        row.extend(d.micro_momentum.iter().map(|v| num(*v)));
        row.extend(d.eshelby.iter().flatten().map(|v| num(*v)));
        t.push(row);
    }
    match out {
        Some(path) => write_file(&path, &t.to_csv()),
        None => {
            emit(&t.to_csv());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => run(config, out),
        Command::ListModels => list_models().map(|_| true),
        Command::Derive {
            model,
            state_file,
            params,
            out,
        } => derive(&model, state_file, params, out).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
