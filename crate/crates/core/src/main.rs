use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qcm::config::{Experiment, ExperimentConfig, ModelKind};
use qcm::error::{Error, Result};
use qcm::experiment::{run_fig1, run_fig2, RunOutput};
use qcm::measure::census_with;
use qcm::models::{staggered_afm, staggered_magnetisation, xxz, zz_correlation, Lattice};
use qcm::output::{emit, render, Record};
use qcm::pauli::PauliSum;
use qcm::poly::Assignment;

#[derive(Parser)]
#[command(name = "qcm", version, about = "Ground-state estimates from Hamiltonian moments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// XXZ energy and ZZ correlation versus x from three trial states.
    Fig1(Fig1Args),
    /// Staggered magnetisation from noisy, low-fidelity trial states.
    Fig2(Fig2Args),
    /// Pauli-string and TPB counts of the fourth-order moment expansion.
    Census(CensusArgs),
    /// Print a model operator in the text format.
    Export(ExportArgs),
    /// Parse an operator file and print it in canonical form.
    Import(ImportArgs),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct Fig1Args {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    x_step: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    corr_i: Option<usize>,
    #[arg(long)]
    corr_j: Option<usize>,
    /// Estimate each TPB group from this many shots instead of exactly.
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct Fig2Args {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    sites: Option<usize>,
    #[arg(long)]
    g_min: Option<f64>,
    #[arg(long)]
    g_max: Option<f64>,
    #[arg(long)]
    g_step: Option<f64>,
    /// Comma-separated fidelity targets.
    #[arg(long)]
    fidelities: Option<String>,
    /// Comma-separated depolarizing probabilities.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// per-qubit or global.
    #[arg(long)]
    noise_mode: Option<String>,
    #[arg(long)]
    fidelity_tol: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    shots: Option<usize>,
}

#[derive(Args)]
struct CensusArgs {
    #[command(flatten)]
    common: Common,
    /// xxz (grid) or staggered (chain).
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    sites: Option<usize>,
    #[arg(long)]
    corr_i: Option<usize>,
    #[arg(long)]
    corr_j: Option<usize>,
    /// Include the observable (ZZ correlation or staggered magnetisation).
    #[arg(long)]
    with_correlation: bool,
    /// label or canonical ordering of equal-weight strings in TPB grouping.
    #[arg(long)]
    tie_break: Option<String>,
}

#[derive(Args)]
struct ExportArgs {
    /// xxz, correlation, staggered or magnetisation.
    #[arg(long, default_value = "xxz")]
    model: String,
    #[arg(long, default_value_t = 4)]
    rows: usize,
    #[arg(long, default_value_t = 3)]
    cols: usize,
    #[arg(long, default_value_t = 6)]
    sites: usize,
    #[arg(long, default_value_t = 0)]
    corr_i: usize,
    #[arg(long, default_value_t = 4)]
    corr_j: usize,
    /// Print the k-th power instead (1..=4).
    #[arg(long, default_value_t = 1)]
    power: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImportArgs {
    path: PathBuf,
    /// Bind parameters, e.g. `--bind x=0.5`.
    #[arg(long, value_parser = parse_binding)]
    bind: Vec<(String, f64)>,
}

fn parse_binding(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    Ok((k.trim().to_string(), v.trim().parse().map_err(|e| format!("{e}"))?))
}

/// Collects `Some` flags as `(key, value)` overrides.
macro_rules! overrides {
    ($args:expr; $($field:ident),*) => {{
        let mut v: Vec<(&'static str, String)> = Vec::new();
        $(if let Some(x) = &$args.$field { v.push((stringify!($field), x.to_string())); })*
        v
    }};
}

fn load(experiment: Experiment, common: &Common, flags: Vec<(&'static str, String)>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(experiment);
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    for (k, v) in flags {
        cfg.set(k, &v)?;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    if let Some(f) = &common.format {
        cfg.format = f.parse()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_rows<R: Record>(cfg: &ExperimentConfig, rows: &[R]) -> Result<()> {
    match &cfg.out {
        Some(path) => emit(rows, cfg.format, path),
        None => std::io::stdout()
            .write_all(&render(rows, cfg.format))
            .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn report<R>(name: &str, out: &RunOutput<R>, failures: usize) {
    eprintln!(
        "{name}: {} rows, {} expectation tables, {failures} rows with estimator failures",
        out.rows.len(),
        out.table_builds
    );
}

fn write_text(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io { path: path.clone(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fig1(a) => {
            let flags = overrides!(a; rows, cols, x_min, x_max, x_step, epsilon, corr_i, corr_j, shots, seed);
            let cfg = load(Experiment::Fig1, &a.common, flags)?;
            let out = run_fig1(&cfg)?;
            report("fig1", &out, out.rows.iter().filter(|r| r.status != "ok").count());
            write_rows(&cfg, &out.rows)
        }
        Command::Fig2(a) => {
            let mut flags = overrides!(a; sites, g_min, g_max, g_step, fidelities, trials, seed, noise_mode,
                fidelity_tol, epsilon, shots);
            if let Some(n) = &a.noise {
                flags.push(("noise", n.clone()));
            }
            let cfg = load(Experiment::Fig2, &a.common, flags)?;
            let out = run_fig2(&cfg)?;
            report("fig2", &out, out.rows.iter().filter(|r| r.status != "ok").count());
            write_rows(&cfg, &out.rows)
        }
        Command::Census(a) => {
            let mut flags = overrides!(a; model, rows, cols, sites, corr_i, corr_j, tie_break);
            if a.with_correlation {
                flags.push(("with_correlation", "true".into()));
            }
            let cfg = load(Experiment::Census, &a.common, flags)?;
            let (h, obs) = match cfg.model {
                ModelKind::Xxz => {
                    let lattice = Lattice::grid(cfg.rows, cfg.cols)?;
                    (xxz(&lattice)?, zz_correlation(&lattice, cfg.corr_i, cfg.corr_j)?)
                }
                ModelKind::Staggered => (staggered_afm(cfg.sites)?, staggered_magnetisation(cfg.sites)?),
            };
            let census = census_with(&h, cfg.with_correlation.then_some(&obs), cfg.tie_break)?;
            if cfg.out.is_some() {
                return write_rows(&cfg, &census.rows);
            }
            println!("{:<10} {:>10} {:>8}", "convention", "n_strings", "n_tpb");
            for r in &census.rows {
                println!("{:<10} {:>10} {:>8}", r.convention.to_string(), r.n_strings, r.n_tpb);
            }
            for l in &census.layers {
                eprintln!("H^{}: {} strings, {} TPB groups", l.power, l.n_strings, l.n_tpb);
            }
            Ok(())
        }
        Command::Export(a) => {
            let op = match a.model.as_str() {
                "xxz" => xxz(&Lattice::grid(a.rows, a.cols)?)?,
                "correlation" => zz_correlation(&Lattice::grid(a.rows, a.cols)?, a.corr_i, a.corr_j)?,
                "staggered" => staggered_afm(a.sites)?,
                "magnetisation" => staggered_magnetisation(a.sites)?,
                m => return Err(Error::Config(format!("unknown model `{m}`"))),
            };
            if !(1..=4).contains(&a.power) {
                return Err(Error::PowerOutOfRange(a.power));
            }
            let op = op.powers(a.power)?.pop().expect("nonempty powers");
            write_text(a.out.as_ref(), &op.to_string())
        }
        Command::Import(a) => {
            let text = std::fs::read_to_string(&a.path).map_err(|source| Error::Io { path: a.path.clone(), source })?;
            let mut op = PauliSum::from_text(&text).map_err(|e| Error::Config(format!("{}: {e}", a.path.display())))?;
            if !a.bind.is_empty() {
                let values: Assignment = a.bind.into_iter().collect();
                op = op.partial_bind(&values);
            }
            eprintln!("{} qubits, {} terms, parameters {:?}", op.n_qubits(), op.len(), op.params());
            write_text(None, &op.to_string())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } | Error::Output { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
