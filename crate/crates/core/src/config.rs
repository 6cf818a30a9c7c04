//! Experiment configuration: defaults, `key = value` files and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::measure::TieBreak;
use crate::states::{NoiseMode, DEFAULT_FIDELITY_TOL, MAX_EXACT_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Fig1,
    Fig2,
    Census,
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Experiment::Fig1),
            "fig2" => Ok(Experiment::Fig2),
            "census" => Ok(Experiment::Census),
            _ => Err(Error::Config(format!("unknown experiment `{s}`"))),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Fig1 => "fig1",
            Experiment::Fig2 => "fig2",
            Experiment::Census => "census",
        })
    }
}

/// Model used by the census (`xxz` grid with ZZ correlation, or `staggered` chain with M).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Xxz,
    Staggered,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xxz" => Ok(ModelKind::Xxz),
            "staggered" => Ok(ModelKind::Staggered),
            _ => Err(Error::Config(format!("unknown model `{s}` (expected xxz or staggered)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: ModelKind,
    pub rows: usize,
    pub cols: usize,
    pub sites: usize,
    pub corr_i: usize,
    pub corr_j: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub x_step: f64,
    pub g_min: f64,
    pub g_max: f64,
    pub g_step: f64,
    pub epsilon: f64,
    pub fidelities: Vec<f64>,
    pub noise_levels: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub noise_mode: NoiseMode,
    pub fidelity_tol: f64,
    /// Estimate expectations from this many shots per TPB group instead of exactly.
    pub shots: Option<usize>,
    pub with_correlation: bool,
    pub tie_break: TieBreak,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            model: ModelKind::Xxz,
            rows: 4,
            cols: 3,
            sites: 6,
            // corner and its diagonal next-nearest neighbour on the row-major 4x3 grid
            corr_i: 0,
            corr_j: 4,
            x_min: -0.975,
            x_max: 0.975,
            x_step: 0.05,
            g_min: 0.0,
            g_max: 2.0,
            g_step: 0.1,
            epsilon: crate::moments::DEFAULT_EPSILON,
            fidelities: vec![0.4, 0.7, 0.9],
            noise_levels: vec![0.01, 0.1, 0.5],
            trials: 10,
            seed: 42,
            noise_mode: NoiseMode::PerQubit,
            fidelity_tol: DEFAULT_FIDELITY_TOL,
            shots: None,
            with_correlation: false,
            tie_break: TieBreak::default(),
            out: None,
            format: OutputFormat::Csv,
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: &dyn fmt::Display| Error::Config(format!("{key}: {e}"));
        macro_rules! parse {
            () => {
                value.parse().map_err(|e| bad(&e))?
            };
        }
        match key {
            "experiment" => self.experiment = value.parse()?,
            "model" => self.model = value.parse()?,
            "rows" => self.rows = parse!(),
            "cols" => self.cols = parse!(),
            "sites" => self.sites = parse!(),
            "corr_i" => self.corr_i = parse!(),
            "corr_j" => self.corr_j = parse!(),
            "x_min" => self.x_min = parse!(),
            "x_max" => self.x_max = parse!(),
            "x_step" => self.x_step = parse!(),
            "g_min" => self.g_min = parse!(),
            "g_max" => self.g_max = parse!(),
            "g_step" => self.g_step = parse!(),
            "epsilon" => self.epsilon = parse!(),
            "fidelities" => self.fidelities = parse_list(value).map_err(|e| bad(&e))?,
            "noise" | "noise_levels" => self.noise_levels = parse_list(value).map_err(|e| bad(&e))?,
            "trials" => self.trials = parse!(),
            "seed" => self.seed = parse!(),
            "noise_mode" => self.noise_mode = parse!(),
            "fidelity_tol" => self.fidelity_tol = parse!(),
            "shots" => self.shots = if value == "none" { None } else { Some(parse!()) },
            "with_correlation" => self.with_correlation = parse!(),
            "tie_break" => self.tie_break = parse!(),
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        self.apply_text(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn x_grid(&self) -> Result<Vec<f64>> {
        linspace("x", self.x_min, self.x_max, self.x_step)
    }

    pub fn g_grid(&self) -> Result<Vec<f64>> {
        linspace("g", self.g_min, self.g_max, self.g_step)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return cfg(format!("epsilon must be positive, got {}", self.epsilon));
        }
        match self.experiment {
            Experiment::Fig1 => {
                self.check_grid()?;
                let xs = self.x_grid()?;
                if xs.iter().any(|x| x.abs() > 1.0) {
                    return cfg("x grid must lie within [-1, 1]".into());
                }
                if let Some(0) = self.shots {
                    return cfg("shots must be at least 1".into());
                }
            }
            Experiment::Fig2 => {
                self.check_chain()?;
                self.g_grid()?;
                if self.fidelities.is_empty() || self.noise_levels.is_empty() {
                    return cfg("fidelities and noise levels must be nonempty".into());
                }
                if let Some(f) = self.fidelities.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
                    return Err(Error::InvalidFidelity(*f));
                }
                if let Some(p) = self.noise_levels.iter().find(|p| !(**p >= 0.0 && **p <= 1.0)) {
                    return Err(Error::InvalidProbability(*p));
                }
                if self.trials == 0 {
                    return cfg("trials must be at least 1".into());
                }
                if self.fidelity_tol.is_nan() || self.fidelity_tol <= 0.0 {
                    return cfg("fidelity_tol must be positive".into());
                }
                if let Some(0) = self.shots {
                    return cfg("shots must be at least 1".into());
                }
            }
            Experiment::Census => match self.model {
                ModelKind::Xxz => self.check_grid()?,
                ModelKind::Staggered => self.check_chain()?,
            },
        }
        Ok(())
    }

    fn check_grid(&self) -> Result<()> {
        let n = self.rows * self.cols;
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidLattice(format!("{}x{} grid", self.rows, self.cols)));
        }
        if n > MAX_EXACT_QUBITS {
            return Err(Error::DimensionTooLarge { n_qubits: n, max: MAX_EXACT_QUBITS });
        }
        if self.corr_i == self.corr_j || self.corr_i >= n || self.corr_j >= n {
            return Err(Error::InvalidSite { i: self.corr_i, j: self.corr_j, n_sites: n });
        }
        Ok(())
    }

    fn check_chain(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidLattice(format!("chain of {} sites", self.sites)));
        }
        if self.sites > MAX_EXACT_QUBITS {
            return Err(Error::DimensionTooLarge { n_qubits: self.sites, max: MAX_EXACT_QUBITS });
        }
        Ok(())
    }
}

fn parse_list(value: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

/// `min, min + step, ...` up to `max` (inclusive within rounding), values rounded to 1e-12.
pub fn linspace(name: &str, min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) || !min.is_finite() || !max.is_finite() {
        return Err(Error::Config(format!("{name} grid: step must be positive and bounds finite")));
    }
    if max < min {
        return Err(Error::Config(format!("{name} grid is empty ({name}_max < {name}_min)")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| ((min + i as f64 * step) * 1e12).round() / 1e12).collect())
}
