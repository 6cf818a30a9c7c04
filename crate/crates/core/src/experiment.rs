//! Sweeps behind the two figures: XXZ energy and correlation from three fixed trial states
//! (`fig1`), and staggered magnetisation from GUE-rotated, depolarized trial states (`fig2`).

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{Error, EstimateError, Result};
use crate::measure::sampled_table;
use crate::models::{staggered_afm, staggered_magnetisation, xxz, zz_correlation, Lattice, PARAM_G, PARAM_X};
use crate::moments::{weighted_expectation, MomentPlan, QcmResult};
use crate::pauli::{PauliString, PauliSum};
use crate::poly::assign;
use crate::states::{
    exact_ground_state, fidelity, random_gue_hermitian_with, ExpectationTable, StateVector, TrialRotation,
};

/// GUE draws tried per trial before the fidelity target is declared unreachable.
pub const GUE_ATTEMPTS: usize = 5;

/// Trial state of Fig. 1: the exact ground state at one of three `x` values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Fig1Trial {
    /// `x = -1`, serving `x <= -1/2`.
    Ferromagnetic,
    /// `x = 0`, serving `-1/2 < x <= 1/2`.
    Neel,
    /// `x = 1`, serving `x > 1/2`.
    Antiferromagnetic,
}

impl Fig1Trial {
    pub const ALL: [Fig1Trial; 3] = [Fig1Trial::Ferromagnetic, Fig1Trial::Neel, Fig1Trial::Antiferromagnetic];

    /// Region rule; boundaries belong to the region on their left.
    pub fn for_x(x: f64) -> Self {
        if x <= -0.5 {
            Fig1Trial::Ferromagnetic
        } else if x <= 0.5 {
            Fig1Trial::Neel
        } else {
            Fig1Trial::Antiferromagnetic
        }
    }

    /// The `x` whose ground state is this trial.
    pub fn x(self) -> f64 {
        match self {
            Fig1Trial::Ferromagnetic => -1.0,
            Fig1Trial::Neel => 0.0,
            Fig1Trial::Antiferromagnetic => 1.0,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Fig1Trial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fig1Trial::Ferromagnetic => "x=-1",
            Fig1Trial::Neel => "x=0",
            Fig1Trial::Antiferromagnetic => "x=1",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig1Row {
    pub x: f64,
    pub trial: Fig1Trial,
    pub e_exact: f64,
    pub e_direct: f64,
    pub e_l4: Option<f64>,
    pub c_exact: f64,
    pub c_direct: f64,
    pub c_l4: Option<f64>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig2Row {
    pub g: f64,
    pub f_target: f64,
    pub f_achieved: Option<f64>,
    pub p: f64,
    pub trial_index: usize,
    pub m_exact: f64,
    pub m_direct: Option<f64>,
    pub m_l4: Option<f64>,
    pub status: String,
}

/// Rows plus the number of expectation tables built to produce them.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput<R> {
    pub rows: Vec<R>,
    pub table_builds: usize,
}

fn status(parts: &[(&str, Option<&EstimateError>)]) -> String {
    let failed: Vec<String> = parts
        .iter()
        .filter_map(|(name, e)| e.map(|e| format!("{name}:{}", e.code())))
        .collect();
    if failed.is_empty() {
        "ok".to_string()
    } else {
        failed.join(";")
    }
}

fn bound_expectation(op: &PauliSum, values: &crate::poly::Assignment, state: &StateVector) -> Result<f64> {
    weighted_expectation(&op.bound_terms(values)?, state)
}

/// Fig. 1 machinery: the symbolic plan for `H(x) + lambda C` and one expectation table per
/// trial state, reusable for any `x`.
pub struct Fig1Runner {
    hamiltonian: PauliSum,
    correlation: PauliSum,
    plan: MomentPlan,
    tables: Vec<ExpectationTable>,
    epsilon: f64,
}

impl Fig1Runner {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let lattice = Lattice::grid(config.rows, config.cols)?;
        let hamiltonian = xxz(&lattice)?;
        let correlation = zz_correlation(&lattice, config.corr_i, config.corr_j)?;
        let plan = MomentPlan::new(&hamiltonian, Some(&correlation))?;
        let strings = plan.strings();
        let tables = Fig1Trial::ALL
            .iter()
            .map(|t| {
                let ground = exact_ground_state(&hamiltonian.bind(&assign([(PARAM_X, t.x())]))?)?;
                match config.shots {
                    Some(shots) => sampled_table(&ground.state, &strings, shots, config.seed.wrapping_add(t.index() as u64)),
                    None => ExpectationTable::build(&ground.state, &strings),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Fig1Runner { hamiltonian, correlation, plan, tables, epsilon: config.epsilon })
    }

    pub fn table(&self, trial: Fig1Trial) -> &ExpectationTable {
        &self.tables[trial.index()]
    }

    pub fn plan(&self) -> &MomentPlan {
        &self.plan
    }

    /// Estimates at `x` from the region's trial table, with the exact oracle alongside.
    pub fn row(&self, x: f64) -> Result<Fig1Row> {
        let trial = Fig1Trial::for_x(x);
        let values = assign([(PARAM_X, x)]);
        let table = self.table(trial);
        let (e_direct, e_l4) = self.plan.energy_at(table, &values)?;
        let c_direct = self.plan.observable_direct(table, &values)?.expect("plan has an observable");
        let c_l4 = self.plan.observable_at(table, &values, self.epsilon)?;

        let ground = exact_ground_state(&self.hamiltonian.bind(&values)?)?;
        let c_exact = bound_expectation(&self.correlation, &values, &ground.state)?;
        Ok(Fig1Row {
            x,
            trial,
            e_exact: ground.energy,
            e_direct,
            e_l4: e_l4.as_ref().ok().map(|r: &QcmResult| r.energy),
            c_exact,
            c_direct,
            c_l4: c_l4.as_ref().ok().copied(),
            status: status(&[("E_L4", e_l4.as_ref().err()), ("C_L4", c_l4.as_ref().err())]),
        })
    }
}

pub fn run_fig1(config: &ExperimentConfig) -> Result<RunOutput<Fig1Row>> {
    config.validate()?;
    let xs = config.x_grid()?;
    let runner = Fig1Runner::new(config)?;
    let rows = xs.par_iter().map(|&x| runner.row(x)).collect::<Result<Vec<_>>>()?;
    Ok(RunOutput { rows, table_builds: runner.tables.len() })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the random stream for one `(g, F, trial)` triple. The noise level is deliberately
/// not an input: every `p` sees the same trial state.
pub fn trial_seed(seed: u64, g_index: usize, f_index: usize, trial: usize) -> u64 {
    [g_index, f_index, trial]
        .iter()
        .fold(splitmix64(seed), |h, &v| splitmix64(h ^ v as u64))
}

/// The state and its fidelity for one `(g, F, trial)` triple, or why none was found.
pub fn fig2_trial_state(
    ground: &StateVector,
    f_target: f64,
    tol: f64,
    seed: u64,
) -> Result<(StateVector, f64)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut last = None;
    for _ in 0..GUE_ATTEMPTS {
        let m = random_gue_hermitian_with(ground.dim(), &mut rng);
        let rotation = TrialRotation::new(&m);
        match rotation.tune(ground, f_target, tol) {
            Ok((theta, _)) => {
                let trial = rotation.apply(ground, theta)?;
                let f = fidelity(&trial, ground)?;
                return Ok((trial, f));
            }
            Err(e @ Error::FidelityUnreachable { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

// (g, F, p, trial) indices, the emission order
type KeyedRow = ((usize, usize, usize, usize), Fig2Row);

struct Fig2Task {
    gi: usize,
    fi: usize,
    trial: usize,
}

pub fn run_fig2(config: &ExperimentConfig) -> Result<RunOutput<Fig2Row>> {
    config.validate()?;
    let gs = config.g_grid()?;
    let hamiltonian = staggered_afm(config.sites)?;
    let magnetisation = staggered_magnetisation(config.sites)?;
    let plan = MomentPlan::new(&hamiltonian, Some(&magnetisation))?;
    let strings: Vec<PauliString> = plan.strings().into_iter().collect();

    let grounds = gs
        .par_iter()
        .map(|&g| {
            let values = assign([(PARAM_G, g)]);
            let ground = exact_ground_state(&hamiltonian.bind(&values)?)?;
            let m_exact = bound_expectation(&magnetisation, &values, &ground.state)?;
            Ok((ground.state, m_exact))
        })
        .collect::<Result<Vec<_>>>()?;

    let tasks: Vec<Fig2Task> = (0..gs.len())
        .flat_map(|gi| {
            (0..config.fidelities.len())
                .flat_map(move |fi| (0..config.trials).map(move |trial| Fig2Task { gi, fi, trial }))
        })
        .collect();

    let per_task = tasks
        .par_iter()
        .map(|t| -> Result<(bool, Vec<KeyedRow>)> {
            let g = gs[t.gi];
            let f_target = config.fidelities[t.fi];
            let (ground, m_exact) = &grounds[t.gi];
            let values = assign([(PARAM_G, g)]);
            let seed = trial_seed(config.seed, t.gi, t.fi, t.trial);
            let row = |pi: usize, p: f64, f_achieved, m_direct, m_l4, status: String| {
                let row = Fig2Row {
                    g,
                    f_target,
                    f_achieved,
                    p,
                    trial_index: t.trial,
                    m_exact: *m_exact,
                    m_direct,
                    m_l4,
                    status,
                };
                ((t.gi, t.fi, pi, t.trial), row)
            };
            let (state, f_achieved) = match fig2_trial_state(ground, f_target, config.fidelity_tol, seed) {
                Ok(s) => s,
                Err(Error::FidelityUnreachable { .. }) => {
                    let rows = config
                        .noise_levels
                        .iter()
                        .enumerate()
                        .map(|(pi, &p)| row(pi, p, None, None, None, "fidelity_unreachable".into()))
                        .collect();
                    return Ok((false, rows));
                }
                Err(e) => return Err(e),
            };
            let pure = match config.shots {
                Some(shots) => sampled_table(&state, &strings, shots, splitmix64(seed)),
                None => ExpectationTable::build(&state, &strings),
            }?;
            let rows = config
                .noise_levels
                .iter()
                .enumerate()
                .map(|(pi, &p)| {
                    let noisy = pure.depolarized(p, config.noise_mode)?;
                    let m_direct = plan.observable_direct(&noisy, &values)?;
                    let m_l4 = plan.observable_at(&noisy, &values, config.epsilon)?;
                    let st = status(&[("M_L4", m_l4.as_ref().err())]);
                    Ok(row(pi, p, Some(f_achieved), m_direct, m_l4.ok(), st))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((true, rows))
        })
        .collect::<Result<Vec<_>>>()?;

    let table_builds = per_task.iter().filter(|(built, _)| *built).count();
    let mut keyed: Vec<_> = per_task.into_iter().flat_map(|(_, rows)| rows).collect();
    keyed.sort_by_key(|(k, _)| *k);
    Ok(RunOutput { rows: keyed.into_iter().map(|(_, r)| r).collect(), table_builds })
}
