//! Pure states, density matrices and Pauli expectation values.

mod exact;
mod gue;
mod noise;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::PauliString;

pub use exact::{exact_ground_state, residual_norm, GroundState, MAX_EXACT_QUBITS};
pub use gue::{
    random_gue_hermitian, random_gue_hermitian_with, rotate_trial, tune_theta_for_fidelity,
    HermitianMatrix, TrialRotation, DEFAULT_FIDELITY_TOL, THETA_MAX, THETA_STEP,
};
pub use noise::{depolarize, depolarize_global, depolarize_with, NoiseMode};

const NORM_TOL: f64 = 1e-12;

/// Process-wide counters of expensive state operations, for checking that sweeps reuse tables.
pub mod instrument {
    use super::*;

    pub(super) static CONTRACTIONS: AtomicU64 = AtomicU64::new(0);
    pub(crate) static TABLE_BUILDS: AtomicU64 = AtomicU64::new(0);

    /// Number of single-string expectation evaluations against a state.
    pub fn contractions() -> u64 {
        CONTRACTIONS.load(Ordering::Relaxed)
    }

    /// Number of [`ExpectationTable`](super::ExpectationTable)s built from a state.
    pub fn table_builds() -> u64 {
        TABLE_BUILDS.load(Ordering::Relaxed)
    }
}

/// Anything that can supply `<P>` for Pauli strings.
pub trait Expectations: Sync {
    fn n_qubits(&self) -> usize;

    fn expectation(&self, p: &PauliString) -> Result<f64>;
}

fn check_qubits(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::QubitMismatch { left: expected, right: actual });
    }
    Ok(())
}

/// Unit-norm statevector on `n_qubits` qubits; bit `i` of the basis index is qubit `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_EXACT_QUBITS + 2 {
            return Err(Error::QubitCount(n_qubits));
        }
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << n_qubits, actual: amps.len() });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(StateVector { n_qubits, amps })
    }

    /// Scales `amps` to unit norm first.
    pub fn normalized(n_qubits: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(n_qubits, amps)
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: index });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(n_qubits, amps)
    }

    /// Basis state from a bitstring with qubit 0 leftmost, e.g. `"010101"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let mut index = 0usize;
        for (q, ch) in bits.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => index |= 1 << q,
                _ => return Err(Error::Parse(format!("bad bitstring `{bits}`"))),
            }
        }
        Self::basis(bits.len(), index)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_qubits(self.n_qubits, other.n_qubits)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn to_density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityMatrix { n_qubits: self.n_qubits, rho: &v * v.adjoint() }
    }
}

impl Expectations for StateVector {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn expectation(&self, p: &PauliString) -> Result<f64> {
        check_qubits(self.n_qubits, p.n_qubits())?;
        instrument::CONTRACTIONS.fetch_add(1, Ordering::Relaxed);
        // <psi|P|psi> = sum_b conj(psi[b ^ x]) phase(b) psi[b]
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, amp) in self.amps.iter().enumerate() {
            let (ph, b2) = p.apply_to_basis(b as u64);
            acc += self.amps[b2 as usize].conj() * ph * amp;
        }
        Ok(acc.re)
    }
}

/// Density matrix `rho` (Hermitian, unit trace, positive semidefinite).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and trace to 1e-12.
    pub fn new(n_qubits: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: rho.nrows() });
        }
        let herm_err = (&rho - rho.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if herm_err > NORM_TOL {
            return Err(Error::Parse(format!("density matrix not Hermitian ({herm_err:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::NotNormalized(tr.re));
        }
        Ok(DensityMatrix { n_qubits, rho })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.rho.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn from_raw(n_qubits: usize, rho: DMatrix<Complex64>) -> Self {
        DensityMatrix { n_qubits, rho }
    }
}

impl Expectations for DensityMatrix {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn expectation(&self, p: &PauliString) -> Result<f64> {
        check_qubits(self.n_qubits, p.n_qubits())?;
        instrument::CONTRACTIONS.fetch_add(1, Ordering::Relaxed);
        // Tr(rho P) = sum_b rho[b, b ^ x] phase(b)
        let mut acc = Complex64::new(0.0, 0.0);
        for b in 0..self.rho.nrows() {
            let (ph, b2) = p.apply_to_basis(b as u64);
            acc += self.rho[(b, b2 as usize)] * ph;
        }
        Ok(acc.re)
    }
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// `<a|rho|a>`.
pub fn fidelity_mixed(a: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    check_qubits(a.n_qubits, rho.n_qubits)?;
    let v = nalgebra::DVector::from_column_slice(&a.amps);
    Ok((v.adjoint() * &rho.rho * &v)[(0, 0)].re)
}

/// Pauli expectations measured once from a state and reused for any coefficient binding.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectationTable {
    n_qubits: usize,
    values: HashMap<PauliString, f64>,
}

impl ExpectationTable {
    /// Evaluates `<P>` for every distinct string; the identity maps to 1.
    pub fn build<'a, S>(state: &S, strings: impl IntoIterator<Item = &'a PauliString>) -> Result<Self>
    where
        S: Expectations + ?Sized,
    {
        let mut list: Vec<PauliString> = strings.into_iter().copied().collect();
        list.sort_unstable();
        list.dedup();
        for s in &list {
            check_qubits(state.n_qubits(), s.n_qubits())?;
        }
        instrument::TABLE_BUILDS.fetch_add(1, Ordering::Relaxed);
        let values = list
            .par_iter()
            .map(|s| {
                let v = if s.is_identity() { 1.0 } else { state.expectation(s)? };
                Ok((*s, v))
            })
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(ExpectationTable { n_qubits: state.n_qubits(), values })
    }

    pub fn from_values(n_qubits: usize, values: HashMap<PauliString, f64>) -> Self {
        ExpectationTable { n_qubits, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, p: &PauliString) -> Option<f64> {
        if p.is_identity() {
            return Some(1.0);
        }
        self.values.get(p).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &f64)> {
        self.values.iter()
    }

    /// Expectations after the depolarizing channel, via the Heisenberg picture:
    /// per-qubit noise scales a weight-`w` string by `(1-p)^w`, global noise scales every
    /// non-identity string by `1-p`.
    pub fn depolarized(&self, p: f64, mode: NoiseMode) -> Result<Self> {
        noise::check_probability(p)?;
        let values = self
            .values
            .iter()
            .map(|(s, v)| {
                let f = match mode {
                    NoiseMode::PerQubit => (1.0 - p).powi(s.weight() as i32),
                    NoiseMode::Global if s.is_identity() => 1.0,
                    NoiseMode::Global => 1.0 - p,
                };
                (*s, v * f)
            })
            .collect();
        Ok(ExpectationTable { n_qubits: self.n_qubits, values })
    }
}

impl Expectations for ExpectationTable {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn expectation(&self, p: &PauliString) -> Result<f64> {
        check_qubits(self.n_qubits, p.n_qubits())?;
        self.get(p).ok_or_else(|| Error::MissingExpectation(p.to_string()))
    }
}
