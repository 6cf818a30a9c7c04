//! Random GUE rotations of ground states and fidelity targeting.
//!
//! The seed-to-matrix mapping is part of the output contract: a `u64` seed initializes
//! `ChaCha20Rng::seed_from_u64`, and entries are drawn row-major from `rand_distr::StandardNormal`
//! (real part, then imaginary part).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::StateVector;
use crate::error::{Error, Result};

/// Scan step for [`tune_theta_for_fidelity`].
pub const THETA_STEP: f64 = 0.01;
/// Largest rotation angle searched before giving up.
pub const THETA_MAX: f64 = 10.0;
pub const DEFAULT_FIDELITY_TOL: f64 = 1e-3;

/// Dense Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), actual: m.ncols() });
        }
        let err = (&m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if err > 1e-12 {
            return Err(Error::Parse(format!("matrix not Hermitian ({err:e})")));
        }
        Ok(HermitianMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }
}

/// `M = (A + A^dag) / 2` where `A` has i.i.d. standard complex Gaussian entries (`E|a|^2 = 1`).
pub fn random_gue_hermitian(dim: usize, seed: u64) -> HermitianMatrix {
    random_gue_hermitian_with(dim, &mut ChaCha20Rng::seed_from_u64(seed))
}

pub fn random_gue_hermitian_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut a = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            a[(i, j)] = Complex64::new(re * s, im * s);
        }
    }
    let m = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianMatrix(m)
}

/// Eigendecomposition of a rotation generator, reused across angles.
#[derive(Clone, Debug)]
pub struct TrialRotation {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl TrialRotation {
    pub fn new(m: &HermitianMatrix) -> Self {
        let eig = m.0.clone().symmetric_eigen();
        TrialRotation { eigenvalues: eig.eigenvalues.iter().copied().collect(), eigenvectors: eig.eigenvectors }
    }

    fn check(&self, psi: &StateVector) -> Result<()> {
        if psi.dim() != self.eigenvalues.len() {
            return Err(Error::DimensionMismatch { expected: self.eigenvalues.len(), actual: psi.dim() });
        }
        Ok(())
    }

    /// `exp(-i theta M) psi`.
    pub fn apply(&self, psi: &StateVector, theta: f64) -> Result<StateVector> {
        self.check(psi)?;
        let v = DVector::from_column_slice(psi.amplitudes());
        let mut c = self.eigenvectors.adjoint() * v;
        for (ck, &lam) in c.iter_mut().zip(&self.eigenvalues) {
            *ck *= Complex64::from_polar(1.0, -theta * lam);
        }
        let out = &self.eigenvectors * c;
        StateVector::normalized(psi.n_qubits(), out.iter().copied().collect())
    }

    /// Weights `|<v_k|psi>|^2` of `psi` on the eigenvectors.
    fn weights(&self, psi: &StateVector) -> Result<Vec<f64>> {
        self.check(psi)?;
        let v = DVector::from_column_slice(psi.amplitudes());
        Ok((self.eigenvectors.adjoint() * v).iter().map(|c| c.norm_sqr()).collect())
    }

    /// First angle (scanning upward in [`THETA_STEP`]s, then bisecting) at which the fidelity
    /// with `psi` drops to `target` within `tol`. Returns `(theta, fidelity)`.
    pub fn tune(&self, psi: &StateVector, target: f64, tol: f64) -> Result<(f64, f64)> {
        if !(target > 0.0 && target <= 1.0) {
            return Err(Error::InvalidFidelity(target));
        }
        let w = self.weights(psi)?;
        // F(theta) = |sum_k w_k e^{-i theta l_k}|^2
        let f = |theta: f64| -> f64 {
            w.iter()
                .zip(&self.eigenvalues)
                .map(|(wk, &lk)| Complex64::from_polar(*wk, -theta * lk))
                .sum::<Complex64>()
                .norm_sqr()
        };
        let f0 = f(0.0);
        if f0 <= target || (f0 - target).abs() <= tol {
            return Ok((0.0, f0));
        }
        let steps = (THETA_MAX / THETA_STEP).round() as usize;
        let hi_step = (1..=steps)
            .find(|&k| f(k as f64 * THETA_STEP) <= target)
            .ok_or(Error::FidelityUnreachable { target, theta_max: THETA_MAX })?;
        let (mut lo, mut hi) = ((hi_step - 1) as f64 * THETA_STEP, hi_step as f64 * THETA_STEP);
        let fh = f(hi);
        if (fh - target).abs() <= tol {
            return Ok((hi, fh));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if (fm - target).abs() <= tol {
                return Ok((mid, fm));
            }
            if fm > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((hi, f(hi)))
    }
}

/// `exp(-i theta M) psi0`.
pub fn rotate_trial(psi0: &StateVector, m: &HermitianMatrix, theta: f64) -> Result<StateVector> {
    TrialRotation::new(m).apply(psi0, theta)
}

/// See [`TrialRotation::tune`].
pub fn tune_theta_for_fidelity(
    psi0: &StateVector,
    m: &HermitianMatrix,
    target: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    TrialRotation::new(m).tune(psi0, target, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::fidelity;

    fn achieved(psi0: &StateVector, m: &HermitianMatrix, theta: f64) -> Result<f64> {
        fidelity(&rotate_trial(psi0, m, theta)?, psi0)
    }

    fn plus() -> StateVector {
        StateVector::normalized(1, vec![Complex64::new(1.0, 0.0); 2]).unwrap()
    }

    fn pauli_z() -> HermitianMatrix {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        m[(1, 1)] = Complex64::new(-1.0, 0.0);
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn gue_is_hermitian_and_seeded() {
        let a = random_gue_hermitian(16, 7);
        assert!(HermitianMatrix::new(a.matrix().clone()).is_ok());
        assert_eq!(a, random_gue_hermitian(16, 7));
        assert_ne!(a, random_gue_hermitian(16, 8));
        let one = random_gue_hermitian(1, 3);
        assert_eq!(one.matrix()[(0, 0)].im, 0.0);
    }

    #[test]
    fn rotation_by_zero_is_identity() {
        let m = random_gue_hermitian(2, 1);
        let out = rotate_trial(&plus(), &m, 0.0).unwrap();
        for (a, b) in out.amplitudes().iter().zip(plus().amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn z_rotation_flips_plus_to_minus() {
        let out = rotate_trial(&plus(), &pauli_z(), std::f64::consts::FRAC_PI_2).unwrap();
        assert!(fidelity(&out, &plus()).unwrap() < 1e-15);
    }

    #[test]
    fn tune_hits_target() {
        let psi = StateVector::basis(3, 5).unwrap();
        let m = random_gue_hermitian(8, 11);
        let (theta, f) = tune_theta_for_fidelity(&psi, &m, 0.6, DEFAULT_FIDELITY_TOL).unwrap();
        assert!(theta > 0.0);
        assert!((f - 0.6).abs() <= DEFAULT_FIDELITY_TOL);
        assert!((achieved(&psi, &m, theta).unwrap() - 0.6).abs() <= DEFAULT_FIDELITY_TOL);
        assert_eq!(tune_theta_for_fidelity(&psi, &m, 1.0, 1e-3).unwrap().0, 0.0);
        assert!(matches!(tune_theta_for_fidelity(&psi, &m, 0.0, 1e-3), Err(Error::InvalidFidelity(_))));
    }

    #[test]
    fn unreachable_target_reported() {
        // |0> is an eigenvector of Z, so its fidelity never drops
        let zero = StateVector::from_bits("0").unwrap();
        assert!(matches!(
            tune_theta_for_fidelity(&zero, &pauli_z(), 0.5, 1e-3),
            Err(Error::FidelityUnreachable { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let m = random_gue_hermitian(4, 0);
        assert!(matches!(rotate_trial(&plus(), &m, 0.1), Err(Error::DimensionMismatch { .. })));
    }
}
