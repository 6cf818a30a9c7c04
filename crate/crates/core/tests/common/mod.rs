#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use qcm::pauli::{PauliString, PauliSum};
use qcm::poly::ParamPoly;
use qcm::states::{DensityMatrix, StateVector};

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn sigma(letter: char) -> DMatrix<Complex64> {
    let (z, o, i) = (c(0.0), c(1.0), Complex64::new(0.0, 1.0));
    match letter {
        'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => unreachable!(),
    }
}

/// Kronecker-product matrix; qubit 0 is the least significant bit, so it goes rightmost.
pub fn dense_string(p: &PauliString) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0));
    for q in (0..p.n_qubits()).rev() {
        m = m.kronecker(&sigma(p.letter(q)));
    }
    m
}

pub fn dense_sum(h: &PauliSum) -> DMatrix<Complex64> {
    let dim = 1usize << h.n_qubits();
    let mut m = DMatrix::zeros(dim, dim);
    for (s, coeff) in h.constant_terms().unwrap() {
        m += dense_string(&s) * coeff;
    }
    m
}

pub fn all_strings(n: usize) -> Vec<PauliString> {
    (0..1u64 << n).flat_map(|x| (0..1u64 << n).map(move |z| PauliString::new(n, x, z).unwrap())).collect()
}

/// Real random coefficients on a random subset of strings; never empty.
pub fn random_hamiltonian(n: usize, rng: &mut impl Rng) -> PauliSum {
    let mut h = PauliSum::zero(n);
    for s in all_strings(n) {
        if s.is_identity() || rng.random_bool(0.3) {
            h.add_term(s, ParamPoly::real(rng.random_range(-1.0..1.0))).unwrap();
        }
    }
    h
}

pub fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::normalized(n, amps).unwrap()
}

pub fn random_density(n: usize, rng: &mut impl Rng) -> DensityMatrix {
    let dim = 1usize << n;
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let mut rho = &g * g.adjoint();
    rho /= rho.trace();
    // symmetrize away rounding so validation sees an exactly Hermitian matrix
    let rho = (&rho + rho.adjoint()) * c(0.5);
    DensityMatrix::new(n, rho).unwrap()
}

pub fn dense_expectation(m: &DMatrix<Complex64>, psi: &StateVector) -> f64 {
    let v = DVector::from_column_slice(psi.amplitudes());
    (v.adjoint() * m * &v)[(0, 0)].re
}

/// Ascending eigenvalues and the ground eigenvector of a Hermitian matrix.
pub fn dense_ground(m: &DMatrix<Complex64>) -> (Vec<f64>, DVector<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    (values, eig.eigenvectors.column(order[0]).into_owned())
}

/// Closed forms of the first four cumulants.
pub fn closed_form_cumulants(m: [f64; 4]) -> [f64; 4] {
    let [m1, m2, m3, m4] = m;
    [
        m1,
        m2 - m1 * m1,
        m3 - 3.0 * m2 * m1 + 2.0 * m1.powi(3),
        m4 - 4.0 * m3 * m1 - 3.0 * m2 * m2 + 12.0 * m2 * m1 * m1 - 6.0 * m1.powi(4),
    ]
}

/// Ground vector of `h` plus a random admixture: a trial with substantial ground-state overlap.
pub fn trial_state(h: &PauliSum, rng: &mut impl Rng) -> StateVector {
    let (_, ground) = dense_ground(&dense_sum(h));
    let noise = random_state(h.n_qubits(), rng);
    let amps = ground.iter().zip(noise.amplitudes()).map(|(g, z)| g + z * c(0.6)).collect();
    StateVector::normalized(h.n_qubits(), amps).unwrap()
}

/// Lanczos-mode estimate whose denominator is not close to cancelling.
pub fn well_conditioned(h: &PauliSum, psi: &StateVector) -> bool {
    let m = qcm::moments::compute_moments(&h.powers(4).unwrap(), psi).unwrap();
    let cs = qcm::moments::cumulants(&m);
    match qcm::moments::lanczos_energy(&cs, None) {
        Ok(r) => {
            r.mode == qcm::moments::EstimateMode::Lanczos
                && r.denominator.abs() > 0.05 * (cs.c3 * cs.c3 + (cs.c2 * cs.c4).abs())
        }
        Err(_) => false,
    }
}
