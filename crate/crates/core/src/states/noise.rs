//! Depolarizing noise on density matrices.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::DensityMatrix;
use crate::error::{Error, Result};

/// How the depolarizing parameter `p` is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NoiseMode {
    /// `rho -> (1 - 3p/4) rho + p/4 (X rho X + Y rho Y + Z rho Z)` on every qubit.
    #[default]
    PerQubit,
    /// `rho -> (1 - p) rho + p I / 2^n`.
    Global,
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseMode::PerQubit => "per-qubit",
            NoiseMode::Global => "global",
        })
    }
}

impl FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-qubit" => Ok(NoiseMode::PerQubit),
            "global" => Ok(NoiseMode::Global),
            other => Err(Error::Config(format!("unknown noise mode `{other}`"))),
        }
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(())
}

/// Single-qubit depolarizing channel applied independently to every qubit.
pub fn depolarize(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    check_probability(p)?;
    let mut m = rho.matrix().clone();
    let dim = m.nrows();
    let keep = 1.0 - 0.75 * p;
    let mix = 0.25 * p;
    for q in 0..rho.n_qubits() {
        let bit = 1usize << q;
        let src = m.clone();
        for b in 0..dim {
            let sb = if b & bit == 0 { 1.0 } else { -1.0 };
            for a in 0..dim {
                let sa = if a & bit == 0 { 1.0 } else { -1.0 };
                let s = sa * sb;
                // X.X + Y.Y contributes (1 + s_a s_b) rho[a^m, b^m]; Z.Z contributes s_a s_b rho[a, b]
                let flipped = src[(a ^ bit, b ^ bit)];
                let v = src[(a, b)];
                m[(a, b)] = v * keep + (flipped * (1.0 + s) + v * s) * mix;
            }
        }
    }
    Ok(DensityMatrix::from_raw(rho.n_qubits(), m))
}

/// White noise toward the maximally mixed state.
pub fn depolarize_global(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    check_probability(p)?;
    let dim = rho.matrix().nrows();
    let mut m = rho.matrix() * Complex64::new(1.0 - p, 0.0);
    for i in 0..dim {
        m[(i, i)] += p / dim as f64;
    }
    Ok(DensityMatrix::from_raw(rho.n_qubits(), m))
}

pub fn depolarize_with(rho: &DensityMatrix, p: f64, mode: NoiseMode) -> Result<DensityMatrix> {
    match mode {
        NoiseMode::PerQubit => depolarize(rho, p),
        NoiseMode::Global => depolarize_global(rho, p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{fidelity_mixed, Expectations, StateVector};

    #[test]
    fn zero_noise_is_identity() {
        let rho = StateVector::from_bits("01").unwrap().to_density();
        assert_eq!(depolarize(&rho, 0.0).unwrap(), rho);
    }

    #[test]
    fn full_noise_on_one_qubit() {
        let rho = StateVector::from_bits("0").unwrap().to_density();
        let out = depolarize(&rho, 1.0).unwrap();
        assert!((out.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((out.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        assert_eq!(out.matrix()[(0, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn fidelity_after_noise() {
        let zero = StateVector::from_bits("0").unwrap();
        for p in [0.0, 0.1, 0.5, 1.0] {
            let out = depolarize(&zero.to_density(), p).unwrap();
            assert!((fidelity_mixed(&zero, &out).unwrap() - (1.0 - p / 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn zz_contracts_quadratically() {
        let rho = StateVector::from_bits("01").unwrap().to_density();
        let zz = "ZZ".parse().unwrap();
        let before = rho.expectation(&zz).unwrap();
        let after = depolarize(&rho, 0.3).unwrap().expectation(&zz).unwrap();
        assert!((after - 0.49 * before).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_rejected() {
        let rho = StateVector::from_bits("0").unwrap().to_density();
        assert!(matches!(depolarize(&rho, 1.5), Err(Error::InvalidProbability(_))));
        assert!(depolarize_global(&rho, -0.1).is_err());
        assert_eq!("global".parse::<NoiseMode>().unwrap(), NoiseMode::Global);
        assert!("local".parse::<NoiseMode>().is_err());
    }
}
