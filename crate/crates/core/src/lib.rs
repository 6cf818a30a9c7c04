//! Ground-state energies and observable estimates from low-order Hamiltonian moments,
//! using the fourth-order Lanczos cluster expansion, with exact-diagonalization oracles.
//!
//! ```
//! use qcm::models::{xxz, Lattice};
//! use qcm::moments::energy_from_moments;
//! use qcm::moments::compute_moments;
//! use qcm::poly::assign;
//! use qcm::states::StateVector;
//!
//! let h = xxz(&Lattice::chain(2).unwrap()).unwrap().bind(&assign([("x", 1.0)])).unwrap();
//! assert_eq!(h.len(), 3);
//! let neel = StateVector::from_bits("01").unwrap();
//! let m = compute_moments(&h.powers(4).unwrap(), &neel).unwrap();
//! let e = energy_from_moments(&m).unwrap().energy;
//! assert!((e - -0.375).abs() < 1e-12); // singlet: (-1-1-1)/8
//! ```

pub mod config;
pub mod error;
pub mod experiment;
pub mod measure;
pub mod models;
pub mod moments;
pub mod output;
pub mod pauli;
pub mod poly;
pub mod states;

pub use error::{Error, EstimateError, Result};
