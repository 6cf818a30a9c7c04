//! Heisenberg-type Hamiltonians and observables on open-boundary lattices.
//!
//! Sites are indexed row-major from 0, and the alternating sign of the staggered terms uses that
//! 0-based index.

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::poly::ParamPoly;

/// Anisotropy parameter of the XXZ model.
pub const PARAM_X: &str = "x";
/// Staggered field strength.
pub const PARAM_G: &str = "g";

/// Open-boundary lattice geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lattice {
    Chain { n_sites: usize },
    Grid { rows: usize, cols: usize },
}

impl Lattice {
    pub fn chain(n_sites: usize) -> Result<Self> {
        let l = Lattice::Chain { n_sites };
        l.validate()?;
        Ok(l)
    }

    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        let l = Lattice::Grid { rows, cols };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        if n < 2 {
            return Err(Error::InvalidLattice(format!("{self:?} has fewer than 2 sites")));
        }
        if n > crate::pauli::MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        match *self {
            Lattice::Chain { n_sites } => n_sites,
            Lattice::Grid { rows, cols } => rows * cols,
        }
    }

    /// Site index of grid cell `(row, col)`.
    pub fn site(&self, row: usize, col: usize) -> usize {
        match *self {
            Lattice::Chain { .. } => col,
            Lattice::Grid { cols, .. } => row * cols + col,
        }
    }

    /// Nearest-neighbour pairs `(i, j)` with `i < j`, each listed once.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        match *self {
            Lattice::Chain { n_sites } => (1..n_sites).map(|j| (j - 1, j)).collect(),
            Lattice::Grid { rows, cols } => {
                let mut e = Vec::new();
                for r in 0..rows {
                    for c in 0..cols {
                        let s = r * cols + c;
                        if c + 1 < cols {
                            e.push((s, s + 1));
                        }
                        if r + 1 < rows {
                            e.push((s, s + cols));
                        }
                    }
                }
                e
            }
        }
    }
}

fn pair(n: usize, i: usize, j: usize, letter: char) -> PauliString {
    PauliString::from_letters(n, &[(i, letter), (j, letter)]).expect("sites in range")
}

/// `H = 1/(4q) sum_<ij> (Z_i Z_j + x (X_i X_j + Y_i Y_j))` with `x` symbolic.
pub fn xxz(lattice: &Lattice) -> Result<PauliSum> {
    lattice.validate()?;
    let q = lattice.n_sites();
    let scale = 1.0 / (4.0 * q as f64);
    let mut h = PauliSum::zero(q);
    for (i, j) in lattice.edges() {
        h.add_term(pair(q, i, j, 'Z'), ParamPoly::real(scale))?;
        h.add_term(pair(q, i, j, 'X'), ParamPoly::param(PARAM_X, scale))?;
        h.add_term(pair(q, i, j, 'Y'), ParamPoly::param(PARAM_X, scale))?;
    }
    Ok(h)
}

/// `Z_i Z_j`.
pub fn zz_correlation(lattice: &Lattice, i: usize, j: usize) -> Result<PauliSum> {
    let n = lattice.n_sites();
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidSite { i, j, n_sites: n });
    }
    Ok(PauliSum::from_term(pair(n, i, j, 'Z'), ParamPoly::real(1.0)))
}

fn stagger(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `H = 1/4 sum_<ij> (XX + YY + ZZ) + g/2 sum_k (-1)^k Z_k` on an open chain, `g` symbolic.
pub fn staggered_afm(n_sites: usize) -> Result<PauliSum> {
    let lattice = Lattice::chain(n_sites)?;
    let mut h = PauliSum::zero(n_sites);
    for (i, j) in lattice.edges() {
        for l in ['X', 'Y', 'Z'] {
            h.add_term(pair(n_sites, i, j, l), ParamPoly::real(0.25))?;
        }
    }
    for k in 0..n_sites {
        h.add_term(PauliString::single(n_sites, k, 'Z')?, ParamPoly::param(PARAM_G, 0.5 * stagger(k)))?;
    }
    Ok(h)
}

/// `M = 1/2 sum_k (-1)^k Z_k`.
pub fn staggered_magnetisation(n_sites: usize) -> Result<PauliSum> {
    if n_sites == 0 || n_sites > crate::pauli::MAX_QUBITS {
        return Err(Error::QubitCount(n_sites));
    }
    let mut m = PauliSum::zero(n_sites);
    for k in 0..n_sites {
        m.add_term(PauliString::single(n_sites, k, 'Z')?, ParamPoly::real(0.5 * stagger(k)))?;
    }
    Ok(m)
}
