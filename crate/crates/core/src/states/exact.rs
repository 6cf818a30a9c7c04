//! Exact ground states by dense diagonalization of the Hamiltonian's connected sectors.
//!
//! The sparse matrix of a Pauli sum usually splits into blocks (e.g. fixed total `S^z` for XXZ
//! models). Each block is screened with Lanczos for its lowest eigenvalue and only the blocks
//! that can hold the ground energy are diagonalized densely, so degenerate ground spaces are
//! resolved exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::StateVector;
use crate::error::{Error, Result};
use crate::pauli::PauliSum;

/// Largest qubit count accepted by [`exact_ground_state`].
pub const MAX_EXACT_QUBITS: usize = 14;

const ENTRY_TOL: f64 = 1e-14;
const DENSE_LIMIT: usize = 200;
const LANCZOS_MAX_ITER: usize = 300;
// projection-norm threshold for the minimal-index tie-break
const TIE_BREAK_NORM: f64 = 1e-8;

/// Ground energy and a deterministic unit ground vector.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    /// Dimension of the ground space found.
    pub degeneracy: usize,
}

type SparseRows = Vec<Vec<(usize, Complex64)>>;

fn sparse_matrix(h: &PauliSum) -> Result<SparseRows> {
    let terms = h.constant_terms()?;
    for (s, c) in &terms {
        if c.im.abs() > 1e-12 {
            return Err(Error::Parse(format!("non-Hermitian coefficient {c} on {s}")));
        }
    }
    let dim = 1usize << h.n_qubits();
    let mut rows: SparseRows = vec![Vec::new(); dim];
    for (s, c) in &terms {
        let c = Complex64::new(c.re, 0.0);
        for b in 0..dim {
            let (ph, b2) = s.apply_to_basis(b as u64);
            rows[b2 as usize].push((b, c * ph));
        }
    }
    for row in rows.iter_mut() {
        row.sort_unstable_by_key(|e| e.0);
        let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(row.len());
        for &(j, v) in row.iter() {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|e| e.1.norm() > ENTRY_TOL);
        *row = merged;
    }
    Ok(rows)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected blocks of the matrix graph, each as ascending basis indices, ordered by first index.
fn components(rows: &SparseRows) -> Vec<Vec<usize>> {
    let dim = rows.len();
    let mut parent: Vec<usize> = (0..dim).collect();
    for (i, row) in rows.iter().enumerate() {
        for &(j, _) in row {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut slot = vec![usize::MAX; dim];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in 0..dim {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = out.len();
            out.push(Vec::new());
        }
        out[slot[r]].push(i);
    }
    out
}

struct Block {
    basis: Vec<usize>,
    // rows in local indices
    rows: SparseRows,
    real: bool,
}

impl Block {
    fn new(global: &SparseRows, basis: Vec<usize>) -> Block {
        let mut local = vec![usize::MAX; global.len()];
        for (k, &b) in basis.iter().enumerate() {
            local[b] = k;
        }
        let mut real = true;
        let rows = basis
            .iter()
            .map(|&b| {
                global[b]
                    .iter()
                    .map(|&(j, v)| {
                        real &= v.im.abs() <= ENTRY_TOL;
                        (local[j], v)
                    })
                    .collect()
            })
            .collect();
        Block { basis, rows, real }
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, h)| h * v[j]).sum();
        }
    }

    /// All eigenpairs in ascending order, as (value, local vector).
    fn dense_low(&self) -> Vec<(f64, Vec<Complex64>)> {
        let n = self.dim();
        let mut pairs = Vec::with_capacity(n);
        if self.real {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for (i, row) in self.rows.iter().enumerate() {
                for &(j, v) in row {
                    m[(i, j)] = v.re;
                }
            }
            let eig = m.symmetric_eigen();
            for (k, &val) in eig.eigenvalues.iter().enumerate() {
                let col = eig.eigenvectors.column(k);
                pairs.push((val, col.iter().map(|&x| Complex64::new(x, 0.0)).collect()));
            }
        } else {
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            for (i, row) in self.rows.iter().enumerate() {
                for &(j, v) in row {
                    m[(i, j)] = v;
                }
            }
            let eig = m.symmetric_eigen();
            for (k, &val) in eig.eigenvalues.iter().enumerate() {
                pairs.push((val, eig.eigenvectors.column(k).iter().copied().collect()));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    }

    /// Lanczos estimate (upper bound) of the lowest eigenvalue, with full reorthogonalization.
    fn lanczos_min(&self) -> f64 {
        let n = self.dim();
        let mut v: Vec<Complex64> = (0..n).map(|i| Complex64::new(start_entry(self.basis[i]), 0.0)).collect();
        normalize(&mut v);
        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        let mut prev = f64::INFINITY;
        let max_iter = n.min(LANCZOS_MAX_ITER);
        for it in 0..max_iter {
            self.apply(&v, &mut w);
            let alpha = dot(&v, &w).re;
            alphas.push(alpha);
            basis.push(v.clone());
            for _ in 0..2 {
                for u in &basis {
                    let c = dot(u, &w);
                    for (wi, ui) in w.iter_mut().zip(u) {
                        *wi -= c * ui;
                    }
                }
            }
            let beta = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let done = beta < 1e-12 || it + 1 == max_iter;
            if done || it % 5 == 4 {
                let est = tridiagonal_min(&alphas, &betas);
                if done || (prev - est).abs() <= 1e-13 * est.abs().max(1.0) {
                    return est;
                }
                prev = est;
            }
            betas.push(beta);
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / beta;
            }
        }
        tridiagonal_min(&alphas, &betas)
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= n);
}

// Deterministic pseudo-random start vector entry (splitmix64 of the basis index), so that the
// Krylov space is not confined to a symmetry sector orthogonal to the ground state.
fn start_entry(index: usize) -> f64 {
    let mut z = (index as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 + 0.25
}

fn tridiagonal_min(alphas: &[f64], betas: &[f64]) -> f64 {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    t.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Minimal eigenvalue of a fully bound Hermitian `h` and a unit ground vector.
///
/// For a degenerate ground space the returned vector is the normalized projection of the
/// computational basis state with the smallest index whose projection norm exceeds 1e-8.
pub fn exact_ground_state(h: &PauliSum) -> Result<GroundState> {
    let n = h.n_qubits();
    if n > MAX_EXACT_QUBITS {
        return Err(Error::DimensionTooLarge { n_qubits: n, max: MAX_EXACT_QUBITS });
    }
    let dim = 1usize << n;
    let rows = sparse_matrix(h)?;
    let blocks: Vec<Block> = components(&rows).into_iter().map(|b| Block::new(&rows, b)).collect();

    let estimates: Vec<f64> = blocks
        .iter()
        .map(|b| {
            if b.dim() <= DENSE_LIMIT {
                b.dense_low()[0].0
            } else {
                b.lanczos_min()
            }
        })
        .collect();
    let best = estimates.iter().copied().fold(f64::INFINITY, f64::min);
    let screen = 1e-6 * best.abs().max(1.0);

    let mut low: Vec<(f64, &Block, Vec<Complex64>)> = Vec::new();
    for (b, &est) in blocks.iter().zip(&estimates) {
        if est <= best + screen {
            for (val, vec) in b.dense_low() {
                if val > best + screen {
                    break;
                }
                low.push((val, b, vec));
            }
        }
    }
    let energy = low.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let deg_tol = 1e-9 * energy.abs().max(1.0);
    low.retain(|e| e.0 <= energy + deg_tol);

    // Projector onto the ground space applied to the first basis state with visible weight.
    let mut weight = vec![0.0f64; dim];
    for (_, block, vec) in &low {
        for (k, &b) in block.basis.iter().enumerate() {
            weight[b] += vec[k].norm_sqr();
        }
    }
    let pick = weight
        .iter()
        .position(|w| w.sqrt() > TIE_BREAK_NORM)
        .expect("ground space is nonempty");
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (_, block, vec) in &low {
        if let Ok(k) = block.basis.binary_search(&pick) {
            let c = vec[k].conj();
            for (kk, &b) in block.basis.iter().enumerate() {
                amps[b] += vec[kk] * c;
            }
        }
    }
    let state = StateVector::normalized(n, amps)?;
    Ok(GroundState { energy, state, degeneracy: low.len() })
}

/// `||H psi - E psi||` for a bound Hamiltonian.
pub fn residual_norm(h: &PauliSum, energy: f64, psi: &StateVector) -> Result<f64> {
    let rows = sparse_matrix(h)?;
    let amps = psi.amplitudes();
    let r: f64 = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let hv: Complex64 = row.iter().map(|&(j, v)| v * amps[j]).sum();
            (hv - amps[i] * energy).norm_sqr()
        })
        .sum();
    Ok(r.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{self, Lattice, PARAM_G, PARAM_X};
    use crate::poly::assign;

    #[test]
    fn single_z() {
        let h = PauliSum::from_text("(1) Z").unwrap();
        let g = exact_ground_state(&h).unwrap();
        assert_eq!(g.energy, -1.0);
        assert_eq!(g.state, StateVector::from_bits("1").unwrap());
    }

    #[test]
    fn two_site_singlet() {
        let h = models::staggered_afm(2).unwrap().bind(&assign([(PARAM_G, 0.0)])).unwrap();
        let g = exact_ground_state(&h).unwrap();
        assert!((g.energy + 0.75).abs() < 1e-12);
        assert_eq!(g.degeneracy, 1);
        // singlet (|01> - |10>)/sqrt 2 with the lower-index amplitude positive
        let a = g.state.amplitudes();
        let h2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a[1].re - h2).abs() < 1e-12 && (a[2].re + h2).abs() < 1e-12);
        assert!(a[0].norm() < 1e-12 && a[3].norm() < 1e-12);
    }

    #[test]
    fn neel_ground_state_on_grid() {
        let l = Lattice::grid(4, 3).unwrap();
        let h = models::xxz(&l).unwrap().bind(&assign([(PARAM_X, 0.0)])).unwrap();
        let g = exact_ground_state(&h).unwrap();
        assert!((g.energy + 17.0 / 48.0).abs() < 1e-12, "{}", g.energy);
        assert_eq!(g.degeneracy, 2);
        // the two checkerboards; the one with bits on even-parity sites has the smaller index
        let mut idx = 0usize;
        for r in 0..4 {
            for c in 0..3 {
                if (r + c) % 2 == 0 {
                    idx |= 1 << l.site(r, c);
                }
            }
        }
        assert_eq!(g.state, StateVector::basis(12, idx).unwrap());
    }

    #[test]
    fn residual_is_small_on_heisenberg_grid() {
        let l = Lattice::grid(2, 3).unwrap();
        let h = models::xxz(&l).unwrap().bind(&assign([(PARAM_X, 0.6)])).unwrap();
        let g = exact_ground_state(&h).unwrap();
        assert!(residual_norm(&h, g.energy, &g.state).unwrap() < 1e-10);
    }

    #[test]
    fn budget_enforced() {
        let h = models::staggered_afm(15).unwrap().bind(&assign([(PARAM_G, 0.0)])).unwrap();
        assert!(matches!(exact_ground_state(&h), Err(Error::DimensionTooLarge { .. })));
    }
}
