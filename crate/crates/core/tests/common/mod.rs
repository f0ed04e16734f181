//! Brute-force second-quantized oracle shared by the integration tests.
//!
//! Spin-orbital modes are interleaved, `2p` for `p↑` and `2p + 1` for `p↓`.
//! A Fock state is a bitmask over modes, built as the product of creators in
//! ascending mode order acting on the vacuum.

#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use qicas::fci::Wavefunction;
use qicas::model::{Eri, MolecularHamiltonian};

pub const UP: usize = 0;
pub const DOWN: usize = 1;

pub fn mode(p: usize, spin: usize) -> usize {
    2 * p + spin
}

/// One ladder operator: `(mode, true)` creates, `(mode, false)` annihilates.
pub type Ladder = (usize, bool);

pub fn cre(p: usize, spin: usize) -> Ladder {
    (mode(p, spin), true)
}

pub fn ann(p: usize, spin: usize) -> Ladder {
    (mode(p, spin), false)
}

/// Applies a product of ladder operators (rightmost first) to a basis state.
pub fn apply(ops: &[Ladder], state: u64) -> Option<(f64, u64)> {
    let mut sign = 1.0;
    let mut s = state;
    for &(k, create) in ops.iter().rev() {
        let bit = 1u64 << k;
        let occupied = s & bit != 0;
        if occupied == create {
            return None;
        }
        if (s & (bit - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        s ^= bit;
    }
    Some((sign, s))
}

/// Basis of a fixed `(N↑, N↓)` sector.
pub struct Sector {
    pub d: usize,
    pub states: Vec<u64>,
    pub index: HashMap<u64, usize>,
}

impl Sector {
    pub fn new(d: usize, n_up: usize, n_down: usize) -> Self {
        Self::filtered(d, n_up, n_down, |_| true)
    }

    /// Sector states accepted by `keep`.
    pub fn filtered(d: usize, n_up: usize, n_down: usize, keep: impl Fn(u64) -> bool) -> Self {
        let mut states = Vec::new();
        for s in 0u64..(1u64 << (2 * d)) {
            let up = (0..d).filter(|&p| s >> mode(p, UP) & 1 == 1).count();
            let down = (0..d).filter(|&p| s >> mode(p, DOWN) & 1 == 1).count();
            if up == n_up && down == n_down && keep(s) {
                states.push(s);
            }
        }
        let index = states.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        Sector { d, states, index }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Matrix of an operator sum `Σ coeff · product` within the sector.
    /// Components leaving the sector are dropped.
    pub fn operator(&self, terms: &[(f64, Vec<Ladder>)]) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (col, &s) in self.states.iter().enumerate() {
            for (coeff, ops) in terms {
                if *coeff == 0.0 {
                    continue;
                }
                if let Some((sign, t)) = apply(ops, s) {
                    if let Some(&row) = self.index.get(&t) {
                        m[(row, col)] += coeff * sign;
                    }
                }
            }
        }
        m
    }

    pub fn expect(&self, v: &DVector<f64>, ops: &[Ladder]) -> f64 {
        let mut total = 0.0;
        for (col, &s) in self.states.iter().enumerate() {
            if v[col] == 0.0 {
                continue;
            }
            if let Some((sign, t)) = apply(ops, s) {
                if let Some(&row) = self.index.get(&t) {
                    total += v[row] * sign * v[col];
                }
            }
        }
        total
    }

    /// Embeds a determinant-basis wavefunction (α string then β string) into
    /// the interleaved Fock basis.
    pub fn embed(&self, psi: &Wavefunction) -> DVector<f64> {
        let space = psi.space();
        let mut v = DVector::zeros(self.dim());
        let alphas = space.alpha().masks();
        let betas = space.beta().masks();
        for (ia, &a) in alphas.iter().enumerate() {
            for (ib, &b) in betas.iter().enumerate() {
                let c = psi.coeffs()[ia * betas.len() + ib];
                let mut ops = Vec::new();
                for p in (0..self.d).filter(|p| a >> p & 1 == 1) {
                    ops.push(cre(p, UP));
                }
                for p in (0..self.d).filter(|p| b >> p & 1 == 1) {
                    ops.push(cre(p, DOWN));
                }
                let (sign, state) = apply(&ops, 0).expect("distinct modes");
                v[self.index[&state]] += sign * c;
            }
        }
        v
    }
}

/// Second-quantized Hamiltonian terms in chemists' notation.
pub fn hamiltonian_terms(h: &MolecularHamiltonian) -> Vec<(f64, Vec<Ladder>)> {
    let d = h.d();
    let mut terms = vec![(h.e_core, vec![])];
    for p in 0..d {
        for q in 0..d {
            for s in [UP, DOWN] {
                terms.push((h.h1()[(p, q)], vec![cre(p, s), ann(q, s)]));
            }
        }
    }
    for p in 0..d {
        for q in 0..d {
            for r in 0..d {
                for t in 0..d {
                    let v = h.eri().get(p, q, r, t);
                    if v == 0.0 {
                        continue;
                    }
                    for s1 in [UP, DOWN] {
                        for s2 in [UP, DOWN] {
                            terms.push((0.5 * v, vec![cre(p, s1), cre(r, s2), ann(t, s2), ann(q, s1)]));
                        }
                    }
                }
            }
        }
    }
    terms
}

pub fn sector_of(h: &MolecularHamiltonian) -> Sector {
    let n_up = (h.n_elec as i64 + h.ms2 as i64) / 2;
    let n_down = h.n_elec as i64 - n_up;
    Sector::new(h.d(), n_up as usize, n_down as usize)
}

/// Lowest eigenpair of a dense symmetric matrix.
pub fn lowest(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let k = eig.eigenvalues.imin();
    (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
}

/// Integrals in the basis `φ̃_i = Σ_j u_ij φ_j`, by direct summation.
pub fn rotate_integrals(h: &MolecularHamiltonian, u: &DMatrix<f64>) -> MolecularHamiltonian {
    let d = h.d();
    let h1 = u * h.h1() * u.transpose();
    let mut full = vec![0.0; d * d * d * d];
    let at = |p: usize, q: usize, r: usize, s: usize| ((p * d + q) * d + r) * d + s;
    for p in 0..d {
        for q in 0..d {
            for r in 0..d {
                for s in 0..d {
                    full[at(p, q, r, s)] = h.eri().get(p, q, r, s);
                }
            }
        }
    }
    // one index at a time
    for slot in 0..4 {
        let mut next = vec![0.0; full.len()];
        for p in 0..d {
            for q in 0..d {
                for r in 0..d {
                    for s in 0..d {
                        let mut acc = 0.0;
                        for k in 0..d {
                            let (a, b, c, e) = match slot {
                                0 => (k, q, r, s),
                                1 => (p, k, r, s),
                                2 => (p, q, k, s),
                                _ => (p, q, r, k),
                            };
                            let row = [p, q, r, s][slot];
                            acc += u[(row, k)] * full[at(a, b, c, e)];
                        }
                        next[at(p, q, r, s)] = acc;
                    }
                }
            }
        }
        full = next;
    }
    let mut eri = Eri::zeros(d);
    for p in 0..d {
        for q in 0..d {
            for r in 0..d {
                for s in 0..d {
                    eri.set(p, q, r, s, full[at(p, q, r, s)]);
                }
            }
        }
    }
    MolecularHamiltonian::new(h.n_elec, h.ms2, h.e_core, h1, eri).unwrap()
}

/// Seeded orthogonal matrix from Gram-Schmidt on a fixed pseudo-random fill.
pub fn orthogonal(d: usize, seed: u64) -> DMatrix<f64> {
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut m = DMatrix::from_fn(d, d, |_, _| next());
    for i in 0..d {
        for j in 0..i {
            let dot = m.row(i).dot(&m.row(j));
            let rj = m.row(j).into_owned();
            let mut ri = m.row_mut(i);
            ri -= dot * rj;
        }
        let norm = m.row(i).norm();
        let mut ri = m.row_mut(i);
        ri /= norm;
    }
    m
}

/// Natural-orbital basis as rows, ordered by descending occupation.
pub fn natural_orbitals(rdms: &qicas::rdm::SpinTracedRDMs) -> qicas::rotation::OrbitalRotation {
    let eig = SymmetricEigen::new(rdms.spin_summed());
    let d = rdms.d();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let rows = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(c, order[r])]);
    qicas::rotation::OrbitalRotation::new(rows).unwrap()
}
