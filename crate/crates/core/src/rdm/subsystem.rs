//! Partial traces of `|ψ⟩⟨ψ|` onto a few spatial orbitals.
//!
//! Spin-orbitals are ordered `(0↑, 0↓, 1↑, 1↓, …)`; the selected orbitals are
//! moved to the front (in the order given) with the matching fermionic sign
//! before the environment is traced out. The local basis of each orbital is
//! `{|0⟩, |↑⟩, |↓⟩, |↑↓⟩}` with `|↑↓⟩ = a†_↑ a†_↓ |0⟩`, and the first selected
//! orbital is the most significant digit of the subsystem basis index.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, SymmetricEigen};

use super::CLAMP_TOL;
use crate::error::{QicasError, Result};
use crate::fci::Wavefunction;

pub const MAX_SUBSYSTEM_ORBITALS: usize = 8;

/// Block of the reduced state with fixed `(N↑, N↓)` on the subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct RdmBlock {
    pub n_up: usize,
    pub n_down: usize,
    /// Subsystem basis indices spanned by this block, ascending.
    pub configs: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

/// Reduced density matrix of a subsystem, stored block-diagonally.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemRdm {
    orbitals: Vec<usize>,
    blocks: Vec<RdmBlock>,
}

impl SubsystemRdm {
    pub fn orbitals(&self) -> &[usize] {
        &self.orbitals
    }

    pub fn blocks(&self) -> &[RdmBlock] {
        &self.blocks
    }

    /// `4^|subset|`.
    pub fn dim(&self) -> usize {
        1 << (2 * self.orbitals.len())
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.matrix.trace()).sum()
    }

    /// All eigenvalues, ascending (zeros from unpopulated sectors omitted).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|b| SymmetricEigen::new(b.matrix.clone()).eigenvalues.iter().copied().collect::<Vec<_>>())
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> Result<f64> {
        let mut s = 0.0;
        for l in self.eigenvalues() {
            if l < -CLAMP_TOL {
                return Err(QicasError::Positivity {
                    orbital: self.orbitals.first().copied().unwrap_or(0),
                    value: l,
                });
            }
            if l > 0.0 {
                s -= l * l.ln();
            }
        }
        Ok(s)
    }

    /// Dense `4^m × 4^m` matrix; refused above six orbitals.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.orbitals.len() > 6 {
            return Err(QicasError::Capacity(format!(
                "dense reduced state over {} orbitals",
                self.orbitals.len()
            )));
        }
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for b in &self.blocks {
            for (x, &cx) in b.configs.iter().enumerate() {
                for (y, &cy) in b.configs.iter().enumerate() {
                    m[(cx, cy)] = b.matrix[(x, y)];
                }
            }
        }
        Ok(m)
    }
}

/// Sign of reordering the occupied modes of `(alpha, beta)` from the
/// determinant convention (all ↑ then all ↓, ascending) to the subsystem-first
/// interleaved order.
fn reorder_sign(alpha: u64, beta: u64, d: usize, position: &[Option<usize>], m: usize) -> f64 {
    let key = |p: usize, spin: usize| match position[p] {
        Some(t) => 2 * t + spin,
        None => 2 * m + 2 * p + spin,
    };
    let mut keys = [0usize; 128];
    let mut n = 0;
    for (mask, spin) in [(alpha, 0), (beta, 1)] {
        for p in (0..d).filter(|p| mask >> p & 1 == 1) {
            keys[n] = key(p, spin);
            n += 1;
        }
    }
    let mut inversions = 0usize;
    for x in 0..n {
        for y in x + 1..n {
            if keys[x] > keys[y] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub fn subsystem_rdm(psi: &Wavefunction, subset: &[usize]) -> Result<SubsystemRdm> {
    let space = psi.space();
    let d = space.d();
    let m = subset.len();
    if m > MAX_SUBSYSTEM_ORBITALS {
        return Err(QicasError::Capacity(format!(
            "subsystem of {m} orbitals exceeds {MAX_SUBSYSTEM_ORBITALS}"
        )));
    }
    let mut position = vec![None; d];
    for (t, &i) in subset.iter().enumerate() {
        if i >= d {
            return Err(QicasError::Range(format!("orbital {i} outside 0..{d}")));
        }
        if position[i].replace(t).is_some() {
            return Err(QicasError::Range(format!("orbital {i} listed twice")));
        }
    }
    let sub_mask = subset.iter().fold(0u64, |acc, &i| acc | 1 << i);

    let mut env_index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut env_entries: Vec<Vec<(usize, f64)>> = Vec::new();
    for ((a, b), &c) in space.determinants().zip(psi.coeffs()) {
        if c == 0.0 {
            continue;
        }
        let mut config = 0usize;
        for &i in subset {
            let local = (a >> i & 1) as usize + 2 * (b >> i & 1) as usize;
            config = config * 4 + local;
        }
        let sign = reorder_sign(a, b, d, &position, m);
        let key = (a & !sub_mask, b & !sub_mask);
        let next = env_entries.len();
        let e = *env_index.entry(key).or_insert(next);
        if e == next {
            env_entries.push(Vec::new());
        }
        env_entries[e].push((config, sign * c));
    }

    let sector_of = |config: usize| -> (usize, usize) {
        let (mut up, mut down) = (0, 0);
        let mut x = config;
        for _ in 0..m {
            let local = x % 4;
            up += local & 1;
            down += local >> 1;
            x /= 4;
        }
        (up, down)
    };
    // every config compatible with each sector, so blocks are complete
    let mut sectors: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for entries in &env_entries {
        if let Some(&(config, _)) = entries.first() {
            sectors.entry(sector_of(config)).or_default();
        }
    }
    for config in 0..(1usize << (2 * m)) {
        if let Some(list) = sectors.get_mut(&sector_of(config)) {
            list.push(config);
        }
    }
    let mut blocks: Vec<RdmBlock> = sectors
        .into_iter()
        .map(|((n_up, n_down), configs)| RdmBlock {
            n_up,
            n_down,
            matrix: DMatrix::zeros(configs.len(), configs.len()),
            configs,
        })
        .collect();
    let block_of: HashMap<(usize, usize), usize> = blocks
        .iter()
        .enumerate()
        .map(|(k, b)| ((b.n_up, b.n_down), k))
        .collect();

    for entries in &env_entries {
        let Some(&(first, _)) = entries.first() else { continue };
        let block = &mut blocks[block_of[&sector_of(first)]];
        let local: Vec<(usize, f64)> = entries
            .iter()
            .map(|&(config, c)| (block.configs.binary_search(&config).expect("config in its sector"), c))
            .collect();
        for &(x, cx) in &local {
            for &(y, cy) in &local {
                block.matrix[(x, y)] += cx * cy;
            }
        }
    }

    Ok(SubsystemRdm {
        orbitals: subset.to_vec(),
        blocks,
    })
}

/// Dense 16×16 reduced state of orbitals `i` and `j` (basis `|s_i⟩⊗|s_j⟩`).
pub fn two_orbital_rdm(psi: &Wavefunction, i: usize, j: usize) -> Result<DMatrix<f64>> {
    if i == j {
        return Err(QicasError::Range(format!("two-orbital state needs distinct orbitals, got {i} twice")));
    }
    subsystem_rdm(psi, &[i, j])?.to_dense()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fci::{ground_state, FciOptions};
    use crate::model::{build_hubbard, HubbardParams};

    #[test]
    fn dimer_single_site() {
        let h = build_hubbard(HubbardParams::chain(2, 1.0, 4.0)).unwrap();
        let (_, psi) = ground_state(&h, 2, 0, &FciOptions::default()).unwrap();
        let rho = subsystem_rdm(&psi, &[0]).unwrap().to_dense().unwrap();
        let lam3 = (1.0 - 1.0 / 2f64.sqrt()) / 4.0;
        let expected = [lam3, 0.5 - lam3, 0.5 - lam3, lam3];
        for k in 0..4 {
            assert!((rho[(k, k)] - expected[k]).abs() < 1e-9);
        }
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        let full = subsystem_rdm(&psi, &[0, 1]).unwrap();
        assert!(full.entropy().unwrap().abs() < 1e-9);
    }

    #[test]
    fn guards() {
        let h = build_hubbard(HubbardParams::chain(2, 1.0, 4.0)).unwrap();
        let (_, psi) = ground_state(&h, 2, 0, &FciOptions::default()).unwrap();
        assert!(two_orbital_rdm(&psi, 1, 1).is_err());
        assert!(subsystem_rdm(&psi, &[0, 0]).is_err());
        assert!(subsystem_rdm(&psi, &[2]).is_err());
        assert!(matches!(
            subsystem_rdm(&psi, &[0; 9]),
            Err(QicasError::Capacity(_))
        ));
    }

    #[test]
    fn sign_of_reordering() {
        // a†_{0↑} a†_{1↑} a†_{0↓}: moving 0↓ ahead of 1↑ is one transposition
        let position = vec![None, None];
        assert_eq!(reorder_sign(0b11, 0b01, 2, &position, 0), -1.0);
        // subset {1} first: keys 1↑→0, 0↑→2, 0↓→3 ⇒ sequence (2,0,3), one inversion
        let position = vec![None, Some(0)];
        assert_eq!(reorder_sign(0b11, 0b01, 2, &position, 1), -1.0);
    }
}
