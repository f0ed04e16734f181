//! CASCI energies in an arbitrary orbital basis.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{QicasError, Result};
use crate::fci::{ground_state, FciOptions, Wavefunction};
use crate::model::{transform_integrals, Eri, MolecularHamiltonian};
use crate::partition::CasPartition;
use crate::rdm::compute_1rdm;
use crate::rotation::OrbitalRotation;

#[derive(Debug, Clone)]
pub struct CasciResult {
    pub e_total: f64,
    pub e_core_eff: f64,
    pub e_active: f64,
    pub active_psi: Wavefunction,
    /// Eigenvalues of the active spin-summed 1-RDM, descending.
    pub natural_occupations: Vec<f64>,
}

impl CasciResult {
    pub fn to_csv(&self, precision: usize) -> String {
        let p = precision;
        let mut out = String::from("field,value\n");
        out.push_str(&format!("e_total,{:.p$}\n", self.e_total));
        out.push_str(&format!("e_core_eff,{:.p$}\n", self.e_core_eff));
        out.push_str(&format!("e_active,{:.p$}\n", self.e_active));
        for (k, n) in self.natural_occupations.iter().enumerate() {
            out.push_str(&format!("natural_occupation_{k},{n:.p$}\n"));
        }
        out
    }
}

/// Folds the doubly occupied closed orbitals into an effective core and
/// restricts the Hamiltonian to the active orbitals (in the order of
/// `part.active()`), dropping virtuals.
pub fn fold_core(h: &MolecularHamiltonian, part: &CasPartition) -> Result<(f64, MolecularHamiltonian)> {
    if h.d() != part.d() || h.n_elec != part.n_elec() {
        return Err(QicasError::Partition(format!(
            "partition over {} orbitals / {} electrons for a Hamiltonian over {} / {}",
            part.d(),
            part.n_elec(),
            h.d(),
            h.n_elec
        )));
    }
    let h1 = h.h1();
    let eri = h.eri();
    let closed = part.closed();
    let active = part.active();

    let mut e_core = h.e_core;
    for &i in closed {
        e_core += 2.0 * h1[(i, i)];
        for &j in closed {
            e_core += 2.0 * eri.get(i, i, j, j) - eri.get(i, j, j, i);
        }
    }

    let n = active.len();
    let mut h_act = DMatrix::zeros(n, n);
    for (a, &p) in active.iter().enumerate() {
        for (b, &q) in active.iter().enumerate() {
            let mut v = h1[(p, q)];
            for &i in closed {
                v += 2.0 * eri.get(p, q, i, i) - eri.get(p, i, i, q);
            }
            h_act[(a, b)] = v;
        }
    }
    let mut eri_act = Eri::zeros(n);
    for a in 0..n {
        for b in 0..=a {
            for c in 0..n {
                for e in 0..=c {
                    if a * (a + 1) / 2 + b >= c * (c + 1) / 2 + e {
                        eri_act.set(a, b, c, e, eri.get(active[a], active[b], active[c], active[e]));
                    }
                }
            }
        }
    }
    let h_active = MolecularHamiltonian::new(part.n_cas(), h.ms2, 0.0, h_act, eri_act)?;
    Ok((e_core, h_active))
}

/// CASCI energy of `h` in the basis `u`, with default solver options.
pub fn casci_energy(h: &MolecularHamiltonian, u: &OrbitalRotation, part: &CasPartition) -> Result<CasciResult> {
    casci_energy_with(h, u, part, &FciOptions::default())
}

pub fn casci_energy_with(
    h: &MolecularHamiltonian,
    u: &OrbitalRotation,
    part: &CasPartition,
    opts: &FciOptions,
) -> Result<CasciResult> {
    let rotated = transform_integrals(h, u)?;
    let (e_core_eff, h_active) = fold_core(&rotated, part)?;
    let (e_active, active_psi) = ground_state(&h_active, h_active.n_elec, h_active.ms2, opts)?;
    let (ga, gb) = compute_1rdm(&active_psi);
    let mut natural_occupations: Vec<f64> = if ga.is_empty() {
        Vec::new()
    } else {
        SymmetricEigen::new(ga + gb).eigenvalues.iter().copied().collect()
    };
    natural_occupations.sort_by(|a, b| b.total_cmp(a));
    Ok(CasciResult {
        e_total: e_core_eff + e_active,
        e_core_eff,
        e_active,
        active_psi,
        natural_occupations,
    })
}
