//! Energy-error bound checks for a CAS partition in a given basis.

use std::f64::consts::LN_2;

use crate::casci::fold_core;
use crate::error::{QicasError, Result};
use crate::fci::{expectation, ground_state, project_cas, spectral_bounds, FciOptions};
use crate::measures::{binary_entropy_inverse, f_qi};
use crate::model::{transform_integrals, MolecularHamiltonian};
use crate::partition::CasPartition;
use crate::rdm::SpinTracedRDMs;
use crate::rotation::OrbitalRotation;

/// Absolute slack allowed in every inequality.
pub const BOUND_SLACK: f64 = 1e-9;

/// Outcome of each link of the chain
/// `ΔE ≤ ΔE′ ≤ ΔE_max·ε`, `F_QI ≥ ln4·ε`, `ΔE ≤ k·F_QI`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainFlags {
    /// `ΔE ≤ ΔE′`.
    pub casci_below_projection: bool,
    /// `ΔE′ ≤ ΔE_max·ε`.
    pub projection_below_spectral: bool,
    /// `F_QI ≥ ln4·ε`; `None` when `ε ≥ ½`.
    pub entropy_above_weight: Option<bool>,
    /// `ΔE ≤ k·F_QI`.
    pub energy_below_entropy: bool,
}

impl ChainFlags {
    pub fn all(&self) -> bool {
        self.casci_below_projection
            && self.projection_below_spectral
            && self.entropy_above_weight.unwrap_or(true)
            && self.energy_below_entropy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub e_fci: f64,
    pub e_casci: f64,
    pub delta_e: f64,
    /// Energy of the renormalized CAS projection of the ground state minus `E_FCI`.
    pub delta_e_prime: f64,
    pub delta_e_max: f64,
    /// `1 − ‖P̂ψ‖²`.
    pub epsilon: f64,
    pub f_qi: f64,
    /// `ΔE_max / ln 4`.
    pub k: f64,
    pub chain: ChainFlags,
    pub epsilon_lt_half: bool,
    /// `ΔE_max·B⁻¹(F_QI)` when `F_QI ≤ ln 2`.
    pub tight_bound: Option<f64>,
}

impl BoundReport {
    pub fn chain_ok(&self) -> bool {
        self.chain.all()
    }

    pub fn to_csv(&self, precision: usize) -> String {
        let p = precision;
        let flag = |b: bool| if b { "true" } else { "false" };
        let mut out = String::from("field,value\n");
        for (name, v) in [
            ("e_fci", self.e_fci),
            ("e_casci", self.e_casci),
            ("delta_e", self.delta_e),
            ("delta_e_prime", self.delta_e_prime),
            ("delta_e_max", self.delta_e_max),
            ("epsilon", self.epsilon),
            ("f_qi", self.f_qi),
            ("k", self.k),
        ] {
            out.push_str(&format!("{name},{v:.p$}\n"));
        }
        out.push_str(&format!("chain_a,{}\n", flag(self.chain.casci_below_projection)));
        out.push_str(&format!("chain_b,{}\n", flag(self.chain.projection_below_spectral)));
        out.push_str(&format!(
            "chain_c,{}\n",
            self.chain.entropy_above_weight.map_or("skipped", flag)
        ));
        out.push_str(&format!("chain_d,{}\n", flag(self.chain.energy_below_entropy)));
        out.push_str(&format!("chain_ok,{}\n", flag(self.chain_ok())));
        out.push_str(&format!("epsilon_lt_half,{}\n", flag(self.epsilon_lt_half)));
        match self.tight_bound {
            Some(t) => out.push_str(&format!("tight_bound,{t:.p$}\n")),
            None => out.push_str("tight_bound,none\n"),
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct BoundOptions {
    pub fci: FciOptions,
    /// Precomputed `(E_min, E_max)` of the sector; basis independent.
    pub spectral_range: Option<(f64, f64)>,
}

pub fn verify_bound(h: &MolecularHamiltonian, u: &OrbitalRotation, part: &CasPartition) -> Result<BoundReport> {
    verify_bound_with(h, u, part, &BoundOptions::default())
}

pub fn verify_bound_with(
    h: &MolecularHamiltonian,
    u: &OrbitalRotation,
    part: &CasPartition,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let rotated = transform_integrals(h, u)?;
    let (e_fci, psi) = ground_state(&rotated, h.n_elec, h.ms2, &opts.fci)?;
    let (e_min, e_max) = match opts.spectral_range {
        Some(r) => r,
        None => spectral_bounds(&rotated, h.n_elec, h.ms2, &opts.fci)?,
    };
    let delta_e_max = (e_max - e_min.min(e_fci)).max(0.0);

    let projection = project_cas(&psi, part)?;
    let Some(projected) = projection.state else {
        return Err(QicasError::DegeneratePartition {
            weight: projection.weight,
        });
    };
    let epsilon = (1.0 - projection.weight).clamp(0.0, 1.0);
    let delta_e_prime = expectation(&rotated, &projected)? - e_fci;

    let (e_core_eff, h_active) = fold_core(&rotated, part)?;
    let (e_active, _) = ground_state(&h_active, h_active.n_elec, h_active.ms2, &opts.fci)?;
    let e_casci = e_core_eff + e_active;

    let rdms = SpinTracedRDMs::from_wavefunction(&psi)?;
    let f = f_qi(&rdms, part)?;
    let delta_e = e_casci - e_fci;
    let k = delta_e_max / (2.0 * 2f64.ln());
    let epsilon_lt_half = epsilon < 0.5;
    let chain = ChainFlags {
        casci_below_projection: delta_e <= delta_e_prime + BOUND_SLACK,
        projection_below_spectral: delta_e_prime <= delta_e_max * epsilon + BOUND_SLACK,
        entropy_above_weight: epsilon_lt_half.then(|| f >= 4f64.ln() * epsilon - BOUND_SLACK),
        energy_below_entropy: delta_e <= k * f + BOUND_SLACK,
    };
    let tight_bound = (f <= LN_2).then(|| binary_entropy_inverse(f)).flatten().map(|x| delta_e_max * x);
    Ok(BoundReport {
        e_fci,
        e_casci,
        delta_e,
        delta_e_prime,
        delta_e_max,
        epsilon,
        f_qi: f,
        k,
        chain,
        epsilon_lt_half,
        tight_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hubbard, HubbardParams};
    use crate::rotation::random_orthogonal;

    #[test]
    fn all_active_is_trivially_tight() {
        let h = build_hubbard(HubbardParams::chain(4, 1.0, 4.0)).unwrap();
        let part = CasPartition::all_active(4, 4).unwrap();
        let r = verify_bound(&h, &random_orthogonal(4, 1), &part).unwrap();
        assert!(r.delta_e.abs() < 1e-9);
        assert!(r.epsilon < 1e-12);
        assert_eq!(r.f_qi, 0.0);
        assert!(r.chain_ok());
    }

    #[test]
    fn chain_holds_for_random_bases() {
        let h = build_hubbard(HubbardParams::chain(4, 1.0, 4.0)).unwrap();
        let part = CasPartition::ordered(4, 4, 2, 2).unwrap();
        for seed in 0..10 {
            let r = verify_bound(&h, &random_orthogonal(4, seed), &part).unwrap();
            assert!(r.delta_e >= -1e-9);
            assert!(r.chain.casci_below_projection && r.chain.projection_below_spectral);
            if r.epsilon_lt_half {
                assert!(r.chain_ok(), "{r:?}");
            }
        }
    }

    #[test]
    fn null_projection_is_an_error() {
        // with no β electrons the closed orbital can never be doubly occupied
        let h = build_hubbard(HubbardParams::chain(2, 1.0, 4.0)).unwrap();
        let h = h.with_electrons(2, 2).unwrap();
        let part = CasPartition::new(2, 2, vec![], vec![0], vec![1]).unwrap();
        assert!(matches!(
            verify_bound(&h, &OrbitalRotation::identity(2), &part),
            Err(QicasError::DegeneratePartition { .. })
        ));
    }

    #[test]
    fn csv_lists_every_field() {
        let h = build_hubbard(HubbardParams::chain(2, 1.0, 4.0)).unwrap();
        let part = CasPartition::all_active(2, 2).unwrap();
        let csv = verify_bound(&h, &OrbitalRotation::identity(2), &part).unwrap().to_csv(6);
        assert!(csv.starts_with("field,value\ne_fci,"));
        assert!(csv.contains("chain_ok,true"));
    }
}
