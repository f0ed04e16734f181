//! Reduced density matrices of a determinant-basis wavefunction.

mod subsystem;

pub use subsystem::{subsystem_rdm, two_orbital_rdm, SubsystemRdm, MAX_SUBSYSTEM_ORBITALS};

use nalgebra::DMatrix;

use crate::error::{QicasError, Result};
use crate::fci::Wavefunction;
use crate::rotation::OrbitalRotation;
use crate::tensor::Tensor4;

/// Largest opposite-spin tensor (`d⁴` entries) the engine will allocate.
pub const MAX_OS_ENTRIES: usize = 1 << 27;

/// Negative eigenvalues above this are numerical noise and clamped to zero.
pub const CLAMP_TOL: f64 = 1e-8;

/// Spin-resolved 1-RDMs and the opposite-spin 2-RDM block
/// `gamma_os[p][q][r][s] = ⟨a†_{p↑} a†_{q↓} a_{s↓} a_{r↑}⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinTracedRDMs {
    pub gamma_a: DMatrix<f64>,
    pub gamma_b: DMatrix<f64>,
    pub gamma_os: Tensor4,
}

/// `(gamma_a, gamma_b)` with `gamma[p][q] = ⟨a†_p a_q⟩` per spin.
pub fn compute_1rdm(psi: &Wavefunction) -> (DMatrix<f64>, DMatrix<f64>) {
    let space = psi.space();
    let d = space.d();
    let na = space.alpha().len();
    let nb = space.beta().len();
    let c = psi.coeffs();

    let mut ga = DMatrix::zeros(d, d);
    for ja in 0..na {
        let src = psi.row(ja);
        for e in space.alpha().excitations(ja) {
            let dst = psi.row(e.target);
            let overlap: f64 = dst.iter().zip(src).map(|(x, y)| x * y).sum();
            ga[(e.p, e.q)] += e.sign * overlap;
        }
    }
    let mut gb = DMatrix::zeros(d, d);
    for jb in 0..nb {
        for e in space.beta().excitations(jb) {
            let mut acc = 0.0;
            for ia in 0..na {
                acc += c[ia * nb + e.target] * c[ia * nb + jb];
            }
            gb[(e.p, e.q)] += e.sign * acc;
        }
    }
    (ga, gb)
}

/// Opposite-spin block, using `a†_{p↑} a†_{q↓} a_{s↓} a_{r↑} = E^α_{pr} E^β_{qs}`.
pub fn compute_os_2rdm(psi: &Wavefunction) -> Result<Tensor4> {
    let space = psi.space();
    let d = space.d();
    if d.checked_pow(4).is_none_or(|n| n > MAX_OS_ENTRIES) {
        return Err(QicasError::Capacity(format!(
            "opposite-spin 2-RDM over {d} orbitals exceeds {MAX_OS_ENTRIES} entries"
        )));
    }
    let mut g = Tensor4::zeros(d);
    for ja in 0..space.alpha().len() {
        let src = psi.row(ja);
        for ea in space.alpha().excitations(ja) {
            let dst = psi.row(ea.target);
            for (jb, &x) in src.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                for eb in space.beta().excitations(jb) {
                    let y = dst[eb.target];
                    if y != 0.0 {
                        g.add(ea.p, eb.p, ea.q, eb.q, ea.sign * eb.sign * x * y);
                    }
                }
            }
        }
    }
    Ok(g)
}

impl SpinTracedRDMs {
    pub fn from_wavefunction(psi: &Wavefunction) -> Result<Self> {
        let (gamma_a, gamma_b) = compute_1rdm(psi);
        let gamma_os = compute_os_2rdm(psi)?;
        Ok(SpinTracedRDMs {
            gamma_a,
            gamma_b,
            gamma_os,
        })
    }

    pub fn d(&self) -> usize {
        self.gamma_a.nrows()
    }

    /// Expected particle number per orbital, `γ^α_ii + γ^β_ii`.
    pub fn occupancies(&self) -> Vec<f64> {
        (0..self.d()).map(|i| self.gamma_a[(i, i)] + self.gamma_b[(i, i)]).collect()
    }

    /// Total electron count implied by the traces, rounded.
    pub fn n_elec(&self) -> usize {
        (self.gamma_a.trace() + self.gamma_b.trace()).round() as usize
    }

    /// Spin-summed 1-RDM.
    pub fn spin_summed(&self) -> DMatrix<f64> {
        &self.gamma_a + &self.gamma_b
    }

    /// All three blocks expressed in the basis `φ̃ = U φ`.
    pub fn rotated(&self, u: &OrbitalRotation) -> Result<Self> {
        Ok(SpinTracedRDMs {
            gamma_a: crate::rotation::rotate_1rdm(&self.gamma_a, u)?,
            gamma_b: crate::rotation::rotate_1rdm(&self.gamma_b, u)?,
            gamma_os: crate::rotation::rotate_os_2rdm(&self.gamma_os, u)?,
        })
    }

    /// Reorders orbitals: new orbital `k` is old orbital `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let d = self.d();
        let ga = DMatrix::from_fn(d, d, |a, b| self.gamma_a[(order[a], order[b])]);
        let gb = DMatrix::from_fn(d, d, |a, b| self.gamma_b[(order[a], order[b])]);
        let mut os = Tensor4::zeros(d);
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        os.set(a, b, c, e, self.gamma_os.get(order[a], order[b], order[c], order[e]));
                    }
                }
            }
        }
        SpinTracedRDMs {
            gamma_a: ga,
            gamma_b: gb,
            gamma_os: os,
        }
    }
}

/// Eigenvalues of a single-orbital reduced state in the basis
/// `{|0⟩, |↑⟩, |↓⟩, |↑↓⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalSpectrum {
    pub lambdas: [f64; 4],
    pub occupancy: f64,
}

impl OrbitalSpectrum {
    /// Builds the spectrum from `γ^α_ii`, `γ^β_ii` and the double occupancy,
    /// clamping tiny negatives to zero.
    pub fn from_diagonals(n_up: f64, n_down: f64, double: f64) -> Self {
        let raw = [1.0 - n_up - n_down + double, n_up - double, n_down - double, double];
        OrbitalSpectrum {
            lambdas: raw.map(|l| l.max(0.0)),
            occupancy: n_up + n_down,
        }
    }

    /// `(1,0,0,0)`-style pure states.
    pub fn is_pure(&self, tol: f64) -> bool {
        self.lambdas.iter().any(|&l| (l - 1.0).abs() < tol)
    }
}

pub fn orbital_spectrum(rdms: &SpinTracedRDMs, i: usize) -> Result<OrbitalSpectrum> {
    let d = rdms.d();
    if i >= d {
        return Err(QicasError::Range(format!("orbital {i} outside 0..{d}")));
    }
    let (n_up, n_down, double) = (rdms.gamma_a[(i, i)], rdms.gamma_b[(i, i)], rdms.gamma_os.get(i, i, i, i));
    let raw = [1.0 - n_up - n_down + double, n_up - double, n_down - double, double];
    if let Some(&value) = raw.iter().find(|&&l| l < -CLAMP_TOL || !l.is_finite()) {
        return Err(QicasError::Positivity { orbital: i, value });
    }
    Ok(OrbitalSpectrum::from_diagonals(n_up, n_down, double))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fci::{enumerate_determinants, ground_state, FciOptions};
    use crate::model::{build_hubbard, HubbardParams};
    use std::sync::Arc;

    fn dimer_rdms() -> SpinTracedRDMs {
        let h = build_hubbard(HubbardParams::chain(2, 1.0, 4.0)).unwrap();
        let (_, psi) = ground_state(&h, 2, 0, &FciOptions::default()).unwrap();
        SpinTracedRDMs::from_wavefunction(&psi).unwrap()
    }

    #[test]
    fn dimer_one_rdm() {
        let r = dimer_rdms();
        // kinetic energy −4γ₀₁ = E − U·w_ion = (2 − 2√2) − 2(1 − 1/√2) = −√2
        let g = 1.0 / (2.0 * 2f64.sqrt());
        assert!((r.gamma_a[(0, 0)] - 0.5).abs() < 1e-9);
        assert!((r.gamma_a[(0, 1)] - g).abs() < 1e-9, "{}", r.gamma_a[(0, 1)]);
        assert!((&r.gamma_a - &r.gamma_b).amax() < 1e-9);
    }

    #[test]
    fn dimer_spectrum() {
        let r = dimer_rdms();
        let lam3 = (1.0 - 1.0 / 2f64.sqrt()) / 4.0;
        let s = orbital_spectrum(&r, 0).unwrap();
        let expected = [lam3, 0.5 - lam3, 0.5 - lam3, lam3];
        for (a, b) in s.lambdas.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((r.gamma_os.get(0, 0, 0, 0) - 0.0732233).abs() < 1e-7);
    }

    #[test]
    fn filled_and_empty_orbitals() {
        let space = Arc::new(enumerate_determinants(2, 1, 1).unwrap());
        let psi = Wavefunction::determinant(space, 0b01, 0b01).unwrap();
        let r = SpinTracedRDMs::from_wavefunction(&psi).unwrap();
        assert_eq!(r.gamma_a, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(orbital_spectrum(&r, 0).unwrap().lambdas, [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(orbital_spectrum(&r, 1).unwrap().lambdas, [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn strong_repulsion_suppresses_double_occupancy() {
        let h = build_hubbard(HubbardParams::chain(2, 1.0, 1e6)).unwrap();
        let (_, psi) = ground_state(&h, 2, 0, &FciOptions::default()).unwrap();
        let os = compute_os_2rdm(&psi).unwrap();
        assert!(os.get(0, 0, 0, 0) < 1e-5 && os.get(1, 1, 1, 1) < 1e-5);
    }

    #[test]
    fn corrupted_rdm_is_rejected() {
        let mut r = dimer_rdms();
        r.gamma_os.set(0, 0, 0, 0, 0.9);
        assert!(matches!(orbital_spectrum(&r, 0), Err(QicasError::Positivity { .. })));
        assert!(orbital_spectrum(&r, 5).is_err());
    }

    #[test]
    fn traces_and_hermiticity() {
        let h = build_hubbard(HubbardParams::chain(4, 1.0, 4.0)).unwrap();
        let h = crate::model::transform_integrals(&h, &crate::rotation::random_orthogonal(4, 9)).unwrap();
        let (_, psi) = ground_state(&h, 3, 1, &FciOptions::default()).unwrap();
        let r = SpinTracedRDMs::from_wavefunction(&psi).unwrap();
        assert!((r.gamma_a.trace() - 2.0).abs() < 1e-10);
        assert!((r.gamma_b.trace() - 1.0).abs() < 1e-10);
        assert!((&r.gamma_a - r.gamma_a.transpose()).amax() < 1e-10);
        let d = 4;
        for p in 0..d {
            for q in 0..d {
                for s in 0..d {
                    for t in 0..d {
                        let diff = r.gamma_os.get(p, q, s, t) - r.gamma_os.get(s, t, p, q);
                        assert!(diff.abs() < 1e-10);
                    }
                }
            }
        }
        let occ: f64 = r.occupancies().iter().sum();
        assert!((occ - 3.0).abs() < 1e-9);
    }
}
