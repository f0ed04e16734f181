//! Exact ground states in the full determinant space.

mod davidson;
mod sigma;
mod space;

use std::sync::Arc;

pub use davidson::{lowest_eigenpair, DavidsonOptions};
pub use sigma::HamiltonianOperator;
pub use space::{binomial, enumerate_determinants, space_size, DeterminantSpace, Excitation, StringSet};

use crate::error::{QicasError, Result};
use crate::model::{spin_sector, MolecularHamiltonian};
use crate::partition::CasPartition;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FciOptions {
    /// Residual-norm convergence threshold.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest determinant space the solver accepts.
    pub max_space_dim: usize,
    /// Davidson subspace size before collapse.
    pub max_subspace: usize,
}

impl Default for FciOptions {
    fn default() -> Self {
        FciOptions {
            tol: 1e-9,
            max_iter: 500,
            max_space_dim: 20_000_000,
            max_subspace: 48,
        }
    }
}

/// Normalized CI vector over a determinant space.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    space: Arc<DeterminantSpace>,
    coeffs: Vec<f64>,
}

impl Wavefunction {
    /// Wraps `coeffs`, requiring unit norm within 1e-12.
    pub fn new(space: Arc<DeterminantSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.len() {
            return Err(QicasError::Shape(format!(
                "{} coefficients for {} determinants",
                coeffs.len(),
                space.len()
            )));
        }
        let norm2: f64 = coeffs.iter().map(|c| c * c).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(QicasError::Consistency(format!("wavefunction norm² is {norm2}")));
        }
        Ok(Wavefunction { space, coeffs })
    }

    /// Scales `coeffs` to unit norm.
    pub fn normalized(space: Arc<DeterminantSpace>, mut coeffs: Vec<f64>) -> Result<Self> {
        let n = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(QicasError::NonFinite("cannot normalize a null vector".into()));
        }
        coeffs.iter_mut().for_each(|c| *c /= n);
        Self::new(space, coeffs)
    }

    /// Unit vector on the determinant with the given masks.
    pub fn determinant(space: Arc<DeterminantSpace>, alpha: u64, beta: u64) -> Result<Self> {
        let k = space
            .determinants()
            .position(|det| det == (alpha, beta))
            .ok_or_else(|| QicasError::Range(format!("determinant ({alpha:#b}, {beta:#b}) not in space")))?;
        let mut c = vec![0.0; space.len()];
        c[k] = 1.0;
        Self::new(space, c)
    }

    pub fn space(&self) -> &DeterminantSpace {
        &self.space
    }

    pub fn shared_space(&self) -> Arc<DeterminantSpace> {
        Arc::clone(&self.space)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient matrix view: row = alpha string, column = beta string.
    pub(crate) fn row(&self, alpha_index: usize) -> &[f64] {
        let nb = self.space.beta().len();
        &self.coeffs[alpha_index * nb..(alpha_index + 1) * nb]
    }
}

fn sector_space(h: &MolecularHamiltonian, n_elec: usize, ms2: i32, opts: &FciOptions) -> Result<DeterminantSpace> {
    let (na, nb) = spin_sector(n_elec, ms2)?;
    let d = h.d();
    if na > d || nb > d {
        return Err(QicasError::Range(format!(
            "({na}α, {nb}β) electrons do not fit in {d} orbitals"
        )));
    }
    let size = space_size(d, na, nb);
    if size > opts.max_space_dim {
        return Err(QicasError::Capacity(format!(
            "{size} determinants exceed the cap of {}",
            opts.max_space_dim
        )));
    }
    enumerate_determinants(d, na, nb)
}

/// `H·c`, including the core energy.
pub fn apply_hamiltonian(h: &MolecularHamiltonian, psi: &Wavefunction) -> Result<Vec<f64>> {
    let op = HamiltonianOperator::new(h, psi.space())?;
    let mut out = vec![0.0; psi.coeffs.len()];
    op.apply(&psi.coeffs, &mut out);
    Ok(out)
}

/// `⟨ψ|H|ψ⟩`.
pub fn expectation(h: &MolecularHamiltonian, psi: &Wavefunction) -> Result<f64> {
    let hc = apply_hamiltonian(h, psi)?;
    Ok(hc.iter().zip(psi.coeffs()).map(|(a, b)| a * b).sum())
}

/// Unit vectors on the `k` determinants with the lowest diagonal values,
/// ties broken by determinant order.
fn diagonal_guesses(diag: &[f64], k: usize) -> Vec<Vec<f64>> {
    let mut order: Vec<usize> = (0..diag.len()).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(k)
        .map(|i| {
            let mut v = vec![0.0; diag.len()];
            v[i] = 1.0;
            v
        })
        .collect()
}

/// Fixes the overall sign so the largest-magnitude coefficient is positive.
fn fix_phase(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

const GUESS_VECTORS: usize = 4;

fn extremal(
    h: &MolecularHamiltonian,
    n_elec: usize,
    ms2: i32,
    opts: &FciOptions,
    highest: bool,
) -> Result<(f64, Wavefunction)> {
    let space = Arc::new(sector_space(h, n_elec, ms2, opts)?);
    let op = HamiltonianOperator::new(h, &space)?;
    let sign = if highest { -1.0 } else { 1.0 };
    let diag: Vec<f64> = op.diagonal().into_iter().map(|x| sign * x).collect();
    let guesses = diagonal_guesses(&diag, GUESS_VECTORS);
    let dav = DavidsonOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        max_subspace: opts.max_subspace,
    };
    let (theta, mut x) = lowest_eigenpair(
        |v, out| {
            op.apply(v, out);
            if highest {
                out.iter_mut().for_each(|o| *o = -*o);
            }
        },
        &diag,
        &guesses,
        &dav,
    )?;
    fix_phase(&mut x);
    drop(op);
    Ok((sign * theta, Wavefunction::normalized(space, x)?))
}

/// Lowest eigenpair of `H` in the `(n_alpha, n_beta)` sector selected by
/// `n_elec` and `ms2`.
pub fn ground_state(h: &MolecularHamiltonian, n_elec: usize, ms2: i32, opts: &FciOptions) -> Result<(f64, Wavefunction)> {
    extremal(h, n_elec, ms2, opts, false)
}

/// Lowest and highest eigenvalues of the sector Hamiltonian.
pub fn spectral_bounds(h: &MolecularHamiltonian, n_elec: usize, ms2: i32, opts: &FciOptions) -> Result<(f64, f64)> {
    let (e_min, _) = extremal(h, n_elec, ms2, opts, false)?;
    let (e_max, _) = extremal(h, n_elec, ms2, opts, true)?;
    Ok((e_min, e_max.max(e_min)))
}

/// Result of projecting a state onto the CAS configuration space.
#[derive(Debug, Clone)]
pub struct CasProjection {
    /// Renormalized projected state; `None` when the weight is below 1e-14.
    pub state: Option<Wavefunction>,
    /// `‖P̂ψ‖²`.
    pub weight: f64,
}

/// Keeps the determinants whose closed orbitals are doubly occupied and
/// virtual orbitals empty.
pub fn project_cas(psi: &Wavefunction, part: &CasPartition) -> Result<CasProjection> {
    let space = psi.space();
    if part.d() != space.d() {
        return Err(QicasError::Partition(format!(
            "partition over {} orbitals, wavefunction over {}",
            part.d(),
            space.d()
        )));
    }
    if part.n_elec() != space.n_alpha() + space.n_beta() {
        return Err(QicasError::Partition(format!(
            "partition holds {} electrons, wavefunction {}",
            part.n_elec(),
            space.n_alpha() + space.n_beta()
        )));
    }
    let (closed, virt) = part.masks();
    let mut coeffs = psi.coeffs.clone();
    for (c, (a, b)) in coeffs.iter_mut().zip(space.determinants()) {
        let conforms = a & closed == closed && b & closed == closed && (a | b) & virt == 0;
        if !conforms {
            *c = 0.0;
        }
    }
    let weight: f64 = coeffs.iter().map(|c| c * c).sum();
    let state = if weight < 1e-14 {
        None
    } else {
        Some(Wavefunction::normalized(psi.shared_space(), coeffs)?)
    };
    Ok(CasProjection { state, weight })
}
