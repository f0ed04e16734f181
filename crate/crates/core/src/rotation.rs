//! Orthogonal orbital basis changes.
//!
//! Row `i` of an [`OrbitalRotation`] holds the expansion of new orbital `i`
//! in the old basis, `φ̃ᵢ = Σⱼ U[i][j] φⱼ`; one-body quantities transform as
//! `U·γ·Uᵀ` and every index of a rank-4 tensor picks up one factor of `U`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{QicasError, Result};
use crate::measures::entropy;
use crate::partition::CasPartition;
use crate::rdm::{OrbitalSpectrum, SpinTracedRDMs};
use crate::tensor::Tensor4;

pub const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalRotation(DMatrix<f64>);

impl OrbitalRotation {
    /// Validates `UᵀU = I` within [`ORTHOGONALITY_TOL`].
    pub fn new(u: DMatrix<f64>) -> Result<Self> {
        if !u.is_square() {
            return Err(QicasError::Shape(format!("{}x{} rotation", u.nrows(), u.ncols())));
        }
        let drift = orthogonality_error(&u);
        if drift >= ORTHOGONALITY_TOL || !drift.is_finite() {
            return Err(QicasError::Consistency(format!(
                "matrix is not orthogonal (max |UᵀU − I| = {drift:.3e})"
            )));
        }
        Ok(OrbitalRotation(u))
    }

    pub fn identity(d: usize) -> Self {
        OrbitalRotation(DMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// `self · other`: first rotate by `other`, then by `self`.
    pub fn compose(&self, other: &OrbitalRotation) -> OrbitalRotation {
        OrbitalRotation(&self.0 * &other.0)
    }

    pub fn transpose(&self) -> OrbitalRotation {
        OrbitalRotation(self.0.transpose())
    }

    /// Reorders rows: new orbital `k` is old orbital `order[k]`.
    pub fn permute_rows(&self, order: &[usize]) -> OrbitalRotation {
        let d = self.dim();
        OrbitalRotation(DMatrix::from_fn(d, d, |k, j| self.0[(order[k], j)]))
    }

    pub fn orthogonality_error(&self) -> f64 {
        orthogonality_error(&self.0)
    }

    /// Left-multiplies by the Jacobi rotation in place (rows `i`, `j` only).
    pub fn apply_jacobi(&mut self, step: &JacobiStep) {
        let (s, c) = step.angle.sin_cos();
        let d = self.dim();
        for k in 0..d {
            let (a, b) = (self.0[(step.i, k)], self.0[(step.j, k)]);
            self.0[(step.i, k)] = c * a + s * b;
            self.0[(step.j, k)] = -s * a + c * b;
        }
    }

    /// Symmetric (Löwdin) re-orthonormalization.
    pub fn reorthonormalize(&mut self) {
        let svd = self.0.clone().svd(true, true);
        if let (Some(u), Some(vt)) = (svd.u, svd.v_t) {
            self.0 = u * vt;
        }
    }
}

fn orthogonality_error(u: &DMatrix<f64>) -> f64 {
    let d = u.nrows();
    (u.transpose() * u - DMatrix::<f64>::identity(d, d)).amax()
}

/// Planar rotation of orbitals `i` and `j` by `angle`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiStep {
    pub i: usize,
    pub j: usize,
    pub angle: f64,
}

impl JacobiStep {
    pub fn new(i: usize, j: usize, angle: f64) -> Self {
        JacobiStep { i, j, angle }
    }

    /// Same step with the angle folded into `[0, π)`.
    pub fn normalized(self) -> Self {
        let mut a = self.angle.rem_euclid(PI);
        if a >= PI {
            a = 0.0;
        }
        JacobiStep { angle: a, ..self }
    }
}

/// Identity except for the `(i, j)` block `[[cos θ, sin θ], [−sin θ, cos θ]]`.
pub fn jacobi_matrix(d: usize, step: JacobiStep) -> Result<OrbitalRotation> {
    if step.i == step.j || step.i >= d || step.j >= d {
        return Err(QicasError::Range(format!(
            "Jacobi pair ({}, {}) invalid for {d} orbitals",
            step.i, step.j
        )));
    }
    let mut u = OrbitalRotation::identity(d);
    u.apply_jacobi(&step);
    Ok(u)
}

pub fn rotate_1rdm(gamma: &DMatrix<f64>, u: &OrbitalRotation) -> Result<DMatrix<f64>> {
    if gamma.nrows() != u.dim() || gamma.ncols() != u.dim() {
        return Err(QicasError::Shape(format!(
            "{}x{} matrix, {}-orbital rotation",
            gamma.nrows(),
            gamma.ncols(),
            u.dim()
        )));
    }
    Ok(u.matrix() * gamma * u.matrix().transpose())
}

pub fn rotate_os_2rdm(gamma_os: &Tensor4, u: &OrbitalRotation) -> Result<Tensor4> {
    if gamma_os.dim() != u.dim() {
        return Err(QicasError::Shape(format!(
            "{}-orbital tensor, {}-orbital rotation",
            gamma_os.dim(),
            u.dim()
        )));
    }
    Ok(gamma_os.congruence(u.matrix()))
}

/// Diagonal data of orbitals `i`, `j` after rotating the pair by `angle`:
/// `(spectrum_i, spectrum_j)`.
pub(crate) fn rotated_pair_spectra(rdms: &SpinTracedRDMs, i: usize, j: usize, angle: f64) -> (OrbitalSpectrum, OrbitalSpectrum) {
    let (s, c) = angle.sin_cos();
    let rot_diag = |g: &DMatrix<f64>| {
        let (gii, gij, gjj) = (g[(i, i)], 0.5 * (g[(i, j)] + g[(j, i)]), g[(j, j)]);
        (
            c * c * gii + 2.0 * c * s * gij + s * s * gjj,
            s * s * gii - 2.0 * c * s * gij + c * c * gjj,
        )
    };
    let (ai, aj) = rot_diag(&rdms.gamma_a);
    let (bi, bj) = rot_diag(&rdms.gamma_b);

    // new orbital i = c·φ_i + s·φ_j, new orbital j = −s·φ_i + c·φ_j
    let idx = [i, j];
    let wi = [c, s];
    let wj = [-s, c];
    let g = &rdms.gamma_os;
    let (mut di, mut dj) = (0.0, 0.0);
    for (p, &op) in idx.iter().enumerate() {
        for (q, &oq) in idx.iter().enumerate() {
            for (r, &or) in idx.iter().enumerate() {
                for (t, &ot) in idx.iter().enumerate() {
                    let v = g.get(op, oq, or, ot);
                    di += wi[p] * wi[q] * wi[r] * wi[t] * v;
                    dj += wj[p] * wj[q] * wj[r] * wj[t] * v;
                }
            }
        }
    }
    (
        OrbitalSpectrum::from_diagonals(ai, bi, di),
        OrbitalSpectrum::from_diagonals(aj, bj, dj),
    )
}

/// F_QI after a hypothetical Jacobi step, from the 2×2 block of γ, the 16
/// `Γ_os` entries on `{i, j}` and cached entropies for all other orbitals.
/// Inputs are not modified.
pub fn pair_local_fqi(rdms: &SpinTracedRDMs, part: &CasPartition, base_entropies: &[f64], step: &JacobiStep) -> f64 {
    pair_local_sum(rdms, &part.nonactive_mask(), base_entropies, step)
}

/// Same as [`pair_local_fqi`] with the counted orbitals given as a mask.
pub(crate) fn pair_local_sum(rdms: &SpinTracedRDMs, counted: &[bool], base_entropies: &[f64], step: &JacobiStep) -> f64 {
    let (si, sj) = rotated_pair_spectra(rdms, step.i, step.j, step.angle);
    let (ei, ej) = (entropy(&si), entropy(&sj));
    let mut total = 0.0;
    for (k, &base) in base_entropies.iter().enumerate() {
        if !counted[k] {
            continue;
        }
        total += if k == step.i {
            ei
        } else if k == step.j {
            ej
        } else {
            base
        };
    }
    total
}

/// Haar-distributed orthogonal matrix from a seeded Gaussian matrix.
pub fn random_orthogonal(d: usize, seed: u64) -> OrbitalRotation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..d {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    OrbitalRotation(q)
}

/// Random antisymmetric generator with standard-normal entries times `scale`.
pub fn random_antisymmetric(d: usize, scale: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let x: f64 = StandardNormal.sample(&mut rng);
            a[(i, j)] = scale * x;
            a[(j, i)] = -scale * x;
        }
    }
    a
}

/// `exp(A)` by scaling and squaring with a Taylor series summed to 1e-16.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.nrows();
    let norm = a.abs().row_sum().max();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a / 2f64.powi(squarings as i32);
    let mut term = DMatrix::<f64>::identity(d, d);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled / k as f64;
        sum += &term;
        if term.amax() < 1e-17 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `u0 · exp(scale·A)` with a seeded random antisymmetric `A`.
pub fn random_perturbation(u0: &OrbitalRotation, scale: f64, seed: u64) -> OrbitalRotation {
    if scale == 0.0 {
        return u0.clone();
    }
    let a = random_antisymmetric(u0.dim(), scale, seed);
    let mut u = OrbitalRotation(u0.matrix() * expm(&a));
    if u.orthogonality_error() > 1e-12 {
        u.reorthonormalize();
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn jacobi_identity_and_swap() {
        assert_eq!(jacobi_matrix(3, JacobiStep::new(0, 2, 0.0)).unwrap(), OrbitalRotation::identity(3));
        let u = jacobi_matrix(2, JacobiStep::new(0, 1, PI / 2.0)).unwrap();
        assert!((u.matrix()[(0, 1)] - 1.0).abs() < 1e-15);
        assert!((u.matrix()[(1, 0)] + 1.0).abs() < 1e-15);
        assert!(u.matrix()[(0, 0)].abs() < 1e-15);
        assert!(jacobi_matrix(2, JacobiStep::new(1, 1, 0.3)).is_err());
    }

    #[test]
    fn angle_folding() {
        let s = JacobiStep::new(0, 1, -0.25).normalized();
        assert!((s.angle - (PI - 0.25)).abs() < 1e-15);
        assert!(JacobiStep::new(0, 1, PI).normalized().angle < 1e-15);
    }

    #[test]
    fn random_orthogonal_is_orthogonal_and_seeded() {
        let a = random_orthogonal(7, 42);
        assert!(a.orthogonality_error() < 1e-12);
        assert_eq!(a, random_orthogonal(7, 42));
        assert_ne!(a, random_orthogonal(7, 43));
    }

    #[test]
    fn perturbation() {
        let u0 = random_orthogonal(5, 1);
        assert_eq!(random_perturbation(&u0, 0.0, 9), u0);
        let u = random_perturbation(&u0, 0.3, 9);
        assert!(u.orthogonality_error() < 1e-10);
        assert_eq!(u, random_perturbation(&u0, 0.3, 9));
    }

    #[test]
    fn expm_of_planar_generator() {
        let th = 1.3;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, th, -th, 0.0]);
        let e = expm(&a);
        let expected = jacobi_matrix(2, JacobiStep::new(0, 1, th)).unwrap();
        assert!((e - expected.matrix()).amax() < 1e-13);
        let big = random_antisymmetric(6, 3.0, 5);
        assert!(orthogonality_error(&expm(&big)) < 1e-12);
    }

    #[test]
    fn rotation_drift_over_many_steps() {
        let d = 6;
        let mut u = OrbitalRotation::identity(d);
        for k in 0..10_000usize {
            let i = k % d;
            let j = (k * 7 + 1) % d;
            if i == j {
                continue;
            }
            u.apply_jacobi(&JacobiStep::new(i, j, 0.1 + (k as f64 * 0.37).sin()));
            if u.orthogonality_error() > 1e-8 {
                u.reorthonormalize();
            }
        }
        assert!(u.orthogonality_error() < 1e-9);
    }

    #[test]
    fn one_rdm_rotation_preserves_trace() {
        let g = DMatrix::from_fn(5, 5, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let u = random_orthogonal(5, 17);
        let r = rotate_1rdm(&g, &u).unwrap();
        assert!((r.trace() - g.trace()).abs() < 1e-12);
        assert_eq!(rotate_1rdm(&g, &OrbitalRotation::identity(5)).unwrap(), g);
    }

    proptest! {
        #[test]
        fn jacobi_angles_add(a in -3.0..3.0f64, b in -3.0..3.0f64) {
            let ta = jacobi_matrix(4, JacobiStep::new(1, 3, a)).unwrap();
            let tb = jacobi_matrix(4, JacobiStep::new(1, 3, b)).unwrap();
            let tab = jacobi_matrix(4, JacobiStep::new(1, 3, a + b)).unwrap();
            prop_assert!((ta.compose(&tb).matrix() - tab.matrix()).amax() < 1e-12);
        }

        #[test]
        fn os_rotation_composes(seed in 0u64..1000) {
            let d = 3;
            let t = Tensor4::from_vec(d, (0..81).map(|k| ((k as u64 * 2654435761 + seed) % 1000) as f64 / 1000.0).collect());
            let u1 = random_orthogonal(d, seed);
            let u2 = random_orthogonal(d, seed + 1);
            let once = rotate_os_2rdm(&t, &u1.compose(&u2)).unwrap();
            let twice = rotate_os_2rdm(&rotate_os_2rdm(&t, &u2).unwrap(), &u1).unwrap();
            prop_assert!(once.max_abs_diff(&twice) < 1e-10);
        }
    }
}
