use super::{Eri, MolecularHamiltonian};
use crate::error::{QicasError, Result};
use crate::rotation::OrbitalRotation;
use crate::tensor::Tensor4;

/// Re-expresses the Hamiltonian in the rotated orbitals
/// `φ̃ᵢ = Σⱼ U[i][j] φⱼ`.
pub fn transform_integrals(h: &MolecularHamiltonian, u_rot: &OrbitalRotation) -> Result<MolecularHamiltonian> {
    let d = h.d();
    let u = u_rot.matrix();
    if u.nrows() != d {
        return Err(QicasError::Shape(format!(
            "rotation is {}x{} but the Hamiltonian has {d} orbitals",
            u.nrows(),
            u.ncols()
        )));
    }
    let h1 = u * h.h1() * u.transpose();
    let eri = Tensor4::from_vec(d, h.eri().to_dense()).congruence(u);
    MolecularHamiltonian::new(h.n_elec, h.ms2, h.e_core, h1, Eri::from_dense(d, eri.as_slice()))
}
