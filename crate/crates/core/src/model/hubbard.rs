use nalgebra::DMatrix;

use super::{Eri, MolecularHamiltonian};
use crate::error::{QicasError, Result};

/// One-band Hubbard chain or ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HubbardParams {
    pub sites: usize,
    pub t: f64,
    pub u: f64,
    pub periodic: bool,
}

impl HubbardParams {
    pub fn chain(sites: usize, t: f64, u: f64) -> Self {
        HubbardParams {
            sites,
            t,
            u,
            periodic: false,
        }
    }
}

/// Site-basis Hubbard Hamiltonian at half filling (`n_elec = sites`, `ms2`
/// = parity of the site count). Use [`MolecularHamiltonian::with_electrons`]
/// for other fillings.
pub fn build_hubbard(params: HubbardParams) -> Result<MolecularHamiltonian> {
    let HubbardParams {
        sites,
        t,
        u,
        periodic,
    } = params;
    if sites == 0 {
        return Err(QicasError::Range("Hubbard model needs at least one site".into()));
    }
    let mut h1 = DMatrix::zeros(sites, sites);
    for i in 0..sites.saturating_sub(1) {
        h1[(i, i + 1)] = -t;
        h1[(i + 1, i)] = -t;
    }
    if periodic && sites > 2 {
        h1[(0, sites - 1)] = -t;
        h1[(sites - 1, 0)] = -t;
    }
    let mut eri = Eri::zeros(sites);
    for i in 0..sites {
        eri.set(i, i, i, i, u);
    }
    MolecularHamiltonian::new(sites, (sites % 2) as i32, 0.0, h1, eri)
}
