//! Second-quantized molecular Hamiltonians over a spin-restricted spatial
//! orbital basis, plus their text interchange formats.

mod fcidump;
mod hubbard;
mod orbitals_io;
mod transform;

pub use fcidump::{parse_fcidump, read_fcidump, write_fcidump};
pub use hubbard::{build_hubbard, HubbardParams};
pub use orbitals_io::{parse_orbitals, read_orbitals, write_orbitals};
pub use transform::transform_integrals;

use nalgebra::DMatrix;

use crate::error::{QicasError, Result};

/// Compound index of an unordered orbital pair `{p, q}`.
#[inline]
pub(crate) fn pair_index(p: usize, q: usize) -> usize {
    if p >= q {
        p * (p + 1) / 2 + q
    } else {
        q * (q + 1) / 2 + p
    }
}

/// Two-electron integrals `(pq|rs)` in chemists' notation, stored once per
/// 8-fold symmetry class.
#[derive(Debug, Clone, PartialEq)]
pub struct Eri {
    d: usize,
    packed: Vec<f64>,
}

impl Eri {
    pub fn zeros(d: usize) -> Self {
        let npair = d * (d + 1) / 2;
        Eri {
            d,
            packed: vec![0.0; npair * (npair + 1) / 2],
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub(crate) fn canonical_index(p: usize, q: usize, r: usize, s: usize) -> usize {
        pair_index(pair_index(p, q), pair_index(r, s))
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.packed[Self::canonical_index(p, q, r, s)]
    }

    /// Sets the value of the whole symmetry class of `(pq|rs)`.
    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        self.packed[Self::canonical_index(p, q, r, s)] = value;
    }

    /// Expands to a dense `d⁴` array indexed `((p·d + q)·d + r)·d + s`.
    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d * d * d * d];
        for p in 0..d {
            for q in 0..d {
                for r in 0..d {
                    for s in 0..d {
                        out[((p * d + q) * d + r) * d + s] = self.get(p, q, r, s);
                    }
                }
            }
        }
        out
    }

    pub(crate) fn from_dense(d: usize, dense: &[f64]) -> Self {
        let mut eri = Eri::zeros(d);
        for p in 0..d {
            for q in 0..=p {
                for r in 0..d {
                    for s in 0..=r {
                        if pair_index(p, q) >= pair_index(r, s) {
                            eri.set(p, q, r, s, dense[((p * d + q) * d + r) * d + s]);
                        }
                    }
                }
            }
        }
        eri
    }

    /// Iterates over canonical `(p ≥ q, r ≥ s, pq ≥ rs)` entries.
    pub fn canonical_entries(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        let d = self.d;
        (0..d).flat_map(move |p| {
            (0..=p).flat_map(move |q| {
                (0..=p).flat_map(move |r| {
                    let smax = if r == p { q } else { r };
                    (0..=smax).map(move |s| (p, q, r, s, self.get(p, q, r, s)))
                })
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MolecularHamiltonian {
    pub n_elec: usize,
    pub ms2: i32,
    pub e_core: f64,
    h1: DMatrix<f64>,
    eri: Eri,
}

impl MolecularHamiltonian {
    /// Builds a Hamiltonian, symmetrizing `h1` from its lower triangle.
    pub fn new(n_elec: usize, ms2: i32, e_core: f64, mut h1: DMatrix<f64>, eri: Eri) -> Result<Self> {
        let d = h1.nrows();
        if h1.ncols() != d || eri.dim() != d {
            return Err(QicasError::Shape(format!(
                "h1 is {}x{}, eri has dimension {}",
                h1.nrows(),
                h1.ncols(),
                eri.dim()
            )));
        }
        for p in 0..d {
            for q in 0..p {
                h1[(q, p)] = h1[(p, q)];
            }
        }
        let h = MolecularHamiltonian {
            n_elec,
            ms2,
            e_core,
            h1,
            eri,
        };
        h.check_electrons(n_elec, ms2)?;
        Ok(h)
    }

    pub fn d(&self) -> usize {
        self.h1.nrows()
    }

    pub fn h1(&self) -> &DMatrix<f64> {
        &self.h1
    }

    pub fn eri(&self) -> &Eri {
        &self.eri
    }

    /// Returns a copy with a different electron count / spin projection.
    pub fn with_electrons(&self, n_elec: usize, ms2: i32) -> Result<Self> {
        self.check_electrons(n_elec, ms2)?;
        let mut h = self.clone();
        h.n_elec = n_elec;
        h.ms2 = ms2;
        Ok(h)
    }

    /// `(n_alpha, n_beta)` for the sector `n_alpha − n_beta = ms2`.
    pub fn sector(&self) -> (usize, usize) {
        spin_sector(self.n_elec, self.ms2).expect("validated at construction")
    }

    fn check_electrons(&self, n_elec: usize, ms2: i32) -> Result<()> {
        let d = self.d();
        // an empty orbital space only hosts the vacuum
        if n_elec > 2 * d || (n_elec == 0 && d > 0 && ms2 != 0) {
            return Err(QicasError::Range(format!(
                "{n_elec} electrons with MS2={ms2} do not fit in {d} orbitals"
            )));
        }
        let (na, nb) = spin_sector(n_elec, ms2)?;
        if na > d || nb > d {
            return Err(QicasError::Range(format!(
                "sector ({na}α, {nb}β) does not fit in {d} orbitals"
            )));
        }
        Ok(())
    }
}

/// Splits `n_elec` into `(n_alpha, n_beta)` with `n_alpha − n_beta = ms2`.
pub fn spin_sector(n_elec: usize, ms2: i32) -> Result<(usize, usize)> {
    let n = n_elec as i64;
    let m = ms2 as i64;
    if (n + m) % 2 != 0 || m.abs() > n {
        return Err(QicasError::Range(format!(
            "MS2={ms2} is incompatible with {n_elec} electrons"
        )));
    }
    Ok((((n + m) / 2) as usize, ((n - m) / 2) as usize))
}
