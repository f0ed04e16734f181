//! Matrix-free products with the determinant-basis Hamiltonian.
//!
//! `H = E_core + Σ k_pq E_pq + ½ Σ (pq|rs) E_pq E_rs`, with
//! `k_pq = h_pq − ½ Σ_r (pr|rq)` and `E_pq = E^α_pq + E^β_pq`. The
//! same-spin parts act on one string index only and are tabulated as
//! sparse string-space operators; the opposite-spin part
//! `Σ (pq|rs) E^α_pq E^β_rs` is applied directly from the excitation tables.

use super::space::{DeterminantSpace, StringSet};
use crate::error::{QicasError, Result};
use crate::model::MolecularHamiltonian;

/// Sparse symmetric operator on one spin's string space, stored by column.
type StringOperator = Vec<Vec<(usize, f64)>>;

pub struct HamiltonianOperator<'a> {
    space: &'a DeterminantSpace,
    e_core: f64,
    eri: Vec<f64>,
    alpha_op: StringOperator,
    beta_op: StringOperator,
}

fn same_spin_operator(strings: &StringSet, k: &[f64], eri: &[f64], d: usize) -> StringOperator {
    let n = strings.len();
    let mut buf = vec![0.0; n];
    let mut touched = Vec::new();
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        for e1 in strings.excitations(j) {
            let rs = e1.p * d + e1.q;
            if buf[e1.target] == 0.0 {
                touched.push(e1.target);
            }
            buf[e1.target] += e1.sign * k[rs];
            for e2 in strings.excitations(e1.target) {
                let v = 0.5 * e1.sign * e2.sign * eri[(e2.p * d + e2.q) * d * d + rs];
                if v == 0.0 {
                    continue;
                }
                if buf[e2.target] == 0.0 {
                    touched.push(e2.target);
                }
                buf[e2.target] += v;
            }
        }
        touched.sort_unstable();
        touched.dedup();
        let col: Vec<(usize, f64)> = touched
            .iter()
            .map(|&i| (i, std::mem::take(&mut buf[i])))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        touched.clear();
        columns.push(col);
    }
    columns
}

impl<'a> HamiltonianOperator<'a> {
    pub fn new(h: &MolecularHamiltonian, space: &'a DeterminantSpace) -> Result<Self> {
        let d = h.d();
        if space.d() != d {
            return Err(QicasError::Shape(format!(
                "determinant space has {} orbitals, Hamiltonian has {d}",
                space.d()
            )));
        }
        let eri = h.eri().to_dense();
        let mut k = vec![0.0; d * d];
        for p in 0..d {
            for q in 0..d {
                let exchange: f64 = (0..d).map(|r| eri[((p * d + r) * d + r) * d + q]).sum();
                k[p * d + q] = h.h1()[(p, q)] - 0.5 * exchange;
            }
        }
        let alpha_op = same_spin_operator(space.alpha(), &k, &eri, d);
        let beta_op = if space.alpha() == space.beta() {
            alpha_op.clone()
        } else {
            same_spin_operator(space.beta(), &k, &eri, d)
        };
        Ok(HamiltonianOperator {
            space,
            e_core: h.e_core,
            eri,
            alpha_op,
            beta_op,
        })
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    /// `out = H·c`.
    pub fn apply(&self, c: &[f64], out: &mut [f64]) {
        let d = self.space.d();
        let na = self.space.alpha().len();
        let nb = self.space.beta().len();
        assert_eq!(c.len(), na * nb);
        assert_eq!(out.len(), na * nb);

        for (o, x) in out.iter_mut().zip(c) {
            *o = self.e_core * x;
        }
        // same-spin alpha: out[ia, :] += A[ia][ja] c[ja, :]
        for (ja, col) in self.alpha_op.iter().enumerate() {
            let src = &c[ja * nb..(ja + 1) * nb];
            for &(ia, v) in col {
                let dst = &mut out[ia * nb..(ia + 1) * nb];
                for (o, x) in dst.iter_mut().zip(src) {
                    *o += v * x;
                }
            }
        }
        // same-spin beta: out[:, ib] += B[ib][jb] c[:, jb]
        for ia in 0..na {
            let src = &c[ia * nb..(ia + 1) * nb];
            let dst = &mut out[ia * nb..(ia + 1) * nb];
            for (jb, col) in self.beta_op.iter().enumerate() {
                let x = src[jb];
                if x == 0.0 {
                    continue;
                }
                for &(ib, v) in col {
                    dst[ib] += v * x;
                }
            }
        }
        // opposite spin
        let beta = self.space.beta();
        for ja in 0..na {
            let src = &c[ja * nb..(ja + 1) * nb];
            for ea in self.space.alpha().excitations(ja) {
                let row = &self.eri[(ea.p * d + ea.q) * d * d..(ea.p * d + ea.q + 1) * d * d];
                let dst = &mut out[ea.target * nb..(ea.target + 1) * nb];
                for (jb, &x) in src.iter().enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    let sx = ea.sign * x;
                    for eb in beta.excitations(jb) {
                        let v = row[eb.p * d + eb.q];
                        if v != 0.0 {
                            dst[eb.target] += eb.sign * v * sx;
                        }
                    }
                }
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let d = self.space.d();
        let na = self.space.alpha().len();
        let nb = self.space.beta().len();
        let diag_of = |op: &StringOperator| -> Vec<f64> {
            op.iter()
                .enumerate()
                .map(|(j, col)| col.iter().find(|(i, _)| *i == j).map_or(0.0, |e| e.1))
                .collect()
        };
        let da = diag_of(&self.alpha_op);
        let db = diag_of(&self.beta_op);
        let mut out = Vec::with_capacity(na * nb);
        for ia in 0..na {
            let am = self.space.alpha().masks()[ia];
            for ib in 0..nb {
                let bm = self.space.beta().masks()[ib];
                let mut coulomb = 0.0;
                for p in (0..d).filter(|p| am >> p & 1 == 1) {
                    for r in (0..d).filter(|r| bm >> r & 1 == 1) {
                        coulomb += self.eri[((p * d + p) * d + r) * d + r];
                    }
                }
                out.push(self.e_core + da[ia] + db[ib] + coulomb);
            }
        }
        out
    }
}
