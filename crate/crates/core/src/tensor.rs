use nalgebra::DMatrix;

/// Dense cubic rank-4 tensor with row-major `[p][q][r][s]` layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    d: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(d: usize) -> Self {
        Tensor4 {
            d,
            data: vec![0.0; d * d * d * d],
        }
    }

    pub fn from_vec(d: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), d * d * d * d);
        Tensor4 { d, data }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn index(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.d + q) * self.d + r) * self.d + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.index(p, q, r, s)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let k = self.index(p, q, r, s);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let k = self.index(p, q, r, s);
        self.data[k] += v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `T'[a][b][c][e] = Σ U[a][p] U[b][q] U[c][r] U[e][s] T[p][q][r][s]`
    /// as four one-index contractions.
    pub fn congruence(&self, u: &DMatrix<f64>) -> Tensor4 {
        let mut t = self.clone();
        for axis in 0..4 {
            t = t.contract_axis(u, axis);
        }
        t
    }

    /// Contracts `u` (rows = new index, cols = old index) into one axis.
    pub fn contract_axis(&self, u: &DMatrix<f64>, axis: usize) -> Tensor4 {
        let d = self.d;
        assert_eq!((u.nrows(), u.ncols()), (d, d));
        let stride = d.pow(3 - axis as u32);
        let outer = d.pow(axis as u32);
        let mut out = vec![0.0; self.data.len()];
        for o in 0..outer {
            let base = o * d * stride;
            for a in 0..d {
                let dst = &mut out[base + a * stride..base + (a + 1) * stride];
                for p in 0..d {
                    let w = u[(a, p)];
                    if w == 0.0 {
                        continue;
                    }
                    let src = &self.data[base + p * stride..base + (p + 1) * stride];
                    for (x, y) in dst.iter_mut().zip(src) {
                        *x += w * y;
                    }
                }
            }
        }
        Tensor4 { d, data: out }
    }

    /// Applies a planar rotation mixing slots `i` and `j` on every axis.
    /// Touches only the `O(d³)` entries that carry an `i` or `j` index.
    pub fn rotate_pair(&mut self, i: usize, j: usize, c: f64, s: f64) {
        let d = self.d;
        for axis in 0..4 {
            let stride = d.pow(3 - axis as u32);
            let outer = d.pow(axis as u32);
            for o in 0..outer {
                let base = o * d * stride;
                for k in 0..stride {
                    let ki = base + i * stride + k;
                    let kj = base + j * stride + k;
                    let (xi, xj) = (self.data[ki], self.data[kj]);
                    self.data[ki] = c * xi + s * xj;
                    self.data[kj] = -s * xi + c * xj;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: usize) -> Tensor4 {
        Tensor4::from_vec(d, (0..d.pow(4)).map(|k| ((k * 37 % 11) as f64) - 5.0).collect())
    }

    fn naive(t: &Tensor4, u: &DMatrix<f64>) -> Tensor4 {
        let d = t.dim();
        let mut out = Tensor4::zeros(d);
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let mut acc = 0.0;
                        for p in 0..d {
                            for q in 0..d {
                                for r in 0..d {
                                    for s in 0..d {
                                        acc += u[(a, p)] * u[(b, q)] * u[(c, r)] * u[(e, s)] * t.get(p, q, r, s);
                                    }
                                }
                            }
                        }
                        out.set(a, b, c, e, acc);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn sequential_contraction_matches_naive_sum() {
        let d = 3;
        let t = sample(d);
        let u = DMatrix::from_fn(d, d, |a, b| ((a * 3 + b) as f64 * 0.7).sin());
        assert!(t.congruence(&u).max_abs_diff(&naive(&t, &u)) < 1e-10);
    }

    #[test]
    fn pair_rotation_matches_full_congruence() {
        let d = 4;
        let t = sample(d);
        let (i, j, th) = (1, 3, 0.37_f64);
        let mut u = DMatrix::identity(d, d);
        u[(i, i)] = th.cos();
        u[(i, j)] = th.sin();
        u[(j, i)] = -th.sin();
        u[(j, j)] = th.cos();
        let mut fast = t.clone();
        fast.rotate_pair(i, j, th.cos(), th.sin());
        assert!(fast.max_abs_diff(&t.congruence(&u)) < 1e-12);
    }
}
