use crate::error::{QicasError, Result};

/// `a†_p a_q |string⟩ = sign · |target⟩`, for one source string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Excitation {
    pub target: usize,
    pub p: usize,
    pub q: usize,
    pub sign: f64,
}

/// All occupation strings of one spin with a fixed electron count, in
/// ascending bitmask order, with their single-excitation tables.
#[derive(Debug, Clone, PartialEq)]
pub struct StringSet {
    d: usize,
    n: usize,
    masks: Vec<u64>,
    excitations: Vec<Vec<Excitation>>,
}

fn binomial_table(d: usize) -> Vec<Vec<usize>> {
    let mut c = vec![vec![0usize; d + 2]; d + 2];
    for n in 0..=d + 1 {
        c[n][0] = 1;
        for k in 1..=n {
            c[n][k] = c[n - 1][k - 1] + if k < n { c[n - 1][k] } else { 0 };
        }
    }
    c
}

/// Number of ways to choose `k` out of `n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl StringSet {
    pub fn new(d: usize, n: usize) -> Self {
        let binom = binomial_table(d);
        let mut masks = Vec::with_capacity(binomial(d, n));
        if n <= d {
            // ascending masks with popcount n (Gosper's hack)
            if n == 0 {
                masks.push(0);
            } else {
                let mut m: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
                let limit: u64 = if d == 64 { u64::MAX } else { 1u64 << d };
                loop {
                    masks.push(m);
                    let c = m & m.wrapping_neg();
                    let r = m.wrapping_add(c);
                    if r == 0 {
                        break;
                    }
                    let next = (((r ^ m) >> 2) / c) | r;
                    if d < 64 && next >= limit {
                        break;
                    }
                    if next <= m {
                        break;
                    }
                    m = next;
                }
            }
        }
        let rank = |mask: u64| -> usize {
            let mut r = 0;
            let mut k = 0;
            for pos in 0..d {
                if mask >> pos & 1 == 1 {
                    k += 1;
                    r += binom[pos][k];
                }
            }
            r
        };
        let excitations = masks
            .iter()
            .map(|&m| {
                let mut list = Vec::new();
                for q in 0..d {
                    if m >> q & 1 == 0 {
                        continue;
                    }
                    let removed = m & !(1u64 << q);
                    let sign_q = parity_below(m, q);
                    for p in 0..d {
                        if removed >> p & 1 == 1 {
                            continue;
                        }
                        let target = removed | (1u64 << p);
                        let sign = sign_q * parity_below(removed, p);
                        list.push(Excitation {
                            target: rank(target),
                            p,
                            q,
                            sign,
                        });
                    }
                }
                list
            })
            .collect();
        debug_assert!(masks.iter().enumerate().all(|(i, &m)| rank(m) == i));
        StringSet {
            d,
            n,
            masks,
            excitations,
        }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn electrons(&self) -> usize {
        self.n
    }

    pub fn orbitals(&self) -> usize {
        self.d
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn excitations(&self, index: usize) -> &[Excitation] {
        &self.excitations[index]
    }
}

/// `(−1)^{number of occupied modes below pos}`.
#[inline]
pub(crate) fn parity_below(mask: u64, pos: usize) -> f64 {
    let below = mask & ((1u64 << pos) - 1);
    if below.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Determinants `(alpha, beta)` in lexicographic order; determinant `k`
/// pairs alpha string `k / n_beta_strings` with beta string `k % n_beta_strings`.
/// The associated state is `Π_{p∈α↑} a†_{p↑} Π_{q∈β↓} a†_{q↓} |vac⟩` with
/// both products in ascending orbital order.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantSpace {
    alpha: StringSet,
    beta: StringSet,
}

impl DeterminantSpace {
    pub fn d(&self) -> usize {
        self.alpha.orbitals()
    }

    pub fn n_alpha(&self) -> usize {
        self.alpha.electrons()
    }

    pub fn n_beta(&self) -> usize {
        self.beta.electrons()
    }

    pub fn alpha(&self) -> &StringSet {
        &self.alpha
    }

    pub fn beta(&self) -> &StringSet {
        &self.beta
    }

    pub fn len(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(alpha mask, beta mask)` of determinant `k`.
    pub fn determinant(&self, k: usize) -> (u64, u64) {
        let nb = self.beta.len();
        (self.alpha.masks[k / nb], self.beta.masks[k % nb])
    }

    pub fn determinants(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..self.len()).map(|k| self.determinant(k))
    }
}

/// Number of determinants without building the space.
pub fn space_size(d: usize, n_alpha: usize, n_beta: usize) -> usize {
    binomial(d, n_alpha).saturating_mul(binomial(d, n_beta))
}

pub fn enumerate_determinants(d: usize, n_alpha: usize, n_beta: usize) -> Result<DeterminantSpace> {
    if d > 64 {
        return Err(QicasError::Range(format!("{d} orbitals exceed the 64-bit string limit")));
    }
    if n_alpha > d || n_beta > d {
        return Err(QicasError::Range(format!(
            "({n_alpha}α, {n_beta}β) electrons do not fit in {d} orbitals"
        )));
    }
    Ok(DeterminantSpace {
        alpha: StringSet::new(d, n_alpha),
        beta: StringSet::new(d, n_beta),
    })
}
