//! Davidson iteration for the lowest eigenpair of a real symmetric operator
//! with diagonal preconditioning.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{QicasError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DavidsonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_subspace: usize,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        DavidsonOptions {
            tol: 1e-9,
            max_iter: 500,
            max_subspace: 48,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthogonalizes `v` against `basis` (twice) and normalizes; `None` when
/// nothing of `v` survives.
fn orthonormalize(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let start = norm(&v);
    if start == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let o = dot(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= o * y;
            }
        }
    }
    let n = norm(&v);
    if n < 1e-10 * start || n < 1e-300 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(v)
}

/// Lowest eigenpair of the operator `apply` (writes `A·x` into its second
/// argument). `guesses` seed the subspace, in order.
///
/// One root per guess is tracked and all of them must converge. Corrections
/// for a single root stay inside any symmetry block that commutes with both
/// the operator and the diagonal, so tracking several roots keeps the lowest
/// one from being missed.
pub fn lowest_eigenpair<F>(
    apply: F,
    diag: &[f64],
    guesses: &[Vec<f64>],
    opts: &DavidsonOptions,
) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = diag.len();
    if n == 0 {
        return Err(QicasError::Shape("empty eigenproblem".into()));
    }
    let nroots = guesses.len().clamp(1, n);
    let max_sub = opts.max_subspace.max(2 * nroots + 1).min(n);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let push = |v: Vec<f64>, basis: &mut Vec<Vec<f64>>, images: &mut Vec<Vec<f64>>| -> bool {
        match orthonormalize(v, basis) {
            Some(v) => {
                let mut av = vec![0.0; n];
                apply(&v, &mut av);
                basis.push(v);
                images.push(av);
                true
            }
            None => false,
        }
    };
    for g in guesses {
        if basis.len() >= max_sub {
            break;
        }
        push(g.clone(), &mut basis, &mut images);
    }
    let mut unit = 0;
    while basis.is_empty() && unit < n {
        let mut e = vec![0.0; n];
        e[unit] = 1.0;
        push(e, &mut basis, &mut images);
        unit += 1;
    }

    let mut best_residual = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let m = basis.len();
        let proj = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i])));
        let eig = SymmetricEigen::new(proj);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let k = nroots.min(m);

        let mut ritz = Vec::with_capacity(k);
        for &col in order.iter().take(k) {
            let theta = eig.eigenvalues[col];
            let y = eig.eigenvectors.column(col);
            let mut x = vec![0.0; n];
            let mut ax = vec![0.0; n];
            for (j, &yj) in y.iter().enumerate() {
                for ((xi, axi), (b, ab)) in x.iter_mut().zip(ax.iter_mut()).zip(basis[j].iter().zip(&images[j])) {
                    *xi += yj * b;
                    *axi += yj * ab;
                }
            }
            let residual: Vec<f64> = ax.iter().zip(&x).map(|(a, b)| a - theta * b).collect();
            let rnorm = norm(&residual);
            ritz.push((theta, x, ax, residual, rnorm));
        }
        best_residual = best_residual.min(ritz[0].4);
        let finish = |mut x: Vec<f64>, theta: f64| {
            let xn = norm(&x);
            x.iter_mut().for_each(|v| *v /= xn);
            Ok((theta, x))
        };
        if m >= n || (k == nroots && ritz.iter().all(|r| r.4 <= opts.tol)) {
            let (theta, x, ..) = ritz.swap_remove(0);
            return finish(x, theta);
        }

        if m + k > max_sub {
            // collapse onto the tracked Ritz vectors
            basis.clear();
            images.clear();
            for (_, x, ax, _, _) in &ritz {
                let xn = norm(x);
                basis.push(x.iter().map(|v| v / xn).collect());
                images.push(ax.iter().map(|v| v / xn).collect());
            }
        }
        let mut added = 0;
        for (theta, _, _, residual, rnorm) in &ritz {
            if *rnorm <= opts.tol {
                continue;
            }
            let correction: Vec<f64> = residual
                .iter()
                .zip(diag)
                .map(|(r, dii)| {
                    let denom = theta - dii;
                    let denom = if denom.abs() < 1e-8 { 1e-8_f64.copysign(denom) } else { denom };
                    r / denom
                })
                .collect();
            if push(correction, &mut basis, &mut images) || push(residual.clone(), &mut basis, &mut images) {
                added += 1;
            }
        }
        if added == 0 {
            // no new direction: accept the lowest root if it is exact to working precision
            let (theta, x, _, _, rnorm) = ritz.swap_remove(0);
            if rnorm <= opts.tol.max(1e-12 * theta.abs().max(1.0)) {
                return finish(x, theta);
            }
            return Err(QicasError::Convergence {
                iterations: iter + 1,
                residual: best_residual,
            });
        }
    }
    Err(QicasError::Convergence {
        iterations: opts.max_iter,
        residual: best_residual,
    })
}
