use super::{vec_dot, vec_norm, ComplexMatrix, C64, EPS, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_JACOBI_SWEEPS: usize = 80;

/// Singular value decomposition A = U·diag(s)·V†.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    pub left: ComplexMatrix,
    pub right: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let s: Vec<C64> = self
            .singular_values
            .iter()
            .map(|&x| C64::new(x, 0.0))
            .collect();
        &(&self.left * &ComplexMatrix::diag(&s)) * &self.right.adjoint()
    }
}

/// One-sided Jacobi SVD of a square matrix.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            op: "svd",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut w: Vec<Vec<C64>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { ONE } else { ZERO }).collect())
        .collect();

    let mut converged = false;
    let mut off = 0.0;
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = w[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = vec_dot(&w[p], &w[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= EPS * (alpha * beta).sqrt() {
                    continue;
                }
                off = f64::max(off, g / (alpha * beta).sqrt());
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // [w_p, w_q] ← [c·w_p − s·e^{−iφ}·w_q, s·e^{iφ}·w_p + c·w_q]
                let sp = phase.conj() * s;
                let sq = phase * s;
                for cols in [&mut w, &mut v] {
                    let (left, right) = cols.split_at_mut(q);
                    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                        let (a, b) = (*x, *y);
                        *x = a * c - sp * b;
                        *y = sq * a + b * c;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            op: "svd",
            iterations: MAX_JACOBI_SWEEPS,
            residual: off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = w.iter().map(|c| vec_norm(c)).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let scale = norms.iter().cloned().fold(0.0, f64::max);
    let mut left = ComplexMatrix::zeros(n, n);
    let mut right = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        values.push(norms[j]);
        right.set_col(k, &v[j]);
        if norms[j] > 1e2 * EPS * scale && norms[j] > 0.0 {
            let u: Vec<C64> = w[j].iter().map(|z| z / norms[j]).collect();
            basis.push(u);
        } else {
            basis.push(Vec::new());
        }
    }
    complete_orthonormal(&mut basis, n);
    for (k, u) in basis.iter().enumerate() {
        left.set_col(k, u);
    }
    Ok(Svd {
        singular_values: values,
        left,
        right,
    })
}

/// Fill empty slots of `basis` with vectors orthonormal to the rest.
fn complete_orthonormal(basis: &mut [Vec<C64>], n: usize) {
    let mut candidate = 0;
    for k in 0..basis.len() {
        if !basis[k].is_empty() {
            continue;
        }
        loop {
            assert!(candidate < n, "cannot complete orthonormal basis");
            let mut e: Vec<C64> = (0..n)
                .map(|i| if i == candidate { ONE } else { ZERO })
                .collect();
            candidate += 1;
            // two passes of Gram–Schmidt
            for _ in 0..2 {
                for b in basis.iter().filter(|b| !b.is_empty()) {
                    let proj = vec_dot(b, &e);
                    for (x, y) in e.iter_mut().zip(b) {
                        *x -= proj * y;
                    }
                }
            }
            let norm = vec_norm(&e);
            if norm > 1e-3 {
                basis[k] = e.iter().map(|z| z / norm).collect();
                break;
            }
        }
    }
}

/// Householder QR of a square matrix: A = Q·R with Q unitary, R upper triangular.
pub fn qr(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    assert!(a.is_square(), "qr expects a square matrix");
    let n = a.rows();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(1) {
        let Some(v) = householder(&(k..n).map(|i| r[(i, k)]).collect::<Vec<_>>()) else {
            continue;
        };
        // R ← H·R on rows k..n
        for j in 0..n {
            let s: C64 = (k..n).map(|i| v[i - k].conj() * r[(i, j)]).sum();
            for i in k..n {
                r[(i, j)] -= v[i - k] * s * 2.0;
            }
        }
        // Q ← Q·H on columns k..n
        for i in 0..n {
            let s: C64 = (k..n).map(|j| q[(i, j)] * v[j - k]).sum();
            for j in k..n {
                q[(i, j)] -= s * v[j - k].conj() * 2.0;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            r[(i, j)] = ZERO;
        }
    }
    (q, r)
}

/// Unit Householder vector v with (I − 2vv†)x = α·e₁, or `None` if x is
/// already a multiple of e₁.
pub(crate) fn householder(x: &[C64]) -> Option<Vec<C64>> {
    let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
    if tail == 0.0 {
        return None;
    }
    let xnorm = (x[0].norm_sqr() + tail).sqrt();
    let phase = if x[0].norm() > 0.0 {
        x[0] / x[0].norm()
    } else {
        ONE
    };
    let alpha = -phase * xnorm;
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vnorm = vec_norm(&v);
    Some(v.iter().map(|z| z / vnorm).collect())
}
