//! Eigensolvers.
//!
//! * [`eig_hermitian`]: Householder tridiagonalization, a diagonal phase
//!   similarity making the tridiagonal real, then implicit QL.
//! * [`eig_general`]: Householder Hessenberg reduction, implicitly shifted
//!   complex QR to Schur form (Wilkinson shifts with periodic exceptional
//!   shifts), and triangular back substitution for the eigenvectors.

use super::svd::householder;
use super::{hybrid_tol, vec_dot, vec_norm, ComplexMatrix, C64, EPS, ONE, ZERO};
use crate::error::{Error, Result};

/// Relative residual tolerance for Hermitian eigenpairs.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative residual tolerance for general eigenpairs.
pub const GENERAL_TOL: f64 = 1e-8;
/// Eigenvectors whose overlap modulus with an earlier one exceeds `1 − PARALLEL_TOL`
/// span no new direction and are flagged defective.
const PARALLEL_TOL: f64 = 1e-8;

/// Eigenvalues with unit-norm column eigenvectors and their residuals ‖Mv − λv‖.
#[derive(Debug, Clone)]
pub struct EigenResult<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<C64>>,
    pub residuals: Vec<f64>,
    /// Residual threshold `tol·max(1, ‖M‖)` the pairs were judged against.
    pub tolerance: f64,
    /// Pairs whose residual exceeds `tolerance` or whose vector duplicates an
    /// earlier one (Jordan structure).
    pub defective: Vec<bool>,
}

impl<T> EigenResult<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

fn residual(m: &ComplexMatrix, lambda: C64, v: &[C64]) -> f64 {
    let mv = m.matvec(v);
    mv.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Eigen-decomposition of a Hermitian matrix; values ascending, vectors orthonormal.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<EigenResult<f64>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            op: "eig_hermitian",
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let scale = m.norm();
    let asym = (m - &m.adjoint()).norm();
    if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Contract(format!(
            "eig_hermitian: ‖M − M†‖ = {asym:e} exceeds 1e-12·‖M‖ = {:e}",
            1e-12 * scale
        )));
    }
    let n = m.rows();
    let sym = (m + &m.adjoint()).scale_real(0.5);

    let (mut diag, mut off, mut z) = tridiagonalize(&sym);
    tql(&mut diag, &mut off, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));

    let tolerance = hybrid_tol(HERMITIAN_TOL, scale);
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for &k in &order {
        let mut v = z.col(k);
        let norm = vec_norm(&v);
        v.iter_mut().for_each(|x| *x /= norm);
        let res = residual(m, C64::new(diag[k], 0.0), &v);
        if res > tolerance {
            return Err(Error::Convergence {
                op: "eig_hermitian",
                iterations: 0,
                residual: res,
            });
        }
        values.push(diag[k]);
        vectors.push(v);
        residuals.push(res);
    }
    Ok(EigenResult {
        values,
        vectors,
        residuals,
        tolerance,
        defective: vec![false; n],
    })
}

/// Reduce Hermitian `a` to real symmetric tridiagonal form.
///
/// Returns the diagonal, the subdiagonal (length n, last entry zero) and the
/// unitary W with a = W·T·W†.
fn tridiagonalize(a: &ComplexMatrix) -> (Vec<f64>, Vec<f64>, ComplexMatrix) {
    let n = a.rows();
    let mut t = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| t[(i, k)]).collect();
        let Some(v) = householder(&x) else { continue };
        let lo = k + 1;
        // left: rows lo..n
        for j in 0..n {
            let s: C64 = (lo..n).map(|i| v[i - lo].conj() * t[(i, j)]).sum();
            for i in lo..n {
                t[(i, j)] -= v[i - lo] * s * 2.0;
            }
        }
        // right: columns lo..n
        for mat in [&mut t, &mut q] {
            for i in 0..n {
                let s: C64 = (lo..n).map(|j| mat[(i, j)] * v[j - lo]).sum();
                for j in lo..n {
                    mat[(i, j)] -= s * v[j - lo].conj() * 2.0;
                }
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| t[(i, i)].re).collect();
    let mut off = vec![0.0; n];
    // D†TD is real for φ₀ = 1, φ_{i+1} = φ_i·e_i/|e_i|.
    let mut phase = ONE;
    let mut phases = vec![ONE; n];
    for i in 0..n.saturating_sub(1) {
        let e = t[(i + 1, i)];
        off[i] = e.norm();
        if off[i] > 0.0 {
            phase *= e / off[i];
        }
        phases[i + 1] = phase;
    }
    let w = &q * &ComplexMatrix::diag(&phases);
    (diag, off, w)
}

/// Implicit QL on a real symmetric tridiagonal matrix; rotations are
/// accumulated into the columns of `z`.
fn tql(d: &mut [f64], e: &mut [f64], z: &mut ComplexMatrix) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    let max_iter = 30 * n.max(4);
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= EPS * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::Convergence {
                        op: "eig_hermitian",
                        iterations: iter,
                        residual: e[l].abs(),
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zk1 = z[(k, i + 1)];
                        let zk = z[(k, i)];
                        z[(k, i + 1)] = zk * s + zk1 * c;
                        z[(k, i)] = zk * c - zk1 * s;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= EPS * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Eigenvalues and eigenvectors of a general square complex matrix.
///
/// Eigenvalues are returned in Schur order. Pairs whose residual exceeds
/// `1e-8·max(1, ‖M‖)` or whose eigenvector is (numerically) parallel to an
/// earlier one are flagged in `defective` instead of being rejected.
pub fn eig_general(m: &ComplexMatrix) -> Result<EigenResult<C64>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            op: "eig_general",
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let scale = m.norm();
    let (t, z) = schur(m)?;

    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let tolerance = hybrid_tol(GENERAL_TOL, scale);
    // floor keeps |denom|² clear of underflow in complex division
    let small = (EPS * t.norm()).max(1e-150);

    let mut vectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut defective = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut x = vec![ZERO; n];
        x[k] = ONE;
        for i in (0..k).rev() {
            let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * x[j]).sum();
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = C64::new(small, 0.0);
            }
            x[i] = -s / denom;
            // keep the partial solution bounded
            let big = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if big > 1e100 {
                x.iter_mut().for_each(|v| *v /= big);
            }
        }
        let mut v = z.matvec(&x);
        let norm = vec_norm(&v);
        v.iter_mut().for_each(|c| *c /= norm);
        let res = residual(m, lambda, &v);
        let parallel = vectors
            .iter()
            .any(|u: &Vec<C64>| vec_dot(u, &v).norm() > 1.0 - PARALLEL_TOL);
        defective.push(res > tolerance || parallel);
        residuals.push(res);
        vectors.push(v);
    }
    Ok(EigenResult {
        values,
        vectors,
        residuals,
        tolerance,
        defective,
    })
}

/// Complex Schur decomposition M = Z·T·Z†.
pub fn schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = m.rows();
    let (mut h, mut z) = hessenberg(m);
    if n == 1 {
        return Ok((h, z));
    }
    let max_sweeps = 100 * n;
    let hnorm = h.norm();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // find start of the active unreduced block
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].l1_norm() + h[(l, l)].l1_norm();
            if s == 0.0 {
                s = hnorm;
            }
            if h[(l, l - 1)].l1_norm() <= EPS * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_sweeps {
            return Err(Error::Convergence {
                op: "eig_general",
                iterations: total,
                residual: h[(hi, hi - 1)].norm(),
            });
        }

        let mu = if iter.is_multiple_of(10) {
            // exceptional shift
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        let mut x = h[(l, l)] - mu;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let first = if k > l { k - 1 } else { l };
            for j in first..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = b * c - s.conj() * a;
            }
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
            let last = (k + 2).min(hi);
            for i in 0..=last {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = b * c - a * s;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s.conj();
                z[(i, k + 1)] = b * c - a * s;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok((h, z))
}

/// Eigenvalue of the trailing 2×2 block [[a, b], [c, d]] closest to d.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    // (a + d)/2 ± sqrt(((a − d)/2)² + bc)
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let r1 = mid + disc;
    let r2 = mid - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Complex Givens rotation G = [[c, s], [−s̄, c]] with G·[x, y]ᵀ = [r, 0]ᵀ.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    let ax = x.norm();
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let rho = ax.hypot(ay);
    let c = ax / rho;
    let s = (x / ax) * y.conj() / rho;
    (c, s)
}

/// Householder reduction to upper Hessenberg form: M = Q·H·Q†.
fn hessenberg(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.rows();
    let mut h = m.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let Some(v) = householder(&x) else { continue };
        let lo = k + 1;
        for j in k..n {
            let s: C64 = (lo..n).map(|i| v[i - lo].conj() * h[(i, j)]).sum();
            for i in lo..n {
                h[(i, j)] -= v[i - lo] * s * 2.0;
            }
        }
        for mat in [&mut h, &mut q] {
            for i in 0..n {
                let s: C64 = (lo..n).map(|j| mat[(i, j)] * v[j - lo]).sum();
                for j in lo..n {
                    mat[(i, j)] -= s * v[j - lo].conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}
