//! Seeded random ensembles.
//!
//! All samplers draw from a caller-provided RNG so that every experiment is
//! reproducible from a single `u64` seed via [`seeded`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{qr, ComplexMatrix, C64};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian, E|z|² = 1.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| complex_normal(rng))
}

/// Ginibre matrix rescaled to unit Frobenius norm.
pub fn unit_ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(n, rng);
    let norm = g.norm();
    g.scale_real(1.0 / norm)
}

pub fn hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(n, rng);
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix,
/// with the phases of R's diagonal absorbed into Q.
pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let (q, r) = qr(&ginibre(n, rng));
    let phases: Vec<C64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    &q * &ComplexMatrix::diag(&phases)
}

/// Random normal matrix U·diag(z)·U† with Gaussian eigenvalues.
pub fn normal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let u = unitary(n, rng);
    let d: Vec<C64> = (0..n).map(|_| complex_normal(rng)).collect();
    &(&u * &ComplexMatrix::diag(&d)) * &u.adjoint()
}

/// Remove the trace part: A − (tr A / n)·I.
pub fn traceless_part(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let shift = a.trace() / n as f64;
    let mut out = a.clone();
    for i in 0..n {
        out[(i, i)] -= shift;
    }
    out
}
