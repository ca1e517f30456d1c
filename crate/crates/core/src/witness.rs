//! Sharp bound constants and closed-form pairs that attain them.
//!
//! For all A, B ∈ M_n(ℂ):
//!
//! ```text
//! c₋‖A‖²‖B‖² ≤ r(A,B) ≤ c₊‖A‖²‖B‖²,   c± = (1 ± √2)/2
//! ```
//!
//! and with tr A = 0 the constants tighten to (1 ± √(2(1 − 1/n)))/2. Every
//! constructor here returns a concrete pair attaining one of these constants.
//! B is always a single unit matrix entry, so the pairs are exact fixtures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pauli, ComplexMatrix, C64, ONE, ZERO};
use crate::rfunc::r_eval;

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub n: usize,
    pub traceless: bool,
    pub c_minus: f64,
    pub c_plus: f64,
}

impl BoundConstants {
    pub fn get(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Upper => self.c_plus,
            Sign::Lower => self.c_minus,
        }
    }
}

/// Optimal constants c± for matrix size `n`, optionally restricted to tr A = 0.
pub fn best_constants(n: usize, traceless: bool) -> Result<BoundConstants> {
    if n < 2 {
        return Err(Error::Contract(format!(
            "bound constants need n ≥ 2, got {n}"
        )));
    }
    let root = if traceless {
        (2.0 * (1.0 - 1.0 / n as f64)).sqrt()
    } else {
        SQRT_2
    };
    Ok(BoundConstants {
        n,
        traceless,
        c_minus: (1.0 - root) / 2.0,
        c_plus: (1.0 + root) / 2.0,
    })
}

fn require_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Contract(format!("witnesses need n ≥ 2, got {n}")));
    }
    Ok(())
}

/// Diagonal A = diag(1, −2c±, 0, …) with B = E₁₂.
pub fn witness_general(n: usize, sign: Sign) -> Result<(ComplexMatrix, ComplexMatrix)> {
    require_n(n)?;
    let c = best_constants(n, false)?.get(sign);
    let mut diag = vec![0.0; n];
    diag[0] = 1.0;
    diag[1] = -2.0 * c;
    Ok((
        ComplexMatrix::diag_real(&diag),
        ComplexMatrix::unit(n, 0, 1),
    ))
}

/// Real traceless diagonal A attaining the traceless constants.
///
/// n = 2 uses A = diag(1, −1); the upper pair takes B = E₁₂ (ratio 1) and the
/// lower pair the diagonal B = E₁₁ (ratio 0). For n ≥ 3, with
/// s = c + c/(n − 2), B = E₂₁ and
///
/// * upper: a₁ = √s, a₂ = −√(s − 1), a_k = (√(s − 1) − √s)/(n − 2)
/// * lower: a₁ = √(−s), a₂ = √(1 − s), a_k = (−√(1 − s) − √(−s))/(n − 2)
pub fn witness_traceless(n: usize, sign: Sign) -> Result<(ComplexMatrix, ComplexMatrix)> {
    require_n(n)?;
    if n == 2 {
        let a = ComplexMatrix::diag_real(&[1.0, -1.0]);
        let b = match sign {
            Sign::Upper => ComplexMatrix::unit(2, 0, 1),
            Sign::Lower => ComplexMatrix::unit(2, 0, 0),
        };
        return Ok((a, b));
    }
    let c = best_constants(n, true)?.get(sign);
    let m = (n - 2) as f64;
    let s = c + c / m;
    let (a1, a2, rest) = match sign {
        Sign::Upper => {
            let (p, q) = (s.sqrt(), (s - 1.0).sqrt());
            (p, -q, (q - p) / m)
        }
        Sign::Lower => {
            let (p, q) = ((-s).sqrt(), (1.0 - s).sqrt());
            (p, q, (-q - p) / m)
        }
    };
    let mut diag = vec![rest; n];
    diag[0] = a1;
    diag[1] = a2;
    Ok((
        ComplexMatrix::diag_real(&diag),
        ComplexMatrix::unit(n, 1, 0),
    ))
}

/// Orthogonal rank-one A = e₁e₂†, attaining r(A,A) = ½‖A‖⁴.
pub fn witness_self(n: usize) -> Result<ComplexMatrix> {
    require_n(n)?;
    Ok(ComplexMatrix::unit(n, 0, 1))
}

/// r(A,B) for real diagonal A = diag(a) in closed form:
/// Σ_{i≠j} |b_ji|²(a_i² − a_i a_j).
pub fn r_diagonal(a: &[f64], b: &ComplexMatrix) -> f64 {
    let n = a.len();
    assert_eq!(b.shape(), (n, n), "r_diagonal shape");
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += b[(j, i)].norm_sqr() * (a[i] * a[i] - a[i] * a[j]);
            }
        }
    }
    s
}

/// Coefficients of a 2×2 matrix in the orthonormal basis F₀ = I/√2, F_i = σ_i/√2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliVector {
    pub a0: C64,
    pub a: [C64; 3],
}

impl PauliVector {
    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + vnorm_sqr(&self.a)
    }
}

fn basis() -> [ComplexMatrix; 4] {
    let [s1, s2, s3] = pauli();
    [
        ComplexMatrix::identity(2).scale_real(FRAC_1_SQRT_2),
        s1.scale_real(FRAC_1_SQRT_2),
        s2.scale_real(FRAC_1_SQRT_2),
        s3.scale_real(FRAC_1_SQRT_2),
    ]
}

pub fn pauli_decompose(a: &ComplexMatrix) -> Result<PauliVector> {
    if a.shape() != (2, 2) {
        return Err(Error::Shape(format!(
            "Pauli decomposition needs a 2x2 matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let f = basis();
    let coeff = |k: usize| crate::linalg::hs_inner(&f[k], a).expect("2x2 shapes");
    Ok(PauliVector {
        a0: coeff(0),
        a: [coeff(1), coeff(2), coeff(3)],
    })
}

pub fn pauli_reconstruct(v: &PauliVector) -> ComplexMatrix {
    let f = basis();
    let mut out = f[0].scale(v.a0);
    for (k, c) in v.a.iter().enumerate() {
        out = &out + &f[k + 1].scale(*c);
    }
    out
}

/// Σ conj(x_i)·y_i
fn vdot(x: &[C64; 3], y: &[C64; 3]) -> C64 {
    x.iter().zip(y).map(|(p, q)| p.conj() * q).sum()
}

fn vnorm_sqr(x: &[C64; 3]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

fn cross(x: &[C64; 3], y: &[C64; 3]) -> [C64; 3] {
    [
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    ]
}

fn vconj(x: &[C64; 3]) -> [C64; 3] {
    [x[0].conj(), x[1].conj(), x[2].conj()]
}

/// r(A,B) from Pauli coefficients:
///
/// ```text
/// |a|²|b|² − ½(|a·b|² + |ā·b|²) − Im(ā₀ Σ_i a_i (b̄ × b)_i)
/// ```
///
/// where a·b = Σ conj(a_i) b_i, but the triple product is bilinear (no
/// conjugation on a). b₀ does not enter.
pub fn r_pauli(a: &PauliVector, b: &PauliVector) -> f64 {
    let na = vnorm_sqr(&a.a);
    let nb = vnorm_sqr(&b.a);
    let ab = vdot(&a.a, &b.a).norm_sqr();
    let abar_b = vdot(&vconj(&a.a), &b.a).norm_sqr();
    let triple = vdot(&vconj(&a.a), &cross(&vconj(&b.a), &b.a));
    na * nb - 0.5 * (ab + abar_b) - (a.a0.conj() * triple).im
}

/// Orientation of the real orthonormal triple (a, b_R, b_I).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    /// a·(b_R × b_I) = −1
    Left,
    /// a·(b_R × b_I) = +1
    Right,
}

/// Qubit pair with b_R = (1,0,0), b_I = (0,1,0), a = (0,0,∓1), b₀ = 0 and the given a₀.
pub fn qubit_pair(a0: f64, handedness: Handedness) -> (ComplexMatrix, ComplexMatrix) {
    let az = match handedness {
        Handedness::Left => -1.0,
        Handedness::Right => 1.0,
    };
    let a = PauliVector {
        a0: C64::new(a0, 0.0),
        a: [ZERO, ZERO, C64::new(az, 0.0)],
    };
    let b = PauliVector {
        a0: ZERO,
        a: [ONE, C64::new(0.0, 1.0), ZERO],
    };
    (pauli_reconstruct(&a), pauli_reconstruct(&b))
}

/// Qubit pair attaining the general constants.
///
/// Upper: left-handed triple with a₀ = √2 − 1. Lower: right-handed triple with
/// a₀ = √2 + 1; the cross term −2·Re(ā₀ a·(b_R × b_I)) must be negative there,
/// which fixes the orientation.
pub fn witness_qubit(sign: Sign) -> (ComplexMatrix, ComplexMatrix) {
    match sign {
        Sign::Upper => qubit_pair(SQRT_2 - 1.0, Handedness::Left),
        Sign::Lower => qubit_pair(SQRT_2 + 1.0, Handedness::Right),
    }
}

/// Which family a witness belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    General,
    Traceless,
    Qubit,
    #[serde(rename = "self")]
    SelfPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessMeta {
    pub kind: WitnessKind,
    pub n: usize,
    pub sign: Sign,
    pub traceless: bool,
    pub target_constant: f64,
    pub achieved_ratio: f64,
}

/// A witness pair with its metadata, in the shared matrix JSON format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessExport {
    #[serde(rename = "A")]
    pub a: ComplexMatrix,
    #[serde(rename = "B")]
    pub b: ComplexMatrix,
    pub meta: WitnessMeta,
}

/// Build a witness and evaluate it with the generic evaluator.
pub fn export(kind: WitnessKind, n: usize, sign: Sign) -> Result<WitnessExport> {
    let (a, b, traceless, target) = match kind {
        WitnessKind::General => {
            let (a, b) = witness_general(n, sign)?;
            (a, b, false, best_constants(n, false)?.get(sign))
        }
        WitnessKind::Traceless => {
            let (a, b) = witness_traceless(n, sign)?;
            (a, b, true, best_constants(n, true)?.get(sign))
        }
        WitnessKind::Qubit => {
            if n != 2 {
                return Err(Error::Contract(format!(
                    "qubit witness is 2x2, got n = {n}"
                )));
            }
            let (a, b) = witness_qubit(sign);
            (a, b, false, best_constants(2, false)?.get(sign))
        }
        WitnessKind::SelfPair => {
            let a = witness_self(n)?;
            // r(A,A)/‖A‖⁴ ranges over [0, ½]
            let target = match sign {
                Sign::Upper => 0.5,
                Sign::Lower => 0.0,
            };
            let a = match sign {
                Sign::Upper => a,
                Sign::Lower => ComplexMatrix::identity(n),
            };
            (a.clone(), a, false, target)
        }
    };
    let achieved_ratio = r_eval(&a, &b)? / (a.norm_sqr() * b.norm_sqr());
    Ok(WitnessExport {
        a,
        b,
        meta: WitnessMeta {
            kind,
            n,
            sign,
            traceless,
            target_constant: target,
            achieved_ratio,
        },
    })
}
