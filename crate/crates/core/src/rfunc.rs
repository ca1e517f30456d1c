//! The relaxation functional
//!
//! ```text
//! r(A,B) = ½(⟨[B,A], BA⟩ + ⟨[B,A†], BA†⟩)
//! ```
//!
//! together with its equivalent closed forms and the pointwise identities and
//! inequalities it satisfies. r is real, quadratic (not bilinear) in each
//! argument, unitarily invariant, and asymmetric in (A, B).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator, hs_inner_unchecked, ComplexMatrix, C64};
use crate::witness::best_constants;

/// Imaginary residue allowed before discarding, relative to max(1, ‖A‖²‖B‖²).
pub const IMAG_RESIDUE_TOL: f64 = 1e-12;
/// B is treated as normal when ‖[B†,B]‖ ≤ NORMALITY_TOL·‖B‖².
pub const NORMALITY_TOL: f64 = 1e-10;
/// Slack used when reporting whether a bound holds.
pub const BOUND_SLACK: f64 = 1e-10;

fn check_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            op: "r",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.shape() != b.shape() {
        return Err(Error::Dimension {
            op: "r",
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

fn realize(z: C64, scale: f64, what: &str) -> Result<f64> {
    let limit = IMAG_RESIDUE_TOL * scale.max(1.0);
    if z.im.abs() > limit {
        return Err(Error::Assertion(format!(
            "{what}: imaginary residue {:e} exceeds {limit:e}",
            z.im
        )));
    }
    Ok(z.re)
}

fn tr_prod(x: &ComplexMatrix, y: &ComplexMatrix) -> C64 {
    // tr(XY) = Σ_ij x_ij y_ji
    let n = x.rows();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += x[(i, j)] * y[(j, i)];
        }
    }
    s
}

/// ½ tr(A†A B†B + AA† B†B − A†BAB† − BA†B†A), unchecked.
fn expanded_trace(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let ad = a.adjoint();
    let bd = b.adjoint();
    let bdb = &bd * b;
    let ada = &ad * a;
    let aad = a * &ad;
    let cross = tr_prod(&(&ad * b), &(a * &bd)) + tr_prod(&(b * &ad), &(&bd * a));
    (tr_prod(&ada, &bdb) + tr_prod(&aad, &bdb) - cross) * 0.5
}

/// r(A,B) evaluated through the fully expanded trace form.
///
/// Fails on shape mismatch or if the complex arithmetic leaves an imaginary
/// residue above `1e-12·max(1, ‖A‖²‖B‖²)`.
pub fn r_eval(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    check_pair(a, b)?;
    let z = expanded_trace(a, b);
    realize(z, a.norm_sqr() * b.norm_sqr(), "r_eval")
}

/// All equivalent closed forms of r(A,B).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alternates {
    /// ½(⟨[B,A],BA⟩ + ⟨[B,A†],BA†⟩)
    pub definition: f64,
    /// ½ tr(A†AB†B + AA†B†B − A†BAB† − BA†B†A)
    pub expanded_trace: f64,
    /// ½ tr({A,A†}B†B) − Re tr(A†BAB†)
    pub anticommutator: f64,
    /// ½(‖[A,B]‖² + tr(A†A[B†,B]))
    pub commutator: f64,
    /// ½(‖[A†,B†]‖² + tr(A†A[B†,B]))
    pub adjoint_commutator: f64,
    /// ½(‖[A,B†]‖² + tr(AA†[B†,B]))
    pub commutator_b_adjoint: f64,
    /// ½(‖[A†,B]‖² + tr(AA†[B†,B]))
    pub commutator_a_adjoint: f64,
    /// ¼(‖[A,B]‖² + ‖[A†,B]‖² + tr({A,A†}[B†,B]))
    pub symmetrized: f64,
}

impl Alternates {
    pub fn as_array(&self) -> [f64; 8] {
        [
            self.definition,
            self.expanded_trace,
            self.anticommutator,
            self.commutator,
            self.adjoint_commutator,
            self.commutator_b_adjoint,
            self.commutator_a_adjoint,
            self.symmetrized,
        ]
    }

    /// Largest pairwise absolute difference.
    pub fn spread(&self) -> f64 {
        let v = self.as_array();
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// r(A,B) with every equivalent form and the normalized ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RReport {
    pub value: f64,
    pub alternates: Alternates,
    pub max_spread: f64,
    /// r/(‖A‖²‖B‖²); absent when either matrix is zero.
    pub ratio: Option<f64>,
    pub norm_a_sq: f64,
    pub norm_b_sq: f64,
}

pub fn r_report(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<RReport> {
    check_pair(a, b)?;
    let ad = a.adjoint();
    let bd = b.adjoint();
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    let scale = na * nb;

    let ba = b * a;
    let bad = b * &ad;
    let c_ba = &ba - &(a * b);
    let c_bad = &bad - &(&ad * b);
    let definition = (hs_inner_unchecked(&c_ba, &ba) + hs_inner_unchecked(&c_bad, &bad)) * 0.5;

    let expanded = expanded_trace(a, b);

    let bdb = &bd * b;
    let anti_a = &(a * &ad) + &(&ad * a);
    let anticommutator =
        tr_prod(&anti_a, &bdb) * 0.5 - C64::new(tr_prod(&(&ad * b), &(a * &bd)).re, 0.0);

    let self_comm_b = &bdb - &(b * &bd); // [B†,B]
    let ada = &ad * a;
    let aad = a * &ad;
    let t_ada = tr_prod(&ada, &self_comm_b);
    let t_aad = tr_prod(&aad, &self_comm_b);
    let csq = |x: &ComplexMatrix, y: &ComplexMatrix| (&(x * y) - &(y * x)).norm_sqr();
    let c_ab = csq(a, b);
    let c_adbd = csq(&ad, &bd);
    let c_abd = csq(a, &bd);
    let c_adb = csq(&ad, b);

    let commutator_form = (t_ada + c_ab) * 0.5;
    let adjoint_commutator = (t_ada + c_adbd) * 0.5;
    let commutator_b_adjoint = (t_aad + c_abd) * 0.5;
    let commutator_a_adjoint = (t_aad + c_adb) * 0.5;
    let symmetrized = (tr_prod(&anti_a, &self_comm_b) + c_ab + c_adb) * 0.25;

    let value = realize(expanded, scale, "r_report")?;
    let alternates = Alternates {
        definition: realize(definition, scale, "definition form")?,
        expanded_trace: value,
        anticommutator: realize(anticommutator, scale, "anticommutator form")?,
        commutator: realize(commutator_form, scale, "commutator form")?,
        adjoint_commutator: realize(adjoint_commutator, scale, "adjoint commutator form")?,
        commutator_b_adjoint: realize(commutator_b_adjoint, scale, "[A,B†] form")?,
        commutator_a_adjoint: realize(commutator_a_adjoint, scale, "[A†,B] form")?,
        symmetrized: realize(symmetrized, scale, "symmetrized form")?,
    };
    Ok(RReport {
        value,
        max_spread: alternates.spread(),
        alternates,
        ratio: (na > 0.0 && nb > 0.0).then(|| value / scale),
        norm_a_sq: na,
        norm_b_sq: nb,
    })
}

/// r(A,A) = ½ tr(A†A[A†,A]).
pub fn r_self(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            op: "r_self",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let ad = a.adjoint();
    let ada = &ad * a;
    let comm = &ada - &(a * &ad);
    let z = tr_prod(&ada, &comm) * 0.5;
    realize(z, a.norm_sqr() * a.norm_sqr(), "r_self")
}

/// (r(αA, βB), |α|²|β|²·r(A,B)).
pub fn scaling_check(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    alpha: C64,
    beta: C64,
) -> Result<(f64, f64)> {
    let scaled = r_eval(&a.scale(alpha), &b.scale(beta))?;
    let base = r_eval(a, b)?;
    Ok((scaled, alpha.norm_sqr() * beta.norm_sqr() * base))
}

/// Unitaries are accepted when ‖U†U − I‖ ≤ this.
pub const UNITARY_TOL: f64 = 1e-12;

/// (r(UAU†, UBU†), r(A,B)).
pub fn unitary_invariance_check(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    u: &ComplexMatrix,
) -> Result<(f64, f64)> {
    check_pair(a, b)?;
    if u.shape() != a.shape() {
        return Err(Error::Dimension {
            op: "unitary_invariance_check",
            left: a.shape(),
            right: u.shape(),
        });
    }
    if !u.is_unitary(UNITARY_TOL * (a.rows() as f64).sqrt()) {
        return Err(Error::Contract("U is not unitary within tolerance".into()));
    }
    let ud = u.adjoint();
    let conj = |x: &ComplexMatrix| &(u * x) * &ud;
    Ok((r_eval(&conj(a), &conj(b))?, r_eval(a, b)?))
}

/// (r(A,B), r(A_R,B), r(A_I,B)) for the Hermitian parts of A = A_R + i·A_I.
pub fn cartesian_additivity_check(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(f64, f64, f64)> {
    check_pair(a, b)?;
    let (re, im) = crate::linalg::cartesian_split(a)?;
    Ok((r_eval(a, b)?, r_eval(&re, b)?, r_eval(&im, b)?))
}

/// (‖[A,B]‖², 2‖A‖²‖B‖²).
pub fn bw_check(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(f64, f64)> {
    check_pair(a, b)?;
    let c = commutator(a, b)?;
    Ok((c.norm_sqr(), 2.0 * a.norm_sqr() * b.norm_sqr()))
}

/// (r, √2‖A‖²‖B‖²).
pub fn sqrt2_bound_check(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(f64, f64)> {
    let r = r_eval(a, b)?;
    Ok((r, std::f64::consts::SQRT_2 * a.norm_sqr() * b.norm_sqr()))
}

pub fn is_normal(b: &ComplexMatrix) -> bool {
    let bd = b.adjoint();
    let c = &(&bd * b) - &(b * &bd);
    c.norm() <= NORMALITY_TOL * b.norm_sqr()
}

/// ½‖[A,B]‖², which equals r(A,B) whenever B is normal.
pub fn half_commutator_norm_sqr(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    Ok(0.5 * commutator(a, b)?.norm_sqr())
}

/// One bound evaluated against a concrete pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundStatus {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Every bound whose hypotheses the pair satisfies: the general sharp bound,
/// the traceless-A bound when tr A = 0, and the normal-B bound when B is normal.
pub fn applicable_bounds(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    report: &RReport,
) -> Result<Vec<BoundStatus>> {
    let n = a.rows();
    let Some(ratio) = report.ratio else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    let mut push = |name: &str, lower: f64, upper: f64| {
        out.push(BoundStatus {
            name: name.to_string(),
            lower,
            upper,
            holds: ratio >= lower - BOUND_SLACK && ratio <= upper + BOUND_SLACK,
        });
    };
    if n >= 2 {
        let general = best_constants(n, false)?;
        push("general", general.c_minus, general.c_plus);
        if a.trace().norm() <= 1e-12 * a.norm().max(1.0) {
            let tl = best_constants(n, true)?;
            push("traceless_a", tl.c_minus, tl.c_plus);
        }
    }
    if is_normal(b) {
        // r = ½‖[A,B]‖² ≥ 0 and ≤ ‖A‖²‖B‖²
        push("normal_b", 0.0, 1.0);
    }
    Ok(out)
}
