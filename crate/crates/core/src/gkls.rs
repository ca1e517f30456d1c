//! GKLS generators, their superoperator spectra, and audits of the universal
//! constraint max Γ ≤ c(n)·ΣΓ on relaxation rates.
//!
//! Vectorization stacks columns: vec(AXB) = (Bᵀ ⊗ A)·vec(X).

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_general, kron, random, ComplexMatrix, C64, I};
use crate::rfunc::r_eval;

/// Relative threshold for the structural zero, positivity and conjugation closure.
pub const SPECTRAL_TOL: f64 = 1e-9;
/// Relative tolerance for the rate identity and the sum rule.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Trace tolerance for eigenmatrices of nonzero eigenvalues.
pub const EIGENMATRIX_TRACE_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeneratorJson")]
pub struct GklsGenerator {
    n: usize,
    #[serde(rename = "H")]
    h: ComplexMatrix,
    jumps: Vec<ComplexMatrix>,
}

#[derive(Deserialize)]
struct GeneratorJson {
    n: usize,
    #[serde(rename = "H")]
    h: ComplexMatrix,
    #[serde(default)]
    jumps: Vec<ComplexMatrix>,
}

impl TryFrom<GeneratorJson> for GklsGenerator {
    type Error = Error;

    fn try_from(j: GeneratorJson) -> Result<Self> {
        if j.h.rows() != j.n {
            return Err(Error::Shape(format!(
                "H is {}×{} but n = {}",
                j.h.rows(),
                j.h.cols(),
                j.n
            )));
        }
        GklsGenerator::new(j.h, j.jumps)
    }
}

impl GklsGenerator {
    /// Validate H and strip the trace part of each jump operator. The
    /// Hamiltonian is not compensated for the removed traces.
    pub fn new(h: ComplexMatrix, jumps: Vec<ComplexMatrix>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::NotSquare {
                op: "GklsGenerator",
                rows: h.rows(),
                cols: h.cols(),
            });
        }
        let n = h.rows();
        if n < 2 {
            return Err(Error::Contract(format!("generator needs n ≥ 2, got {n}")));
        }
        let anti = (&h - &h.adjoint()).norm();
        if anti >= HERMITIAN_TOL * h.norm().max(1.0) {
            return Err(Error::Contract(format!(
                "H is not Hermitian: ‖H − H†‖ = {anti:e}"
            )));
        }
        let h = (&h + &h.adjoint()).scale_real(0.5);
        let jumps = jumps
            .into_iter()
            .enumerate()
            .map(|(k, l)| {
                if l.shape() != (n, n) {
                    return Err(Error::Shape(format!(
                        "jump {k} is {}×{}, expected {n}×{n}",
                        l.rows(),
                        l.cols()
                    )));
                }
                Ok(random::traceless_part(&l))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, h, jumps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn jumps(&self) -> &[ComplexMatrix] {
        &self.jumps
    }

    /// Σ_k ‖L_k‖².
    pub fn jump_weight(&self) -> f64 {
        self.jumps.iter().map(ComplexMatrix::norm_sqr).sum()
    }
}

/// Amplitude damping: H = 0, L = [[0,1],[0,0]].
pub fn amplitude_damping() -> GklsGenerator {
    GklsGenerator::new(
        ComplexMatrix::zeros(2, 2),
        vec![ComplexMatrix::unit(2, 0, 1)],
    )
    .unwrap()
}

/// Pure dephasing: H = 0, L = σ₃/√2.
pub fn dephasing() -> GklsGenerator {
    let l = ComplexMatrix::diag_real(&[1.0, -1.0]).scale_real(std::f64::consts::FRAC_1_SQRT_2);
    GklsGenerator::new(ComplexMatrix::zeros(2, 2), vec![l]).unwrap()
}

/// L̂ = −i(I ⊗ H − Hᵀ ⊗ I) + Σ_k (L̄_k ⊗ L_k − ½ I ⊗ L_k†L_k − ½ (L_k†L_k)ᵀ ⊗ I).
pub fn build_superoperator(gen: &GklsGenerator) -> ComplexMatrix {
    let id = ComplexMatrix::identity(gen.n);
    let h = &gen.h;
    let mut sup = (&kron(&id, h) - &kron(&h.transpose(), &id)).scale(-I);
    for l in &gen.jumps {
        let ldl = &l.adjoint() * l;
        let jump = &kron(&l.conj(), l)
            - &(&kron(&id, &ldl) + &kron(&ldl.transpose(), &id)).scale_real(0.5);
        sup = &sup + &jump;
    }
    sup
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralResult {
    /// All n² eigenvalues in solver order.
    pub eigenvalues: Vec<C64>,
    /// Unit-Frobenius-norm eigenmatrices, aligned with `eigenvalues`.
    pub eigenmatrices: Vec<ComplexMatrix>,
    pub residuals: Vec<f64>,
    pub defective_flags: Vec<bool>,
    /// Index of the eigenvalue taken as the structural zero.
    pub zero_index: usize,
    /// Γ_α = −Re λ_α over the other n² − 1 eigenvalues, sorted descending.
    pub rates: Vec<f64>,
    /// ‖L̂‖.
    pub norm: f64,
    /// max(1, ‖L̂‖).
    pub scale: f64,
}

impl SpectralResult {
    pub fn sum_rates(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn min_rate(&self) -> f64 {
        self.rates.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Largest distance between a conjugated eigenvalue and its greedy match.
    pub fn conjugation_error(&self) -> f64 {
        let mut unused: Vec<C64> = self.eigenvalues.clone();
        let mut worst = 0.0f64;
        for lam in &self.eigenvalues {
            let target = lam.conj();
            let (k, d) = unused
                .iter()
                .enumerate()
                .map(|(k, mu)| (k, (mu - target).norm()))
                .fold(
                    (0, f64::INFINITY),
                    |best, cur| if cur.1 < best.1 { cur } else { best },
                );
            worst = worst.max(d);
            unused.swap_remove(k);
        }
        worst
    }

    /// Largest |tr u_α| over non-defective eigenmatrices of nonzero eigenvalues.
    pub fn eigenmatrix_trace_error(&self) -> f64 {
        self.nonzero_pairs()
            .map(|k| self.eigenmatrices[k].trace().norm())
            .fold(0.0, f64::max)
    }

    fn nonzero_pairs(&self) -> impl Iterator<Item = usize> + '_ {
        let zero = SPECTRAL_TOL * self.scale;
        (0..self.eigenvalues.len()).filter(move |&k| {
            k != self.zero_index && !self.defective_flags[k] && self.eigenvalues[k].norm() >= zero
        })
    }
}

pub fn spectrum(gen: &GklsGenerator) -> Result<SpectralResult> {
    let sup = build_superoperator(gen);
    let norm = sup.norm();
    let scale = norm.max(1.0);
    let eig = eig_general(&sup)?;
    let (zero_index, zero_mod) =
        eig.values
            .iter()
            .map(|l| l.norm())
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (k, m)| if m < best.1 { (k, m) } else { best },
            );
    if zero_mod >= SPECTRAL_TOL * scale {
        return Err(Error::Structural(format!(
            "no eigenvalue within {:e} of zero (smallest modulus {zero_mod:e})",
            SPECTRAL_TOL * scale
        )));
    }
    let mut rates: Vec<f64> = eig
        .values
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != zero_index)
        .map(|(_, l)| -l.re)
        .collect();
    rates.sort_by(|a, b| b.total_cmp(a));
    let eigenmatrices = eig
        .vectors
        .iter()
        .map(|v| {
            let u = ComplexMatrix::unvec(v, gen.n);
            u.scale_real(1.0 / u.norm())
        })
        .collect();
    Ok(SpectralResult {
        eigenvalues: eig.values,
        eigenmatrices,
        residuals: eig.residuals,
        defective_flags: eig.defective,
        zero_index,
        rates,
        norm,
        scale,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityEntry {
    pub index: usize,
    pub eigenvalue: C64,
    pub rate: f64,
    /// Σ_k r(u_α, L_k).
    pub r_sum: f64,
    pub error: f64,
    pub residual: f64,
    /// Defective pairs are not checked.
    pub skipped: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    pub entries: Vec<IdentityEntry>,
    /// Largest |Γ_α − Σ_k r(u_α, L_k)| / max(1, Γ_α) over checked pairs.
    pub max_error: f64,
    pub skipped: usize,
    pub holds: bool,
}

/// Γ_α = Σ_k r(u_α, L_k) on every eigenpair other than the structural zero.
pub fn relaxation_identity_check(gen: &GklsGenerator) -> Result<IdentityReport> {
    Ok(identity_from_spectrum(gen, &spectrum(gen)?))
}

pub fn identity_from_spectrum(gen: &GklsGenerator, spectral: &SpectralResult) -> IdentityReport {
    let mut entries = Vec::with_capacity(spectral.eigenvalues.len().saturating_sub(1));
    for (k, &lambda) in spectral.eigenvalues.iter().enumerate() {
        if k == spectral.zero_index {
            continue;
        }
        let rate = -lambda.re;
        let skipped = spectral.defective_flags[k];
        let u = &spectral.eigenmatrices[k];
        let r_sum = if skipped {
            f64::NAN
        } else {
            gen.jumps
                .iter()
                .map(|l| r_eval(u, l).unwrap_or(f64::NAN))
                .sum()
        };
        let error = if skipped {
            0.0
        } else {
            (rate - r_sum).abs() / rate.abs().max(1.0)
        };
        entries.push(IdentityEntry {
            index: k,
            eigenvalue: lambda,
            rate,
            r_sum,
            error,
            residual: spectral.residuals[k],
            skipped,
        });
    }
    let checked = entries.iter().filter(|e| !e.skipped);
    let max_error = checked.clone().map(|e| e.error).fold(0.0, f64::max);
    let holds = checked.clone().all(|e| e.error < IDENTITY_TOL);
    let skipped = entries.iter().filter(|e| e.skipped).count();
    IdentityReport {
        entries,
        max_error,
        skipped,
        holds,
    }
}

/// (Σ Γ_α, n·Σ_k ‖L_k‖²).
pub fn sum_rule_check(gen: &GklsGenerator) -> Result<(f64, f64)> {
    Ok(sum_rule_from_spectrum(gen, &spectrum(gen)?))
}

pub fn sum_rule_from_spectrum(gen: &GklsGenerator, spectral: &SpectralResult) -> (f64, f64) {
    (spectral.sum_rates(), gen.n as f64 * gen.jump_weight())
}

pub fn sum_rule_holds(lhs: f64, rhs: f64) -> bool {
    (lhs - rhs).abs() < IDENTITY_TOL * rhs.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    /// (1 + √(2(1 − 1/n)))/(2n).
    #[serde(alias = "theorem5_traceless")]
    Traceless,
    /// (1 + √2)/(2n).
    #[serde(alias = "theorem5_general")]
    General,
    /// √2/n.
    Sqrt2Legacy,
}

impl ConstantMode {
    pub const ALL: [ConstantMode; 3] = [
        ConstantMode::Traceless,
        ConstantMode::General,
        ConstantMode::Sqrt2Legacy,
    ];

    pub fn constant(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            ConstantMode::Traceless => (1.0 + (2.0 * (1.0 - 1.0 / nf)).sqrt()) / (2.0 * nf),
            ConstantMode::General => (1.0 + std::f64::consts::SQRT_2) / (2.0 * nf),
            ConstantMode::Sqrt2Legacy => std::f64::consts::SQRT_2 / nf,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstantMode::Traceless => "traceless",
            ConstantMode::General => "general",
            ConstantMode::Sqrt2Legacy => "sqrt2_legacy",
        }
    }
}

impl fmt::Display for ConstantMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstantMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traceless" | "theorem5_traceless" => Ok(ConstantMode::Traceless),
            "general" | "theorem5_general" => Ok(ConstantMode::General),
            "sqrt2_legacy" => Ok(ConstantMode::Sqrt2Legacy),
            other => Err(Error::Contract(format!(
                "unknown constant mode '{other}' (expected traceless, general or sqrt2_legacy)"
            ))),
        }
    }
}

/// Qubit relaxation times when two of the three rates coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitTimes {
    /// 1/Γ_L for the non-degenerate rate.
    pub t_longitudinal: f64,
    /// 1/Γ_T for the degenerate pair.
    pub t_transverse: f64,
    /// T_T ≤ 2·T_L, i.e. Γ_L ≤ 2·Γ_T.
    pub consistent: bool,
    /// Γ_L = 2·Γ_T within tolerance.
    pub saturated: bool,
}

/// Detect a degenerate pair among three descending qubit rates.
pub fn qubit_times(rates: &[f64], scale: f64) -> Option<QubitTimes> {
    if rates.len() != 3 {
        return None;
    }
    let tol = SPECTRAL_TOL * scale.max(1.0);
    let (gl, gt) = if (rates[1] - rates[2]).abs() < tol {
        (rates[0], rates[1])
    } else if (rates[0] - rates[1]).abs() < tol {
        (rates[2], rates[0])
    } else {
        return None;
    };
    Some(QubitTimes {
        t_longitudinal: 1.0 / gl,
        t_transverse: 1.0 / gt,
        consistent: gl <= 2.0 * gt + tol,
        saturated: (gl - 2.0 * gt).abs() < tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub id: String,
    pub n: usize,
    pub num_jumps: usize,
    pub mode: ConstantMode,
    pub rates: Vec<f64>,
    pub sum_rates: f64,
    pub bound_constant: f64,
    pub max_rate: f64,
    /// bound·ΣΓ − max Γ.
    pub margin: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_times: Option<QubitTimes>,
}

pub fn constraint_audit(gen: &GklsGenerator, mode: ConstantMode) -> Result<AuditRecord> {
    Ok(audit_from_spectrum("generator", gen, &spectrum(gen)?, mode))
}

pub fn audit_from_spectrum(
    id: &str,
    gen: &GklsGenerator,
    spectral: &SpectralResult,
    mode: ConstantMode,
) -> AuditRecord {
    let n = gen.n;
    let sum_rates = spectral.sum_rates();
    let bound_constant = mode.constant(n);
    let max_rate = spectral.rates.first().copied().unwrap_or(0.0);
    let margin = bound_constant * sum_rates - max_rate;
    AuditRecord {
        id: id.to_string(),
        n,
        num_jumps: gen.jumps.len(),
        mode,
        rates: spectral.rates.clone(),
        sum_rates,
        bound_constant,
        max_rate,
        margin,
        pass: margin >= -SPECTRAL_TOL * sum_rates,
        qubit_times: if n == 2 {
            qubit_times(&spectral.rates, spectral.scale)
        } else {
            None
        },
    }
}

/// H = (G + G†)/2 and unit-norm traceless Ginibre jumps, all from `seed`.
pub fn random_generator(n: usize, num_jumps: usize, seed: u64) -> Result<GklsGenerator> {
    let mut rng = random::seeded(seed);
    let g = random::ginibre(n, &mut rng);
    let h = (&g + &g.adjoint()).scale_real(0.5);
    let jumps = (0..num_jumps)
        .map(|_| {
            let l = random::traceless_part(&random::ginibre(n, &mut rng));
            l.scale_real(1.0 / l.norm())
        })
        .collect();
    GklsGenerator::new(h, jumps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ensemble {
    pub n: usize,
    pub num_jumps: usize,
    pub count: usize,
    pub seed: u64,
}

impl Ensemble {
    /// Generator i uses seed `seed ⊕ i`.
    pub fn generator(&self, i: usize) -> Result<GklsGenerator> {
        random_generator(self.n, self.num_jumps, self.seed ^ i as u64)
    }

    pub fn id(&self, i: usize) -> String {
        format!("n{}-j{}-{}", self.n, self.num_jumps, i)
    }
}

/// Every consistency check on one generator, from a single spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorCheck {
    pub audits: Vec<AuditRecord>,
    pub sum_rule: (f64, f64),
    pub identity_max_error: f64,
    pub identity_skipped: usize,
    pub min_rate: f64,
    pub conjugation_error: f64,
    pub eigenmatrix_trace_error: f64,
    pub max_residual: f64,
    /// ‖L̂‖.
    pub norm: f64,
    pub scale: f64,
}

pub fn check_generator(
    id: &str,
    gen: &GklsGenerator,
    modes: &[ConstantMode],
) -> Result<GeneratorCheck> {
    let spectral = spectrum(gen)?;
    let identity = identity_from_spectrum(gen, &spectral);
    Ok(GeneratorCheck {
        audits: modes
            .iter()
            .map(|&m| audit_from_spectrum(id, gen, &spectral, m))
            .collect(),
        sum_rule: sum_rule_from_spectrum(gen, &spectral),
        identity_max_error: identity.max_error,
        identity_skipped: identity.skipped,
        min_rate: spectral.min_rate(),
        conjugation_error: spectral.conjugation_error(),
        eigenmatrix_trace_error: spectral.eigenmatrix_trace_error(),
        max_residual: spectral.residuals.iter().cloned().fold(0.0, f64::max),
        norm: spectral.norm,
        scale: spectral.scale,
    })
}

/// Checks for every generator of the ensemble, in index order.
pub fn ensemble_checks(ens: &Ensemble, modes: &[ConstantMode]) -> Result<Vec<GeneratorCheck>> {
    (0..ens.count)
        .into_par_iter()
        .map(|i| check_generator(&ens.id(i), &ens.generator(i)?, modes))
        .collect()
}

/// Audit records for every generator of the ensemble, in index order.
pub fn ensemble_audit(ens: &Ensemble, mode: ConstantMode) -> Result<Vec<AuditRecord>> {
    (0..ens.count)
        .into_par_iter()
        .map(|i| {
            let gen = ens.generator(i)?;
            let s = spectrum(&gen)?;
            Ok(audit_from_spectrum(&ens.id(i), &gen, &s, mode))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n: usize,
    pub num_jumps: usize,
    pub count: usize,
    pub min_margin: f64,
    pub failures: usize,
    /// Empirical max of (max Γ)/(ΣΓ).
    pub max_rate_fraction: f64,
}

pub fn summarize(ens: &Ensemble, records: &[AuditRecord]) -> EnsembleSummary {
    EnsembleSummary {
        n: ens.n,
        num_jumps: ens.num_jumps,
        count: records.len(),
        min_margin: records
            .iter()
            .map(|r| r.margin)
            .fold(f64::INFINITY, f64::min),
        failures: records.iter().filter(|r| !r.pass).count(),
        max_rate_fraction: records
            .iter()
            .filter(|r| r.sum_rates > 0.0)
            .map(|r| r.max_rate / r.sum_rates)
            .fold(0.0, f64::max),
    }
}

/// CSV with the columns n, num_jumps, count, min_margin, failures.
pub fn write_summary_csv<W: Write>(summaries: &[EnsembleSummary], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "num_jumps", "count", "min_margin", "failures"])?;
    for s in summaries {
        w.write_record([
            s.n.to_string(),
            s.num_jumps.to_string(),
            s.count.to_string(),
            format!("{:.17e}", s.min_margin),
            s.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per line.
pub fn write_json_lines<W: Write, T: Serialize>(items: &[T], mut out: W) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, ZERO};

    fn sorted_close(got: &[f64], want: &[f64], tol: f64) -> bool {
        got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() < tol)
    }

    #[test]
    fn empty_generator_is_zero() {
        let gen = GklsGenerator::new(ComplexMatrix::zeros(2, 2), vec![]).unwrap();
        assert!(build_superoperator(&gen).is_zero());
    }

    #[test]
    fn unitary_spectrum() {
        let [_, _, s3] = pauli();
        let gen = GklsGenerator::new(s3.scale_real(0.5), vec![]).unwrap();
        let s = spectrum(&gen).unwrap();
        let mut im: Vec<f64> = s.eigenvalues.iter().map(|l| l.im).collect();
        im.sort_by(f64::total_cmp);
        assert!(sorted_close(&im, &[-1.0, 0.0, 0.0, 1.0], 1e-12));
        assert!(s.eigenvalues.iter().all(|l| l.re.abs() < 1e-12));
        assert!(s.rates.iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn amplitude_damping_spectrum() {
        let gen = amplitude_damping();
        let s = spectrum(&gen).unwrap();
        let mut re: Vec<f64> = s.eigenvalues.iter().map(|l| l.re).collect();
        re.sort_by(f64::total_cmp);
        assert!(sorted_close(&re, &[-1.0, -0.5, -0.5, 0.0], 1e-12));
        assert!(sorted_close(&s.rates, &[1.0, 0.5, 0.5], 1e-12));
        assert!(s.eigenmatrix_trace_error() < EIGENMATRIX_TRACE_TOL);
    }

    #[test]
    fn dephasing_rates() {
        let s = spectrum(&dephasing()).unwrap();
        assert!(sorted_close(&s.rates, &[1.0, 1.0, 0.0], 1e-12));
    }

    #[test]
    fn trace_preservation() {
        for seed in 0..5 {
            let gen = random_generator(3, 2, seed).unwrap();
            let sup = build_superoperator(&gen);
            let id = ComplexMatrix::identity(3).vec();
            let left = sup.adjoint().matvec(&id);
            let err = left.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12 * sup.norm());
        }
    }

    #[test]
    fn superoperator_acts_as_generator() {
        let gen = random_generator(3, 2, 11).unwrap();
        let sup = build_superoperator(&gen);
        let mut rng = random::seeded(12);
        let rho = random::ginibre(3, &mut rng);
        let h = gen.hamiltonian();
        let mut want = (&(h * &rho) - &(&rho * h)).scale(-I);
        for l in gen.jumps() {
            let ld = l.adjoint();
            let ldl = &ld * l;
            want = &want
                + &(&(&(l * &rho) * &ld) - &(&(&ldl * &rho) + &(&rho * &ldl)).scale_real(0.5));
        }
        let got = ComplexMatrix::unvec(&sup.matvec(&rho.vec()), 3);
        assert!((&got - &want).norm() < 1e-12 * want.norm().max(1.0));
    }

    #[test]
    fn identity_examples() {
        let rep = relaxation_identity_check(&amplitude_damping()).unwrap();
        assert_eq!(rep.entries.len(), 3);
        assert!(rep.holds && rep.skipped == 0, "{rep:?}");

        let rep = relaxation_identity_check(&random_generator(3, 2, 5).unwrap()).unwrap();
        assert!(rep.holds, "{}", rep.max_error);

        let [s1, _, _] = pauli();
        let gen = GklsGenerator::new(s1, vec![]).unwrap();
        let rep = relaxation_identity_check(&gen).unwrap();
        assert!(rep
            .entries
            .iter()
            .all(|e| e.rate.abs() < 1e-12 && e.r_sum.abs() < 1e-12));
    }

    #[test]
    fn sum_rule_examples() {
        let (l, r) = sum_rule_check(&amplitude_damping()).unwrap();
        assert!((l - 2.0).abs() < 1e-12 && (r - 2.0).abs() < 1e-15);
        let (l, r) = sum_rule_check(&dephasing()).unwrap();
        assert!((l - 2.0).abs() < 1e-12 && (r - 2.0).abs() < 1e-12);
        let gen = GklsGenerator::new(ComplexMatrix::zeros(3, 3), vec![]).unwrap();
        assert_eq!(sum_rule_check(&gen).unwrap().1, 0.0);
        let (l, r) = sum_rule_check(&random_generator(2, 1, 7).unwrap()).unwrap();
        assert!((r - 2.0).abs() < 1e-12 && sum_rule_holds(l, r));
    }

    #[test]
    fn saturated_audits() {
        for gen in [amplitude_damping(), dephasing()] {
            let rec = constraint_audit(&gen, ConstantMode::Traceless).unwrap();
            assert!((rec.bound_constant - 0.5).abs() < 1e-15);
            assert!((rec.max_rate - 1.0).abs() < 1e-12);
            assert!(rec.margin.abs() < 1e-9 && rec.pass);
        }
        let rec = constraint_audit(&amplitude_damping(), ConstantMode::Traceless).unwrap();
        let t = rec.qubit_times.unwrap();
        assert!((t.t_longitudinal - 1.0).abs() < 1e-12 && (t.t_transverse - 2.0).abs() < 1e-12);
        assert!(t.consistent && t.saturated);
    }

    #[test]
    fn mode_ordering() {
        for n in 2..=10 {
            let c: Vec<f64> = ConstantMode::ALL.iter().map(|m| m.constant(n)).collect();
            assert!(c[0] < c[1] && c[1] < c[2], "n={n}: {c:?}");
        }
        let gen = random_generator(3, 2, 9).unwrap();
        let s = spectrum(&gen).unwrap();
        let t = audit_from_spectrum("x", &gen, &s, ConstantMode::Traceless);
        let l = audit_from_spectrum("x", &gen, &s, ConstantMode::Sqrt2Legacy);
        assert!(l.margin >= t.margin);
    }

    #[test]
    fn mode_names() {
        assert_eq!(
            "theorem5_traceless".parse::<ConstantMode>().unwrap(),
            ConstantMode::Traceless
        );
        assert_eq!(
            "general".parse::<ConstantMode>().unwrap(),
            ConstantMode::General
        );
        assert!("bogus".parse::<ConstantMode>().is_err());
        let m: ConstantMode = serde_json::from_str("\"theorem5_general\"").unwrap();
        assert_eq!(m, ConstantMode::General);
        assert_eq!(
            serde_json::to_string(&ConstantMode::Sqrt2Legacy).unwrap(),
            "\"sqrt2_legacy\""
        );
    }

    #[test]
    fn random_generator_properties() {
        let gen = random_generator(3, 0, 1).unwrap();
        assert!(spectrum(&gen).unwrap().rates.iter().all(|g| g.abs() < 1e-9));
        let a = random_generator(3, 2, 42).unwrap();
        let b = random_generator(3, 2, 42).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a
            .jumps()
            .iter()
            .all(|l| (l.norm() - 1.0).abs() < 1e-12 && l.trace().norm() < 1e-12));
    }

    #[test]
    fn spectral_invariants_on_random_generators() {
        for n in 2..=4 {
            for seed in 0..20 {
                let gen = random_generator(n, 1 + (seed as usize % 3), seed).unwrap();
                let c = check_generator("t", &gen, &ConstantMode::ALL).unwrap();
                assert!(c.min_rate >= -SPECTRAL_TOL * c.scale);
                assert!(c.conjugation_error < SPECTRAL_TOL * c.scale);
                assert!(c.eigenmatrix_trace_error < EIGENMATRIX_TRACE_TOL);
                assert!(c.identity_max_error < IDENTITY_TOL);
                assert!(sum_rule_holds(c.sum_rule.0, c.sum_rule.1));
                assert!(c.audits.iter().all(|a| a.pass));
            }
        }
    }

    #[test]
    fn generator_validation_and_json() {
        let bad_h = ComplexMatrix::unit(2, 0, 1);
        assert!(matches!(
            GklsGenerator::new(bad_h, vec![]),
            Err(Error::Contract(_))
        ));
        let r = GklsGenerator::new(ComplexMatrix::zeros(2, 2), vec![ComplexMatrix::zeros(3, 3)]);
        assert!(matches!(r, Err(Error::Shape(_))));

        // traces are stripped on construction
        let l = ComplexMatrix::diag(&[C64::new(2.0, 0.0), ZERO]);
        let gen = GklsGenerator::new(ComplexMatrix::zeros(2, 2), vec![l]).unwrap();
        assert!(gen.jumps()[0].trace().norm() < 1e-15);

        let json = serde_json::to_string(&amplitude_damping()).unwrap();
        let back: GklsGenerator = serde_json::from_str(&json).unwrap();
        assert_eq!(back, amplitude_damping());
        let bad =
            r#"{"n":3,"H":{"rows":2,"cols":2,"re":[[0,0],[0,0]],"im":[[0,0],[0,0]]},"jumps":[]}"#;
        assert!(serde_json::from_str::<GklsGenerator>(bad).is_err());
    }

    #[test]
    fn summary_csv_columns() {
        let ens = Ensemble {
            n: 2,
            num_jumps: 1,
            count: 8,
            seed: 3,
        };
        let recs = ensemble_audit(&ens, ConstantMode::Traceless).unwrap();
        assert_eq!(recs.len(), 8);
        assert_eq!(recs[3].id, "n2-j1-3");
        let s = summarize(&ens, &recs);
        assert_eq!(s.failures, 0);
        let mut buf = Vec::new();
        write_summary_csv(&[s], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,num_jumps,count,min_margin,failures\n2,1,8,"));
    }
}
