//! Numerical extremization of r(A,B) over unit-norm pairs.
//!
//! r is a Hermitian quadratic form in each argument separately:
//!
//! ```text
//! r(A,B) = vec(B)†·M_A·vec(B) = vec(A)†·N_B·vec(A)
//! ```
//!
//! (column-stacking vec). Fixing one argument, the optimum of the other over
//! the unit sphere is an extreme eigenvector, so alternating the two exact
//! updates is monotone and needs no step size. The traceless constraint on A
//! is handled by compressing N_B onto an orthonormal basis of the traceless
//! subspace.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, kron, random, ComplexMatrix, C64, ONE};
use crate::rfunc::r_eval;

pub const DEFAULT_SEED: u64 = 0xC0FFEE;
pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_MAX_SWEEPS: usize = 500;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-12;
/// Largest level count the extremizer accepts.
pub const MAX_N: usize = 8;

/// M_A with vec(B)†·M_A·vec(B) = r(A,B):
/// ½({A,A†}ᵀ ⊗ I) − ½(Aᵀ ⊗ A† + Ā ⊗ A).
pub fn quad_form_in_b(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let ad = a.adjoint();
    let anti = &(a * &ad) + &(&ad * a);
    let id = ComplexMatrix::identity(n);
    let diag = kron(&anti.transpose(), &id);
    let cross = &kron(&a.transpose(), &ad) + &kron(&a.conj(), a);
    hermitize(&(&diag - &cross).scale_real(0.5))
}

/// N_B with vec(A)†·N_B·vec(A) = r(A,B):
/// ½((B†B)ᵀ ⊗ I + I ⊗ B†B − B̄ ⊗ B − Bᵀ ⊗ B†).
///
/// With `traceless`, N_B is compressed to Q†·N_B·Q where the columns of Q
/// ([`traceless_basis`]) span the traceless matrices.
pub fn quad_form_in_a(b: &ComplexMatrix, traceless: bool) -> ComplexMatrix {
    let n = b.rows();
    let bd = b.adjoint();
    let bdb = &bd * b;
    let id = ComplexMatrix::identity(n);
    let diag = &kron(&bdb.transpose(), &id) + &kron(&id, &bdb);
    let cross = &kron(&b.conj(), b) + &kron(&b.transpose(), &bd);
    let full = hermitize(&(&diag - &cross).scale_real(0.5));
    if traceless {
        let q = traceless_basis(n);
        hermitize(&(&(&q.adjoint() * &full) * &q))
    } else {
        full
    }
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + &m.adjoint()).scale_real(0.5)
}

/// n² × (n² − 1) matrix whose orthonormal columns are vec'd traceless
/// matrices: off-diagonal units E_ij, then the diagonal family
/// (Σ_{l<k} E_ll − k·E_kk)/√(k(k+1)).
pub fn traceless_basis(n: usize) -> ComplexMatrix {
    let dim = n * n;
    let mut q = ComplexMatrix::zeros(dim, dim - 1);
    let mut col = 0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                q[(j * n + i, col)] = ONE;
                col += 1;
            }
        }
    }
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for l in 0..k {
            q[(l * n + l, col)] = C64::new(1.0 / norm, 0.0);
        }
        q[(k * n + k, col)] = C64::new(-(k as f64) / norm, 0.0);
        col += 1;
    }
    debug_assert_eq!(col, dim - 1);
    q
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Maximize,
    Minimize,
}

impl Mode {
    fn better(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Mode::Maximize => candidate > incumbent,
            Mode::Minimize => candidate < incumbent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremizeTask {
    pub n: usize,
    pub mode: Mode,
    pub traceless_a: bool,
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    pub convergence_tol: f64,
}

impl ExtremizeTask {
    /// Task with the default restarts, seed, sweep limit and tolerance.
    pub fn new(n: usize, mode: Mode, traceless_a: bool) -> Self {
        Self {
            n,
            mode,
            traceless_a,
            restarts: DEFAULT_RESTARTS,
            seed: DEFAULT_SEED,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_N).contains(&self.n) {
            return Err(Error::Contract(format!(
                "n must lie in [2, {MAX_N}], got {}",
                self.n
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Contract("restarts must be ≥ 1".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::Contract("max_sweeps must be ≥ 1".into()));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol <= 0.0 {
            return Err(Error::Contract("convergence_tol must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremizeResult {
    pub ratio: f64,
    #[serde(rename = "A")]
    pub a: ComplexMatrix,
    #[serde(rename = "B")]
    pub b: ComplexMatrix,
    pub sweeps_used: usize,
    pub restart_index: usize,
    /// Ratio after each sweep.
    pub trajectory: Vec<f64>,
}

/// Best extremum over all restarts; ties go to the lowest restart index.
pub fn alternating_extremize(task: &ExtremizeTask) -> Result<ExtremizeResult> {
    task.validate()?;
    let runs: Vec<Result<ExtremizeResult>> = (0..task.restarts)
        .into_par_iter()
        .map(|k| {
            run_restart(task, k).map_err(|e| Error::Restart {
                restart: k,
                source: Box::new(e),
            })
        })
        .collect();
    let mut best: Option<ExtremizeResult> = None;
    for run in runs {
        let run = run?;
        match &best {
            Some(b) if !task.mode.better(run.ratio, b.ratio) => {}
            _ => best = Some(run),
        }
    }
    Ok(best.expect("at least one restart"))
}

fn extreme(values: &[f64], mode: Mode) -> usize {
    match mode {
        Mode::Maximize => values.len() - 1,
        Mode::Minimize => 0,
    }
}

/// One restart with its own RNG stream `seed ⊕ restart`.
pub fn run_restart(task: &ExtremizeTask, restart: usize) -> Result<ExtremizeResult> {
    let n = task.n;
    let mut rng = random::seeded(task.seed ^ restart as u64);
    let mut a = random::unit_ginibre(n, &mut rng);
    if task.traceless_a {
        let t = random::traceless_part(&a);
        a = t.scale_real(1.0 / t.norm());
    }
    let mut b = random::unit_ginibre(n, &mut rng);
    let basis = task.traceless_a.then(|| traceless_basis(n));

    let mut prev = r_eval(&a, &b)?;
    let mut trajectory = Vec::new();
    let mut sweeps_used = 0;
    for _ in 0..task.max_sweeps {
        sweeps_used += 1;

        let eb = eig_hermitian(&quad_form_in_b(&a))?;
        b = ComplexMatrix::unvec(&eb.vectors[extreme(&eb.values, task.mode)], n);

        let ea = eig_hermitian(&quad_form_in_a(&b, task.traceless_a))?;
        let k = extreme(&ea.values, task.mode);
        let y = &ea.vectors[k];
        a = match &basis {
            Some(q) => ComplexMatrix::unvec(&q.matvec(y), n),
            None => ComplexMatrix::unvec(y, n),
        };
        let ratio = ea.values[k];
        trajectory.push(ratio);
        let done = (ratio - prev).abs() < task.convergence_tol;
        prev = ratio;
        if done {
            break;
        }
    }
    // unit vectors from the eigensolver; renormalize against rounding
    let a = a.scale_real(1.0 / a.norm());
    let b = b.scale_real(1.0 / b.norm());
    let ratio = r_eval(&a, &b)?;
    Ok(ExtremizeResult {
        ratio,
        a,
        b,
        sweeps_used,
        restart_index: restart,
        trajectory,
    })
}

/// Write the trajectory as CSV with columns `sweep,ratio` (sweeps from 1).
pub fn write_trajectory_csv<W: Write>(result: &ExtremizeResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sweep", "ratio"])?;
    for (i, r) in result.trajectory.iter().enumerate() {
        w.write_record([(i + 1).to_string(), format!("{r:.17e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Gradients of r with respect to the 2n² real coordinates (Re, Im of the
/// column-stacked entries) of A and of B, from the quadratic forms:
/// ∂/∂Re z = 2·Re(Mz), ∂/∂Im z = 2·Im(Mz).
pub fn gradients(a: &ComplexMatrix, b: &ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let grad = |m: &ComplexMatrix, z: &[C64]| -> Vec<f64> {
        let mz = m.matvec(z);
        mz.iter()
            .map(|w| 2.0 * w.re)
            .chain(mz.iter().map(|w| 2.0 * w.im))
            .collect()
    };
    (
        grad(&quad_form_in_a(b, false), &a.vec()),
        grad(&quad_form_in_b(a), &b.vec()),
    )
}

/// Max error between the analytic gradients and central finite differences
/// of [`r_eval`] over all 4n² real coordinates, relative to max(1, ‖g‖_∞).
pub fn finite_diff_check(a: &ComplexMatrix, b: &ComplexMatrix, step: f64) -> Result<f64> {
    if !(1e-8..=1e-4).contains(&step) {
        return Err(Error::Contract(format!(
            "finite-difference step {step:e} outside [1e-8, 1e-4]"
        )));
    }
    r_eval(a, b)?;
    let n = a.rows();
    let (ga, gb) = gradients(a, b);

    let numeric =
        |m: &ComplexMatrix, eval: &dyn Fn(&ComplexMatrix) -> Result<f64>| -> Result<Vec<f64>> {
            let z = m.vec();
            let nn = z.len();
            let mut out = vec![0.0; 2 * nn];
            for (part, unit) in [(0usize, ONE), (1, C64::new(0.0, 1.0))] {
                for k in 0..nn {
                    let mut plus = z.clone();
                    let mut minus = z.clone();
                    plus[k] += unit * step;
                    minus[k] -= unit * step;
                    let fp = eval(&ComplexMatrix::unvec(&plus, n))?;
                    let fm = eval(&ComplexMatrix::unvec(&minus, n))?;
                    out[part * nn + k] = (fp - fm) / (2.0 * step);
                }
            }
            Ok(out)
        };
    let fa = numeric(a, &|x| r_eval(x, b))?;
    let fb = numeric(b, &|y| r_eval(a, y))?;

    let scale = ga.iter().chain(&gb).fold(1.0f64, |m, g| m.max(g.abs()));
    let err = ga
        .iter()
        .zip(&fa)
        .chain(gb.iter().zip(&fb))
        .map(|(g, f)| (g - f).abs())
        .fold(0.0, f64::max);
    Ok(err / scale)
}
