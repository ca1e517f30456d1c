//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; the process exits nonzero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rfunc::gkls::{self, ConstantMode, Ensemble, GeneratorCheck, IDENTITY_TOL, SPECTRAL_TOL};
use rfunc::linalg::{eig_general, eig_hermitian, random, ComplexMatrix};
use rfunc::optimizer::{self, alternating_extremize, ExtremizeTask, Mode};
use rfunc::rfunc::{
    bw_check, cartesian_additivity_check, half_commutator_norm_sqr, r_eval, r_report, r_self,
    scaling_check, unitary_invariance_check,
};
use rfunc::witness::{self, best_constants, Sign, WitnessKind};

const PAIRS_PER_N: usize = 10_000;
const GENERATORS_PER_CONFIG: usize = 10_000;
const SEED: u64 = 0xC0FFEE;

/// Outcome of one criterion: a short summary plus any failed checks.
struct Outcome {
    summary: String,
    failures: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            summary: String::new(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn pair_seed(n: usize, i: usize) -> u64 {
    SEED ^ ((n as u64) << 40) ^ i as u64
}

/// Worst-case statistics over one random-pair ensemble.
#[derive(Default, Clone, Copy)]
struct PairStats {
    spread: f64,
    scaling: f64,
    unitary: f64,
    cartesian: f64,
    general: f64,
    traceless: f64,
    normal_upper: f64,
    normal_commutator: f64,
    self_bound: f64,
    commutator: f64,
}

impl PairStats {
    fn merge(self, o: Self) -> Self {
        Self {
            spread: self.spread.max(o.spread),
            scaling: self.scaling.max(o.scaling),
            unitary: self.unitary.max(o.unitary),
            cartesian: self.cartesian.max(o.cartesian),
            general: self.general.max(o.general),
            traceless: self.traceless.max(o.traceless),
            normal_upper: self.normal_upper.max(o.normal_upper),
            normal_commutator: self.normal_commutator.max(o.normal_commutator),
            self_bound: self.self_bound.max(o.self_bound),
            commutator: self.commutator.max(o.commutator),
        }
    }
}

/// Violations are ≤ 0 when a check holds; NaN is mapped to +∞.
fn v(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x
    }
}

fn pair_stats(n: usize, i: usize) -> PairStats {
    let mut rng = random::seeded(pair_seed(n, i));
    let a = random::ginibre(n, &mut rng);
    let b = random::ginibre(n, &mut rng);
    let s = a.norm_sqr() * b.norm_sqr();
    let scale = s.max(1.0);

    let rep = r_report(&a, &b).unwrap();
    let alpha = random::complex_normal(&mut rng);
    let beta = random::complex_normal(&mut rng);
    let (l, r) = scaling_check(&a, &b, alpha, beta).unwrap();
    let scaled = (alpha.norm_sqr() * beta.norm_sqr() * s).max(1.0);
    let u = random::unitary(n, &mut rng);
    let (ul, ur) = unitary_invariance_check(&a, &b, &u).unwrap();
    let (c, cr, ci) = cartesian_additivity_check(&a, &b).unwrap();

    let general = best_constants(n, false).unwrap();
    let ratio = rep.value / s;

    let a0 = random::traceless_part(&a);
    let tl = best_constants(n, true).unwrap();
    let ratio0 = r_eval(&a0, &b).unwrap() / (a0.norm_sqr() * b.norm_sqr());

    let nb = random::normal(n, &mut rng);
    let sn = a.norm_sqr() * nb.norm_sqr();
    let rn = r_eval(&a, &nb).unwrap();
    let half = half_commutator_norm_sqr(&a, &nb).unwrap();

    let rs = r_self(&a).unwrap();
    let a4 = a.norm_sqr() * a.norm_sqr();
    let (comm, comm_rhs) = bw_check(&a, &b).unwrap();

    PairStats {
        spread: v(rep.max_spread / scale),
        scaling: v((l - r).abs() / scaled),
        unitary: v((ul - ur).abs() / scale),
        cartesian: v((c - cr - ci).abs() / scale),
        general: v((general.c_minus - ratio).max(ratio - general.c_plus)),
        traceless: v((tl.c_minus - ratio0).max(ratio0 - tl.c_plus)),
        normal_upper: v((-rn / sn).max(rn / sn - 1.0)),
        normal_commutator: v((rn - half).abs() / sn.max(1.0)),
        self_bound: v((-rs / a4).max(rs / a4 - 0.5)),
        commutator: v((comm - comm_rhs) / comm_rhs),
    }
}

fn pair_ensemble(n: usize) -> PairStats {
    let neg = f64::NEG_INFINITY;
    let init = PairStats {
        spread: neg,
        scaling: neg,
        unitary: neg,
        cartesian: neg,
        general: neg,
        traceless: neg,
        normal_upper: neg,
        normal_commutator: neg,
        self_bound: neg,
        commutator: neg,
    };
    (0..PAIRS_PER_N)
        .into_par_iter()
        .map(|i| pair_stats(n, i))
        .reduce(|| init, PairStats::merge)
}

fn criterion_identities(stats: &[(usize, PairStats)], elapsed: Duration) -> Outcome {
    let mut o = Outcome::new();
    for (n, s) in stats {
        o.check(s.spread < 1e-10, || {
            format!("n={n}: alternate-form spread {:e}", s.spread)
        });
        o.check(s.scaling < 1e-11, || {
            format!("n={n}: scaling error {:e}", s.scaling)
        });
        o.check(s.unitary < 1e-11, || {
            format!("n={n}: unitary invariance error {:e}", s.unitary)
        });
        o.check(s.cartesian < 1e-11, || {
            format!("n={n}: Cartesian additivity error {:e}", s.cartesian)
        });
    }
    o.check(elapsed < Duration::from_secs(60), || {
        format!("runtime {elapsed:?} ≥ 60 s")
    });
    let worst = stats.iter().map(|(_, s)| s.spread).fold(0.0, f64::max);
    o.summary = format!(
        "{} pairs per n; max spread {worst:.2e}; {elapsed:.2?}",
        PAIRS_PER_N
    );
    o
}

fn criterion_bounds(stats: &[(usize, PairStats)]) -> Outcome {
    let mut o = Outcome::new();
    for (n, s) in stats {
        o.check(s.general <= 1e-10, || {
            format!("n={n}: general bound violated by {:e}", s.general)
        });
        o.check(s.traceless <= 1e-10, || {
            format!("n={n}: traceless bound violated by {:e}", s.traceless)
        });
        o.check(s.normal_upper <= 1e-10, || {
            format!("n={n}: normal-B bound violated by {:e}", s.normal_upper)
        });
        o.check(s.normal_commutator < 1e-10, || {
            format!(
                "n={n}: normal-B commutator identity error {:e}",
                s.normal_commutator
            )
        });
        o.check(s.self_bound <= 1e-10, || {
            format!("n={n}: r(A,A) range violated by {:e}", s.self_bound)
        });
        o.check(s.commutator <= 1e-12, || {
            format!("n={n}: commutator bound violated by {:e}", s.commutator)
        });
    }
    o.summary = "general, traceless, normal-B, self and commutator bounds on all ensembles".into();
    o
}

fn criterion_witnesses() -> Outcome {
    let mut o = Outcome::new();
    let mut count = 0;
    let mut worst = 0.0f64;
    let mut record = |o: &mut Outcome, label: String, got: f64, want: f64| {
        count += 1;
        worst = worst.max((got - want).abs());
        o.check((got - want).abs() < 1e-12, || {
            format!("{label}: {got} vs {want}")
        });
    };
    for n in 2..=8 {
        for sign in [Sign::Upper, Sign::Lower] {
            let (a, b) = witness::witness_general(n, sign).unwrap();
            let ratio = r_eval(&a, &b).unwrap() / (a.norm_sqr() * b.norm_sqr());
            record(
                &mut o,
                format!("general n={n} {sign:?}"),
                ratio,
                best_constants(n, false).unwrap().get(sign),
            );

            let (a, b) = witness::witness_traceless(n, sign).unwrap();
            let ratio = r_eval(&a, &b).unwrap() / (a.norm_sqr() * b.norm_sqr());
            record(
                &mut o,
                format!("traceless n={n} {sign:?}"),
                ratio,
                best_constants(n, true).unwrap().get(sign),
            );
        }
        let a = witness::witness_self(n).unwrap();
        let ratio = r_eval(&a, &a).unwrap() / (a.norm_sqr() * a.norm_sqr());
        record(&mut o, format!("self n={n}"), ratio, 0.5);
    }
    for sign in [Sign::Upper, Sign::Lower] {
        let (a, b) = witness::witness_qubit(sign);
        let ratio = r_eval(&a, &b).unwrap() / (a.norm_sqr() * b.norm_sqr());
        record(
            &mut o,
            format!("qubit {sign:?}"),
            ratio,
            best_constants(2, false).unwrap().get(sign),
        );
        let exported = witness::export(WitnessKind::Qubit, 2, sign).unwrap();
        o.check(
            (exported.meta.achieved_ratio - exported.meta.target_constant).abs() < 1e-12,
            || format!("exported qubit {sign:?} witness misses its constant"),
        );
    }
    o.summary = format!("{count} witnesses; max deviation {worst:.2e}");
    o
}

fn criterion_optimizer() -> Outcome {
    let mut o = Outcome::new();
    let mut slowest = Duration::ZERO;
    let mut worst = 0.0f64;
    for n in 2..=5 {
        for traceless in [false, true] {
            let c = best_constants(n, traceless).unwrap();
            for (mode, target) in [(Mode::Maximize, c.c_plus), (Mode::Minimize, c.c_minus)] {
                let task = ExtremizeTask::new(n, mode, traceless);
                let start = Instant::now();
                let result = alternating_extremize(&task);
                let elapsed = start.elapsed();
                slowest = slowest.max(elapsed);
                match result {
                    Ok(r) => {
                        let gap = (r.ratio - target).abs();
                        worst = worst.max(gap);
                        o.check(gap < 1e-8, || {
                            format!("n={n} traceless={traceless} {mode:?}: {} vs {target} (gap {gap:e})", r.ratio)
                        });
                    }
                    Err(e) => o
                        .failures
                        .push(format!("n={n} traceless={traceless} {mode:?}: {e}")),
                }
                o.check(elapsed < Duration::from_secs(30), || {
                    format!("n={n} traceless={traceless} {mode:?}: {elapsed:?} ≥ 30 s")
                });
            }
        }
    }
    o.summary = format!("16 configurations; max gap {worst:.2e}; slowest {slowest:.2?}");
    o
}

/// Worst-case statistics over the GKLS ensembles.
#[derive(Clone, Copy)]
struct GklsStats {
    generators: usize,
    sum_rule: f64,
    identity: f64,
    skipped: usize,
    failures: usize,
    min_margin: f64,
    min_rate: f64,
    conjugation: f64,
    trace: f64,
    residual: f64,
}

fn gkls_ensembles() -> Result<GklsStats, rfunc::Error> {
    let mut stats = GklsStats {
        generators: 0,
        sum_rule: 0.0,
        identity: 0.0,
        skipped: 0,
        failures: 0,
        min_margin: f64::INFINITY,
        min_rate: f64::INFINITY,
        conjugation: 0.0,
        trace: 0.0,
        residual: 0.0,
    };
    for n in 2..=4 {
        for num_jumps in 1..=3 {
            let ens = Ensemble {
                n,
                num_jumps,
                count: GENERATORS_PER_CONFIG,
                seed: SEED ^ ((n as u64) << 40) ^ ((num_jumps as u64) << 32),
            };
            let checks: Vec<GeneratorCheck> =
                gkls::ensemble_checks(&ens, &[ConstantMode::Traceless])?;
            for c in &checks {
                stats.generators += 1;
                let (lhs, rhs) = c.sum_rule;
                stats.sum_rule = stats.sum_rule.max((lhs - rhs).abs() / rhs.max(1.0));
                stats.identity = stats.identity.max(c.identity_max_error);
                stats.skipped += c.identity_skipped;
                let audit = &c.audits[0];
                stats.failures += usize::from(!audit.pass);
                stats.min_margin = stats.min_margin.min(audit.margin / audit.sum_rates);
                stats.min_rate = stats.min_rate.min(c.min_rate / c.scale);
                stats.conjugation = stats.conjugation.max(c.conjugation_error / c.scale);
                stats.trace = stats.trace.max(c.eigenmatrix_trace_error);
                stats.residual = stats.residual.max(c.max_residual / c.norm);
            }
        }
    }
    Ok(stats)
}

fn criterion_gkls(stats: &Result<GklsStats, rfunc::Error>, elapsed: Duration) -> Outcome {
    let mut o = Outcome::new();

    let ad = gkls::amplitude_damping();
    let spectral = gkls::spectrum(&ad).unwrap();
    let want = [1.0, 0.5, 0.5];
    o.check(
        spectral
            .rates
            .iter()
            .zip(want)
            .all(|(g, w)| (g - w).abs() < 1e-12),
        || format!("amplitude damping rates {:?}", spectral.rates),
    );
    let audit =
        gkls::audit_from_spectrum("amplitude_damping", &ad, &spectral, ConstantMode::Traceless);
    o.check(audit.margin.abs() <= 1e-9 && audit.pass, || {
        format!("amplitude damping margin {:e}", audit.margin)
    });
    let times = audit.qubit_times;
    o.check(times.is_some_and(|t| t.saturated && t.consistent), || {
        format!("qubit times {times:?}")
    });
    let identity = gkls::identity_from_spectrum(&ad, &spectral);
    o.check(identity.holds && identity.skipped == 0, || {
        "amplitude damping rate identity".into()
    });

    for n in 2..=10_000 {
        let c: Vec<f64> = ConstantMode::ALL.iter().map(|m| m.constant(n)).collect();
        if !(c[0] < c[1] && c[1] < c[2]) {
            o.failures
                .push(format!("n={n}: audit constants not strictly ordered {c:?}"));
            break;
        }
    }

    match stats {
        Ok(s) => {
            o.check(s.sum_rule < IDENTITY_TOL, || {
                format!("sum rule error {:e}", s.sum_rule)
            });
            o.check(s.identity < IDENTITY_TOL, || {
                format!("rate identity error {:e}", s.identity)
            });
            o.check(s.failures == 0, || {
                format!("{} audit violations", s.failures)
            });
            o.check(s.min_rate >= -SPECTRAL_TOL, || {
                format!("negative rate {:e}", s.min_rate)
            });
            o.check(s.conjugation < SPECTRAL_TOL, || {
                format!("conjugation closure error {:e}", s.conjugation)
            });
            o.check(s.trace < gkls::EIGENMATRIX_TRACE_TOL, || {
                format!("eigenmatrix trace {:e}", s.trace)
            });
            o.summary = format!(
                "{} generators; sum rule {:.1e}; identity {:.1e} ({} skipped); {} audit violations; min relative margin {:.1e}; {elapsed:.2?}",
                s.generators, s.sum_rule, s.identity, s.skipped, s.failures, s.min_margin
            );
        }
        Err(e) => o.failures.push(format!("ensemble failed: {e}")),
    }
    o.check(elapsed < Duration::from_secs(300), || {
        format!("runtime {elapsed:?} ≥ 5 min")
    });
    o
}

fn criterion_kernel(gkls_stats: &Result<GklsStats, rfunc::Error>) -> Outcome {
    let mut o = Outcome::new();

    // eigensolver residuals on every ensemble matrix kind
    let mut worst = gkls_stats
        .as_ref()
        .map(|s| s.residual)
        .unwrap_or(f64::INFINITY);
    for n in 2..=5 {
        let per_n = (0..PAIRS_PER_N / 10)
            .into_par_iter()
            .map(|i| {
                let mut rng = random::seeded(pair_seed(n, i));
                let a = random::ginibre(n, &mut rng);
                let b = random::ginibre(n, &mut rng);
                let h = (&a + &a.adjoint()).scale_real(0.5);
                let forms = [
                    h,
                    optimizer::quad_form_in_b(&a),
                    optimizer::quad_form_in_a(&b, false),
                ];
                let mut w = 0.0f64;
                for m in &forms {
                    let e = eig_hermitian(m).unwrap();
                    w = w.max(e.max_residual() / m.norm());
                }
                let e = eig_general(&a).unwrap();
                w.max(e.max_residual() / a.norm())
            })
            .reduce(|| 0.0, f64::max);
        worst = worst.max(per_n);
    }
    o.check(worst < 1e-8, || format!("eigen residual {worst:e}·‖M‖"));

    let mut fd = 0.0f64;
    for n in 2..=5 {
        for i in 0..20 {
            let mut rng = random::seeded(pair_seed(n, 1_000_000 + i));
            let a = random::unit_ginibre(n, &mut rng);
            let b = random::unit_ginibre(n, &mut rng);
            fd = fd.max(optimizer::finite_diff_check(&a, &b, 1e-6).unwrap());
        }
    }
    o.check(fd < 1e-5, || format!("finite-difference error {fd:e}"));

    let mut task = ExtremizeTask::new(4, Mode::Minimize, true);
    task.restarts = 6;
    let x = alternating_extremize(&task).unwrap();
    let y = alternating_extremize(&task).unwrap();
    let bits = |r: &optimizer::ExtremizeResult| {
        (
            r.ratio.to_bits(),
            r.trajectory.iter().map(|t| t.to_bits()).collect::<Vec<_>>(),
            serde_json::to_string(&r.a).unwrap(),
        )
    };
    o.check(bits(&x) == bits(&y), || {
        "optimizer run not bit-reproducible".into()
    });

    let ens = Ensemble {
        n: 3,
        num_jumps: 2,
        count: 200,
        seed: SEED,
    };
    let r1 = serde_json::to_string(&gkls::ensemble_audit(&ens, ConstantMode::Traceless).unwrap())
        .unwrap();
    let r2 = serde_json::to_string(&gkls::ensemble_audit(&ens, ConstantMode::Traceless).unwrap())
        .unwrap();
    o.check(r1 == r2, || "ensemble audit not bit-reproducible".into());

    let g1 = gkls::random_generator(3, 2, 17).unwrap();
    let g2 = gkls::random_generator(3, 2, 17).unwrap();
    o.check(
        serde_json::to_string(&g1).unwrap() == serde_json::to_string(&g2).unwrap(),
        || "random generator not bit-reproducible".into(),
    );
    let m1 = random::ginibre(4, &mut random::seeded(5));
    let m2 = random::ginibre(4, &mut random::seeded(5));
    o.check(m1 == m2 && m1 != ComplexMatrix::zeros(4, 4), || {
        "sampler not reproducible".into()
    });

    o.summary = format!("max eigen residual {worst:.1e}·‖M‖; finite differences {fd:.1e}; fixed-seed runs identical");
    o
}

fn report(k: usize, title: &str, o: &Outcome) -> bool {
    let pass = o.failures.is_empty();
    println!(
        "{} criterion {k} ({title}): {}",
        if pass { "PASS" } else { "FAIL" },
        o.summary
    );
    for f in &o.failures {
        println!("    {f}");
    }
    pass
}

fn main() -> ExitCode {
    let start = Instant::now();
    let stats: Vec<(usize, PairStats)> = (2..=5).map(|n| (n, pair_ensemble(n))).collect();
    let pair_time = start.elapsed();

    let start = Instant::now();
    let gkls_stats = gkls_ensembles();
    let gkls_time = start.elapsed();

    let results = [
        report(
            1,
            "identity suite",
            &criterion_identities(&stats, pair_time),
        ),
        report(2, "bound suite", &criterion_bounds(&stats)),
        report(3, "witness exactness", &criterion_witnesses()),
        report(4, "optimizer recovery", &criterion_optimizer()),
        report(5, "GKLS suite", &criterion_gkls(&gkls_stats, gkls_time)),
        report(6, "numerical kernel", &criterion_kernel(&gkls_stats)),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
