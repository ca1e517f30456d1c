//! Command-line front end. Data goes to stdout (or `--out`), diagnostics to
//! stderr. Exit codes: 0 success, 1 a check failed, 2 bad input.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::gkls::{self, ConstantMode, Ensemble, GklsGenerator};
use crate::linalg::{random, ComplexMatrix, C64};
use crate::optimizer::{self, ExtremizeTask, Mode, DEFAULT_SEED};
use crate::rfunc;
use crate::witness::{self, Sign, WitnessKind};

/// Largest optimizer gap accepted by `optimize`.
pub const OPTIMIZE_GAP_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "rfunc",
    version,
    about = "Relaxation functional r(A,B): evaluation, bounds, extremization and GKLS rate audits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate r(A,B) for two matrix JSON files.
    Eval(EvalArgs),
    /// Run the randomized identity and bound checks.
    Verify(VerifyArgs),
    /// Extremize r over unit-norm pairs.
    Optimize(OptimizeArgs),
    /// GKLS spectra, sum rule and rate-constraint audits.
    Gkls(GklsArgs),
    /// Print a closed-form extremal pair.
    Witness(WitnessArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write data here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed '{s}': {e}"))
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// RNG seed, decimal or 0x-prefixed hex.
    #[arg(long, env = "RFUNC_SEED", default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Matrix JSON for A.
    pub a: PathBuf,
    /// Matrix JSON for B.
    pub b: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=8))]
    pub n: u64,
    /// Random pairs per property.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
#[group(id = "direction", required = true, multiple = false)]
pub struct Direction {
    #[arg(long, group = "direction")]
    pub max: bool,
    #[arg(long, group = "direction")]
    pub min: bool,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=optimizer::MAX_N as u64))]
    pub n: u64,
    #[command(flatten)]
    pub direction: Direction,
    /// Restrict A to traceless matrices.
    #[arg(long)]
    pub traceless: bool,
    #[arg(long, default_value_t = optimizer::DEFAULT_RESTARTS, value_parser = positive_usize)]
    pub restarts: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value_t = optimizer::DEFAULT_MAX_SWEEPS, value_parser = positive_usize)]
    pub max_sweeps: usize,
    /// Stop when the ratio changes by less than this between sweeps.
    #[arg(long, default_value_t = optimizer::DEFAULT_CONVERGENCE_TOL, value_parser = positive_f64)]
    pub tol: f64,
    /// `csv` writes the sweep trajectory.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        Ok(_) => Err("must be positive".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be a positive finite number".into()),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Args)]
pub struct GklsArgs {
    #[command(subcommand)]
    pub action: GklsAction,
}

#[derive(Debug, Subcommand)]
pub enum GklsAction {
    /// Check max Γ ≤ c(n)·ΣΓ.
    Audit(GklsAuditArgs),
    /// Eigenvalues and relaxation rates.
    Spectrum(GklsSource),
    /// Check ΣΓ = n·Σ‖L_k‖².
    Sumrule(GklsSource),
}

#[derive(Debug, Args)]
pub struct GklsSource {
    /// Generator JSON {n, H, jumps}.
    #[arg(
        long,
        conflicts_with = "ensemble",
        required_unless_present = "ensemble"
    )]
    pub input: Option<PathBuf>,
    /// Use seeded random generators instead of a file.
    #[arg(long, requires = "n")]
    pub ensemble: bool,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=8))]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub jumps: usize,
    #[arg(long, default_value_t = 100, value_parser = positive_usize)]
    pub count: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct GklsAuditArgs {
    #[command(flatten)]
    pub source: GklsSource,
    /// traceless, general or sqrt2_legacy.
    #[arg(long, default_value = "traceless", value_parser = parse_mode)]
    pub mode: ConstantMode,
    /// Also write every ensemble record as JSON lines.
    #[arg(long)]
    pub records: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<ConstantMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    General,
    Traceless,
    Qubit,
    #[value(name = "self")]
    SelfPair,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Lower-bound witness (default upper).
    #[arg(long, conflicts_with = "max")]
    pub min: bool,
    #[arg(long)]
    pub max: bool,
    #[command(flatten)]
    pub output: Output,
}

/// Failure of a command, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid input (exit 2).
    Input(String),
    /// A check or internal assertion failed (exit 1).
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Failed(_) => ExitCode::from(1),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Failed(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Dimension { .. }
            | Error::NotSquare { .. }
            | Error::NonFinite { .. }
            | Error::Shape(_)
            | Error::Contract(_) => CliError::Input(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Eval(a) => cmd_eval(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Optimize(a) => cmd_optimize(&a),
        Command::Gkls(a) => cmd_gkls(&a),
        Command::Witness(a) => cmd_witness(&a),
    }
}

fn sink(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> CliResult {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Failed(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult {
    let a: ComplexMatrix = read_json(&args.a)?;
    let b: ComplexMatrix = read_json(&args.b)?;
    let report = rfunc::r_report(&a, &b)?;
    let bounds = rfunc::applicable_bounds(&a, &b, &report)?;
    emit_json(
        &args.output.out,
        &json!({
            "value": report.value,
            "ratio": report.ratio,
            "norm_a_sq": report.norm_a_sq,
            "norm_b_sq": report.norm_b_sq,
            "max_spread": report.max_spread,
            "alternates": report.alternates,
            "bounds": bounds,
        }),
    )?;
    if let Some(b) = bounds.iter().find(|b| !b.holds) {
        return Err(CliError::Failed(format!("bound '{}' violated", b.name)));
    }
    Ok(())
}

/// Worst violation of one randomized property.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

struct Tracker(Vec<PropertyResult>);

impl Tracker {
    fn record(&mut self, name: &'static str, tolerance: f64, violation: f64) {
        let v = if violation.is_nan() {
            f64::INFINITY
        } else {
            violation.max(0.0)
        };
        match self.0.iter_mut().find(|p| p.name == name) {
            Some(p) => p.max_violation = p.max_violation.max(v),
            None => self.0.push(PropertyResult {
                name,
                max_violation: v,
                tolerance,
                pass: true,
            }),
        }
    }

    fn finish(mut self) -> Vec<PropertyResult> {
        for p in &mut self.0 {
            p.pass = p.max_violation <= p.tolerance;
        }
        self.0
    }
}

/// Randomized identity, bound and witness checks on `count` pairs of size n.
pub fn verify_properties(n: usize, count: usize, seed: u64) -> crate::Result<Vec<PropertyResult>> {
    let mut rng = random::seeded(seed);
    let mut t = Tracker(Vec::new());
    let general = witness::best_constants(n, false)?;
    let traceless = witness::best_constants(n, true)?;
    for _ in 0..count {
        let a = random::ginibre(n, &mut rng);
        let b = random::ginibre(n, &mut rng);
        let s = a.norm_sqr() * b.norm_sqr();

        let rep = rfunc::r_report(&a, &b)?;
        t.record("alternate_forms", 1e-10, rep.max_spread / s.max(1.0));
        let alpha = random::complex_normal(&mut rng);
        let beta = random::complex_normal(&mut rng);
        let (l, r) = rfunc::scaling_check(&a, &b, alpha, beta)?;
        let scaled = alpha.norm_sqr() * beta.norm_sqr() * s;
        t.record("scaling", 1e-11, (l - r).abs() / scaled.max(1.0));
        let u = random::unitary(n, &mut rng);
        let (l, r) = rfunc::unitary_invariance_check(&a, &b, &u)?;
        t.record("unitary_invariance", 1e-11, (l - r).abs() / s.max(1.0));
        let (r, rr, ri) = rfunc::cartesian_additivity_check(&a, &b)?;
        t.record(
            "cartesian_additivity",
            1e-11,
            (r - rr - ri).abs() / s.max(1.0),
        );

        let ratio = rep.value / s;
        t.record(
            "general_bounds",
            1e-10,
            (general.c_minus - ratio).max(ratio - general.c_plus),
        );
        let (c, two) = rfunc::bw_check(&a, &b)?;
        t.record("commutator_bound", 1e-10, (c - two) / two.max(1.0));

        let a0 = random::traceless_part(&a);
        let ratio0 = rfunc::r_eval(&a0, &b)? / (a0.norm_sqr() * b.norm_sqr());
        t.record(
            "traceless_bounds",
            1e-10,
            (traceless.c_minus - ratio0).max(ratio0 - traceless.c_plus),
        );

        let nb = random::normal(n, &mut rng);
        let sn = a.norm_sqr() * nb.norm_sqr();
        let rn = rfunc::r_eval(&a, &nb)?;
        t.record("normal_b_bound", 1e-10, (-rn / sn).max(rn / sn - 1.0));
        t.record(
            "normal_b_commutator",
            1e-10,
            (rn - rfunc::half_commutator_norm_sqr(&a, &nb)?).abs() / sn.max(1.0),
        );

        let rs = rfunc::r_self(&a)?;
        let a4 = a.norm_sqr() * a.norm_sqr();
        t.record("self_bounds", 1e-10, (-rs / a4).max(rs / a4 - 0.5));
    }
    for sign in [Sign::Upper, Sign::Lower] {
        let mut kinds = vec![
            WitnessKind::General,
            WitnessKind::Traceless,
            WitnessKind::SelfPair,
        ];
        if n == 2 {
            kinds.push(WitnessKind::Qubit);
        }
        for kind in kinds {
            let w = witness::export(kind, n, sign)?;
            t.record(
                "witness_exactness",
                1e-12,
                (w.meta.achieved_ratio - w.meta.target_constant).abs(),
            );
        }
    }
    Ok(t.finish())
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult {
    let n = args.n as usize;
    let props = verify_properties(n, args.count as usize, args.seed.seed)?;
    match args.format {
        Format::Json => emit_json(
            &args.output.out,
            &json!({ "n": n, "count": args.count, "seed": args.seed.seed, "properties": props }),
        )?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink(&args.output.out)?);
            w.write_record(["property", "max_violation", "tolerance", "pass"])
                .map_err(csv_err)?;
            for p in &props {
                w.write_record([
                    p.name.to_string(),
                    format!("{:e}", p.max_violation),
                    format!("{:e}", p.tolerance),
                    p.pass.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    let failed: Vec<&str> = props.iter().filter(|p| !p.pass).map(|p| p.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "properties failed: {}",
            failed.join(", ")
        )))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Failed(e.to_string())
}

pub fn cmd_optimize(args: &OptimizeArgs) -> CliResult {
    let mode = if args.direction.max {
        Mode::Maximize
    } else {
        Mode::Minimize
    };
    let task = ExtremizeTask {
        n: args.n as usize,
        mode,
        traceless_a: args.traceless,
        restarts: args.restarts,
        seed: args.seed.seed,
        max_sweeps: args.max_sweeps,
        convergence_tol: args.tol,
    };
    let result = optimizer::alternating_extremize(&task)?;
    let c = witness::best_constants(task.n, task.traceless_a)?;
    let target = match mode {
        Mode::Maximize => c.c_plus,
        Mode::Minimize => c.c_minus,
    };
    let gap = (result.ratio - target).abs();
    match args.format {
        Format::Json => emit_json(
            &args.output.out,
            &json!({
                "task": task,
                "ratio": result.ratio,
                "target": target,
                "gap": gap,
                "sweeps_used": result.sweeps_used,
                "restart_index": result.restart_index,
                "A": result.a,
                "B": result.b,
                "trajectory": result.trajectory,
            }),
        )?,
        Format::Csv => {
            optimizer::write_trajectory_csv(&result, sink(&args.output.out)?).map_err(csv_err)?
        }
    }
    eprintln!(
        "ratio {:.15} target {:.15} gap {gap:.3e}",
        result.ratio, target
    );
    if gap > OPTIMIZE_GAP_TOL {
        return Err(CliError::Failed(format!(
            "gap {gap:e} exceeds {OPTIMIZE_GAP_TOL:e}"
        )));
    }
    Ok(())
}

fn ensemble_config(src: &GklsSource) -> Ensemble {
    Ensemble {
        n: src.n.unwrap_or(2) as usize,
        num_jumps: src.jumps,
        count: src.count,
        seed: src.seed.seed,
    }
}

#[derive(Serialize)]
struct SpectrumSummary<'a> {
    id: &'a str,
    n: usize,
    eigenvalues: &'a [C64],
    rates: &'a [f64],
    zero_index: usize,
    defective: usize,
    max_residual: f64,
    conjugation_error: f64,
}

fn spectrum_summary<'a>(
    id: &'a str,
    gen: &GklsGenerator,
    s: &'a gkls::SpectralResult,
) -> SpectrumSummary<'a> {
    SpectrumSummary {
        id,
        n: gen.n(),
        eigenvalues: &s.eigenvalues,
        rates: &s.rates,
        zero_index: s.zero_index,
        defective: s.defective_flags.iter().filter(|&&d| d).count(),
        max_residual: s.residuals.iter().cloned().fold(0.0, f64::max),
        conjugation_error: s.conjugation_error(),
    }
}

fn generators(src: &GklsSource) -> CliResult<Vec<(String, GklsGenerator)>> {
    match &src.input {
        Some(path) => {
            let gen: GklsGenerator = read_json(path)?;
            Ok(vec![(path.display().to_string(), gen)])
        }
        None => {
            let ens = ensemble_config(src);
            (0..ens.count)
                .map(|i| Ok((ens.id(i), ens.generator(i)?)))
                .collect()
        }
    }
}

pub fn cmd_gkls(args: &GklsArgs) -> CliResult {
    match &args.action {
        GklsAction::Spectrum(src) => gkls_spectrum(src),
        GklsAction::Sumrule(src) => gkls_sumrule(src),
        GklsAction::Audit(a) => gkls_audit(a),
    }
}

fn gkls_spectrum(src: &GklsSource) -> CliResult {
    let gens = generators(src)?;
    let mut w = sink(&src.output.out)?;
    match src.format {
        Format::Json => {
            for (id, gen) in &gens {
                let s = gkls::spectrum(gen)?;
                serde_json::to_writer(&mut w, &spectrum_summary(id, gen, &s))
                    .map_err(|e| CliError::Failed(e.to_string()))?;
                writeln!(w)?;
            }
        }
        Format::Csv => {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["id", "index", "rate"]).map_err(csv_err)?;
            for (id, gen) in &gens {
                let s = gkls::spectrum(gen)?;
                for (k, g) in s.rates.iter().enumerate() {
                    c.write_record([id.clone(), k.to_string(), format!("{g:.17e}")])
                        .map_err(csv_err)?;
                }
            }
            c.flush()?;
            return Ok(());
        }
    }
    w.flush()?;
    Ok(())
}

fn gkls_sumrule(src: &GklsSource) -> CliResult {
    let gens = generators(src)?;
    let mut rows = Vec::with_capacity(gens.len());
    for (id, gen) in &gens {
        let (lhs, rhs) = gkls::sum_rule_check(gen)?;
        rows.push(
            json!({ "id": id, "lhs": lhs, "rhs": rhs, "holds": gkls::sum_rule_holds(lhs, rhs) }),
        );
    }
    let failures = rows.iter().filter(|r| r["holds"] == false).count();
    let mut w = sink(&src.output.out)?;
    for r in &rows {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    if failures > 0 {
        return Err(CliError::Failed(format!(
            "sum rule failed on {failures} generator(s)"
        )));
    }
    Ok(())
}

fn gkls_audit(args: &GklsAuditArgs) -> CliResult {
    let src = &args.source;
    let records = match &src.input {
        Some(path) => {
            let gen: GklsGenerator = read_json(path)?;
            let s = gkls::spectrum(&gen)?;
            vec![gkls::audit_from_spectrum(
                &path.display().to_string(),
                &gen,
                &s,
                args.mode,
            )]
        }
        None => gkls::ensemble_audit(&ensemble_config(src), args.mode)?,
    };
    if let Some(path) = &args.records {
        let f =
            File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        gkls::write_json_lines(&records, BufWriter::new(f))?;
    }
    let failures = records.iter().filter(|r| !r.pass).count();
    if src.ensemble {
        let ens = ensemble_config(src);
        let summary = gkls::summarize(&ens, &records);
        match src.format {
            Format::Json => emit_json(
                &src.output.out,
                &json!({ "mode": args.mode, "summary": summary }),
            )?,
            Format::Csv => {
                gkls::write_summary_csv(std::slice::from_ref(&summary), sink(&src.output.out)?)
                    .map_err(csv_err)?
            }
        }
        eprintln!(
            "mode {} count {} failures {} min margin {:.6e}",
            args.mode, summary.count, summary.failures, summary.min_margin
        );
    } else {
        gkls::write_json_lines(&records, sink(&src.output.out)?)?;
    }
    if failures > 0 {
        return Err(CliError::Failed(format!(
            "{failures} generator(s) violate the {} bound",
            args.mode
        )));
    }
    Ok(())
}

pub fn cmd_witness(args: &WitnessArgs) -> CliResult {
    let kind = match args.kind {
        KindArg::General => WitnessKind::General,
        KindArg::Traceless => WitnessKind::Traceless,
        KindArg::Qubit => WitnessKind::Qubit,
        KindArg::SelfPair => WitnessKind::SelfPair,
    };
    let sign = if args.min { Sign::Lower } else { Sign::Upper };
    let w = witness::export(kind, args.n, sign)?;
    emit_json(&args.output.out, &w)?;
    if (w.meta.achieved_ratio - w.meta.target_constant).abs() > 1e-12 {
        return Err(CliError::Failed(
            "witness misses its target constant".into(),
        ));
    }
    Ok(())
}
