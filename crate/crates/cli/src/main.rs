//! `beccert`: evaluate, optimise and certify smoothing-inequality bounds on
//! the normal approximation constant, and inspect zero-bias transforms of
//! discrete laws.
//!
//! Exit codes: 0 success, 1 certification or check failure, 2 usage error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use beccert::bounds::{
    b_seam_residuals, dawson, delta_hat1, delta_hat2, delta_hat2_inner, delta_hat2_outer_variant,
    delta_hat2_seam, delta_hat2_seam_residual, BoundConstants,
};
use beccert::certify::{
    certified_scan, optimize_params, stitch_regimes, OptimizerSettings, ScanConfig, ScanEntry,
};
use beccert::dist::DiscreteDistribution;
use beccert::prawitz::{prawitz_rhs, BoundMode, PrawitzParams, DEFAULT_QUAD_TOL};
use beccert::quad::{integrate, QuadOptions};
use beccert::zero_bias::{kappa1_report, threepoint_g};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Accepted range for the quadrature tolerance override.
const QUAD_TOL_RANGE: (f64, f64) = (1e-13, 1e-6);
/// `g(a, b, c)` above this counts as a violation in the three-point scan.
const G_TOL: f64 = 1e-10;
/// `dawson(1)` to 19 digits.
const DAWSON_ONE: f64 = 0.538_079_506_912_768_4;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("cannot read input: {0}")]
    Io(#[from] io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] beccert::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use beccert::Error as E;
        match self {
            Self::Usage(_) | Self::Json(_) => 2,
            Self::Core(
                E::InvalidParameter(_)
                | E::InvalidDistribution(_)
                | E::ZeroVariance
                | E::NotCentered(_)
                | E::NotStandardized { .. }
                | E::InfeasibleThreePoint { .. },
            ) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "beccert", version, about = "Certified bounds for the normal approximation constant")]
struct Cli {
    /// Absolute quadrature tolerance per integral.
    #[arg(long, global = true, env = "BECCERT_QUAD_TOL")]
    quad_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute constants and consistency residuals; exit 1 on any breach.
    Selfcheck,
    /// Evaluate or optimise a single bound.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Run a certified scan over an epsilon range.
    #[command(subcommand)]
    Certify(CertifyCmd),
    /// Zero-bias transform diagnostics.
    #[command(subcommand)]
    Zerobias(ZeroBiasCmd),
}

#[derive(Subcommand)]
enum BoundCmd {
    /// One evaluation of D* with its integral breakdown.
    Eval(EvalArgs),
    /// Locally minimise D* + margin over (U0, U).
    Optimize(OptimizeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeName {
    General,
    IidFinite,
    IidTail,
}

#[derive(Args)]
struct ModeArgs {
    #[arg(long, value_enum)]
    mode: ModeName,
    /// Lyapunov fraction.
    #[arg(long)]
    eps: f64,
    /// Sample size (iid-finite).
    #[arg(long)]
    n: Option<u64>,
    /// Uniform-tail threshold (iid-tail).
    #[arg(long)]
    m: Option<u64>,
}

impl ModeArgs {
    fn mode(&self) -> CliResult<BoundMode> {
        let need = |v: Option<u64>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("--{flag} is required")));
        Ok(match self.mode {
            ModeName::General => BoundMode::General { epsilon: self.eps },
            ModeName::IidFinite => BoundMode::IidFinite {
                epsilon: self.eps,
                n: need(self.n, "n")?,
            },
            ModeName::IidTail => BoundMode::IidTail {
                epsilon: self.eps,
                m: need(self.m, "m")?,
            },
        })
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    mode: ModeArgs,
    /// Lower integration cut-off U0.
    #[arg(long)]
    u0: f64,
    /// Upper integration cut-off U (at least U0).
    #[arg(long)]
    u: f64,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    mode: ModeArgs,
    /// Starting U0.
    #[arg(long, default_value_t = 1.8)]
    u0: f64,
    /// Starting U.
    #[arg(long, default_value_t = 2.4)]
    u: f64,
}

#[derive(Subcommand)]
enum CertifyCmd {
    /// Arbitrary independent summands.
    General(CertifyArgs),
    /// Identically distributed summands.
    Iid {
        #[command(flatten)]
        common: CertifyArgs,
        /// Sample sizes n >= m are bounded uniformly.
        #[arg(long)]
        m: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct CertifyArgs {
    /// Bound to certify (default 0.5606 general, 0.4785 iid).
    #[arg(long)]
    target: Option<f64>,
    /// Left end of the scanned range (default 0.02 general, 0.037 iid).
    #[arg(long)]
    eps_lo: Option<f64>,
    /// Defaults to the trivial threshold 1/target.
    #[arg(long)]
    eps_hi: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    parallelism: Option<usize>,
    /// Write the certificate here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Suppress per-point progress lines.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum ZeroBiasCmd {
    /// beta3, kappa1(W, W*) and the gap beta3/2 - kappa1.
    Kappa1(DistInput),
    /// The gap beta3/2 - kappa1(W, W*); exit 1 if it is below -1e-10.
    Gap(DistInput),
    /// Tabulate g(a, b, c) over a grid of feasible three-point laws as CSV.
    ThreepointScan(ScanGrid),
}

#[derive(Args)]
struct DistInput {
    /// JSON file {"atoms": [...], "probs": [...]}; standard input if absent or "-".
    path: Option<PathBuf>,
}

#[derive(Args)]
struct ScanGrid {
    /// Number of values of b, spaced by --b-step from 0.
    #[arg(long, default_value_t = 40)]
    b_count: usize,
    #[arg(long, default_value_t = 0.05)]
    b_step: f64,
    /// Number of values of a - b, spaced by --a-step.
    #[arg(long, default_value_t = 40)]
    a_count: usize,
    #[arg(long, default_value_t = 0.1)]
    a_step: f64,
    /// Number of values of c, spaced by --c-step.
    #[arg(long, default_value_t = 30)]
    c_count: usize,
    #[arg(long, default_value_t = 0.15)]
    c_step: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let quad_tol = match cli.quad_tol {
        None => DEFAULT_QUAD_TOL,
        Some(t) if (QUAD_TOL_RANGE.0..=QUAD_TOL_RANGE.1).contains(&t) => t,
        Some(t) => {
            return Err(CliError::Usage(format!(
                "quadrature tolerance {t} outside [{:e}, {:e}]",
                QUAD_TOL_RANGE.0, QUAD_TOL_RANGE.1
            )))
        }
    };
    match cli.command {
        Command::Selfcheck => selfcheck(),
        Command::Bound(BoundCmd::Eval(args)) => bound_eval(&args, quad_tol),
        Command::Bound(BoundCmd::Optimize(args)) => bound_optimize(&args, quad_tol),
        Command::Certify(CertifyCmd::General(args)) => certify(ScanConfig::general(), None, &args, quad_tol),
        Command::Certify(CertifyCmd::Iid { common, m }) => certify(ScanConfig::iid(), m, &common, quad_tol),
        Command::Zerobias(ZeroBiasCmd::Kappa1(input)) => zerobias(&input, false),
        Command::Zerobias(ZeroBiasCmd::Gap(input)) => zerobias(&input, true),
        Command::Zerobias(ZeroBiasCmd::ThreepointScan(grid)) => threepoint_scan(&grid),
    }
}

fn print_json(v: &serde_json::Value) -> CliResult<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn mode_json(mode: &BoundMode) -> serde_json::Value {
    serde_json::to_value(mode).expect("modes serialize")
}

fn bound_eval(args: &EvalArgs, quad_tol: f64) -> CliResult<ExitCode> {
    if args.u0 > args.u {
        return Err(CliError::Usage(format!("--u0 {} exceeds --u {}", args.u0, args.u)));
    }
    let mode = args.mode.mode()?;
    let params = PrawitzParams::new(args.u0, args.u)?.with_tol(quad_tol);
    let v = prawitz_rhs(mode, &params)?;
    print_json(&json!({
        "mode": mode_json(&mode),
        "u0": args.u0,
        "u": args.u,
        "dstar": v.dstar,
        "margin": v.margin,
        "bound": v.bound(),
        "integrals": v.integrals,
        "quad_tol": quad_tol,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn bound_optimize(args: &OptimizeArgs, quad_tol: f64) -> CliResult<ExitCode> {
    if args.u0 > args.u {
        return Err(CliError::Usage(format!("--u0 {} exceeds --u {}", args.u0, args.u)));
    }
    let mode = args.mode.mode()?;
    let o = optimize_params(mode, (args.u0, args.u), &OptimizerSettings::default(), quad_tol)?;
    print_json(&json!({
        "mode": mode_json(&mode),
        "u0": o.u0,
        "u": o.u,
        "dstar": o.value.dstar,
        "margin": o.value.margin,
        "bound": o.bound(),
        "evaluations": o.evaluations,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn certify(defaults: ScanConfig, m: Option<u64>, args: &CertifyArgs, quad_tol: f64) -> CliResult<ExitCode> {
    let mut config = match args.target {
        Some(t) => defaults.with_target(t),
        None => defaults,
    };
    if let Some(lo) = args.eps_lo {
        config.eps_lo = lo;
    }
    if let Some(hi) = args.eps_hi {
        config.eps_hi = hi;
    }
    if m.is_some() {
        config.m = m;
    }
    config.quad_tol = quad_tol;
    config.validate()?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(p) = args.parallelism {
        if p == 0 {
            return Err(CliError::Usage("--parallelism must be at least 1".into()));
        }
        pool = pool.num_threads(p);
    }
    let pool = pool.build().map_err(|e| CliError::Failed(format!("cannot start workers: {e}")))?;

    let quiet = args.quiet;
    let progress = move |e: &ScanEntry| {
        if !quiet {
            eprintln!(
                "eps={:.6} dstar={:.7} bound={:.7} covers_from={:.6}",
                e.epsilon,
                e.dstar,
                e.bound(),
                e.bridged_to
            );
        }
    };
    let scanned = pool.install(|| certified_scan(&config, Some(&progress)));
    let mut cert = match scanned {
        Ok(c) => c,
        Err(e @ beccert::Error::CertificationFailed { .. }) => {
            eprintln!("{e}");
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e.into()),
    };
    let stitched = stitch_regimes(&mut cert);

    let body = match args.format {
        Format::Json => serde_json::to_string_pretty(&cert)? + "\n",
        Format::Csv => cert.to_csv(),
    };
    match &args.output {
        Some(path) => fs::write(path, body)?,
        None => io::stdout().lock().write_all(body.as_bytes())?,
    }

    match stitched {
        Ok(report) => {
            eprintln!("{}", serde_json::to_string(&report)?);
            if report.global_bound <= config.target {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Err(e) => {
            eprintln!("certification failed: {e}");
            Ok(ExitCode::from(1))
        }
    }
}

fn read_distribution(input: &DistInput) -> CliResult<DiscreteDistribution> {
    let text = match &input.path {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p)?,
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    Ok(serde_json::from_str(&text)?)
}

fn zerobias(input: &DistInput, gap_only: bool) -> CliResult<ExitCode> {
    let d = read_distribution(input)?;
    let rescaled = !d.is_standardized();
    let d = if rescaled { d.standardize()? } else { d };
    let r = kappa1_report(&d)?;
    if gap_only {
        print_json(&json!({ "gap": r.gap, "rescaled": rescaled }))?;
        return Ok(if r.gap >= -G_TOL { ExitCode::SUCCESS } else { ExitCode::from(1) });
    }
    print_json(&json!({
        "beta3": r.beta3,
        "kappa1": r.kappa1,
        "gap": r.gap,
        "rescaled": rescaled,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn threepoint_scan(grid: &ScanGrid) -> CliResult<ExitCode> {
    let mut out = io::BufWriter::new(io::stdout().lock());
    writeln!(out, "a,b,c,case,g")?;
    let mut points = 0usize;
    let mut max_g = f64::NEG_INFINITY;
    for i in 0..grid.b_count {
        let b = grid.b_step * i as f64;
        for j in 1..=grid.a_count {
            let a = b + grid.a_step * j as f64;
            for k in 1..=grid.c_count {
                let c = grid.c_step * k as f64;
                if a * c < 1.0 || b * c > 1.0 {
                    continue;
                }
                let (g, case) = threepoint_g(a, b, c)?;
                writeln!(out, "{},{},{},{case},{g:e}", tidy(a), tidy(b), tidy(c))?;
                points += 1;
                max_g = max_g.max(g);
            }
        }
    }
    out.flush()?;
    eprintln!("points={points} max_g={max_g:e}");
    if points == 0 {
        return Err(CliError::Usage("grid contains no feasible (a, b, c)".into()));
    }
    Ok(if max_g <= G_TOL { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Drops the last few bits of grid arithmetic so `0.1 * 3` prints as `0.3`.
fn tidy(x: f64) -> f64 {
    format!("{x:.12}").parse().expect("formatted float parses")
}

struct Check {
    name: &'static str,
    value: f64,
    tol: f64,
}

fn selfcheck() -> CliResult<ExitCode> {
    let k = BoundConstants::get();
    let gammas = [0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
    let (seam_m, seam_2pi) = b_seam_residuals(&gammas);
    let eps_grid = [0.02, 0.1, 0.3536, 0.5, 0.5092, 1.0, 1.5];

    let seam2 = eps_grid.iter().map(|&e| delta_hat2_seam_residual(e)).fold(0.0, f64::max);
    let variant = eps_grid
        .iter()
        .map(|&e| {
            let a = delta_hat2_seam(e);
            let inner = delta_hat2_inner(e, a);
            (delta_hat2_outer_variant(e, a) - inner).abs() / inner
        })
        .fold(0.0, f64::max);

    let opts = QuadOptions::with_tol(1e-13);
    let mut quad1: f64 = 0.0;
    let mut quad2: f64 = 0.0;
    for &e in &eps_grid {
        let seam = delta_hat2_seam(e);
        let e23 = e.powf(2.0 / 3.0);
        for t in [0.5, 1.0, 2.0, seam, seam + 1.0, 5.0] {
            let direct1 = e * integrate(|s| 0.5 * s * s * (0.5 * (s * s - t * t)).exp(), 0.0, t, &[], opts)?.value;
            quad1 = quad1.max((delta_hat1(e, t) - direct1).abs());
            let inner = integrate(|s| 0.5 * s * s * (0.5 * (s * s * e23 - t * t)).exp(), 0.0, t.min(seam), &[], opts)?;
            let outer = if t > seam {
                // the integrand grows like exp(2 a eps s^3), so scale the tolerance
                let scale = (delta_hat2(e, t) / e).max(1.0);
                integrate(
                    |s| 0.5 * s * s / k.l * (2.0 * k.a * e * s * s * s - 0.5 * t * t).exp(),
                    seam,
                    t,
                    &[],
                    QuadOptions::with_tol(1e-13 * scale),
                )?
                .value
            } else {
                0.0
            };
            let direct2 = e * (inner.value + outer);
            quad2 = quad2.max((delta_hat2(e, t) - direct2).abs() / direct2.max(1.0));
        }
    }

    let checks = [
        Check { name: "a", value: (k.a - 0.099162).abs(), tol: 1e-6 },
        Check { name: "M", value: (k.m - 3.995896).abs(), tol: 1e-6 },
        Check { name: "l", value: (k.l - 0.624489).abs(), tol: 1e-6 },
        Check { name: "dawson_1", value: (dawson(1.0) - DAWSON_ONE).abs(), tol: 1e-12 },
        Check { name: "b_seam_m", value: seam_m, tol: 1e-10 },
        Check { name: "b_seam_2pi", value: seam_2pi, tol: 1e-10 },
        Check { name: "delta_hat2_seam", value: seam2, tol: 1e-9 },
        Check { name: "delta_hat1_vs_quadrature", value: quad1, tol: 1e-9 },
        Check { name: "delta_hat2_vs_quadrature", value: quad2, tol: 1e-9 },
    ];
    let passed = checks.iter().all(|c| c.value <= c.tol);
    let residuals: serde_json::Map<String, serde_json::Value> = checks
        .iter()
        .map(|c| {
            (
                c.name.to_string(),
                json!({ "residual": c.value, "tol": c.tol, "ok": c.value <= c.tol }),
            )
        })
        .collect();
    print_json(&json!({
        "a": k.a,
        "M": k.m,
        "l": k.l,
        "dawson_1": dawson(1.0),
        "residuals": residuals,
        "printed_outer_variant_seam_residual": variant,
        "passed": passed,
    }))?;
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
