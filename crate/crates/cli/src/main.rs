use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rdp_core::curves::{self, CurveKind, CurveRequest, FigureId, FixedParams, SweepRange, SweepVar};
use rdp_core::sim::{self, SimConfig};
use rdp_core::verify::Verifier;
use rdp_core::{GaussianSpec, RateBudget};

#[derive(Parser)]
#[command(name = "rdp", version, about = "Distortion-rate-perception curves, figures, simulation and checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one parameter and write a CSV curve.
    Curve(CurveArgs),
    /// Write the CSV data behind a canned figure (or `all`).
    Figure(FigureArgs),
    /// Monte Carlo of the achieving scheme.
    Simulate(SimulateArgs),
    /// Check every closed form against its oracle on a grid.
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum Measure {
    Kl,
    W2,
}

#[derive(Copy, Clone, ValueEnum)]
enum Sweep {
    R,
    Rc,
    P,
}

#[derive(Args)]
struct SourceArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    src_mu: f64,
    #[arg(long, default_value_t = 1.0)]
    src_sigma: f64,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    src: SourceArgs,
    /// Reconstruction mean; with --rec-sigma selects the ocsc curve.
    #[arg(long, allow_hyphen_values = true)]
    rec_mu: Option<f64>,
    #[arg(long)]
    rec_sigma: Option<f64>,
    /// Perception measure for bound curves.
    #[arg(long, value_enum)]
    measure: Option<Measure>,
    #[arg(long, value_parser = extended_nonneg)]
    r: Option<f64>,
    #[arg(long, value_parser = extended_nonneg)]
    rc: Option<f64>,
    #[arg(long, value_parser = extended_nonneg)]
    p: Option<f64>,
    #[arg(long, value_enum)]
    sweep: Sweep,
    /// LO:HI:N
    #[arg(long, value_parser = parse_range)]
    range: SweepRange,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    /// fig3 .. fig9, or `all`
    id: String,
    /// Output file; a directory when id is `all`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    src: SourceArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    rec_mu: f64,
    #[arg(long, default_value_t = 1.0)]
    rec_sigma: f64,
    #[arg(long, value_parser = extended_nonneg)]
    r: f64,
    #[arg(long, value_parser = extended_nonneg, default_value_t = 0.0)]
    rc: f64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report as CSV (header and one row).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Points per grid axis.
    #[arg(long, default_value_t = 5)]
    density: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    /// Resolution of the brute-force minimization oracles.
    #[arg(long, default_value_t = rdp_core::verify::ORACLE_POINTS)]
    oracle_points: usize,
}

/// A number `>= 0`; `inf` is accepted.
fn extended_nonneg(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("not a number: {s}"))?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("must be >= 0 (or inf), got {s}"))
    }
}

fn parse_range(s: &str) -> Result<SweepRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(format!("expected LO:HI:N, got {s}"));
    };
    let lo: f64 = lo.parse().map_err(|_| format!("bad LO in {s}"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad HI in {s}"))?;
    let n: usize = n.parse().map_err(|_| format!("bad N in {s}"))?;
    SweepRange::new(lo, hi, n).map_err(|e| e.to_string())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run_curve(a: CurveArgs) -> Result<()> {
    let src = GaussianSpec::new(a.src.src_mu, a.src.src_sigma)?;
    let rec = match (a.rec_mu, a.rec_sigma) {
        (None, None) => None,
        (mu, sigma) => Some(GaussianSpec::new(mu.unwrap_or(0.0), sigma.unwrap_or(1.0))?),
    };
    let kind = match (a.measure, rec) {
        (Some(_), Some(_)) => bail!("--measure and --rec-* are exclusive: give a reconstruction for ocsc curves or a measure for bounds"),
        (None, None) => bail!("give --rec-mu/--rec-sigma for an ocsc curve or --measure for bounds"),
        (None, Some(_)) => CurveKind::Ocsc,
        (Some(Measure::Kl), None) => CurveKind::Kl,
        (Some(Measure::W2), None) => CurveKind::W2,
    };
    let sweep = match a.sweep {
        Sweep::R => SweepVar::R,
        Sweep::Rc => SweepVar::Rc,
        Sweep::P => SweepVar::P,
    };
    let fixed = FixedParams { r: a.r, rc: a.rc, p: a.p };
    let req = CurveRequest::new(kind, src, rec, sweep, a.range, fixed)?;
    emit(&curves::curve_csv(&req)?, a.out.as_deref())
}

fn run_figure(a: FigureArgs) -> Result<()> {
    if a.id == "all" {
        let dir = a.out.context("figure all needs --out DIR")?;
        fs::create_dir_all(&dir)?;
        for fig in FigureId::ALL {
            emit(&curves::figure_csv(fig)?, Some(&dir.join(format!("{}.csv", fig.name()))))?;
        }
        return Ok(());
    }
    let fig = FigureId::from_name(&a.id).with_context(|| format!("unknown figure {:?} (fig3..fig9 or all)", a.id))?;
    emit(&curves::figure_csv(fig)?, a.out.as_deref())
}

const SIM_HEADER: &str = "src_mu,src_sigma,rec_mu,rec_sigma,r,rc,samples,seed,empirical_distortion,theory_distortion,stderr_distortion,z_score,rec_mean,rec_var,kl_to_target,w2sq_to_target";

fn run_simulate(a: SimulateArgs) -> Result<()> {
    let cfg = SimConfig::new(
        GaussianSpec::new(a.src.src_mu, a.src.src_sigma)?,
        GaussianSpec::new(a.rec_mu, a.rec_sigma)?,
        RateBudget::new(a.r, a.rc)?,
        a.samples,
        a.seed,
    )?;
    let rep = sim::simulate(&cfg)?;
    let f = curves::fmt_num;
    println!("theory     {}", f(rep.theory_distortion));
    println!("empirical  {} +- {}", f(rep.empirical_distortion), f(rep.stderr_distortion));
    println!("z          {}", f(rep.z_score()));
    println!("rec mean   {} (target {})", f(rep.rec_mean), f(a.rec_mu));
    println!("rec var    {} (target {})", f(rep.rec_var), f(a.rec_sigma * a.rec_sigma));
    if let Some(path) = a.out {
        let row = [
            a.src.src_mu,
            a.src.src_sigma,
            a.rec_mu,
            a.rec_sigma,
            a.r,
            a.rc,
        ]
        .iter()
        .map(|&x| f(x))
        .chain([a.samples.to_string(), a.seed.to_string()])
        .chain(
            [
                rep.empirical_distortion,
                rep.theory_distortion,
                rep.stderr_distortion,
                rep.z_score(),
                rep.rec_mean,
                rep.rec_var,
                rep.kl_to_target,
                rep.w2sq_to_target,
            ]
            .iter()
            .map(|&x| f(x)),
        )
        .collect::<Vec<_>>()
        .join(",");
        emit(&format!("{SIM_HEADER}\n{row}\n"), Some(&path))?;
    }
    Ok(())
}

fn run_verify(a: VerifyArgs) -> Result<bool> {
    let report = Verifier::new(a.density, a.tolerance)?.with_oracle_points(a.oracle_points)?.run()?;
    print!("{}", report.render());
    let ok = report.all_passed();
    println!("{}", if ok { "all checks passed" } else { "some checks FAILED" });
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Command::Curve(a) => run_curve(a).map(|_| true),
        Command::Figure(a) => run_figure(a).map(|_| true),
        Command::Simulate(a) => run_simulate(a).map(|_| true),
        Command::Verify(a) => run_verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
