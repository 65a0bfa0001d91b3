mod config;
mod output;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{BuildConfig, RunConfig};
use serde::Serialize;
use softedge::lattice::{carleman_check, CarlemanReport};
use softedge::modulator::{
    classify_modulation, cosine_beta, critical_pair_from_q, critical_qs, double_period, even_zero_beta,
    from_ratio_seqs, DEFAULT_TOL,
};
use softedge::oracle::{cdf_compare, gap_probe, section_measure, CdfComparison, GapProbe};
use softedge::resolvent::{
    inverse_residual, phase_classify, BlockIdentities, BlockResolvent, PhaseEvidence,
    SectionProductCheck, Witness,
};
use softedge::turan::{DensityOpts, IncrementMonitor, Normalization, SeriesOpts, TuranContext};
use softedge::{GapInterval, Modulation, PeriodicSeq, Regime};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "softedge", version, about = "Spectral analysis of periodically modulated Jacobi matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a modulating pair and report its regime.
    Build(Common),
    /// Bounded/compact/unbounded verdict for the block inverse, with section evidence.
    Classify(Common),
    /// Density profile on a grid (CSV) and a summary (JSON).
    Density(Common),
    /// Block inverse identities, section products and the unboundedness witness.
    Resolvent(Common),
    /// Pass/fail table of all identity checks for the configured lattice.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; falls back to JS_THREADS, then to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

/// Set by commands that finished but hit numeric non-convergence somewhere.
struct Unconverged(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Unconverged(msg))) => {
            eprintln!("warning: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let numeric = e.downcast_ref::<softedge::Error>().is_some_and(|e| e.is_numeric());
            ExitCode::from(if numeric { 1 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<Option<Unconverged>> {
    let (Command::Build(c)
    | Command::Classify(c)
    | Command::Density(c)
    | Command::Resolvent(c)
    | Command::Validate(c)) = &cli.command;
    init_threads(c.threads)?;
    let cfg = RunConfig::load(&c.config)?;
    std::fs::create_dir_all(&c.out).with_context(|| format!("creating {}", c.out.display()))?;
    match &cli.command {
        Command::Build(_) => cmd_build(&cfg, &c.out).map(|_| None),
        Command::Classify(_) => cmd_classify(&cfg, &c.out).map(|_| None),
        Command::Density(_) => cmd_density(&cfg, &c.out),
        Command::Resolvent(_) => cmd_resolvent(&cfg, &c.out).map(|_| None),
        Command::Validate(_) => cmd_validate(&cfg, &c.out).map(|_| None),
    }
}

fn init_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("JS_THREADS") {
            Ok(v) => Some(v.trim().parse().with_context(|| format!("JS_THREADS={v:?} is not a count"))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            bail!("thread count must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BuildReport {
    method: &'static str,
    #[serde(rename = "N")]
    n: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Option<f64>,
    residual: f64,
    regime: Regime,
    trace0: f64,
}

fn cmd_build(cfg: &RunConfig, out: &Path) -> Result<()> {
    let Some(b) = &cfg.build else {
        bail!("config has no \"build\" section");
    };
    let (method, m): (&'static str, Modulation<f64>) = match b {
        BuildConfig::Ratios { r, q } => (
            "ratios",
            from_ratio_seqs(&PeriodicSeq::new(r.clone())?, &PeriodicSeq::new(q.clone())?, &1e-12)?,
        ),
        BuildConfig::CriticalQ { alpha, root } => {
            let seq = PeriodicSeq::new(alpha.clone())?;
            let roots = critical_qs(&seq)?;
            let Some(q) = roots.get(*root) else {
                bail!("root index {root} out of range; real roots are {roots:?}");
            };
            ("critical_q", critical_pair_from_q(&seq, *q, DEFAULT_TOL)?.modulation().clone())
        }
        BuildConfig::EvenZeroBeta { alpha } => (
            "even_zero_beta",
            even_zero_beta(&PeriodicSeq::new(alpha.clone())?, DEFAULT_TOL)?.modulation().clone(),
        ),
        BuildConfig::CosineBeta { n, k0 } => ("cosine_beta", cosine_beta(*n, *k0, DEFAULT_TOL)?.modulation().clone()),
        BuildConfig::DoublePeriod { alpha, beta } => (
            "double_period",
            double_period(&Modulation::from_vecs(alpha.clone(), beta.clone())?, DEFAULT_TOL)?
                .modulation()
                .clone(),
        ),
        BuildConfig::Direct { alpha, beta } => ("direct", Modulation::from_vecs(alpha.clone(), beta.clone())?),
    };
    let regime = classify_modulation(&m, DEFAULT_TOL);
    let report = BuildReport {
        method,
        n: m.period(),
        alpha: m.alpha().values().to_vec(),
        beta: m.beta().values().to_vec(),
        gamma: regime.gamma,
        residual: regime.residual,
        regime: regime.regime,
        trace0: regime.trace0,
    };
    output::write_json(out, "build.json", &report)
}

#[derive(Serialize)]
struct ClassifyReport {
    phase: PhaseEvidence,
    gap_probe: GapProbe,
    carleman: CarlemanReport,
}

fn cmd_classify(cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = cfg.spec()?;
    let default = config::ClassifyConfig::default();
    let c = cfg.classify.as_ref().unwrap_or(&default);
    let res = BlockResolvent::from_spec(&spec)?;
    let report = ClassifyReport {
        phase: phase_classify(&res, &c.ladder, c.tau)?,
        gap_probe: gap_probe(&spec, c.delta, &c.probe_ladder)?,
        carleman: carleman_check(&spec, c.carleman_n)?,
    };
    output::write_json(out, "classify.json", &report)
}

#[derive(Serialize)]
struct DensitySummary<'a> {
    residue: usize,
    collar: f64,
    gap: &'a GapInterval,
    lambda: &'a [(f64, f64)],
    h_coefficients: &'a [f64],
    points: usize,
    all_converged: bool,
    monitor: &'a IncrementMonitor,
    normalization: Option<Normalization>,
    comparison: Option<CdfComparison>,
}

fn cmd_density(cfg: &RunConfig, out: &Path) -> Result<Option<Unconverged>> {
    let spec = cfg.spec()?;
    let Some(d) = &cfg.density else {
        bail!("config has no \"density\" section");
    };
    let grid = d.grid()?;
    let opts = DensityOpts {
        series: SeriesOpts {
            rel_tol: d.rel_tol,
            k_max: d.k_max,
            ..SeriesOpts::default()
        },
        collar: d.collar,
    };
    let ctx = TuranContext::new(&spec, d.residue, &opts)?;
    let profile = if d.to_edge {
        ctx.density_to_edge(&grid)?
    } else {
        ctx.density(&grid)?
    };
    output::write_text(out, "density.csv", &profile.to_csv())?;
    let normalization = if d.normalization {
        Some(ctx.normalization(d.normalization_tol)?)
    } else {
        None
    };
    let comparison = match &d.compare {
        Some(c) => {
            let measure = section_measure(&spec, c.m)?;
            output::write_text(out, "measure.csv", &measure.to_csv())?;
            Some(cdf_compare(&profile, &measure, c.lo, c.hi)?)
        }
        None => None,
    };
    let summary = DensitySummary {
        residue: d.residue,
        collar: ctx.collar,
        gap: &ctx.h.interval,
        lambda: &ctx.h.lambda_set,
        h_coefficients: ctx.h.h.coeffs(),
        points: profile.points.len(),
        all_converged: profile.all_converged(),
        monitor: &ctx.monitor,
        normalization,
        comparison,
    };
    output::write_json(out, "density_summary.json", &summary)?;
    let stalled = profile.points.iter().filter(|p| !p.converged).count()
        + summary.normalization.as_ref().map_or(0, |n| n.unconverged);
    Ok((stalled > 0).then(|| Unconverged(format!("{stalled} Turán series did not converge; see density.csv"))))
}

#[derive(Serialize)]
struct InverseCheck {
    size: usize,
    x: f64,
    residual: f64,
}

#[derive(Serialize)]
struct ResolventReport {
    #[serde(rename = "N")]
    n: usize,
    gamma: f64,
    dn_inv: Vec<Vec<f64>>,
    f: Vec<Vec<f64>>,
    block_identities: BlockIdentities,
    f_section_residual: f64,
    blocks: usize,
    section_product: SectionProductCheck,
    witness_blocks: usize,
    witness: Witness,
    inverse: Option<InverseCheck>,
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn cmd_resolvent(cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = cfg.spec()?;
    let default = config::ResolventConfig::default();
    let c = cfg.resolvent.as_ref().unwrap_or(&default);
    let res = BlockResolvent::from_spec(&spec)?;
    let inverse = match &c.inverse {
        Some(i) => {
            Some(InverseCheck {
                size: i.size,
                x: i.x,
                residual: inverse_residual(res.modulation(), i.size, i.x)?,
            })
        }
        None => None,
    };
    let report = ResolventReport {
        n: res.period(),
        gamma: res.gamma(),
        dn_inv: rows(res.dn_inv()),
        f: rows(res.f()),
        block_identities: res.block_identities(),
        f_section_residual: res.section_residual(),
        blocks: c.blocks,
        section_product: res.section_product_check(c.blocks)?,
        witness_blocks: c.witness_blocks,
        witness: res.witness(c.witness_blocks)?,
        inverse,
    };
    output::write_json(out, "resolvent.json", &report)
}

fn cmd_validate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = cfg.spec()?;
    let report = softedge::validate::validate(&spec)?;
    output::write_json(out, "validate.json", &report)
}
