//! Batch CLI over the paretolab library: closed-form exponents, parameter
//! sweeps, grid fixed points, confiscation runs, Monte Carlo populations and
//! multi-class mixes, emitted as plot-ready CSV and full-precision JSON.
//!
//! One command per process; rerunning an invocation (same flags, same seed)
//! reproduces every output byte for byte. `PARETOLAB_THREADS` caps the worker
//! pool without changing any result.
//!
//! Exit codes: 0 success; 2 usage or validation problem; 3 numerical failure
//! (the requested quantity does not exist for these inputs).

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use paretolab::io::{
    load_mix_config, to_json_string, write_grid_csv, write_samples_csv, write_steps_csv,
    write_sweep_csv,
};
use paretolab::{
    confiscation_experiment, derive_coefficients, exponent_sweep, find_tail_root,
    pareto_exponent, pareto_fixed_point, residual, run_mc, run_mc_mix, tail_mass_threshold,
    validate_params, ConvergenceTrace, Error, Result, SolutionBranch, SweepParameter,
    DEFAULT_CELL_CAP,
};

#[derive(Parser)]
#[command(
    name = "paretolab",
    version,
    about = "Pareto tails of a dissipative multiplicative wealth model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form tail exponent for one parameter set.
    Exponent(ExponentArgs),
    /// Table of alpha along one swept parameter (CSV `value,alpha`).
    Sweep(SweepArgs),
    /// Sample an invariant density on a log grid and report its residual.
    Solve(SolveArgs),
    /// Confiscation experiment: cut the tail, watch the distance decay.
    Stability(StabilityArgs),
    /// Agent population Monte Carlo with kill/reinjection dissipation.
    Mc(McArgs),
    /// Tail root of a heterogeneous class mix from a config file.
    Multiclass(MulticlassArgs),
}

/// The (p, gamma, kappa) triple shared by the single-class commands.
#[derive(Args)]
struct ParamArgs {
    /// Win probability, in (0,1).
    #[arg(long)]
    p: f64,
    /// Bet fraction, > 0.
    #[arg(long)]
    gamma: f64,
    /// Dissipation coefficient, >= 1.
    #[arg(long)]
    kappa: f64,
}

#[derive(Args)]
struct ExponentArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Emit one JSON object instead of aligned text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum VaryParam {
    P,
    Gamma,
    Kappa,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Which parameter the sweep varies; the other two stay fixed.
    #[arg(long, value_enum)]
    vary: VaryParam,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    /// Number of sweep points, endpoints included.
    #[arg(long)]
    steps: usize,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Sound,
    Growing,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Grid cells per multiplicative period log(1+gamma).
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    x_min: f64,
    #[arg(long, default_value_t = 1e6)]
    x_max: f64,
    /// Comma-separated m-periodic modulation values; constant 1 when omitted.
    #[arg(long)]
    modulation: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Which characteristic root the sampled solution realizes.
    #[arg(long, value_enum, default_value_t = BranchArg::Sound)]
    branch: BranchArg,
    /// Where the sampled grid CSV goes.
    #[arg(long)]
    grid_out: PathBuf,
    /// Residual report JSON path; stdout when omitted.
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    x_min: f64,
    #[arg(long, default_value_t = 1e8)]
    x_max: f64,
    /// Confiscation threshold: a wealth value, or `auto` for the level that
    /// cuts off the top 10% of invariant tail mass.
    #[arg(long, default_value = "auto")]
    xc: String,
    /// Operator applications to run.
    #[arg(long)]
    steps: usize,
    /// Permit kappa = 1, where the distance is conserved instead of decaying.
    #[arg(long)]
    allow_critical: bool,
    /// Report JSON path; stdout when omitted.
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Optional per-step `step,distance,ratio` CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    /// Win probability; use --config for a class mix instead.
    #[arg(long, conflicts_with = "config")]
    p: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    gamma: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    kappa: Option<f64>,
    /// Class-mix JSON file: {"kappa": .., "classes": [{"p","q","gamma"}, ..]}.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    agents: usize,
    #[arg(long)]
    steps: usize,
    /// Steps regarded as transient; recorded in the run description.
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wealth at which killed agents respawn.
    #[arg(long, default_value_t = 1.0)]
    reinject_at: f64,
    /// Hill order statistics; top 1% of agents when omitted.
    #[arg(long)]
    hill_k: Option<usize>,
    /// Optional wealth-sample CSV (one `wealth` column).
    #[arg(long)]
    samples_out: Option<PathBuf>,
    /// Tail-estimate JSON path; stdout when omitted.
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct MulticlassArgs {
    /// Class-mix JSON file: {"kappa": .., "classes": [{"p","q","gamma"}, ..]}.
    #[arg(long)]
    config: PathBuf,
    /// Root report JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ExponentOutput {
    p: f64,
    gamma: f64,
    kappa: f64,
    lambda: f64,
    a: f64,
    b: f64,
    x1: f64,
    x2: f64,
    rho0: f64,
    rho1: f64,
    alpha: f64,
}

#[derive(Serialize)]
struct SolveReport {
    p: f64,
    gamma: f64,
    kappa: f64,
    m: usize,
    branch: &'static str,
    cells: usize,
    residual: f64,
}

#[derive(Serialize)]
struct McReport {
    agents: usize,
    steps: usize,
    burn_in: usize,
    seed: u64,
    reinject_at: f64,
    estimate: paretolab::TailEstimate,
}

#[derive(Serialize)]
struct MulticlassReport {
    kappa: f64,
    classes: usize,
    rho0: f64,
    alpha: f64,
    residual: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("{msg}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

/// Apply PARETOLAB_THREADS before any parallel work starts.
fn configure_threads() -> std::result::Result<(), String> {
    let raw = match std::env::var("PARETOLAB_THREADS") {
        Ok(raw) => raw,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(format!("PARETOLAB_THREADS: {e}")),
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("PARETOLAB_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("PARETOLAB_THREADS: {e}"))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Exponent(args) => cmd_exponent(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Stability(args) => cmd_stability(args),
        Command::Mc(args) => cmd_mc(args),
        Command::Multiclass(args) => cmd_multiclass(args),
    }
}

/// Run `emit` against the file at `path`, or stdout when there is none.
fn with_output<F>(path: Option<&PathBuf>, emit: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(p) => {
            let mut w = io::BufWriter::new(fs::File::create(p)?);
            emit(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            emit(&mut w)
        }
    }
}

fn emit_json<T: Serialize>(path: Option<&PathBuf>, value: &T) -> Result<()> {
    let json = to_json_string(value)?;
    with_output(path, |w| {
        writeln!(w, "{json}")?;
        Ok(())
    })
}

fn cmd_exponent(args: ExponentArgs) -> Result<()> {
    let params = validate_params(args.params.p, args.params.gamma, args.params.kappa)?;
    let coeffs = derive_coefficients(&params);
    let rep = pareto_exponent(&params)?;
    let out = ExponentOutput {
        p: params.p,
        gamma: params.gamma,
        kappa: params.kappa,
        lambda: coeffs.lambda,
        a: coeffs.a,
        b: coeffs.b,
        x1: rep.x1,
        x2: rep.x2,
        rho0: rep.rho0,
        rho1: rep.rho1,
        alpha: rep.alpha,
    };
    if args.json {
        return emit_json(None, &out);
    }
    let rows = [
        ("p", out.p),
        ("gamma", out.gamma),
        ("kappa", out.kappa),
        ("lambda", out.lambda),
        ("a", out.a),
        ("b", out.b),
        ("x1", out.x1),
        ("x2", out.x2),
        ("rho0", out.rho0),
        ("rho1", out.rho1),
        ("alpha", out.alpha),
    ];
    with_output(None, |w| {
        for (name, value) in rows {
            writeln!(w, "{name:<8}{value:.16e}")?;
        }
        Ok(())
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let base = validate_params(args.params.p, args.params.gamma, args.params.kappa)?;
    let which = match args.vary {
        VaryParam::P => SweepParameter::P,
        VaryParam::Gamma => SweepParameter::Gamma,
        VaryParam::Kappa => SweepParameter::Kappa,
    };
    let table = exponent_sweep(&base, which, args.from, args.to, args.steps)?;
    with_output(args.out.as_ref(), |mut w| write_sweep_csv(&mut w, &table))
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let params = validate_params(args.params.p, args.params.gamma, args.params.kappa)?;
    let modulation = match &args.modulation {
        Some(raw) => raw
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("--modulation: not a number: {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?,
        None => vec![1.0; args.m],
    };
    let branch = match args.branch {
        BranchArg::Sound => SolutionBranch::Sound,
        BranchArg::Growing => SolutionBranch::Growing,
    };
    let grid = pareto_fixed_point(
        &params,
        args.m,
        args.x_min,
        args.x_max,
        &modulation,
        args.scale,
        branch,
    )?;
    let defect = residual(&grid, &params)?;
    with_output(Some(&args.grid_out), |mut w| write_grid_csv(&mut w, &grid))?;
    let report = SolveReport {
        p: params.p,
        gamma: params.gamma,
        kappa: params.kappa,
        m: args.m,
        branch: match args.branch {
            BranchArg::Sound => "sound",
            BranchArg::Growing => "growing",
        },
        cells: grid.len(),
        residual: defect,
    };
    emit_json(args.report_out.as_ref(), &report)
}

fn cmd_stability(args: StabilityArgs) -> Result<()> {
    let params = validate_params(args.params.p, args.params.gamma, args.params.kappa)?;
    let x_c = if args.xc == "auto" {
        let ones = vec![1.0; args.m];
        let f0 = pareto_fixed_point(
            &params,
            args.m,
            args.x_min,
            args.x_max,
            &ones,
            1.0,
            SolutionBranch::Sound,
        )?;
        tail_mass_threshold(&f0, 0.1)?
    } else {
        args.xc.parse::<f64>().map_err(|_| {
            Error::Parse(format!("--xc must be a wealth value or 'auto', got {:?}", args.xc))
        })?
    };
    let report = confiscation_experiment(
        &params,
        args.m,
        args.x_min,
        args.x_max,
        x_c,
        args.steps,
        args.allow_critical,
        DEFAULT_CELL_CAP,
    )?;
    if let Some(path) = &args.trace_out {
        let trace = ConvergenceTrace {
            distances: report.d.clone(),
            ratios: report.ratios.clone(),
            steps: report.d.len().saturating_sub(1),
            epsilon: report.epsilon,
        };
        with_output(Some(path), |mut w| write_steps_csv(&mut w, &trace))?;
    }
    emit_json(args.report_out.as_ref(), &report)
}

fn cmd_mc(args: McArgs) -> Result<()> {
    let (wealths, estimate) = match &args.config {
        Some(path) => {
            let mix = load_mix_config(path)?;
            run_mc_mix(
                &mix,
                args.agents,
                args.steps,
                args.burn_in,
                args.seed,
                args.reinject_at,
                args.hill_k,
            )?
        }
        None => {
            let (p, gamma, kappa) = match (args.p, args.gamma, args.kappa) {
                (Some(p), Some(g), Some(k)) => (p, g, k),
                _ => {
                    return Err(Error::OutOfRange(
                        "mc needs --p, --gamma and --kappa, or --config".into(),
                    ))
                }
            };
            let params = validate_params(p, gamma, kappa)?;
            run_mc(
                &params,
                args.agents,
                args.steps,
                args.burn_in,
                args.seed,
                args.reinject_at,
                args.hill_k,
            )?
        }
    };
    if let Some(path) = &args.samples_out {
        with_output(Some(path), |mut w| write_samples_csv(&mut w, &wealths))?;
    }
    let report = McReport {
        agents: args.agents,
        steps: args.steps,
        burn_in: args.burn_in,
        seed: args.seed,
        reinject_at: args.reinject_at,
        estimate,
    };
    emit_json(args.report_out.as_ref(), &report)
}

fn cmd_multiclass(args: MulticlassArgs) -> Result<()> {
    let mix = load_mix_config(&args.config)?;
    let root = find_tail_root(&mix)?;
    let report = MulticlassReport {
        kappa: mix.kappa,
        classes: mix.entries.len(),
        rho0: root.rho0,
        alpha: root.alpha,
        residual: root.residual,
    };
    emit_json(args.out.as_ref(), &report)
}
