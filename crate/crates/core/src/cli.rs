//! Command-line experiment runner behind the `hartree` binary.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, ResponseMode, SolveScheme, Suite};
use crate::dispersion::{dispersion_samples, penrose_margin, penrose_sufficient_check};
use crate::dynamics::{propagate, Drive, PropagateOptions};
use crate::error::{Error, Result};
use crate::io::{read_field, write_csv, write_diagnostics_csv, write_field, write_json, write_trajectory};
use crate::response::{apply_response, invert_response, linear_solve, ResponseKernel};
use crate::solver::{scattering_diagnostic, solve_direct, solve_fixed_point, FixedPointConfig, Problem};
use crate::spectral::{PotentialField, SpaceTimeField, C64};
use crate::verify::{default_probe, hs_identity_check, strichartz_ladder, weight_sum_bound};

pub const OUT_DIR_ENV: &str = "HARTREE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "hartree", version, about = "Stability scans and simulations for the Hartree equation around homogeneous states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides HARTREE_OUT_DIR and the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all available cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scan profiles that fail the moment hypothesis anyway.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Penrose margin scan over the closed half-plane.
    Penrose {
        #[command(flatten)]
        common: Common,
    },
    /// 1 + 2ŵM along an ω line at fixed τ and |ξ|.
    Dispersion {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
        omega_min: f64,
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        omega_max: f64,
        #[arg(long, default_value_t = 1.0)]
        xi: f64,
        #[arg(long, default_value_t = 201)]
        steps: usize,
    },
    /// Apply or invert 1 + 𝓛 on a stored field, or solve the linearized problem.
    Respond {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<ResponseMode>,
        /// Input field (binary with JSON sidecar); required for apply and invert.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Nonlinear evolution around the background.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        scheme: Option<SolveScheme>,
    },
    /// Estimate checks.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        suite: Option<Suite>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Penrose { common }
            | Command::Dispersion { common, .. }
            | Command::Respond { common, .. }
            | Command::Simulate { common, .. }
            | Command::Verify { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Penrose { .. } => "penrose",
            Command::Dispersion { .. } => "dispersion",
            Command::Respond { .. } => "respond",
            Command::Simulate { .. } => "simulate",
            Command::Verify { .. } => "verify",
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged { .. } => 2,
        Error::DiagnosticBreach { .. } => 3,
        _ => 1,
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    schema: String,
    config_path: String,
    config_sha256: String,
    config: &'a ExperimentConfig,
    seed: u64,
    threads: usize,
    arguments: Vec<String>,
    status: &'a str,
    wall_time_seconds: f64,
    artifacts: &'a [String],
}

struct Ctx {
    cfg: ExperimentConfig,
    out: PathBuf,
    seed: u64,
    force: bool,
    artifacts: Vec<String>,
}

impl Ctx {
    fn path(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.to_string());
        self.out.join(name)
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let shown: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run(&cli.command, &shown) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cmd: &Command, argv: &[String]) -> Result<()> {
    let common = cmd.common();
    let raw = std::fs::read(&common.config).map_err(|e| Error::io(&common.config, e))?;
    let cfg = ExperimentConfig::load(&common.config)?;
    let out = common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| cfg.output.dir.clone());
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let threads = common
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let seed = common.seed.unwrap_or(cfg.seed);
    let mut ctx = Ctx { cfg, out, seed, force: common.force, artifacts: vec![] };
    let start = Instant::now();
    let result = pool.install(|| dispatch(cmd, &mut ctx));
    let status = match &result {
        Ok(()) => "ok",
        Err(Error::NotConverged { .. }) => "not_converged",
        Err(Error::DiagnosticBreach { .. }) => "diagnostic_breach",
        Err(_) => "failed",
    };
    let manifest = Manifest {
        command: cmd.name(),
        version: env!("CARGO_PKG_VERSION"),
        schema: crate::config::schema()["$id"].as_str().unwrap_or_default().to_string(),
        config_path: common.config.display().to_string(),
        config_sha256: hex::encode(Sha256::digest(&raw)),
        config: &ctx.cfg,
        seed: ctx.seed,
        threads,
        arguments: argv.to_vec(),
        status,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        artifacts: &ctx.artifacts,
    };
    write_json(&ctx.out.join("manifest.json"), &manifest)?;
    result
}

fn dispatch(cmd: &Command, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        Command::Penrose { .. } => penrose(ctx),
        Command::Dispersion { tau, omega_min, omega_max, xi, steps, .. } => {
            dispersion(ctx, *tau, *omega_min, *omega_max, *xi, *steps)
        }
        Command::Respond { mode, input, .. } => respond(ctx, mode.unwrap_or(ctx.cfg.response.mode), input.clone()),
        Command::Simulate { scheme, .. } => simulate(ctx, scheme.unwrap_or(ctx.cfg.solver.scheme)),
        Command::Verify { suite, .. } => verify(ctx, suite.unwrap_or(ctx.cfg.verify.suite)),
    }
}

#[derive(Serialize)]
struct ScanRow {
    tau: f64,
    omega: f64,
    xi: f64,
    re: f64,
    im: f64,
    abs: f64,
}

fn penrose(ctx: &mut Ctx) -> Result<()> {
    let p = ctx.cfg.profile()?;
    let w = ctx.cfg.potential()?;
    let scan = ctx.cfg.scan.to_scan_config(ctx.force);
    let report = penrose_margin(&p, &w, &scan)?;
    write_json(&ctx.path("report.json"), &report)?;
    let rows: Vec<ScanRow> = report
        .grid
        .iter()
        .map(|s| ScanRow { tau: s.tau, omega: s.omega, xi: s.xi, re: s.value.re, im: s.value.im, abs: s.abs() })
        .collect();
    write_csv(&ctx.path("scan.csv"), &rows)?;
    if p.is_radial() {
        write_json(&ctx.path("sufficiency.json"), &penrose_sufficient_check(&p, &w)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DispersionRow {
    tau: f64,
    omega: f64,
    xi: f64,
    m_re: f64,
    m_im: f64,
    re: f64,
    im: f64,
    abs: f64,
}

fn dispersion(ctx: &mut Ctx, tau: f64, lo: f64, hi: f64, xi: f64, steps: usize) -> Result<()> {
    if steps < 2 || !(hi > lo) {
        return Err(Error::InvalidInput("need --steps ≥ 2 and --omega-max > --omega-min".into()));
    }
    let p = ctx.cfg.profile()?;
    let w = ctx.cfg.potential()?;
    let omegas: Vec<f64> = (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect();
    let samples = dispersion_samples(&p, &w, tau, &omegas, xi)?;
    let rows: Vec<DispersionRow> = samples
        .iter()
        .map(|s| DispersionRow {
            tau: s.tau,
            omega: s.omega,
            xi: s.xi,
            m_re: s.m.re,
            m_im: s.m.im,
            re: s.penrose_value.re,
            im: s.penrose_value.im,
            abs: s.penrose_value.norm(),
        })
        .collect();
    write_csv(&ctx.path("dispersion.csv"), &rows)?;
    let min = rows.iter().min_by(|a, b| a.abs.total_cmp(&b.abs)).map(|r| (r.omega, r.abs));
    write_json(
        &ctx.path("dispersion.json"),
        &serde_json::json!({ "tau": tau, "xi": xi, "omega_range": [lo, hi], "steps": steps,
            "min_abs": min.map(|m| m.1), "argmin_omega": min.map(|m| m.0) }),
    )?;
    Ok(())
}

fn respond(ctx: &mut Ctx, mode: ResponseMode, input: Option<PathBuf>) -> Result<()> {
    let p = ctx.cfg.profile()?;
    let w = ctx.cfg.potential()?;
    let source = ctx.cfg.kernel_source();
    let out = match mode {
        ResponseMode::Linear => {
            let grid = ctx.cfg.grid()?;
            let time = ctx.cfg.time_grid()?;
            let q = ctx.cfg.initial_state(&grid, ctx.seed)?;
            let k = ResponseKernel::build(&p, &w, &grid, time, source)?;
            linear_solve(&q, &k)?
        }
        ResponseMode::Apply | ResponseMode::Invert => {
            let path = input
                .or_else(|| ctx.cfg.response.input.as_ref().map(|p| ctx.cfg.resolve(p)))
                .ok_or_else(|| Error::InvalidInput("apply and invert need --input".into()))?;
            let f = read_field(&path)?;
            let k = ResponseKernel::build(&p, &w, &f.grid, f.time, source)?;
            if mode == ResponseMode::Apply {
                f.add(&apply_response(&k, &f)?)
            } else {
                invert_response(&k, &f)?
            }
        }
    };
    write_field(&ctx.path("response.bin"), &out)?;
    ctx.artifacts.push("response.json".into());
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceRow {
    iter: usize,
    residual: f64,
    factor: Option<f64>,
}

fn simulate(ctx: &mut Ctx, scheme: SolveScheme) -> Result<()> {
    let cfg = ctx.cfg.clone();
    let p = cfg.profile()?;
    let w = cfg.potential()?;
    let grid = cfg.grid()?;
    let time = cfg.time_grid()?;
    let q = cfg.initial_state(&grid, ctx.seed)?;
    let opts = PropagateOptions {
        store_stride: cfg.time.store_stride,
        s: cfg.solver.s.unwrap_or(crate::solver::default_sobolev_index(cfg.dimension).0),
        rule: cfg.solver.density_rule,
        background: Some(p.clone()),
        ..Default::default()
    };
    let traj = match scheme {
        SolveScheme::Direct => match solve_direct(&q, &p, &w, time, cfg.self_consistent(), &opts) {
            Ok(d) => {
                write_json(&ctx.path("initial_norm.json"), &serde_json::json!({ "initial_norm": d.initial_norm }))?;
                d.trajectory
            }
            Err(Error::DiagnosticBreach { step, reason, ledger }) => {
                write_diagnostics_csv(&ctx.path("diagnostics.csv"), &ledger)?;
                return Err(Error::DiagnosticBreach { step, reason, ledger });
            }
            Err(e) => return Err(e),
        },
        SolveScheme::FixedPoint => {
            let fp_cfg = FixedPointConfig {
                tol: cfg.solver.tol,
                max_iter: cfg.solver.max_iter,
                damping: cfg.solver.damping,
                s: cfg.solver.s,
            };
            let problem = Problem { profile: &p, potential: &w, q_in: &q, time, rule: cfg.solver.density_rule };
            let outcome = solve_fixed_point(problem, &fp_cfg);
            let history = match &outcome {
                Ok(o) => o.history.clone(),
                Err(Error::NotConverged { history, .. }) => history.clone(),
                Err(_) => vec![],
            };
            let rows: Vec<ConvergenceRow> =
                history.iter().map(|r| ConvergenceRow { iter: r.iteration, residual: r.residual, factor: r.factor }).collect();
            write_csv(&ctx.path("convergence.csv"), &rows)?;
            let o = outcome?;
            if cfg.output.wants("bin") {
                write_field(&ctx.path("fixed_point_density.bin"), &o.density)?;
                ctx.artifacts.push("fixed_point_density.json".into());
            }
            let v = PotentialField::from_density(&w, &o.density.real_part());
            propagate(&q, &Drive::Prescribed(&v), time, &opts)?
        }
    };
    if cfg.output.wants("bin") {
        write_trajectory(&ctx.path("trajectory"), &traj)?;
    } else {
        write_diagnostics_csv(&ctx.path("diagnostics.csv"), &traj.ledger)?;
    }
    let [a, b] = cfg.solver.scattering_window.unwrap_or([0.0, time.t_final()]);
    match scattering_diagnostic(&traj, a, b) {
        Ok(r) => write_json(&ctx.path("scattering.json"), &r)?,
        Err(Error::InvalidInput(m)) => eprintln!("scattering report skipped: {m}"),
        Err(e) => return Err(e),
    }
    Ok(())
}

#[derive(Serialize)]
struct RatioRow {
    level: usize,
    n: usize,
    sample: usize,
    rank: usize,
    ratio: f64,
}

fn verify(ctx: &mut Ctx, suite: Suite) -> Result<()> {
    let cfg = ctx.cfg.clone();
    let v = &cfg.verify;
    match suite {
        Suite::Strichartz => {
            let params = v.strichartz_params(cfg.dimension);
            let r = strichartz_ladder(&cfg.grid()?, cfg.time_grid()?, &params, v.n_samples, ctx.seed, v.levels)?;
            let mut rows = vec![];
            for (l, s) in r.levels.iter().enumerate() {
                for (i, (rank, ratio)) in s.ranks.iter().zip(&s.ratios).enumerate() {
                    rows.push(RatioRow { level: l, n: s.n, sample: i, rank: *rank, ratio: *ratio });
                }
            }
            write_json(&ctx.path("strichartz.json"), &r)?;
            write_csv(&ctx.path("ratios.csv"), &rows)?;
        }
        Suite::Hs => {
            let grid = cfg.grid()?;
            let time = cfg.time_grid()?;
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let mut checks = vec![];
            for _ in 0..v.hs_fields {
                let mut f = SpaceTimeField::zeros(&grid, time);
                for v in f.data.iter_mut() {
                    *v = C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal));
                }
                checks.push(hs_identity_check(&f, v.alpha1, v.alpha2));
            }
            let worst = checks.iter().map(|c| c.rel_err).fold(0.0, f64::max);
            write_json(&ctx.path("hs.json"), &serde_json::json!({ "checks": checks, "max_rel_err": worst }))?;
        }
        Suite::Weights => {
            let r = weight_sum_bound(cfg.dimension, v.alpha1, v.alpha2, &default_probe())?;
            write_csv(&ctx.path("weights.csv"), &r.points)?;
            write_json(&ctx.path("weights.json"), &r)?;
        }
    }
    Ok(())
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}
