//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation or diagnostic failure, 2 I/O or parse
//! failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::config::RunConfig;
use crate::diagnostics::{girsanov_moments, path_kernel_mean};
use crate::drift::{calibrate_gamma, no_arbitrage_drift, with_no_arbitrage_mu};
use crate::error::{Error, Result};
use crate::esscher::risk_neutralize;
use crate::measure::expected_step_kernel;
use crate::model::ModelParams;
use crate::oracle::{expect_q_return, expect_step_kernel, GridSpec};
use crate::pricing::{
    black_scholes_reference, martingale_check, price_european, write_prices_csv, Payoff, PricingSetup,
};
use crate::rng::SeedSpec;
use crate::sim::{simulate_p, simulate_q, write_paths_csv, DriftMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_IO: i32 = 2;

/// Largest |z| tolerated by `rn-check`.
pub const RN_CHECK_MAX_Z: f64 = 5.0;
/// Largest absolute error tolerated by the deterministic `rn-check` rows.
pub const RN_CHECK_MAX_ABS: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "jdemm", version, about = "Threshold-triggered jump-diffusion: risk-neutral drift, simulation and pricing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory for CSV files (overrides `output_dir`).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Number of paths override.
    #[arg(long, global = true)]
    pub paths: Option<usize>,

    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the model parameters.
    Validate,
    /// Print the no-arbitrage drift.
    Drift {
        /// Break the drift into its three terms.
        #[arg(long)]
        decompose: bool,
    },
    /// Simulate paths and write them as CSV.
    Simulate {
        #[arg(long, value_enum, default_value_t = MeasureArg::P)]
        measure: MeasureArg,
        /// Drift used by the Q simulation.
        #[arg(long, value_enum, default_value_t = DriftArg::Params)]
        drift: DriftArg,
    },
    /// Price the configured European option.
    Price,
    /// Run the measure-change diagnostics.
    RnCheck,
    /// Solve the drift condition for gamma_d given the configured mu.
    Calibrate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    P,
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DriftArg {
    Params,
    NoArbitrage,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let _ = write!(err, "{e}");
            code
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => {
                let (mut o, mut e) = (Vec::new(), Vec::new());
                let r = pool.install(|| dispatch(cli, &mut o, &mut e));
                let _ = out.write_all(&o);
                let _ = err.write_all(&e);
                r
            }
            Err(e) => Err(Error::InvalidArgument(e.to_string())),
        },
        None => dispatch(cli, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidParams(_)
                | Error::NonFinite(_)
                | Error::InvalidArgument(_)
                | Error::InconsistentOutcome(_)
                | Error::NoRootInBracket { .. }
                | Error::Refinement { .. } => EXIT_FAILED,
                Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_IO,
            }
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "--config is required")))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.sim.master_seed = seed;
    }
    if let Some(n) = cli.paths {
        cfg.sim.n_paths = n;
    }
    Ok(cfg)
}

fn output_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.output
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Prints violations and returns the checked model, or `None` if invalid.
fn checked_model(cfg: &RunConfig, out: &mut dyn Write) -> Result<Option<ModelParams>> {
    let violations = cfg.model.validate();
    if violations.is_empty() {
        return Ok(Some(cfg.model.checked()?));
    }
    for v in violations {
        writeln!(out, "{v}")?;
    }
    Ok(None)
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = match load(cli) {
        Ok(c) => c,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(EXIT_IO);
        }
    };
    let Some(model) = checked_model(&cfg, out)? else {
        return Ok(EXIT_FAILED);
    };
    cfg.premia.check()?;
    match &cli.command {
        Command::Validate => Ok(EXIT_OK),
        Command::Drift { decompose } => cmd_drift(&model, &cfg, *decompose, cli.json, out),
        Command::Simulate { measure, drift } => cmd_simulate(&model, &cfg, *measure, *drift, &output_dir(cli, &cfg), out),
        Command::Price => cmd_price(&model, &cfg, cli.json, &output_dir(cli, &cfg), out, err),
        Command::RnCheck => cmd_rn_check(&model, &cfg, cli.json, out),
        Command::Calibrate => cmd_calibrate(&model, &cfg, cli.json, out),
    }
}

fn cmd_drift(model: &ModelParams, cfg: &RunConfig, decompose: bool, as_json: bool, out: &mut dyn Write) -> Result<i32> {
    let report = no_arbitrage_drift(model, &cfg.premia)?;
    if as_json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else if decompose {
        writeln!(out, "{:<24}{}", "mu", report.mu)?;
        writeln!(out, "{:<24}{}", "risk-free rate", report.risk_free)?;
        writeln!(out, "{:<24}{}", "diffusion risk premium", report.diffusion_premium)?;
        writeln!(out, "{:<24}{}", "jump risk adjustment", report.jump_adjustment)?;
        writeln!(out, "{:<24}{}", "expectation_value", report.expectation_value)?;
    } else {
        writeln!(out, "mu {}", report.mu)?;
    }
    Ok(EXIT_OK)
}

fn create_file(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

fn cmd_simulate(
    model: &ModelParams,
    cfg: &RunConfig,
    measure: MeasureArg,
    drift: DriftArg,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<i32> {
    let seeds = SeedSpec::new(cfg.sim.master_seed);
    let s = &cfg.sim;
    let (paths, name) = match measure {
        MeasureArg::P => (simulate_p(model, s.s0, s.n_steps, s.n_paths, seeds)?, "paths_p.csv"),
        MeasureArg::Q => {
            let rn = risk_neutralize(model, &cfg.premia)?;
            let mode = match drift {
                DriftArg::Params => DriftMode::Params,
                DriftArg::NoArbitrage => DriftMode::NoArbitrage,
            };
            let paths = simulate_q(model, &cfg.premia, &rn, mode, s.s0, s.n_steps, s.n_paths, seeds)?;
            (paths, "paths_q.csv")
        }
    };
    let (path, mut file) = create_file(dir, name)?;
    write_paths_csv(&paths, &mut file)?;
    file.flush()?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

fn cmd_price(
    model: &ModelParams,
    cfg: &RunConfig,
    as_json: bool,
    dir: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let Some(pc) = cfg.pricing else {
        writeln!(err, "error: config has no pricing section")?;
        return Ok(EXIT_IO);
    };
    let payoff = Payoff { kind: pc.payoff, strike: pc.strike };
    let setup = PricingSetup {
        s0: cfg.sim.s0,
        maturity_steps: pc.maturity_steps,
        n_paths: cfg.sim.n_paths,
        seeds: SeedSpec::new(cfg.sim.master_seed),
        drift: DriftMode::NoArbitrage,
    };
    let result = price_european(model, &cfg.premia, payoff, &setup)?;
    let (path, mut file) = create_file(dir, "prices.csv")?;
    write_prices_csv(std::slice::from_ref(&result), &mut file)?;
    file.flush()?;

    let no_jumps = model.region1.p_none == 1.0 && model.region2.p_none == 1.0 && cfg.premia.gamma_d == 0.0;
    let bs = no_jumps.then(|| {
        black_scholes_reference(cfg.sim.s0, pc.strike, model.r, model.sigma, result.maturity, pc.payoff)
    });
    if as_json {
        let v = json!({ "result": result, "black_scholes": bs, "csv": path });
        writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    } else {
        writeln!(out, "{} price {} std_error {} n_paths {}", result.payoff_id, result.price, result.std_error, result.n_paths)?;
        if let Some(bs) = bs {
            writeln!(out, "black-scholes reference {bs}")?;
        }
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(EXIT_OK)
}

struct CheckRow {
    name: &'static str,
    value: f64,
    target: f64,
    /// z-score for Monte Carlo rows, absolute error otherwise.
    score: f64,
    stochastic: bool,
}

impl CheckRow {
    fn passed(&self) -> bool {
        if self.stochastic {
            self.score.abs() <= RN_CHECK_MAX_Z
        } else {
            self.score <= RN_CHECK_MAX_ABS
        }
    }
}

fn cmd_rn_check(model: &ModelParams, cfg: &RunConfig, as_json: bool, out: &mut dyn Write) -> Result<i32> {
    let premia = &cfg.premia;
    let seeds = SeedSpec::new(cfg.sim.master_seed);
    let n = cfg.sim.n_paths.max(2);
    let steps = cfg.sim.n_steps.max(1);
    let rn = risk_neutralize(model, premia)?;
    let arb_free = with_no_arbitrage_mu(model, premia)?;

    let mut rows = Vec::new();
    let closed = expected_step_kernel(model, premia, &rn);
    rows.push(CheckRow { name: "E_P[L] closed form", value: closed, target: 1.0, score: (closed - 1.0).abs(), stochastic: false });
    let quad = expect_step_kernel(model, premia, &rn, &GridSpec::default())?.value;
    rows.push(CheckRow { name: "E_P[L] quadrature", value: quad, target: 1.0, score: (quad - 1.0).abs(), stochastic: false });
    let growth = (model.r * model.tau).exp();
    let ret = expect_q_return(&arb_free, premia, &rn, &GridSpec::default())?.value;
    rows.push(CheckRow { name: "E_Q[S'/S] quadrature", value: ret, target: growth, score: (ret - growth).abs(), stochastic: false });

    let lk = path_kernel_mean(model, premia, n, steps, seeds)?;
    rows.push(CheckRow { name: "E_P[L_path] Monte Carlo", value: lk.mean, target: 1.0, score: lk.z_score(1.0), stochastic: true });
    let g = girsanov_moments(model, premia, n, seeds)?;
    rows.push(CheckRow { name: "E_Q[dW] reweighted", value: g.mean.mean, target: g.mean_target, score: g.mean_z(), stochastic: true });
    rows.push(CheckRow { name: "Var_Q[dW] reweighted", value: g.variance.mean, target: g.variance_target, score: g.variance_z(), stochastic: true });
    let m = martingale_check(model, premia, n, steps, seeds, DriftMode::NoArbitrage)?;
    rows.push(CheckRow { name: "discounted price max|z|", value: m.max_abs_z, target: 0.0, score: m.max_abs_z, stochastic: true });

    let ok = rows.iter().all(CheckRow::passed);
    if as_json {
        let v: Vec<_> = rows
            .iter()
            .map(|r| json!({ "check": r.name, "value": r.value, "target": r.target, "score": r.score, "stochastic": r.stochastic, "passed": r.passed() }))
            .collect();
        writeln!(out, "{}", serde_json::to_string_pretty(&json!({ "checks": v, "passed": ok }))?)?;
    } else {
        writeln!(out, "{:<26} {:>22} {:>22} {:>12}  status", "check", "value", "target", "z / |err|")?;
        for r in &rows {
            writeln!(
                out,
                "{:<26} {:>22.15e} {:>22.15e} {:>12.3e}  {}",
                r.name,
                r.value,
                r.target,
                r.score,
                if r.passed() { "ok" } else { "FAIL" }
            )?;
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_calibrate(model: &ModelParams, cfg: &RunConfig, as_json: bool, out: &mut dyn Write) -> Result<i32> {
    let c = calibrate_gamma(model, &cfg.premia, model.mu)?;
    if as_json {
        writeln!(out, "{}", serde_json::to_string_pretty(&c)?)?;
    } else {
        writeln!(out, "gamma_d {}", c.gamma_d)?;
        if c.non_unique {
            writeln!(out, "warning: {} roots in bracket: {:?}", c.roots.len(), c.roots)?;
        }
        if !c.monotone {
            writeln!(out, "warning: drift is not monotone in gamma_d over the bracket")?;
        }
    }
    Ok(EXIT_OK)
}
