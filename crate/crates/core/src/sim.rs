//! Path simulation under the physical and the risk-neutral measure.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::no_arbitrage_drift;
use crate::error::{Error, Result};
use crate::esscher::{RiskNeutralSpec, RiskPremia};
use crate::measure::{JumpKind, StepOutcome};
use crate::model::{JumpLaw, ModelParams};
use crate::rng::{SeedSpec, StepUniforms};

/// A simulated price path. `prices[0]` is `s0`; `prices[i + 1]` follows step `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub s0: f64,
    pub steps: Vec<StepOutcome>,
    pub log_returns: Vec<f64>,
    pub prices: Vec<f64>,
}

impl Path {
    pub fn terminal(&self) -> f64 {
        *self.prices.last().expect("prices always holds s0")
    }
}

/// Which drift the risk-neutral simulator plugs into the log-return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriftMode {
    /// Replace `mu` by the no-arbitrage drift.
    NoArbitrage,
    /// Use `params.mu` as given.
    Params,
}

/// Measure a simulator draws from.
#[derive(Debug, Clone, Copy)]
pub enum Measure {
    Physical,
    RiskNeutral { premia: RiskPremia, rn: RiskNeutralSpec },
}

/// Per-path step generator shared by both measures.
#[derive(Debug, Clone, Copy)]
pub struct Simulator {
    params: ModelParams,
    measure: Measure,
    seeds: SeedSpec,
    drift: f64,
}

impl Simulator {
    pub fn physical(params: &ModelParams, seeds: SeedSpec) -> Result<Self> {
        let params = params.checked()?;
        Ok(Self {
            drift: params.mu,
            params,
            measure: Measure::Physical,
            seeds,
        })
    }

    pub fn risk_neutral(
        params: &ModelParams,
        premia: &RiskPremia,
        rn: &RiskNeutralSpec,
        mode: DriftMode,
        seeds: SeedSpec,
    ) -> Result<Self> {
        let params = params.checked()?;
        premia.check()?;
        let drift = match mode {
            DriftMode::NoArbitrage => no_arbitrage_drift(&params, premia)?.mu,
            DriftMode::Params => params.mu,
        };
        Ok(Self {
            params,
            measure: Measure::RiskNeutral { premia: *premia, rn: *rn },
            seeds,
            drift,
        })
    }

    /// Drift plugged into the log-return.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Turns one step's uniforms into an outcome.
    ///
    /// Under Q the Q-Brownian increment is drawn and the physical increment
    /// `x = dW^Q - gamma_d sigma tau` selects the region; jump type and size
    /// follow the tilted probabilities and laws.
    pub fn outcome(&self, u: &StepUniforms) -> StepOutcome {
        let p = &self.params;
        let z = u.diffusion_normal() * p.sqrt_tau();
        let dw = match &self.measure {
            Measure::Physical => z,
            Measure::RiskNeutral { premia, .. } => z - premia.gamma_d * p.sigma * p.tau,
        };
        let region = p.region_of(dw);
        let probs: Option<(f64, f64, JumpLaw, JumpLaw)> = match &self.measure {
            Measure::Physical => p
                .region_spec(region)
                .map(|s| (s.p_up, s.p_down, s.law_up, s.law_down)),
            Measure::RiskNeutral { rn, .. } => rn
                .region(region)
                .map(|q| (q.q_up, q.q_down, q.law_up, q.law_down)),
        };
        let Some((p_up, p_down, law_up, law_down)) = probs else {
            return StepOutcome::no_jump(dw, region);
        };
        let (kind, law) = if u.selector < p_up {
            (JumpKind::Up, law_up)
        } else if u.selector < p_up + p_down {
            (JumpKind::Down, law_down)
        } else {
            return StepOutcome::no_jump(dw, region);
        };
        StepOutcome {
            dw,
            region,
            jump_kind: kind,
            jump_size: law.nu + law.delta * u.size_normal(),
        }
    }

    pub fn log_return(&self, o: &StepOutcome) -> f64 {
        let p = &self.params;
        (self.drift - 0.5 * p.sigma * p.sigma) * p.tau + p.sigma * o.dw + o.jump_size
    }

    /// Simulates path number `index`.
    pub fn path(&self, index: u64, s0: f64, n_steps: usize) -> Path {
        let mut stream = self.seeds.path_stream(index);
        let mut steps = Vec::with_capacity(n_steps);
        let mut log_returns = Vec::with_capacity(n_steps);
        let mut prices = Vec::with_capacity(n_steps + 1);
        prices.push(s0);
        let mut log_s = s0.ln();
        for k in 0..n_steps {
            let o = self.outcome(&stream.step(k as u64));
            let lr = self.log_return(&o);
            log_s += lr;
            steps.push(o);
            log_returns.push(lr);
            prices.push(log_s.exp());
        }
        Path { s0, steps, log_returns, prices }
    }

    /// Simulates paths `0..n_paths` in parallel and maps each one through `f`.
    /// Results come back in path order regardless of scheduling.
    pub fn map_paths<T, F>(&self, s0: f64, n_steps: usize, n_paths: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&Path) -> T + Sync,
    {
        (0..n_paths as u64)
            .into_par_iter()
            .map(|i| f(&self.path(i, s0, n_steps)))
            .collect()
    }
}

fn check_dims(s0: f64, n_steps: usize, n_paths: usize) -> Result<()> {
    if !(s0 > 0.0 && s0.is_finite()) {
        return Err(Error::InvalidArgument(format!("s0 must be positive, got {s0}")));
    }
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("n_paths must be at least 1".into()));
    }
    Ok(())
}

/// Simulates `n_paths` paths under the physical measure.
pub fn simulate_p(
    params: &ModelParams,
    s0: f64,
    n_steps: usize,
    n_paths: usize,
    seeds: SeedSpec,
) -> Result<Vec<Path>> {
    check_dims(s0, n_steps, n_paths)?;
    let sim = Simulator::physical(params, seeds)?;
    Ok(sim.map_paths(s0, n_steps, n_paths, Path::clone))
}

/// Simulates `n_paths` paths under the risk-neutral measure.
#[allow(clippy::too_many_arguments)]
pub fn simulate_q(
    params: &ModelParams,
    premia: &RiskPremia,
    rn: &RiskNeutralSpec,
    mode: DriftMode,
    s0: f64,
    n_steps: usize,
    n_paths: usize,
    seeds: SeedSpec,
) -> Result<Vec<Path>> {
    check_dims(s0, n_steps, n_paths)?;
    let sim = Simulator::risk_neutral(params, premia, rn, mode, seeds)?;
    Ok(sim.map_paths(s0, n_steps, n_paths, Path::clone))
}

/// Header of the path CSV export.
pub const PATH_CSV_HEADER: [&str; 8] = [
    "path", "step", "dw", "region", "jump_kind", "jump_size", "log_return", "price",
];

/// Writes paths as CSV, one row per step. `step` counts from 1 and `price` is
/// the price after that step.
pub fn write_paths_csv<W: Write>(paths: &[Path], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PATH_CSV_HEADER)?;
    for (i, path) in paths.iter().enumerate() {
        for (k, (o, lr)) in path.steps.iter().zip(&path.log_returns).enumerate() {
            w.write_record([
                i.to_string(),
                (k + 1).to_string(),
                o.dw.to_string(),
                o.region.label().to_string(),
                o.jump_kind.label().to_string(),
                o.jump_size.to_string(),
                lr.to_string(),
                path.prices[k + 1].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
