//! Monte Carlo diagnostics of the measure change, shared by the CLI
//! `rn-check` command and the test suites.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::esscher::{risk_neutralize, RiskPremia};
use crate::measure::log_step_kernel_unchecked;
use crate::model::{JumpLaw, ModelParams};
use crate::rng::SeedSpec;
use crate::sim::Simulator;
use crate::stats::MeanEstimate;

/// Monte Carlo mean of the multi-period density over P-paths.
pub fn path_kernel_mean(
    params: &ModelParams,
    premia: &RiskPremia,
    n_paths: usize,
    n_steps: usize,
    seeds: SeedSpec,
) -> Result<MeanEstimate> {
    let rn = risk_neutralize(params, premia)?;
    let sim = Simulator::physical(params, seeds)?;
    let p = *sim.params();
    let kernels = sim.map_paths(1.0, n_steps, n_paths, |path| {
        path.steps
            .iter()
            .map(|o| log_step_kernel_unchecked(o, &rn, &p, premia))
            .sum::<f64>()
            .exp()
    });
    Ok(MeanEstimate::from_samples(&kernels))
}

/// Reweighted first two moments of the diffusion increment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GirsanovReport {
    /// Estimate of `E_Q[dW]` as the P-mean of `L dW`.
    pub mean: MeanEstimate,
    /// `-gamma_d sigma tau`.
    pub mean_target: f64,
    /// Estimate of `Var_Q(dW)` as the P-mean of `L (dW - mean_target)^2`.
    pub variance: MeanEstimate,
    /// `tau`.
    pub variance_target: f64,
}

impl GirsanovReport {
    pub fn mean_z(&self) -> f64 {
        self.mean.z_score(self.mean_target)
    }

    pub fn variance_z(&self) -> f64 {
        self.variance.z_score(self.variance_target)
    }
}

/// One-step P-samples reweighted by the full kernel `L_tau`.
pub fn girsanov_moments(
    params: &ModelParams,
    premia: &RiskPremia,
    n_samples: usize,
    seeds: SeedSpec,
) -> Result<GirsanovReport> {
    let rn = risk_neutralize(params, premia)?;
    let sim = Simulator::physical(params, seeds)?;
    let p = *sim.params();
    let mean_target = -premia.gamma_d * p.sigma * p.tau;
    let pairs: Vec<(f64, f64)> = sim.map_paths(1.0, 1, n_samples, |path| {
        let o = &path.steps[0];
        let l = log_step_kernel_unchecked(o, &rn, &p, premia).exp();
        let c = o.dw - mean_target;
        (l * o.dw, l * c * c)
    });
    let (first, second): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(GirsanovReport {
        mean: MeanEstimate::from_samples(&first),
        mean_target,
        variance: MeanEstimate::from_samples(&second),
        variance_target: p.tau,
    })
}

/// `n` draws from a Normal jump law, one per counter-based stream.
pub fn sample_jump_law(law: &JumpLaw, n: usize, seeds: SeedSpec) -> Vec<f64> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let u = seeds.path_stream(i).step(0);
            law.nu + law.delta * u.size_normal()
        })
        .collect()
}
