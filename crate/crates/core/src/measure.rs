//! One-step and multi-period Radon-Nikodym kernels.
//!
//! The one-step kernel factors into a Girsanov term on the diffusion increment
//! and a normalized Esscher term on the jump. All kernels are built in log
//! space; path kernels sum logs and exponentiate once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esscher::{cgf_unchecked, RiskNeutralSpec, RiskPremia};
use crate::model::{ModelParams, Region};
use crate::normal;

/// Which jump fired in a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JumpKind {
    Up,
    Down,
    None,
}

impl JumpKind {
    pub fn label(self) -> &'static str {
        match self {
            JumpKind::Up => "up",
            JumpKind::Down => "down",
            JumpKind::None => "none",
        }
    }
}

/// Diffusion increment and jump outcome of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    /// Increment of the physical Brownian motion over the step.
    pub dw: f64,
    pub region: Region,
    pub jump_kind: JumpKind,
    /// Log-jump size, zero when no jump fired.
    pub jump_size: f64,
}

impl StepOutcome {
    pub fn no_jump(dw: f64, region: Region) -> Self {
        Self {
            dw,
            region,
            jump_kind: JumpKind::None,
            jump_size: 0.0,
        }
    }

    /// Checks the outcome against the region partition of `params`.
    pub fn check(&self, params: &ModelParams) -> Result<()> {
        let expected = params.region_of(self.dw);
        if expected != self.region {
            return Err(Error::InconsistentOutcome(format!(
                "dw = {} lies in region {:?}, outcome says {:?}",
                self.dw, expected, self.region
            )));
        }
        if self.region == Region::Normal && self.jump_kind != JumpKind::None {
            return Err(Error::InconsistentOutcome(
                "jump recorded in the normal region".into(),
            ));
        }
        if self.jump_kind == JumpKind::None && self.jump_size != 0.0 {
            return Err(Error::InconsistentOutcome(
                "non-zero jump size without a jump".into(),
            ));
        }
        Ok(())
    }
}

/// Log of the Girsanov kernel `exp(-g s dw - (g s)^2 tau / 2)`.
#[inline]
pub fn log_diffusion_kernel(dw: f64, params: &ModelParams, premia: &RiskPremia) -> f64 {
    let gs = premia.gamma_d * params.sigma;
    -gs * dw - 0.5 * gs * gs * params.tau
}

/// Girsanov kernel on the diffusion increment.
pub fn diffusion_kernel(dw: f64, params: &ModelParams, premia: &RiskPremia) -> f64 {
    log_diffusion_kernel(dw, params, premia).exp()
}

/// Log of the normalized Esscher kernel; assumes a consistent outcome.
#[inline]
pub(crate) fn log_jump_kernel_unchecked(
    outcome: &StepOutcome,
    rn: &RiskNeutralSpec,
    premia: &RiskPremia,
) -> f64 {
    let Some(q) = rn.region(outcome.region) else {
        return 0.0;
    };
    let (eta_up, eta_down) = premia.etas(outcome.region);
    let tilt = match outcome.jump_kind {
        JumpKind::Up => eta_up * outcome.jump_size,
        JumpKind::Down => eta_down * outcome.jump_size,
        JumpKind::None => 0.0,
    };
    tilt - q.z.ln()
}

pub fn log_jump_kernel(
    outcome: &StepOutcome,
    rn: &RiskNeutralSpec,
    params: &ModelParams,
    premia: &RiskPremia,
) -> Result<f64> {
    outcome.check(params)?;
    Ok(log_jump_kernel_unchecked(outcome, rn, premia))
}

/// Normalized Esscher kernel: `e^{eta J}/Z_j` on a jump, `1/Z_j` on no jump
/// inside trigger region `j`, and 1 in the normal region.
pub fn jump_kernel(
    outcome: &StepOutcome,
    rn: &RiskNeutralSpec,
    params: &ModelParams,
    premia: &RiskPremia,
) -> Result<f64> {
    log_jump_kernel(outcome, rn, params, premia).map(f64::exp)
}

#[inline]
pub(crate) fn log_step_kernel_unchecked(
    outcome: &StepOutcome,
    rn: &RiskNeutralSpec,
    params: &ModelParams,
    premia: &RiskPremia,
) -> f64 {
    log_diffusion_kernel(outcome.dw, params, premia) + log_jump_kernel_unchecked(outcome, rn, premia)
}

/// One-step Radon-Nikodym density, the product of the two kernels.
pub fn step_kernel(
    outcome: &StepOutcome,
    rn: &RiskNeutralSpec,
    params: &ModelParams,
    premia: &RiskPremia,
) -> Result<f64> {
    outcome.check(params)?;
    Ok(log_step_kernel_unchecked(outcome, rn, params, premia).exp())
}

/// Log of the multi-period density; zero for an empty path.
pub fn log_path_kernel(
    steps: &[StepOutcome],
    rn: &RiskNeutralSpec,
    params: &ModelParams,
    premia: &RiskPremia,
) -> Result<f64> {
    steps.iter().try_fold(0.0, |acc, s| {
        s.check(params)?;
        Ok(acc + log_step_kernel_unchecked(s, rn, params, premia))
    })
}

/// Multi-period density: product of independent one-step kernels.
pub fn path_kernel(
    steps: &[StepOutcome],
    rn: &RiskNeutralSpec,
    params: &ModelParams,
    premia: &RiskPremia,
) -> Result<f64> {
    log_path_kernel(steps, rn, params, premia).map(f64::exp)
}

/// Closed-form `E_P[Psi | dW in region]`.
pub fn conditional_jump_kernel_mean(
    region: Region,
    params: &ModelParams,
    rn: &RiskNeutralSpec,
    premia: &RiskPremia,
) -> f64 {
    let (Some(spec), Some(q)) = (params.region_spec(region), rn.region(region)) else {
        return 1.0;
    };
    let (eta_up, eta_down) = premia.etas(region);
    let unnormalized = spec.p_up * cgf_unchecked(&spec.law_up, eta_up).exp()
        + spec.p_down * cgf_unchecked(&spec.law_down, eta_down).exp()
        + spec.p_none;
    unnormalized / q.z
}

/// Semi-analytic `E_P[L_tau]`.
///
/// Integrating the Girsanov kernel against the `N(0, tau)` density over an
/// interval gives the mass of `N(-gamma_d sigma tau, tau)` on that interval, so
/// the expectation is a sum of Gaussian CDF weights times the conditional
/// jump-kernel mean of each region.
pub fn expected_step_kernel(params: &ModelParams, premia: &RiskPremia, rn: &RiskNeutralSpec) -> f64 {
    let st = params.sqrt_tau();
    let shift = premia.gamma_d * params.sigma * params.tau;
    let a = (params.lower_cut() + shift) / st;
    let b = (params.upper_cut() + shift) / st;
    let w_down = normal::cdf(a);
    let w_up = normal::cdf(-b);
    let w_normal = 1.0 - w_down - w_up;
    w_down * conditional_jump_kernel_mean(Region::Down, params, rn, premia)
        + w_normal * conditional_jump_kernel_mean(Region::Normal, params, rn, premia)
        + w_up * conditional_jump_kernel_mean(Region::Up, params, rn, premia)
}
