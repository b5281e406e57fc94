//! No-arbitrage drift of the physical measure.
//!
//! With constant jump parameters the conditional jump-factor MGF `M_Q(x)` is a
//! three-level step function of the increment, so its expectation under the
//! shifted Gaussian `N(sigma (1 - gamma_d) tau, tau)` reduces to three normal
//! CDF weights.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::esscher::{risk_neutralize, RiskNeutralSpec, RiskPremia};
use crate::model::{ModelParams, Region};
use crate::normal;

/// Search bracket for `gamma_d` calibration.
pub const GAMMA_BRACKET: (f64, f64) = (-50.0, 50.0);
/// Number of scan points used to locate sign changes before refinement.
pub const GAMMA_SCAN_POINTS: usize = 256;

/// The required drift and its three-term decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub mu: f64,
    pub risk_free: f64,
    pub diffusion_premium: f64,
    pub jump_adjustment: f64,
    /// `E[M_Q(X)]` with `X ~ N(shift_mean, tau)`.
    pub expectation_value: f64,
    /// Plateau of `M_Q` below the lower threshold.
    pub m1: f64,
    /// Plateau of `M_Q` above the upper threshold.
    pub m2: f64,
    pub shift_mean: f64,
}

/// `E_Q[e^J | dW = x]`.
pub fn conditional_mgf(x: f64, rn: &RiskNeutralSpec, params: &ModelParams) -> f64 {
    match rn.region(params.region_of(x)) {
        Some(q) => q.jump_factor_mean(),
        None => 1.0,
    }
}

/// Closed-form `E[M_Q(X)]` for `X ~ N(sigma (1 - gamma_d) tau, tau)`.
pub fn gaussian_expectation(rn: &RiskNeutralSpec, params: &ModelParams, premia: &RiskPremia) -> f64 {
    let st = params.sqrt_tau();
    let g_shift = params.sigma * (1.0 - premia.gamma_d) * st;
    let a_d = params.b_down - g_shift;
    let a_u = params.b_up - g_shift;
    let w_down = normal::cdf(a_d);
    let w_up = normal::cdf(-a_u);
    let w_mid = 1.0 - w_down - w_up;
    rn.region1.jump_factor_mean() * w_down + w_mid + rn.region2.jump_factor_mean() * w_up
}

fn assemble(params: &ModelParams, premia: &RiskPremia, rn: &RiskNeutralSpec) -> DriftReport {
    let e = gaussian_expectation(rn, params, premia);
    let risk_free = params.r;
    let diffusion_premium = premia.gamma_d * params.sigma * params.sigma;
    let jump_adjustment = -e.ln() / params.tau;
    DriftReport {
        mu: risk_free + diffusion_premium + jump_adjustment,
        risk_free,
        diffusion_premium,
        jump_adjustment,
        expectation_value: e,
        m1: rn.region1.jump_factor_mean(),
        m2: rn.region2.jump_factor_mean(),
        shift_mean: params.sigma * (1.0 - premia.gamma_d) * params.tau,
    }
}

/// Physical drift that makes discounted prices martingales under the
/// measure selected by `premia`. The `mu` field of `params` is ignored.
pub fn no_arbitrage_drift(params: &ModelParams, premia: &RiskPremia) -> Result<DriftReport> {
    let rn = risk_neutralize(params, premia)?;
    Ok(assemble(params, premia, &rn))
}

/// Copy of `params` with `mu` replaced by the no-arbitrage value.
pub fn with_no_arbitrage_mu(params: &ModelParams, premia: &RiskPremia) -> Result<ModelParams> {
    let report = no_arbitrage_drift(params, premia)?;
    Ok(ModelParams { mu: report.mu, ..*params })
}

/// Outcome of inverting the drift condition for `gamma_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Root nearest zero.
    pub gamma_d: f64,
    /// Every root found in the bracket, ascending.
    pub roots: Vec<f64>,
    /// More than one root was found.
    pub non_unique: bool,
    /// The scanned drift was strictly monotone in `gamma_d` over the bracket.
    pub monotone: bool,
}

/// Finds `gamma_d` such that the no-arbitrage drift equals `target_mu`.
///
/// The jump premia are taken from `premia`; its `gamma_d` is ignored.
pub fn calibrate_gamma(params: &ModelParams, premia: &RiskPremia, target_mu: f64) -> Result<Calibration> {
    finite(target_mu, "target_mu")?;
    // Z_j and q_jk do not depend on gamma_d.
    let rn = risk_neutralize(params, premia)?;
    let f = |g: f64| assemble(params, &premia.with_gamma(g), &rn).mu - target_mu;

    let (lo, hi) = GAMMA_BRACKET;
    let n = GAMMA_SCAN_POINTS;
    let grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&g| f(g)).collect();

    let increasing = vals.windows(2).all(|w| w[1] > w[0]);
    let decreasing = vals.windows(2).all(|w| w[1] < w[0]);

    let mut roots = Vec::new();
    for i in 0..n - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        let (fa, fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(refine(&f, a, b, fa, fb));
        }
    }
    if vals[n - 1] == 0.0 {
        roots.push(grid[n - 1]);
    }
    if roots.is_empty() {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    let gamma_d = *roots
        .iter()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .expect("non-empty");
    Ok(Calibration {
        gamma_d,
        non_unique: roots.len() > 1,
        roots,
        monotone: increasing || decreasing,
    })
}

/// Illinois regula falsi on a sign-changing bracket, bisecting whenever the
/// bracket fails to halve.
fn refine(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    let mut side = 0i8;
    for _ in 0..200 {
        let width = b - a;
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if fa * fc < 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if b - a > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm == 0.0 {
                return m;
            }
            if fa * fm < 0.0 {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
            side = 0;
        }
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Drift as a function of `gamma_d` with jump premia held fixed.
pub fn drift_curve(params: &ModelParams, premia: &RiskPremia, gammas: &[f64]) -> Result<Vec<f64>> {
    let rn = risk_neutralize(params, premia)?;
    Ok(gammas
        .iter()
        .map(|&g| assemble(params, &premia.with_gamma(g), &rn).mu)
        .collect())
}

/// Conditional-MGF plateau in a region; 1 in the normal region.
pub fn plateau(region: Region, rn: &RiskNeutralSpec) -> f64 {
    rn.region(region).map_or(1.0, |q| q.jump_factor_mean())
}
