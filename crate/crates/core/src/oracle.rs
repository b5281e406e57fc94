//! Brute-force quadrature oracles for the closed-form expectations.
//!
//! Each oracle integrates its integrand pointwise over a truncated grid in the
//! diffusion increment, split at the two region cut points so that every
//! piece is smooth. Trapezoid sums at spacings h, 2h and 4h are Richardson
//! extrapolated; the spread between the two extrapolants is the error
//! estimate. Jump expectations inside the integrand use Normal MGFs directly,
//! or Gauss-Hermite quadrature in the redundant mode.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esscher::{RegionQ, RiskNeutralSpec, RiskPremia};
use crate::model::{JumpLaw, ModelParams, Region, RegionJumpSpec};
use crate::normal;

/// How jump expectations inside the integrand are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpExpectation {
    /// Closed-form Normal MGF.
    ExactMgf,
    /// Gauss-Hermite quadrature of the given order.
    GaussHermite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Truncation half-width in standard deviations of the diffusion increment.
    pub half_width: f64,
    /// Total grid points; must be odd.
    pub n_points: usize,
    pub jumps: JumpExpectation,
    /// Largest accepted quadrature error estimate.
    pub tolerance: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width: 10.0,
            n_points: 200_001,
            jumps: JumpExpectation::ExactMgf,
            tolerance: 1e-9,
        }
    }
}

impl GridSpec {
    pub fn gauss_hermite(order: usize) -> Self {
        Self {
            jumps: JumpExpectation::GaussHermite(order),
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_points.is_multiple_of(2) || self.n_points < 9 {
            return Err(Error::InvalidArgument(format!(
                "grid needs an odd number of at least 9 points, got {}",
                self.n_points
            )));
        }
        if !(self.half_width >= 8.0) {
            return Err(Error::InvalidArgument(format!(
                "grid half-width must be at least 8 standard deviations, got {}",
                self.half_width
            )));
        }
        if let JumpExpectation::GaussHermite(n) = self.jumps {
            if n == 0 {
                return Err(Error::InvalidArgument("Gauss-Hermite order must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Integral value with its numerical error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    /// Richardson estimate of the discretization error.
    pub error_estimate: f64,
    /// Analytic bound on the mass dropped by truncating the grid.
    pub tail_bound: f64,
}

/// Gauss-Hermite nodes and weights for the weight function `exp(-x^2)`.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = PI.powf(-0.25);
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Evaluates `E[e^{t J}]` for `J ~ N(nu, delta^2)`.
struct Mgf {
    gh: Option<(Vec<f64>, Vec<f64>)>,
}

impl Mgf {
    fn new(mode: JumpExpectation) -> Self {
        Self {
            gh: match mode {
                JumpExpectation::ExactMgf => None,
                JumpExpectation::GaussHermite(n) => Some(gauss_hermite(n)),
            },
        }
    }

    fn eval(&self, law: &JumpLaw, t: f64) -> f64 {
        match &self.gh {
            None => (t * law.nu + 0.5 * t * t * law.delta * law.delta).exp(),
            Some((x, w)) => {
                let s: f64 = x
                    .iter()
                    .zip(w)
                    .map(|(xi, wi)| wi * (t * (law.nu + std::f64::consts::SQRT_2 * law.delta * xi)).exp())
                    .sum();
                s / PI.sqrt()
            }
        }
    }
}

fn gaussian_density(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-0.5 * d * d / var).exp() / (2.0 * PI * var).sqrt()
}

/// Richardson-extrapolated trapezoid rule over `[center - hw sd, center + hw sd]`
/// split at the region cut points. The integrand receives the region of the
/// piece being integrated so that endpoint values are one-sided limits.
fn integrate<F: Fn(f64, Region) -> f64>(
    f: F,
    params: &ModelParams,
    center: f64,
    sd: f64,
    grid: &GridSpec,
) -> (f64, f64) {
    let st = params.tau.sqrt();
    let breaks = [params.b_down * st, params.b_up * st];
    let lo = center - grid.half_width * sd;
    let hi = center + grid.half_width * sd;
    let mut cuts = vec![lo];
    let mut inner: Vec<f64> = breaks
        .iter().copied().filter(|b| *b > lo && *b < hi).collect();
    inner.sort_by(f64::total_cmp);
    cuts.extend(inner);
    cuts.push(hi);

    let total_intervals = (grid.n_points - 1) as f64;
    let span = hi - lo;
    let mut value = 0.0;
    let mut err = 0.0;
    for piece in cuts.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        let share = total_intervals * (b - a) / span;
        let m = ((share / 4.0).round() as usize).max(1) * 4;
        let h = (b - a) / m as f64;
        let region = classify(0.5 * (a + b), params);
        let ys: Vec<f64> = (0..=m).map(|i| f(a + h * i as f64, region)).collect();
        let trap = |stride: usize| {
            let inner: f64 = ys[stride..m].iter().step_by(stride).sum();
            h * stride as f64 * (0.5 * (ys[0] + ys[m]) + inner)
        };
        let (t1, t2, t4) = (trap(1), trap(2), trap(4));
        let r1 = (4.0 * t1 - t2) / 3.0;
        let r2 = (4.0 * t2 - t4) / 3.0;
        value += r1;
        err += (r1 - r2).abs() / 15.0;
    }
    (value, err)
}

fn finish(value: f64, error_estimate: f64, tail_bound: f64, grid: &GridSpec) -> Result<OracleValue> {
    if !(error_estimate <= grid.tolerance) {
        return Err(Error::Refinement {
            estimate: error_estimate,
            tolerance: grid.tolerance,
        });
    }
    Ok(OracleValue { value, error_estimate, tail_bound })
}

fn etas(premia: &RiskPremia, region: Region) -> (f64, f64) {
    match region {
        Region::Down => (premia.eta_1u, premia.eta_1d),
        Region::Up => (premia.eta_2u, premia.eta_2d),
        Region::Normal => (0.0, 0.0),
    }
}

fn spec_and_z<'a>(
    params: &'a ModelParams,
    rn: &RiskNeutralSpec,
    region: Region,
) -> Option<(&'a RegionJumpSpec, f64)> {
    match region {
        Region::Down => Some((&params.region1, rn.region1.z)),
        Region::Up => Some((&params.region2, rn.region2.z)),
        Region::Normal => None,
    }
}

fn classify(x: f64, params: &ModelParams) -> Region {
    let st = params.tau.sqrt();
    if x < params.b_down * st {
        Region::Down
    } else if x > params.b_up * st {
        Region::Up
    } else {
        Region::Normal
    }
}

/// `E_P[e^{t_shift J} Psi | dW in region]` with `t_shift` 0 or 1.
fn conditional_weighted_psi(
    params: &ModelParams,
    premia: &RiskPremia,
    rn: &RiskNeutralSpec,
    mgf: &Mgf,
    region: Region,
    extra: f64,
) -> f64 {
    let Some((spec, z)) = spec_and_z(params, rn, region) else {
        return 1.0;
    };
    let (eu, ed) = etas(premia, region);
    (spec.p_up * mgf.eval(&spec.law_up, eu + extra)
        + spec.p_down * mgf.eval(&spec.law_down, ed + extra)
        + spec.p_none)
        / z
}

/// `E_P[L_tau]` by integrating `L_D(x) E_P[Psi | x] phi(x; 0, tau)`.
pub fn expect_step_kernel(
    params: &ModelParams,
    premia: &RiskPremia,
    rn: &RiskNeutralSpec,
    grid: &GridSpec,
) -> Result<OracleValue> {
    grid.check()?;
    let mgf = Mgf::new(grid.jumps);
    let cond = [Region::Normal, Region::Down, Region::Up]
        .map(|r| conditional_weighted_psi(params, premia, rn, &mgf, r, 0.0));
    let gs = premia.gamma_d * params.sigma;
    let tau = params.tau;
    let integrand = |x: f64, region: Region| {
        let l_d = (-gs * x - 0.5 * gs * gs * tau).exp();
        l_d * cond[region.index()] * gaussian_density(x, 0.0, tau)
    };
    let sd = tau.sqrt();
    // L_D times the N(0, tau) density is the N(-gs tau, tau) density.
    let center = -gs * tau;
    let (value, err) = integrate(integrand, params, center, sd, grid);
    let cmax = cond.iter().copied().fold(0.0, f64::max);
    let tail = 2.0 * cmax * normal::cdf(-grid.half_width);
    finish(value, err, tail, grid)
}

fn plateau(q: &RegionQ, mgf: &Mgf) -> f64 {
    q.q_up * mgf.eval(&q.law_up, 1.0) + q.q_down * mgf.eval(&q.law_down, 1.0) + q.q_none
}

/// `E[M_Q(X)]` for `X ~ N(sigma (1 - gamma_d) tau, tau)` by quadrature.
pub fn expect_mq(
    params: &ModelParams,
    premia: &RiskPremia,
    rn: &RiskNeutralSpec,
    grid: &GridSpec,
) -> Result<OracleValue> {
    grid.check()?;
    let mgf = Mgf::new(grid.jumps);
    let levels = [1.0, plateau(&rn.region1, &mgf), plateau(&rn.region2, &mgf)];
    let tau = params.tau;
    let mean = params.sigma * (1.0 - premia.gamma_d) * tau;
    let integrand = |x: f64, region: Region| levels[region.index()] * gaussian_density(x, mean, tau);
    let (value, err) = integrate(integrand, params, mean, tau.sqrt(), grid);
    let tail = 2.0 * levels.iter().copied().fold(0.0, f64::max) * normal::cdf(-grid.half_width);
    finish(value, err, tail, grid)
}

/// `E_P[L_tau S_{t+tau} / S_t]`, integrating
/// `L_D(x) exp((mu - sigma^2/2) tau + sigma x) E_P[Psi e^J | x] phi(x; 0, tau)`
/// with `mu` taken from `params`.
pub fn expect_q_return(
    params: &ModelParams,
    premia: &RiskPremia,
    rn: &RiskNeutralSpec,
    grid: &GridSpec,
) -> Result<OracleValue> {
    grid.check()?;
    let mgf = Mgf::new(grid.jumps);
    let cond = [Region::Normal, Region::Down, Region::Up]
        .map(|r| conditional_weighted_psi(params, premia, rn, &mgf, r, 1.0));
    let (sigma, tau, mu) = (params.sigma, params.tau, params.mu);
    let gs = premia.gamma_d * sigma;
    let integrand = |x: f64, region: Region| {
        let l_d = (-gs * x - 0.5 * gs * gs * tau).exp();
        let growth = ((mu - 0.5 * sigma * sigma) * tau + sigma * x).exp();
        l_d * growth * cond[region.index()] * gaussian_density(x, 0.0, tau)
    };
    let center = sigma * (1.0 - premia.gamma_d) * tau;
    let (value, err) = integrate(integrand, params, center, tau.sqrt(), grid);
    // The integrand is exp((mu - gamma sigma^2) tau) M_Q(x) times the
    // N(center, tau) density.
    let scale = ((mu - premia.gamma_d * sigma * sigma) * tau).exp();
    let tail = 2.0 * scale * cond.iter().copied().fold(0.0, f64::max) * normal::cdf(-grid.half_width);
    finish(value, err, tail, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{gaussian_expectation, with_no_arbitrage_mu};
    use crate::esscher::risk_neutralize;
    use crate::model::fixtures::{params, region};

    fn premia() -> RiskPremia {
        RiskPremia { gamma_d: 0.8, eta_1u: 1.5, eta_1d: -2.0, eta_2u: 0.7, eta_2d: 2.5 }
    }

    #[test]
    fn gauss_hermite_moments() {
        let (x, w) = gauss_hermite(64);
        let s0: f64 = w.iter().sum();
        assert!((s0 - PI.sqrt()).abs() < 1e-13);
        let s2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((s2 - PI.sqrt() / 2.0).abs() < 1e-13);
        let (x5, _) = gauss_hermite(5);
        assert!((x5[0] - 2.020_182_870_456_086).abs() < 1e-13);
    }

    #[test]
    fn gauss_hermite_reproduces_normal_mgf() {
        let gh = Mgf::new(JumpExpectation::GaussHermite(64));
        let exact = Mgf::new(JumpExpectation::ExactMgf);
        for law in [JumpLaw::new(0.05, 0.1), JumpLaw::new(-0.2, 0.3)] {
            for t in [-3.0, 0.0, 1.0, 2.5] {
                let a = gh.eval(&law, t);
                let b = exact.eval(&law, t);
                assert!((a / b - 1.0).abs() < 1e-13, "{t} {a} {b}");
            }
        }
    }

    #[test]
    fn step_kernel_unit_mean() {
        let p = params();
        let pr = premia();
        let rn = risk_neutralize(&p, &pr).unwrap();
        for grid in [GridSpec::default(), GridSpec::gauss_hermite(64)] {
            let v = expect_step_kernel(&p, &pr, &rn, &grid).unwrap();
            assert!((v.value - 1.0).abs() < 1e-8, "{v:?}");
            assert!(v.tail_bound < 1e-20);
        }
    }

    #[test]
    fn step_kernel_trivial_measure() {
        let p = params();
        let pr = RiskPremia::default();
        let rn = risk_neutralize(&p, &pr).unwrap();
        let v = expect_step_kernel(&p, &pr, &rn, &GridSpec::default()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-13, "{v:?}");
    }

    #[test]
    fn doubling_grid_is_stable() {
        let p = params();
        let pr = premia();
        let rn = risk_neutralize(&p, &pr).unwrap();
        let a = expect_step_kernel(&p, &pr, &rn, &GridSpec::default()).unwrap();
        let fine = GridSpec { n_points: 400_001, ..GridSpec::default() };
        let b = expect_step_kernel(&p, &pr, &rn, &fine).unwrap();
        assert!((a.value - b.value).abs() < 1e-10);
    }

    #[test]
    fn coarse_grid_fails_refinement() {
        let p = params();
        let pr = premia();
        let rn = risk_neutralize(&p, &pr).unwrap();
        let coarse = GridSpec { n_points: 9, ..GridSpec::default() };
        assert!(matches!(
            expect_mq(&p, &pr, &rn, &coarse),
            Err(Error::Refinement { .. })
        ));
        let even = GridSpec { n_points: 10, ..GridSpec::default() };
        assert!(expect_mq(&p, &pr, &rn, &even).is_err());
    }

    #[test]
    fn mq_matches_closed_form() {
        let p = params();
        let pr = premia();
        let rn = risk_neutralize(&p, &pr).unwrap();
        let v = expect_mq(&p, &pr, &rn, &GridSpec::default()).unwrap();
        assert!((v.value - gaussian_expectation(&rn, &p, &pr)).abs() < 1e-8);
    }

    #[test]
    fn mq_trivial_cases() {
        let pr = premia();
        let p = ModelParams { region1: region(0.0, 0.0, 1.0), region2: region(0.0, 0.0, 1.0), ..params() };
        let rn = risk_neutralize(&p, &pr).unwrap();
        let v = expect_mq(&p, &pr, &rn, &GridSpec::default()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-13);

        // Cut points ten standard deviations either side of the shifted mean.
        let base = params();
        let shift = base.sigma * (1.0 - pr.gamma_d) * base.tau.sqrt();
        let far = ModelParams { b_down: shift - 10.0, b_up: shift + 10.0, ..base };
        let rn = risk_neutralize(&far, &pr).unwrap();
        let v = expect_mq(&far, &pr, &rn, &GridSpec::default()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12, "{v:?}");
    }

    #[test]
    fn q_return_is_risk_free() {
        let pr = premia();
        let p = with_no_arbitrage_mu(&params(), &pr).unwrap();
        let rn = risk_neutralize(&p, &pr).unwrap();
        let v = expect_q_return(&p, &pr, &rn, &GridSpec::default()).unwrap();
        assert!((v.value - (p.r * p.tau).exp()).abs() < 1e-8, "{v:?}");
    }

    #[test]
    fn q_return_passes_drift_bias_through() {
        let pr = premia();
        let base = with_no_arbitrage_mu(&params(), &pr).unwrap();
        let p = ModelParams { mu: base.mu + 0.01, ..base };
        let rn = risk_neutralize(&p, &pr).unwrap();
        let v = expect_q_return(&p, &pr, &rn, &GridSpec::gauss_hermite(64)).unwrap();
        assert!((v.value - ((p.r + 0.01) * p.tau).exp()).abs() < 1e-8);
    }

    #[test]
    fn q_return_lognormal() {
        let p = ModelParams {
            mu: 0.03,
            region1: region(0.0, 0.0, 1.0),
            region2: region(0.0, 0.0, 1.0),
            ..params()
        };
        let pr = RiskPremia::default();
        let rn = risk_neutralize(&p, &pr).unwrap();
        let v = expect_q_return(&p, &pr, &rn, &GridSpec::default()).unwrap();
        assert!((v.value - (0.03 * p.tau).exp()).abs() < 1e-13);
    }
}
