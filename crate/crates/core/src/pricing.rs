//! Risk-neutral Monte Carlo pricing of European payoffs.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esscher::{risk_neutralize, RiskPremia};
use crate::model::ModelParams;
use crate::normal;
use crate::rng::SeedSpec;
use crate::sim::{DriftMode, Simulator};
use crate::stats::MeanEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        })
    }
}

/// Vanilla European payoff on the terminal price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Payoff {
    pub kind: OptionKind,
    pub strike: f64,
}

impl Payoff {
    pub fn call(strike: f64) -> Self {
        Self { kind: OptionKind::Call, strike }
    }

    pub fn put(strike: f64) -> Self {
        Self { kind: OptionKind::Put, strike }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.strike >= 0.0 && self.strike.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "strike must be finite and non-negative, got {}",
                self.strike
            )));
        }
        Ok(())
    }

    pub fn value(&self, terminal: f64) -> f64 {
        match self.kind {
            OptionKind::Call => (terminal - self.strike).max(0.0),
            OptionKind::Put => (self.strike - terminal).max(0.0),
        }
    }

    pub fn id(&self) -> String {
        format!("{}:{}", self.kind, self.strike)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingResult {
    pub price: f64,
    pub std_error: f64,
    pub n_paths: usize,
    /// `exp(-r * maturity_steps * tau)`.
    pub discount_factor: f64,
    pub payoff_id: String,
    pub payoff: Payoff,
    /// Maturity in years.
    pub maturity: f64,
}

/// Everything a pricing run needs apart from the payoffs.
#[derive(Debug, Clone, Copy)]
pub struct PricingSetup {
    pub s0: f64,
    pub maturity_steps: usize,
    pub n_paths: usize,
    pub seeds: SeedSpec,
    /// `NoArbitrage` for pricing; `Params` only to exhibit a mispriced drift.
    pub drift: DriftMode,
}

/// Risk-neutral terminal prices on paths `0..n_paths`.
pub fn terminal_prices(params: &ModelParams, premia: &RiskPremia, setup: &PricingSetup) -> Result<Vec<f64>> {
    if !(setup.s0 > 0.0 && setup.s0.is_finite()) {
        return Err(Error::InvalidArgument(format!("s0 must be positive, got {}", setup.s0)));
    }
    if setup.maturity_steps == 0 || setup.n_paths == 0 {
        return Err(Error::InvalidArgument(
            "maturity_steps and n_paths must be at least 1".into(),
        ));
    }
    let rn = risk_neutralize(params, premia)?;
    let sim = Simulator::risk_neutral(params, premia, &rn, setup.drift, setup.seeds)?;
    Ok(sim.map_paths(setup.s0, setup.maturity_steps, setup.n_paths, |p| p.terminal()))
}

/// Prices several payoffs on the same simulated paths.
pub fn price_european_many(
    params: &ModelParams,
    premia: &RiskPremia,
    payoffs: &[Payoff],
    setup: &PricingSetup,
) -> Result<Vec<PricingResult>> {
    for p in payoffs {
        p.check()?;
    }
    let terminals = terminal_prices(params, premia, setup)?;
    let maturity = setup.maturity_steps as f64 * params.tau;
    let discount_factor = (-params.r * maturity).exp();
    Ok(payoffs
        .iter()
        .map(|payoff| {
            let discounted: Vec<f64> = terminals
                .iter()
                .map(|&s| discount_factor * payoff.value(s))
                .collect();
            let est = MeanEstimate::from_samples(&discounted);
            PricingResult {
                price: est.mean,
                std_error: est.std_error,
                n_paths: est.n,
                discount_factor,
                payoff_id: payoff.id(),
                payoff: *payoff,
                maturity,
            }
        })
        .collect())
}

/// Discounted Monte Carlo price of one European payoff.
pub fn price_european(
    params: &ModelParams,
    premia: &RiskPremia,
    payoff: Payoff,
    setup: &PricingSetup,
) -> Result<PricingResult> {
    Ok(price_european_many(params, premia, &[payoff], setup)?.remove(0))
}

/// Black-Scholes value of a European option, with the zero-time and
/// zero-volatility limits handled explicitly.
pub fn black_scholes_reference(s0: f64, strike: f64, r: f64, sigma: f64, maturity: f64, kind: OptionKind) -> f64 {
    let df = (-r * maturity).exp();
    let forward = s0 * (r * maturity).exp();
    let vol = sigma * maturity.sqrt();
    if vol <= 0.0 || strike <= 0.0 {
        let intrinsic = match kind {
            OptionKind::Call => (forward - strike).max(0.0),
            OptionKind::Put => (strike - forward).max(0.0),
        };
        return df * intrinsic;
    }
    let d1 = ((forward / strike).ln() + 0.5 * vol * vol) / vol;
    let d2 = d1 - vol;
    match kind {
        OptionKind::Call => df * (forward * normal::cdf(d1) - strike * normal::cdf(d2)),
        OptionKind::Put => df * (strike * normal::cdf(-d2) - forward * normal::cdf(-d1)),
    }
}

/// Per-step test that discounted prices have constant mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    /// Mean of `exp(-r k tau) S_k / s0` for `k = 1..=horizon`.
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z_scores: Vec<f64>,
    pub max_abs_z: f64,
    /// Drift used in the simulation.
    pub drift: f64,
}

/// Checks the martingale property of discounted prices on simulated Q-paths.
pub fn martingale_check(
    params: &ModelParams,
    premia: &RiskPremia,
    n_paths: usize,
    horizon_steps: usize,
    seeds: SeedSpec,
    drift: DriftMode,
) -> Result<MartingaleReport> {
    if horizon_steps == 0 || n_paths < 2 {
        return Err(Error::InvalidArgument(
            "martingale check needs horizon_steps >= 1 and n_paths >= 2".into(),
        ));
    }
    let rn = risk_neutralize(params, premia)?;
    let sim = Simulator::risk_neutral(params, premia, &rn, drift, seeds)?;
    let rt = params.r * params.tau;
    let rows: Vec<Vec<f64>> = sim.map_paths(1.0, horizon_steps, n_paths, |p| {
        p.prices[1..]
            .iter()
            .enumerate()
            .map(|(k, s)| (-rt * (k + 1) as f64).exp() * s)
            .collect()
    });
    let mut report = MartingaleReport {
        means: Vec::with_capacity(horizon_steps),
        std_errors: Vec::with_capacity(horizon_steps),
        z_scores: Vec::with_capacity(horizon_steps),
        max_abs_z: 0.0,
        drift: sim.drift(),
    };
    let mut column = vec![0.0; n_paths];
    for k in 0..horizon_steps {
        for (c, row) in column.iter_mut().zip(&rows) {
            *c = row[k];
        }
        let est = MeanEstimate::from_samples(&column);
        let z = est.z_score(1.0);
        report.means.push(est.mean);
        report.std_errors.push(est.std_error);
        report.z_scores.push(z);
        report.max_abs_z = report.max_abs_z.max(z.abs());
    }
    Ok(report)
}

/// Header of the price table export.
pub const PRICE_CSV_HEADER: [&str; 6] = ["payoff", "strike", "maturity", "price", "std_error", "n_paths"];

pub fn write_prices_csv<W: Write>(results: &[PricingResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PRICE_CSV_HEADER)?;
    for r in results {
        w.write_record([
            r.payoff.kind.to_string(),
            r.payoff.strike.to_string(),
            r.maturity.to_string(),
            r.price.to_string(),
            r.std_error.to_string(),
            r.n_paths.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
