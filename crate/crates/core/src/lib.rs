//! Threshold-triggered jump-diffusion with an explicitly constructed
//! equivalent martingale measure.
//!
//! The diffusion increment of each step falls into one of three regions. In
//! the two tail regions a Normal log-jump may fire, up or down, with constant
//! probabilities. The risk-neutral measure combines a Girsanov shift of the
//! diffusion with a region-normalized Esscher tilt of the jumps; the drift
//! that keeps discounted prices martingales follows in closed form.
//!
//! Modules, bottom-up: [`model`], [`esscher`], [`measure`], [`drift`],
//! [`sim`], [`pricing`]. [`oracle`] holds quadrature cross-checks and
//! [`diagnostics`] the Monte Carlo ones.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod drift;
pub mod error;
pub mod esscher;
pub mod measure;
pub mod model;
pub mod normal;
pub mod oracle;
pub mod pricing;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod stats;

pub use drift::{calibrate_gamma, no_arbitrage_drift, Calibration, DriftReport};
pub use error::{Error, Result, Violation};
pub use esscher::{risk_neutralize, RiskNeutralSpec, RiskPremia};
pub use measure::{JumpKind, StepOutcome};
pub use model::{classify_region, JumpLaw, ModelParams, Region, RegionJumpSpec};
pub use pricing::{black_scholes_reference, price_european, OptionKind, Payoff, PricingResult};
pub use rng::SeedSpec;
pub use sim::{simulate_p, simulate_q, DriftMode, Path};
