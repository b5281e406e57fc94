//! Physical-measure parameters and the trigger-region partition of the
//! diffusion increment.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result, Violation};

/// Probabilities summing to 1 within this tolerance are renormalized on
/// ingest; anything further off is rejected.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Normal law of a log-jump size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpLaw {
    /// Mean log-jump size.
    pub nu: f64,
    /// Standard deviation of the log-jump size.
    pub delta: f64,
}

impl JumpLaw {
    pub fn new(nu: f64, delta: f64) -> Self {
        Self { nu, delta }
    }

    pub fn variance(&self) -> f64 {
        self.delta * self.delta
    }
}

/// Jump-type probabilities and size laws inside one trigger region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionJumpSpec {
    pub p_up: f64,
    pub p_down: f64,
    pub p_none: f64,
    pub law_up: JumpLaw,
    pub law_down: JumpLaw,
}

impl RegionJumpSpec {
    /// A region where a jump never fires.
    pub fn no_jumps(law_up: JumpLaw, law_down: JumpLaw) -> Self {
        Self {
            p_up: 0.0,
            p_down: 0.0,
            p_none: 1.0,
            law_up,
            law_down,
        }
    }

    fn check(&self, name: &str, out: &mut Vec<Violation>) {
        let probs = [("p_up", self.p_up), ("p_down", self.p_down), ("p_none", self.p_none)];
        let mut in_range = true;
        for (field, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                out.push(Violation::new(
                    format!("{name}.{field}"),
                    "probabilities in [0,1] required",
                ));
                in_range = false;
            }
        }
        if in_range {
            let sum = self.p_up + self.p_down + self.p_none;
            if (sum - 1.0).abs() > PROB_SUM_TOL {
                out.push(Violation::new(
                    name.to_string(),
                    format!("p_up + p_down + p_none = 1 required (got {sum})"),
                ));
            }
        }
        for (field, law) in [("law_up", self.law_up), ("law_down", self.law_down)] {
            if !law.nu.is_finite() {
                out.push(Violation::new(format!("{name}.{field}.nu"), "finite value required"));
            }
            if !(law.delta > 0.0 && law.delta.is_finite()) {
                out.push(Violation::new(format!("{name}.{field}.delta"), "delta > 0 required"));
            }
        }
    }

    fn renormalized(mut self) -> Self {
        let sum = self.p_up + self.p_down + self.p_none;
        self.p_up /= sum;
        self.p_down /= sum;
        self.p_none /= sum;
        self
    }
}

/// Physical-measure model parameters.
///
/// Thresholds are in standardized units: the actual cut points on the
/// diffusion increment are `b_down * sqrt(tau)` and `b_up * sqrt(tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mu: f64,
    pub sigma: f64,
    pub r: f64,
    pub tau: f64,
    pub b_down: f64,
    pub b_up: f64,
    /// Jump specification when the increment falls below the lower threshold.
    pub region1: RegionJumpSpec,
    /// Jump specification when the increment exceeds the upper threshold.
    pub region2: RegionJumpSpec,
}

impl ModelParams {
    /// Lists every broken invariant; empty iff the parameters are usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.mu.is_finite() {
            out.push(Violation::new("mu", "finite value required"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            out.push(Violation::new("sigma", "sigma > 0 required"));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            out.push(Violation::new("r", "r >= 0 required"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            out.push(Violation::new("tau", "tau > 0 required"));
        }
        if !(self.b_down < 0.0) {
            out.push(Violation::new("b_down", "b_down < 0 required"));
        }
        if !(self.b_up > 0.0) {
            out.push(Violation::new("b_up", "b_up > 0 required"));
        }
        self.region1.check("region1", &mut out);
        self.region2.check("region2", &mut out);
        out
    }

    /// Validates and renormalizes the region probabilities.
    pub fn checked(self) -> Result<Self> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidParams(violations));
        }
        Ok(Self {
            region1: self.region1.renormalized(),
            region2: self.region2.renormalized(),
            ..self
        })
    }

    pub fn sqrt_tau(&self) -> f64 {
        self.tau.sqrt()
    }

    /// Lower cut point on the raw increment, `b_down * sqrt(tau)`.
    pub fn lower_cut(&self) -> f64 {
        self.b_down * self.sqrt_tau()
    }

    /// Upper cut point on the raw increment, `b_up * sqrt(tau)`.
    pub fn upper_cut(&self) -> f64 {
        self.b_up * self.sqrt_tau()
    }

    /// Jump spec of a trigger region, `None` for the normal region.
    pub fn region_spec(&self, region: Region) -> Option<&RegionJumpSpec> {
        match region {
            Region::Down => Some(&self.region1),
            Region::Up => Some(&self.region2),
            Region::Normal => None,
        }
    }

    /// Classifies a raw diffusion increment. Boundary points are Normal.
    pub fn region_of(&self, dw: f64) -> Region {
        if dw < self.lower_cut() {
            Region::Down
        } else if dw > self.upper_cut() {
            Region::Up
        } else {
            Region::Normal
        }
    }
}

/// Trigger region of a diffusion increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Large downward move, region index 1.
    Down,
    /// Large upward move, region index 2.
    Up,
    /// Between the thresholds (inclusive), region index 0.
    Normal,
}

impl Region {
    pub fn index(self) -> usize {
        match self {
            Region::Normal => 0,
            Region::Down => 1,
            Region::Up => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Region::Normal => "normal",
            Region::Down => "down",
            Region::Up => "up",
        }
    }
}

/// Classifies `dw` into a trigger region; rejects non-finite increments.
pub fn classify_region(dw: f64, params: &ModelParams) -> Result<Region> {
    finite(dw, "dw")?;
    Ok(params.region_of(dw))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn region(p_up: f64, p_down: f64, p_none: f64) -> RegionJumpSpec {
        RegionJumpSpec {
            p_up,
            p_down,
            p_none,
            law_up: JumpLaw::new(0.04, 0.1),
            law_down: JumpLaw::new(-0.05, 0.12),
        }
    }

    pub fn params() -> ModelParams {
        ModelParams {
            mu: 0.08,
            sigma: 0.2,
            r: 0.03,
            tau: 0.01,
            b_down: -2.0,
            b_up: 2.0,
            region1: region(0.1, 0.5, 0.4),
            region2: region(0.4, 0.2, 0.4),
        }
    }
}
