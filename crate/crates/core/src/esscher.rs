//! Normalized Esscher tilting of the Normal jump laws.
//!
//! Each jump type `jk` is tilted by `exp(eta_jk * J) / Z_j`, where the region
//! normalizer `Z_j` also absorbs the untilted no-jump branch. For Normal jumps
//! the tilted law stays Normal with the mean shifted by `eta * delta^2`.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::model::{JumpLaw, ModelParams, Region, RegionJumpSpec};

/// Market prices of risk: one for the diffusion, one per jump type.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RiskPremia {
    pub gamma_d: f64,
    pub eta_1u: f64,
    pub eta_1d: f64,
    pub eta_2u: f64,
    pub eta_2d: f64,
}

impl RiskPremia {
    pub fn check(&self) -> Result<()> {
        finite(self.gamma_d, "gamma_d")?;
        finite(self.eta_1u, "eta_1u")?;
        finite(self.eta_1d, "eta_1d")?;
        finite(self.eta_2u, "eta_2u")?;
        finite(self.eta_2d, "eta_2d")?;
        Ok(())
    }

    /// `(eta_up, eta_down)` for a trigger region; zero in the normal region.
    pub fn etas(&self, region: Region) -> (f64, f64) {
        match region {
            Region::Down => (self.eta_1u, self.eta_1d),
            Region::Up => (self.eta_2u, self.eta_2d),
            Region::Normal => (0.0, 0.0),
        }
    }

    pub fn with_gamma(self, gamma_d: f64) -> Self {
        Self { gamma_d, ..self }
    }
}

/// Risk-neutral jump quantities of one trigger region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionQ {
    /// Normalizer `Z_j`.
    pub z: f64,
    pub q_up: f64,
    pub q_down: f64,
    pub q_none: f64,
    /// Jump laws under Q: means shifted, deltas unchanged.
    pub law_up: JumpLaw,
    pub law_down: JumpLaw,
}

impl RegionQ {
    /// `E_Q[e^J]` inside this region, the plateau value of the conditional
    /// jump-factor MGF.
    pub fn jump_factor_mean(&self) -> f64 {
        self.q_up * (self.law_up.nu + 0.5 * self.law_up.variance()).exp()
            + self.q_down * (self.law_down.nu + 0.5 * self.law_down.variance()).exp()
            + self.q_none
    }
}

/// Risk-neutral specification derived once per (params, premia) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskNeutralSpec {
    pub region1: RegionQ,
    pub region2: RegionQ,
}

impl RiskNeutralSpec {
    pub fn region(&self, region: Region) -> Option<&RegionQ> {
        match region {
            Region::Down => Some(&self.region1),
            Region::Up => Some(&self.region2),
            Region::Normal => None,
        }
    }

    pub fn z1(&self) -> f64 {
        self.region1.z
    }

    pub fn z2(&self) -> f64 {
        self.region2.z
    }
}

/// Cumulant generating function of a Normal jump law, `eta*nu + eta^2 delta^2 / 2`.
pub fn cgf(law: &JumpLaw, eta: f64) -> Result<f64> {
    finite(eta, "eta")?;
    finite(law.nu, "nu")?;
    finite(law.delta, "delta")?;
    Ok(cgf_unchecked(law, eta))
}

#[inline]
pub(crate) fn cgf_unchecked(law: &JumpLaw, eta: f64) -> f64 {
    eta * law.nu + 0.5 * eta * eta * law.variance()
}

/// Region normalizer `Z_j = p_up e^{k_up(eta_up)} + p_down e^{k_down(eta_down)} + p_none`.
pub fn normalizer(spec: &RegionJumpSpec, eta_up: f64, eta_down: f64) -> Result<f64> {
    let up = cgf(&spec.law_up, eta_up)?;
    let down = cgf(&spec.law_down, eta_down)?;
    let z = spec.p_up * up.exp() + spec.p_down * down.exp() + spec.p_none;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "region normalizer must be positive and finite, got {z}"
        )));
    }
    Ok(z)
}

fn tilt_region(spec: &RegionJumpSpec, eta_up: f64, eta_down: f64) -> Result<RegionQ> {
    let z = normalizer(spec, eta_up, eta_down)?;
    let w_up = spec.p_up * cgf_unchecked(&spec.law_up, eta_up).exp();
    let w_down = spec.p_down * cgf_unchecked(&spec.law_down, eta_down).exp();
    let shift = |law: &JumpLaw, eta: f64| JumpLaw::new(law.nu + eta * law.variance(), law.delta);
    Ok(RegionQ {
        z,
        q_up: w_up / z,
        q_down: w_down / z,
        q_none: spec.p_none / z,
        law_up: shift(&spec.law_up, eta_up),
        law_down: shift(&spec.law_down, eta_down),
    })
}

/// Builds the risk-neutral jump specification induced by the premia.
pub fn risk_neutralize(params: &ModelParams, premia: &RiskPremia) -> Result<RiskNeutralSpec> {
    let violations = params.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations));
    }
    premia.check()?;
    Ok(RiskNeutralSpec {
        region1: tilt_region(&params.region1, premia.eta_1u, premia.eta_1d)?,
        region2: tilt_region(&params.region2, premia.eta_2u, premia.eta_2d)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{params, region};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn cgf_values() {
        let law = JumpLaw::new(0.05, 0.1);
        assert_eq!(cgf(&law, 0.0).unwrap(), 0.0);
        assert_relative_eq!(cgf(&law, 1.0).unwrap(), 0.055, epsilon = 1e-15);
        assert_relative_eq!(cgf(&law, 2.0).unwrap(), 0.12, epsilon = 1e-15);
        assert!(cgf(&law, f64::NAN).is_err());
    }

    #[test]
    fn normalizer_values() {
        let spec = region(0.5, 0.3, 0.2);
        assert_relative_eq!(normalizer(&spec, 0.0, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        let expected = 0.5 * 0.045f64.exp() + 0.3 * 0.0572f64.exp() + 0.2;
        let z = normalizer(&spec, 1.0, -1.0).unwrap();
        assert_relative_eq!(z, expected, epsilon = 1e-15);
        assert!((z - 1.04067).abs() < 5e-6);
        let none = region(0.0, 0.0, 1.0);
        assert_eq!(normalizer(&none, 7.0, -3.0).unwrap(), 1.0);
    }

    #[test]
    fn zero_tilt_is_identity() {
        let p = params();
        let rn = risk_neutralize(&p, &RiskPremia { gamma_d: 0.7, ..Default::default() }).unwrap();
        for (q, s) in [(rn.region1, p.region1), (rn.region2, p.region2)] {
            assert_relative_eq!(q.q_up, s.p_up, epsilon = 1e-15);
            assert_relative_eq!(q.q_down, s.p_down, epsilon = 1e-15);
            assert_relative_eq!(q.q_none, s.p_none, epsilon = 1e-15);
            assert_eq!(q.law_up, s.law_up);
            assert_eq!(q.law_down, s.law_down);
        }
    }

    #[test]
    fn mean_shift() {
        let mut p = params();
        p.region1.law_up = JumpLaw::new(0.04, 0.1);
        let premia = RiskPremia { eta_1u: 1.0, ..Default::default() };
        let rn = risk_neutralize(&p, &premia).unwrap();
        assert_relative_eq!(rn.region1.law_up.nu, 0.05, epsilon = 1e-15);
        assert_eq!(rn.region1.law_up.delta, 0.1);
    }

    #[test]
    fn single_outcome_region() {
        let mut p = params();
        p.region2 = region(1.0, 0.0, 0.0);
        let rn = risk_neutralize(&p, &RiskPremia { eta_2u: 2.5, ..Default::default() }).unwrap();
        assert_relative_eq!(rn.region2.q_up, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let p = ModelParams { tau: 0.0, ..params() };
        assert!(matches!(risk_neutralize(&p, &RiskPremia::default()), Err(Error::InvalidParams(_))));
        let pr = RiskPremia { eta_2d: f64::INFINITY, ..Default::default() };
        assert!(matches!(risk_neutralize(&params(), &pr), Err(Error::NonFinite(_))));
    }

    proptest! {
        #[test]
        fn probabilities_sum_to_one(
            a in 0.0f64..1.0, b in 0.0f64..1.0,
            e1 in -5.0f64..5.0, e2 in -5.0f64..5.0, e3 in -5.0f64..5.0, e4 in -5.0f64..5.0,
        ) {
            let (pu, pd) = (a * (1.0 - b), a * b);
            let mut p = params();
            p.region1 = region(pu, pd, 1.0 - pu - pd);
            p.region2 = region(pd, pu, 1.0 - pu - pd);
            let premia = RiskPremia { gamma_d: 0.0, eta_1u: e1, eta_1d: e2, eta_2u: e3, eta_2d: e4 };
            let rn = risk_neutralize(&p, &premia).unwrap();
            for q in [rn.region1, rn.region2] {
                prop_assert!((q.q_up + q.q_down + q.q_none - 1.0).abs() < 1e-12);
                prop_assert!(q.z > 0.0);
            }
        }

        #[test]
        fn up_probability_moves_with_tilted_mean(eta in -8.0f64..8.0) {
            // d q_up / d eta = q_up (1 - q_up) kappa'(eta), and kappa'(eta) is the
            // tilted mean, so q_up rises exactly where that mean is positive.
            let p = params();
            let h = 1e-6;
            let lo = risk_neutralize(&p, &RiskPremia { eta_1u: eta, ..Default::default() }).unwrap();
            let hi = risk_neutralize(&p, &RiskPremia { eta_1u: eta + h, ..Default::default() }).unwrap();
            let slope = lo.region1.law_up.nu;
            prop_assume!(slope.abs() > 1e-3);
            prop_assert_eq!(hi.region1.q_up > lo.region1.q_up, slope > 0.0);
        }
    }
}
