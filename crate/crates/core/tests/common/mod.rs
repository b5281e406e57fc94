#![allow(dead_code)]

use jdemm::{JumpLaw, ModelParams, RegionJumpSpec, RiskPremia};

pub fn region(p_up: f64, p_down: f64, p_none: f64, up: (f64, f64), down: (f64, f64)) -> RegionJumpSpec {
    RegionJumpSpec {
        p_up,
        p_down,
        p_none,
        law_up: JumpLaw::new(up.0, up.1),
        law_down: JumpLaw::new(down.0, down.1),
    }
}

/// Daily-ish steps, crash-prone lower tail, rally-prone upper tail.
pub fn reference_model() -> (ModelParams, RiskPremia) {
    let params = ModelParams {
        mu: 0.0,
        sigma: 0.2,
        r: 0.03,
        tau: 0.01,
        b_down: -1.5,
        b_up: 1.5,
        region1: region(0.1, 0.5, 0.4, (0.04, 0.08), (-0.06, 0.1)),
        region2: region(0.45, 0.15, 0.4, (0.05, 0.07), (-0.03, 0.05)),
    };
    let premia = RiskPremia {
        gamma_d: 0.5,
        eta_1u: 1.0,
        eta_1d: -1.5,
        eta_2u: 0.8,
        eta_2d: 1.2,
    };
    (params, premia)
}

pub fn no_jump_model(r: f64, sigma: f64, tau: f64) -> ModelParams {
    let none = region(0.0, 0.0, 1.0, (0.0, 0.1), (0.0, 0.1));
    ModelParams {
        mu: r,
        sigma,
        r,
        tau,
        b_down: -2.0,
        b_up: 2.0,
        region1: none,
        region2: none,
    }
}
