//! Seeded random parameter sets for sweeps.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::esscher::RiskPremia;
use crate::model::{JumpLaw, ModelParams, RegionJumpSpec};
use crate::rng::open_unit;

struct Draw(ChaCha8Rng);

impl Draw {
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * open_unit(self.0.next_u64())
    }

    fn law(&mut self) -> JumpLaw {
        JumpLaw::new(self.uniform(-0.15, 0.15), self.uniform(0.02, 0.25))
    }

    fn region(&mut self) -> RegionJumpSpec {
        let w = [self.uniform(0.0, 1.0), self.uniform(0.0, 1.0), self.uniform(0.0, 1.0)];
        let s: f64 = w.iter().sum();
        let p_up = w[0] / s;
        let p_down = w[1] / s;
        RegionJumpSpec {
            p_up,
            p_down,
            p_none: 1.0 - p_up - p_down,
            law_up: self.law(),
            law_down: self.law(),
        }
    }
}

/// A valid random model and premia; `mu` is left at zero for the caller to set.
pub fn random_model(seed: u64) -> (ModelParams, RiskPremia) {
    let mut d = Draw(ChaCha8Rng::seed_from_u64(seed));
    let params = ModelParams {
        mu: 0.0,
        sigma: d.uniform(0.1, 0.5),
        r: d.uniform(0.0, 0.08),
        tau: d.uniform(1.0 / 252.0, 0.25),
        b_down: d.uniform(-3.0, -0.5),
        b_up: d.uniform(0.5, 3.0),
        region1: d.region(),
        region2: d.region(),
    };
    let premia = RiskPremia {
        gamma_d: d.uniform(-2.0, 2.0),
        eta_1u: d.uniform(-3.0, 3.0),
        eta_1d: d.uniform(-3.0, 3.0),
        eta_2u: d.uniform(-3.0, 3.0),
        eta_2d: d.uniform(-3.0, 3.0),
    };
    (params, premia)
}
