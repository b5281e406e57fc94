//! Counter-based random streams.
//!
//! Every draw is addressed by `(master_seed, path, step, slot)`: the ChaCha
//! key comes from the master seed, the stream id is the path index and the
//! word position encodes the step. Paths are therefore reproducible no matter
//! which thread produces them or in which order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::normal;

/// Uniform draws consumed by each simulated step: diffusion, jump type, jump size.
pub const DRAWS_PER_STEP: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn path_stream(&self, path: u64) -> PathStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(path);
        PathStream { rng, next_step: 0 }
    }
}

/// Random source of a single path.
pub struct PathStream {
    rng: ChaCha8Rng,
    next_step: u64,
}

/// The three uniforms behind one step.
#[derive(Debug, Clone, Copy)]
pub struct StepUniforms {
    pub diffusion: f64,
    pub selector: f64,
    pub size: f64,
}

impl StepUniforms {
    pub fn diffusion_normal(&self) -> f64 {
        normal::inv_cdf(self.diffusion)
    }

    pub fn size_normal(&self) -> f64 {
        normal::inv_cdf(self.size)
    }
}

impl PathStream {
    /// Uniforms for `step`, independent of which steps were drawn before.
    pub fn step(&mut self, step: u64) -> StepUniforms {
        if step != self.next_step {
            // Two 32-bit words per u64 draw.
            self.rng
                .set_word_pos(u128::from(step) * u128::from(2 * DRAWS_PER_STEP));
        }
        self.next_step = step + 1;
        StepUniforms {
            diffusion: open_unit(self.rng.next_u64()),
            selector: open_unit(self.rng.next_u64()),
            size: open_unit(self.rng.next_u64()),
        }
    }
}

/// Maps 64 random bits to the open interval (0, 1): midpoints of a 2^-52 lattice.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}
