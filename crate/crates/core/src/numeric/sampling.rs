//! Seeded random sampling for randomized zero tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut SampleRng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Axis-aligned box in `(x, t)` from which zero-test points are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBox {
    pub x: (f64, f64),
    pub t: (f64, f64),
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox {
            x: (-1.0, 1.0),
            t: (-1.0, 1.0),
        }
    }
}

impl SampleBox {
    /// Same center, half the width along each axis.
    pub fn shrunk(&self) -> SampleBox {
        let half = |(lo, hi): (f64, f64)| {
            let c = 0.5 * (lo + hi);
            let w = 0.25 * (hi - lo);
            (c - w, c + w)
        };
        SampleBox {
            x: half(self.x),
            t: half(self.t),
        }
    }

    pub fn draw(&self, rng: &mut SampleRng) -> (f64, f64) {
        (uniform(rng, self.x), uniform(rng, self.t))
    }
}
