use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// A per-replication random stream.
///
/// ChaCha8 keyed by the experiment seed, with the replication index as the
/// 64-bit stream id. Stream `i` is fixed by `(seed, i)` alone, so replications
/// can run in any order on any number of workers.
#[derive(Debug, Clone)]
pub struct RepStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

pub fn derive_rep_stream(seed: u64, rep_index: u64) -> RepStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep_index);
    RepStream { rng, spare: None }
}

impl RepStream {
    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by the Marsaglia polar method. Draws come in pairs;
    /// the second is cached for the next call.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = libm::sqrt(-2.0 * libm::log(s) / s);
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.normal();
        }
    }
}
