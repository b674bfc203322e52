//! Seeded counter-based random number stream.
//!
//! The generator algorithm is pinned here so that runs are reproducible
//! across platforms and sequences can be re-derived by other
//! implementations:
//!
//! * `next_u64()` returns `splitmix64(seed + k * GOLDEN)` where `k` is the
//!   zero-based draw counter and `GOLDEN` is `0x9E3779B97F4A7C15`.
//! * `uniform()` maps the top 53 bits of `next_u64()` onto `[0, 1)`.
//! * `normal()` applies the Box-Muller transform to two consecutive
//!   uniforms (the first nudged away from zero).
//!
//! Because each draw depends only on `(seed, counter)`, streams forked with
//! different salts never overlap in practice and a stream's history is fully
//! determined by its seed.

/// Weyl increment used to space out counter values before mixing.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random stream owned by one consumer.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    /// Derive an independent stream. Forks with distinct salts produce
    /// unrelated sequences regardless of how much the parent has been used.
    pub fn fork(&self, salt: u64) -> Self {
        Self::new(splitmix64(
            self.seed ^ splitmix64(salt.wrapping_add(GOLDEN)),
        ))
    }

    pub fn next_u64(&mut self) -> u64 {
        let k = self.counter;
        self.counter += 1;
        splitmix64(self.seed.wrapping_add(k.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw on `[0, 1)` with 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Zero-mean unit-variance Gaussian draw (Box-Muller).
    pub fn normal(&mut self) -> f64 {
        let mut u1 = self.uniform();
        if u1 == 0.0 {
            u1 = 1.0 / (1u64 << 53) as f64;
        }
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
