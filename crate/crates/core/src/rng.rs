//! Seeded pseudorandom generator with a fixed cross-language contract.
//!
//! Scenario data must be reproducible bit-for-bit from a 64-bit seed by any
//! implementation in any language, so the full mapping is spelled out here:
//!
//! * State transition (SplitMix64): `state += 0x9E3779B97F4A7C15`, then the
//!   output is `z = state`; `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`;
//!   `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`; `z = z ^ (z >> 31)`,
//!   all in wrapping 64-bit arithmetic.
//! * `next_f64`: `(next_u64() >> 11) as f64 * 2^-53`, uniform on [0, 1).
//! * `uniform(a, b)`: `a + (b - a) * next_f64()`.
//! * `normal()`: Box-Muller without caching. Draws `u1` then `u2` via
//!   `next_f64` and returns `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`; each call
//!   consumes exactly two uniforms.
//! * `next_index(n)`: `next_u64() % n`.

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on [0, 1) with 53 random mantissa bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.next_f64()
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        r * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn next_index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
