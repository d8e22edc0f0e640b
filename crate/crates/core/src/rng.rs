//! Counter-based pseudo-random numbers.
//!
//! Every draw is a pure function of `(seed, stream, index)`, so noise for a
//! given pixel of a given frame never depends on evaluation order.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sequential SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        unit(self.next_u64())
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range_u64(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.next_u64() % (hi - lo + 1)
    }

    pub fn next_gaussian(&mut self) -> f64 {
        box_muller(self.next_u64(), self.next_u64())
    }
}

#[inline]
fn unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn box_muller(a: u64, b: u64) -> f64 {
    // u1 in (0, 1] keeps ln finite
    let u1 = 1.0 - unit(a);
    let u2 = unit(b);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Standard normal draw addressed by `(seed, stream, index)`.
#[inline]
pub fn gaussian_at(seed: u64, stream: u64, index: u64) -> f64 {
    let key = mix64(seed ^ mix64(stream.wrapping_mul(GOLDEN) ^ 0xA5A5_A5A5)) ^ index;
    let a = mix64(key.wrapping_mul(GOLDEN).wrapping_add(1));
    let b = mix64(a ^ GOLDEN);
    box_muller(a, b)
}
