//! Deterministic synthetic images.
//!
//! The generator is SplitMix64 (Steele, Lea and Flood's 64-bit mixer, as used
//! to seed `java.util.SplittableRandom`):
//!
//! ```text
//! state = state + 0x9E3779B97F4A7C15          (wrapping)
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9    (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB    (wrapping)
//! return z ^ (z >> 31)
//! ```
//!
//! The initial state is the seed. Pixels are visited in row-major order and
//! each consumes exactly one output word: byte 0 (least significant) is red,
//! byte 1 green, byte 2 blue. Any language with wrapping 64-bit arithmetic
//! reproduces the same bytes.

use crate::error::Result;
use crate::image::RgbImage8;

#[derive(Clone, Debug)]
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

    /// Uniform float in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

pub fn synth_image(height: usize, width: usize, seed: u64) -> Result<RgbImage8> {
    let n = height.saturating_mul(width);
    let mut rng = SplitMix64::new(seed);
    let (mut r, mut g, mut b) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for _ in 0..n {
        let word = rng.next_u64();
        r.push(word as u8);
        g.push((word >> 8) as u8);
        b.push((word >> 16) as u8);
    }
    RgbImage8::from_planar(height, width, r, g, b)
}

/// Adds uniform integer noise in `[-amplitude, amplitude]` to every sample,
/// saturating at 0 and 255. Samples are visited R plane, then G, then B, one
/// generator word per sample.
pub fn distort(image: &RgbImage8, amplitude: u8, seed: u64) -> RgbImage8 {
    let mut rng = SplitMix64::new(seed);
    let span = 2 * u64::from(amplitude) + 1;
    let mut perturb = |channel: &[u8]| -> Vec<u8> {
        channel
            .iter()
            .map(|&v| {
                let delta = (rng.next_u64() % span) as i32 - i32::from(amplitude);
                (i32::from(v) + delta).clamp(0, 255) as u8
            })
            .collect()
    };
    let r = perturb(image.red());
    let g = perturb(image.green());
    let b = perturb(image.blue());
    RgbImage8::from_planar(image.height(), image.width(), r, g, b).expect("dimensions unchanged")
}
