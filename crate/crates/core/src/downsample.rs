//! Uniform `M x M` mean filtering fused with stride-`M` decimation.
//!
//! Each output sample is the mean of one non-overlapping block anchored at
//! `(i*M, j*M)`. Rows and columns that do not fill a whole block are dropped.
//! Block sums run row-major within the block, starting from the top-left
//! sample, and the sum is scaled by `1/M²` once.

use std::ops::{Add, AddAssign};

use crate::error::{Error, Result};
use crate::image::Plane;

/// Tally of floating-point multiplies and adds performed by a stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct OpCounter {
    pub multiplies: u64,
    pub adds: u64,
}

impl OpCounter {
    pub const ZERO: OpCounter = OpCounter {
        multiplies: 0,
        adds: 0,
    };

    pub fn new(multiplies: u64, adds: u64) -> Self {
        Self { multiplies, adds }
    }
}

impl Add for OpCounter {
    type Output = OpCounter;

    fn add(self, rhs: OpCounter) -> OpCounter {
        OpCounter {
            multiplies: self.multiplies + rhs.multiplies,
            adds: self.adds + rhs.adds,
        }
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: OpCounter) {
        *self = *self + rhs;
    }
}

/// Downsampling factor `M`. Partial blocks are always truncated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DownsampleSpec {
    factor: usize,
}

impl DownsampleSpec {
    pub fn new(factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::ZeroFactor);
        }
        Ok(Self { factor })
    }

    pub fn factor(self) -> usize {
        self.factor
    }

    pub fn is_passthrough(self) -> bool {
        self.factor == 1
    }

    /// Output dimensions for an `height x width` input.
    pub fn output_dims(self, height: usize, width: usize) -> (usize, usize) {
        (height / self.factor, width / self.factor)
    }
}

/// `M = round(min(h, w) / 256)`, rounding half away from zero and never
/// going below 1.
pub fn compute_factor(height: usize, width: usize) -> DownsampleSpec {
    let shorter = height.min(width);
    let factor = ((shorter + 128) / 256).max(1);
    DownsampleSpec { factor }
}

/// Operations `block_mean_decimate` performs on an `height x width` plane.
pub fn count_decimate_ops(height: usize, width: usize, spec: DownsampleSpec) -> OpCounter {
    if spec.is_passthrough() {
        return OpCounter::ZERO;
    }
    let (oh, ow) = spec.output_dims(height, width);
    let outputs = (oh * ow) as u64;
    let m2 = (spec.factor * spec.factor) as u64;
    OpCounter::new(outputs, outputs * (m2 - 1))
}

fn check_fits(p: &Plane, spec: DownsampleSpec) -> Result<()> {
    if !spec.is_passthrough() && (p.height() < spec.factor || p.width() < spec.factor) {
        return Err(Error::PlaneTooSmall {
            height: p.height(),
            width: p.width(),
            factor: spec.factor,
        });
    }
    Ok(())
}

/// Block-averages `p` by `spec.factor()` and records the work in `counter`.
///
/// With `M = 1` the plane is returned unchanged and nothing is counted.
pub fn block_mean_decimate(
    p: &Plane,
    spec: DownsampleSpec,
    counter: &mut OpCounter,
) -> Result<Plane> {
    check_fits(p, spec)?;
    if spec.is_passthrough() {
        return Ok(p.clone());
    }
    let m = spec.factor;
    let (oh, ow) = spec.output_dims(p.height(), p.width());
    let scale = 1.0 / (m * m) as f64;
    let mut out = Vec::with_capacity(oh * ow);
    let mut acc = vec![0.0; ow];
    let (mut adds, mut muls) = (0u64, 0u64);
    for i in 0..oh {
        // Walking the block rows in the outer loop keeps reads sequential while
        // each acc[j] still sees its block in row-major order.
        let top = p.row(i * m);
        for (j, a) in acc.iter_mut().enumerate() {
            let block = &top[j * m..(j + 1) * m];
            let mut s = block[0];
            for &v in &block[1..] {
                s += v;
            }
            adds += (m - 1) as u64;
            *a = s;
        }
        for k in 1..m {
            let row = p.row(i * m + k);
            for (j, a) in acc.iter_mut().enumerate() {
                for &v in &row[j * m..(j + 1) * m] {
                    *a += v;
                }
                adds += m as u64;
            }
        }
        for &a in &acc {
            out.push(a * scale);
            muls += 1;
        }
    }
    *counter += OpCounter::new(muls, adds);
    Ok(Plane::from_parts(oh, ow, out))
}

/// Literal two-step form: mean-filter every valid window position, then keep
/// every `M`-th row and column starting at the origin.
///
/// Allocates the full filtered plane. It exists as an independent reference
/// for [`block_mean_decimate`] and produces bit-identical output.
pub fn separate_filter_then_decimate(p: &Plane, spec: DownsampleSpec) -> Result<Plane> {
    check_fits(p, spec)?;
    if spec.is_passthrough() {
        return Ok(p.clone());
    }
    let m = spec.factor;
    let weight_sum = 1.0 / (m * m) as f64;
    let fh = p.height() - m + 1;
    let fw = p.width() - m + 1;
    let mut filtered = vec![0.0; fh * fw];
    for i in 0..fh {
        for j in 0..fw {
            let mut s = p.get(i, j);
            for k in 0..m {
                for l in 0..m {
                    if k == 0 && l == 0 {
                        continue;
                    }
                    s += p.get(i + k, j + l);
                }
            }
            filtered[i * fw + j] = s * weight_sum;
        }
    }
    let (oh, ow) = spec.output_dims(p.height(), p.width());
    let mut out = Vec::with_capacity(oh * ow);
    for i in (0..fh).step_by(m) {
        for j in (0..fw).step_by(m) {
            out.push(filtered[i * fw + j]);
        }
    }
    debug_assert_eq!(out.len(), oh * ow);
    Ok(Plane::from_parts(oh, ow, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::SplitMix64;

    fn plane(h: usize, w: usize, v: &[f64]) -> Plane {
        Plane::new(h, w, v.to_vec()).unwrap()
    }

    fn random_plane(h: usize, w: usize, seed: u64) -> Plane {
        let mut rng = SplitMix64::new(seed);
        Plane::new(h, w, (0..h * w).map(|_| rng.next_f64() * 255.0).collect()).unwrap()
    }

    #[test]
    fn factor_rule() {
        let f = |h, w| compute_factor(h, w).factor();
        assert_eq!(f(256, 256), 1);
        assert_eq!(f(384, 512), 2);
        assert_eq!(f(1080, 1920), 4);
        assert_eq!(f(2160, 3840), 8);
        assert_eq!(f(100, 100), 1);
        assert_eq!(f(1, 1), 1);
        // 384 / 256 = 1.5 and 640 / 256 = 2.5 both round away from zero.
        assert_eq!(f(640, 1000), 3);
        assert_eq!(f(639, 1000), 2);
    }

    #[test]
    fn two_by_two_mean() {
        let p = plane(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let spec = DownsampleSpec::new(2).unwrap();
        let mut c = OpCounter::ZERO;
        let out = block_mean_decimate(&p, spec, &mut c).unwrap();
        assert_eq!(out.as_slice(), &[2.5]);
        assert_eq!(c, OpCounter::new(1, 3));
        assert_eq!(
            separate_filter_then_decimate(&p, spec).unwrap().as_slice(),
            &[2.5]
        );
    }

    #[test]
    fn passthrough_counts_nothing() {
        let p = random_plane(5, 7, 1);
        let spec = DownsampleSpec::new(1).unwrap();
        let mut c = OpCounter::ZERO;
        assert_eq!(block_mean_decimate(&p, spec, &mut c).unwrap(), p);
        assert_eq!(c, OpCounter::ZERO);
        assert_eq!(separate_filter_then_decimate(&p, spec).unwrap(), p);
    }

    #[test]
    fn five_by_five_drops_trailing_row_and_column() {
        let values: Vec<f64> = (0..25).map(|v| (v * v) as f64).collect();
        let p = plane(5, 5, &values);
        let out = block_mean_decimate(
            &p,
            DownsampleSpec::new(2).unwrap(),
            &mut OpCounter::default(),
        )
        .unwrap();
        assert_eq!(out.dims(), (2, 2));
        for i in 0..2 {
            for j in 0..2 {
                let brute = (values[(2 * i) * 5 + 2 * j]
                    + values[(2 * i) * 5 + 2 * j + 1]
                    + values[(2 * i + 1) * 5 + 2 * j]
                    + values[(2 * i + 1) * 5 + 2 * j + 1])
                    / 4.0;
                assert_eq!(out.get(i, j), brute);
            }
        }
    }

    #[test]
    fn fused_matches_literal_form_bitwise() {
        let p = random_plane(16, 16, 42);
        let spec = DownsampleSpec::new(4).unwrap();
        let fused = block_mean_decimate(&p, spec, &mut OpCounter::default()).unwrap();
        let literal = separate_filter_then_decimate(&p, spec).unwrap();
        assert_eq!(fused, literal);
    }

    #[test]
    fn counts_match_closed_form() {
        for (h, w, m) in [(16, 16, 4), (17, 9, 3), (8, 8, 8), (3, 5, 2)] {
            let spec = DownsampleSpec::new(m).unwrap();
            let mut c = OpCounter::ZERO;
            block_mean_decimate(&random_plane(h, w, 9), spec, &mut c).unwrap();
            assert_eq!(c, count_decimate_ops(h, w, spec), "{h}x{w} M={m}");
        }
    }

    #[test]
    fn too_small_plane_is_an_error() {
        let p = random_plane(3, 8, 2);
        let spec = DownsampleSpec::new(4).unwrap();
        assert!(matches!(
            block_mean_decimate(&p, spec, &mut OpCounter::default()),
            Err(Error::PlaneTooSmall { factor: 4, .. })
        ));
        assert!(separate_filter_then_decimate(&p, spec).is_err());
        assert!(matches!(DownsampleSpec::new(0), Err(Error::ZeroFactor)));
    }

    #[test]
    fn counter_is_additive() {
        let a = OpCounter::new(1, 2);
        let mut b = OpCounter::new(10, 20);
        b += a;
        assert_eq!(b, OpCounter::new(11, 22));
        assert_eq!(a + OpCounter::ZERO, a);
    }
}
