//! Gradient-magnitude and chroma similarity scores over preprocessed channels.
//!
//! These are compact stand-ins with the usual FR-IQA shape: a structure term
//! on `L` and multiplicative similarity terms on `C1` and `C2`. They exist so
//! that score equality under either preprocessing order can be checked end to
//! end, not to predict human opinion.

use crate::colorspace::Channel;
use crate::error::{Error, Result};
use crate::image::{ensure_same_dims, Plane};
use crate::pipeline::PreprocessedChannels;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricConfig {
    /// Stabilizer of the gradient term, on the squared 0-255 gradient scale.
    pub gradient_c: f64,
    /// Stabilizer of the chroma terms.
    pub chroma_t: f64,
    /// Exponent applied to the product of chroma similarities.
    pub chroma_weight: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            gradient_c: 160.0,
            chroma_t: 200.0,
            chroma_weight: 0.03,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gradient_c > 0.0 && self.gradient_c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "gradient constant must be > 0, got {}",
                self.gradient_c
            )));
        }
        if !(self.chroma_t > 0.0 && self.chroma_t.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "chroma constant must be > 0, got {}",
                self.chroma_t
            )));
        }
        if !(0.0..=1.0).contains(&self.chroma_weight) {
            return Err(Error::InvalidConfig(format!(
                "chroma weight must lie in [0, 1], got {}",
                self.chroma_weight
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QualityScore {
    pub value: f64,
    /// Mean of the gradient similarity map.
    pub gradient: f64,
    /// Mean of each chroma similarity map that took part.
    pub chroma: Vec<(Channel, f64)>,
}

/// Prewitt gradient magnitude, kernels scaled by 1/3, edges replicated.
pub fn prewitt_magnitude(p: &Plane) -> Result<Plane> {
    let (h, w) = p.dims();
    if h < 3 || w < 3 {
        return Err(Error::GradientTooSmall {
            height: h,
            width: w,
        });
    }
    let at = |i: isize, j: isize| {
        let i = i.clamp(0, h as isize - 1) as usize;
        let j = j.clamp(0, w as isize - 1) as usize;
        p.get(i, j)
    };
    let mut out = Vec::with_capacity(h * w);
    for i in 0..h as isize {
        for j in 0..w as isize {
            let gx = (at(i - 1, j - 1) + at(i, j - 1) + at(i + 1, j - 1)
                - at(i - 1, j + 1)
                - at(i, j + 1)
                - at(i + 1, j + 1))
                / 3.0;
            let gy = (at(i - 1, j - 1) + at(i - 1, j) + at(i - 1, j + 1)
                - at(i + 1, j - 1)
                - at(i + 1, j)
                - at(i + 1, j + 1))
                / 3.0;
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    Ok(Plane::from_parts(h, w, out))
}

fn similarity_map(a: &Plane, b: &Plane, stabilizer: f64) -> Plane {
    let data = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| (2.0 * x * y + stabilizer) / (x * x + y * y + stabilizer))
        .collect();
    Plane::from_parts(a.height(), a.width(), data)
}

/// `(2·gr·gd + c) / (gr² + gd² + c)` over the Prewitt magnitudes of both planes.
pub fn gradient_similarity(ref_l: &Plane, dst_l: &Plane, c: f64) -> Result<Plane> {
    ensure_same_dims(ref_l, dst_l)?;
    let gr = prewitt_magnitude(ref_l)?;
    let gd = prewitt_magnitude(dst_l)?;
    Ok(similarity_map(&gr, &gd, c))
}

/// `(2·r·d + T) / (r² + d² + T)` per sample.
pub fn chroma_similarity(ref_c: &Plane, dst_c: &Plane, t: f64) -> Result<Plane> {
    ensure_same_dims(ref_c, dst_c)?;
    Ok(similarity_map(ref_c, dst_c, t))
}

/// Real part of `x^γ`, so negative chroma products stay finite.
fn real_pow(x: f64, gamma: f64) -> f64 {
    if x >= 0.0 {
        x.powf(gamma)
    } else {
        (-x).powf(gamma) * (std::f64::consts::PI * gamma).cos()
    }
}

/// Pools the local similarity maps into one score.
///
/// With chroma channels present the pooled map is
/// `gradient · (∏ chroma)^γ`; otherwise it is the gradient map alone.
pub fn score(
    reference: &PreprocessedChannels,
    distorted: &PreprocessedChannels,
    cfg: &MetricConfig,
) -> Result<QualityScore> {
    cfg.validate()?;
    let (rc, dc) = (reference.channels(), distorted.channels());
    if rc.channel_set() != dc.channel_set() {
        return Err(Error::ChannelSetMismatch);
    }
    let (Some(ref_l), Some(dst_l)) = (rc.l(), dc.l()) else {
        return Err(Error::MissingLuminance);
    };
    let grad = gradient_similarity(ref_l, dst_l, cfg.gradient_c)?;

    let mut chroma = Vec::new();
    let mut chroma_maps = Vec::new();
    for ch in [Channel::C1, Channel::C2] {
        if let (Some(a), Some(b)) = (rc.get(ch), dc.get(ch)) {
            let map = chroma_similarity(a, b, cfg.chroma_t)?;
            chroma.push((ch, map.mean()));
            chroma_maps.push(map);
        }
    }

    let n = grad.as_slice().len();
    let mut total = 0.0;
    for idx in 0..n {
        let mut local = grad.as_slice()[idx];
        if !chroma_maps.is_empty() {
            let product: f64 = chroma_maps.iter().map(|m| m.as_slice()[idx]).product();
            local *= real_pow(product, cfg.chroma_weight);
        }
        total += local;
    }
    Ok(QualityScore {
        value: total / n as f64,
        gradient: grad.mean(),
        chroma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::{matrix_by_name, ChannelSet, ColorMatrix};
    use crate::downsample::DownsampleSpec;
    use crate::pipeline::{run_convert_first, run_downsample_first};
    use crate::synth::{distort, synth_image, SplitMix64};

    fn random_plane(h: usize, w: usize, seed: u64, scale: f64) -> Plane {
        let mut rng = SplitMix64::new(seed);
        Plane::new(
            h,
            w,
            (0..h * w).map(|_| (rng.next_f64() - 0.5) * scale).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_planes_give_ones() {
        let p = random_plane(6, 5, 1, 255.0);
        let map = gradient_similarity(&p, &p, 160.0).unwrap();
        assert!(map.as_slice().iter().all(|&v| v == 1.0));
        let map = chroma_similarity(&p, &p, 200.0).unwrap();
        assert!(map.as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn flat_planes_have_no_gradient() {
        let a = Plane::filled(4, 4, 10.0).unwrap();
        let b = Plane::filled(4, 4, 200.0).unwrap();
        let map = gradient_similarity(&a, &b, 160.0).unwrap();
        assert!(map.as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn hand_computed_3x3_prewitt() {
        // Columns 0, 0, 3: a vertical edge. With edge replication every
        // pixel of the middle column sees the full step; the left column
        // sees it from the replicated border only through column 1.
        let reference =
            Plane::new(3, 3, vec![0.0, 0.0, 3.0, 0.0, 0.0, 3.0, 0.0, 0.0, 3.0]).unwrap();
        let mag = prewitt_magnitude(&reference).unwrap();
        // Column 0: left neighbor is replicated column 0 (0), right is column 1 (0) -> 0.
        // Column 1: left 0, right 3 in all three rows -> |0 - 9| / 3 = 3.
        // Column 2: left 0, right replicated 3 -> 3.
        for i in 0..3 {
            assert_eq!(mag.get(i, 0), 0.0);
            assert_eq!(mag.get(i, 1), 3.0);
            assert_eq!(mag.get(i, 2), 3.0);
        }
        let flat = Plane::filled(3, 3, 1.0).unwrap();
        let map = gradient_similarity(&reference, &flat, 160.0).unwrap();
        // g_r = 3, g_d = 0: 160 / (9 + 160).
        assert_eq!(map.get(0, 1), 160.0 / 169.0);
        assert_eq!(map.get(1, 0), 1.0);
    }

    #[test]
    fn gradient_requires_3x3() {
        let p = Plane::filled(2, 5, 0.0).unwrap();
        assert!(matches!(
            gradient_similarity(&p, &p, 1.0),
            Err(Error::GradientTooSmall { .. })
        ));
    }

    #[test]
    fn chroma_closed_forms() {
        let x = random_plane(4, 4, 3, 100.0);
        let zero = Plane::filled(4, 4, 0.0).unwrap();
        let map = chroma_similarity(&x, &zero, 200.0).unwrap();
        for (&s, &v) in map.as_slice().iter().zip(x.as_slice()) {
            assert_eq!(s, 200.0 / (v * v + 200.0));
        }
        let y = random_plane(4, 4, 4, 100.0);
        let map = chroma_similarity(&x, &y, 200.0).unwrap();
        for ((&s, &a), &b) in map.as_slice().iter().zip(x.as_slice()).zip(y.as_slice()) {
            let expect = (2.0 * a * b + 200.0) / (a * a + b * b + 200.0);
            assert_eq!(s, expect);
            assert!(s.is_finite() && s > -1.0 && s <= 1.0);
        }
        assert!(chroma_similarity(&x, &Plane::filled(2, 8, 0.0).unwrap(), 1.0).is_err());
    }

    fn pair(seed: u64, h: usize, w: usize) -> (crate::image::RgbImage8, crate::image::RgbImage8) {
        let r = synth_image(h, w, seed).unwrap();
        let d = distort(&r, 40, seed + 1);
        (r, d)
    }

    #[test]
    fn self_score_is_one() {
        let (img, _) = pair(1, 32, 32);
        let yiq = matrix_by_name("yiq").unwrap();
        let spec = DownsampleSpec::new(2).unwrap();
        for ch in [ChannelSet::ALL, ChannelSet::LUMA] {
            let p = run_downsample_first(&img, &yiq, ch, spec).unwrap();
            let s = score(&p, &p, &MetricConfig::default()).unwrap();
            assert_eq!(s.value, 1.0);
        }
    }

    #[test]
    fn zero_chroma_weight_ignores_chroma() {
        let (r, d) = pair(5, 24, 24);
        let spec = DownsampleSpec::new(2).unwrap();
        let yiq = matrix_by_name("yiq").unwrap();
        // Same luminance row, wildly different chroma rows.
        let mut other = *yiq.coefficients();
        other[3..].copy_from_slice(&[5.0, -3.0, 1.0, 0.0, 9.0, -9.0]);
        let other = ColorMatrix::new("other", other).unwrap();
        let cfg = MetricConfig {
            chroma_weight: 0.0,
            ..MetricConfig::default()
        };
        let s1 = score(
            &run_convert_first(&r, &yiq, ChannelSet::ALL, spec).unwrap(),
            &run_convert_first(&d, &yiq, ChannelSet::ALL, spec).unwrap(),
            &cfg,
        )
        .unwrap();
        let s2 = score(
            &run_convert_first(&r, &other, ChannelSet::ALL, spec).unwrap(),
            &run_convert_first(&d, &other, ChannelSet::ALL, spec).unwrap(),
            &cfg,
        )
        .unwrap();
        assert_eq!(s1.value, s2.value);
        assert_eq!(s1.value, s1.gradient);
    }

    #[test]
    fn strategy_swap_keeps_score() {
        let (r, d) = pair(3, 96, 80);
        let spec = DownsampleSpec::new(3).unwrap();
        let yiq = matrix_by_name("yiq").unwrap();
        let cfg = MetricConfig::default();
        let a = score(
            &run_convert_first(&r, &yiq, ChannelSet::ALL, spec).unwrap(),
            &run_convert_first(&d, &yiq, ChannelSet::ALL, spec).unwrap(),
            &cfg,
        )
        .unwrap();
        let b = score(
            &run_downsample_first(&r, &yiq, ChannelSet::ALL, spec).unwrap(),
            &run_downsample_first(&d, &yiq, ChannelSet::ALL, spec).unwrap(),
            &cfg,
        )
        .unwrap();
        assert!((a.value - b.value).abs() <= 1e-9);
        assert!(a.value < 1.0);
    }

    #[test]
    fn negative_chroma_product_stays_real() {
        assert_eq!(real_pow(0.25, 0.5), 0.5);
        let v = real_pow(-0.25, 0.5);
        assert!(v.abs() < 1e-15);
        assert_eq!(real_pow(-0.5, 0.0), 1.0);
    }

    #[test]
    fn mismatches_and_bad_configs() {
        let (r, d) = pair(8, 16, 16);
        let spec = DownsampleSpec::new(2).unwrap();
        let m = ColorMatrix::identity();
        let all = run_convert_first(&r, &m, ChannelSet::ALL, spec).unwrap();
        let luma = run_convert_first(&d, &m, ChannelSet::LUMA, spec).unwrap();
        assert!(matches!(
            score(&all, &luma, &MetricConfig::default()),
            Err(Error::ChannelSetMismatch)
        ));
        let chroma_only = ChannelSet::new(false, true, true).unwrap();
        let c = run_convert_first(&r, &m, chroma_only, spec).unwrap();
        assert!(matches!(
            score(&c, &c, &MetricConfig::default()),
            Err(Error::MissingLuminance)
        ));
        let bad = MetricConfig {
            gradient_c: 0.0,
            ..MetricConfig::default()
        };
        assert!(score(&all, &all, &bad).is_err());
        let bad = MetricConfig {
            chroma_weight: 1.5,
            ..MetricConfig::default()
        };
        assert!(score(&all, &all, &bad).is_err());
    }
}
