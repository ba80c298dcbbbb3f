//! The two orderings of color transformation and downsampling.
//!
//! * [`Strategy::ConvertFirst`]: convert the full-resolution image to the
//!   requested channels, then block-average each converted plane.
//! * [`Strategy::DownsampleFirst`]: block-average the R, G and B planes, then
//!   convert the reduced planes.
//!
//! Both stages are linear, so the two orders agree up to floating-point
//! reassociation. Downsampling first always filters three planes but converts
//! `M²` times fewer pixels.

use std::fmt;
use std::str::FromStr;

use crate::colorspace::{count_transform_ops, transform, ChannelPlanes, ChannelSet, ColorMatrix};
use crate::downsample::{block_mean_decimate, count_decimate_ops, DownsampleSpec, OpCounter};
use crate::error::{Error, Result};
use crate::image::RgbImage8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    ConvertFirst,
    DownsampleFirst,
    Auto,
}

impl Strategy {
    pub const CONCRETE: [Strategy; 2] = [Strategy::ConvertFirst, Strategy::DownsampleFirst];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::ConvertFirst => "convert-first",
            Strategy::DownsampleFirst => "downsample-first",
            Strategy::Auto => "auto",
        }
    }

    /// Replaces `Auto` with the selector's choice; concrete strategies pass through.
    pub fn resolve(self, channels: ChannelSet, spec: DownsampleSpec) -> Strategy {
        match self {
            Strategy::Auto => select_strategy(channels, spec),
            s => s,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "convert-first" => Ok(Strategy::ConvertFirst),
            "downsample-first" => Ok(Strategy::DownsampleFirst),
            "auto" => Ok(Strategy::Auto),
            other => Err(format!(
                "unknown strategy '{other}' (expected auto, convert-first or downsample-first)"
            )),
        }
    }
}

/// Picks the cheaper order.
///
/// Downsampling first only pays off when all three channels are needed and
/// `M ≥ 2`: it always filters three planes, so with fewer channels the
/// conventional order filters less. At `M = 1` the orders coincide and the
/// conventional one is kept.
pub fn select_strategy(channels: ChannelSet, spec: DownsampleSpec) -> Strategy {
    if spec.factor() >= 2 && channels.len() == 3 {
        Strategy::DownsampleFirst
    } else {
        Strategy::ConvertFirst
    }
}

/// Work done by one pipeline run, split by stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct StageCounters {
    pub conversion: OpCounter,
    pub filtering: OpCounter,
    /// Calls to the block-average kernel on full-resolution planes.
    pub filter_passes: usize,
}

impl StageCounters {
    pub fn total(&self) -> OpCounter {
        self.conversion + self.filtering
    }
}

/// Closed-form counters for running `strategy` on an `height x width` image.
///
/// `strategy` must be concrete; `Auto` is resolved first.
pub fn predict_counters(
    strategy: Strategy,
    height: usize,
    width: usize,
    channels: ChannelSet,
    spec: DownsampleSpec,
) -> StageCounters {
    let k = channels.len();
    let per_plane = count_decimate_ops(height, width, spec);
    let scale = |c: OpCounter, n: usize| OpCounter::new(c.multiplies * n as u64, c.adds * n as u64);
    match strategy.resolve(channels, spec) {
        Strategy::DownsampleFirst => {
            let (oh, ow) = spec.output_dims(height, width);
            StageCounters {
                conversion: count_transform_ops(oh, ow, channels),
                filtering: scale(per_plane, 3),
                filter_passes: 3,
            }
        }
        _ => StageCounters {
            conversion: count_transform_ops(height, width, channels),
            filtering: scale(per_plane, k),
            filter_passes: k,
        },
    }
}

/// A resolved execution plan for one image size.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelinePlan {
    strategy: Strategy,
    channels: ChannelSet,
    spec: DownsampleSpec,
    matrix: ColorMatrix,
    height: usize,
    width: usize,
    predicted: StageCounters,
}

impl PipelinePlan {
    pub fn new(
        strategy: Strategy,
        channels: ChannelSet,
        spec: DownsampleSpec,
        matrix: ColorMatrix,
        height: usize,
        width: usize,
    ) -> Result<Self> {
        if !spec.is_passthrough() && (height < spec.factor() || width < spec.factor()) {
            return Err(Error::PlaneTooSmall {
                height,
                width,
                factor: spec.factor(),
            });
        }
        let strategy = strategy.resolve(channels, spec);
        Ok(Self {
            strategy,
            channels,
            spec,
            matrix,
            height,
            width,
            predicted: predict_counters(strategy, height, width, channels, spec),
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn channels(&self) -> ChannelSet {
        self.channels
    }

    pub fn spec(&self) -> DownsampleSpec {
        self.spec
    }

    pub fn matrix(&self) -> &ColorMatrix {
        &self.matrix
    }

    pub fn input_dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn output_dims(&self) -> (usize, usize) {
        self.spec.output_dims(self.height, self.width)
    }

    pub fn predicted(&self) -> StageCounters {
        self.predicted
    }

    /// Predicted counters for either concrete strategy, for side-by-side reports.
    pub fn predicted_for(&self, strategy: Strategy) -> StageCounters {
        predict_counters(strategy, self.height, self.width, self.channels, self.spec)
    }

    pub fn execute(&self, img: &RgbImage8) -> Result<PreprocessedChannels> {
        if (img.height(), img.width()) != (self.height, self.width) {
            return Err(Error::DimensionMismatch {
                left_height: self.height,
                left_width: self.width,
                right_height: img.height(),
                right_width: img.width(),
            });
        }
        let mut counters = StageCounters::default();
        let channels = match self.strategy {
            Strategy::DownsampleFirst => self.downsample_then_convert(img, &mut counters)?,
            _ => self.convert_then_downsample(img, &mut counters)?,
        };
        Ok(PreprocessedChannels {
            channels,
            plan: self.clone(),
            counters,
        })
    }

    fn convert_then_downsample(
        &self,
        img: &RgbImage8,
        counters: &mut StageCounters,
    ) -> Result<ChannelPlanes> {
        let converted = {
            let (r, g, b) = img.to_planes();
            transform(
                &r,
                &g,
                &b,
                &self.matrix,
                self.channels,
                &mut counters.conversion,
            )?
        };
        let mut out = ChannelPlanes::default();
        for (ch, plane) in converted.iter() {
            out.set(
                ch,
                block_mean_decimate(plane, self.spec, &mut counters.filtering)?,
            );
            counters.filter_passes += 1;
        }
        Ok(out)
    }

    fn downsample_then_convert(
        &self,
        img: &RgbImage8,
        counters: &mut StageCounters,
    ) -> Result<ChannelPlanes> {
        let (r, g, b) = img.to_planes();
        let mut reduce = |p| {
            counters.filter_passes += 1;
            block_mean_decimate(p, self.spec, &mut counters.filtering)
        };
        let (r, g, b) = (reduce(&r)?, reduce(&g)?, reduce(&b)?);
        transform(
            &r,
            &g,
            &b,
            &self.matrix,
            self.channels,
            &mut counters.conversion,
        )
    }
}

/// Reduced-resolution channels plus the plan and the counters actually observed.
#[derive(Clone, Debug, PartialEq)]
pub struct PreprocessedChannels {
    channels: ChannelPlanes,
    plan: PipelinePlan,
    counters: StageCounters,
}

impl PreprocessedChannels {
    pub fn channels(&self) -> &ChannelPlanes {
        &self.channels
    }

    pub fn plan(&self) -> &PipelinePlan {
        &self.plan
    }

    pub fn counters(&self) -> StageCounters {
        self.counters
    }

    pub fn dims(&self) -> (usize, usize) {
        self.plan.output_dims()
    }
}

fn run_with(
    strategy: Strategy,
    img: &RgbImage8,
    m: &ColorMatrix,
    ch: ChannelSet,
    spec: DownsampleSpec,
) -> Result<PreprocessedChannels> {
    PipelinePlan::new(strategy, ch, spec, m.clone(), img.height(), img.width())?.execute(img)
}

pub fn run_convert_first(
    img: &RgbImage8,
    m: &ColorMatrix,
    ch: ChannelSet,
    spec: DownsampleSpec,
) -> Result<PreprocessedChannels> {
    run_with(Strategy::ConvertFirst, img, m, ch, spec)
}

pub fn run_downsample_first(
    img: &RgbImage8,
    m: &ColorMatrix,
    ch: ChannelSet,
    spec: DownsampleSpec,
) -> Result<PreprocessedChannels> {
    run_with(Strategy::DownsampleFirst, img, m, ch, spec)
}

/// Largest per-sample disagreement between the two orders, per channel.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub per_channel: Vec<(crate::colorspace::Channel, f64)>,
    pub tolerance: f64,
}

impl EquivalenceReport {
    pub fn max_abs_diff(&self) -> f64 {
        self.per_channel.iter().map(|&(_, d)| d).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_abs_diff() <= self.tolerance
    }
}

/// Runs both orders and compares them sample by sample.
///
/// A tolerance of zero is allowed and demands bit-identical channels.
pub fn verify_equivalence(
    img: &RgbImage8,
    m: &ColorMatrix,
    ch: ChannelSet,
    spec: DownsampleSpec,
    tol: f64,
) -> Result<EquivalenceReport> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be a finite value >= 0, got {tol}"
        )));
    }
    let a = run_convert_first(img, m, ch, spec)?;
    let b = run_downsample_first(img, m, ch, spec)?;
    compare_channels(a.channels(), b.channels(), tol)
}

pub(crate) fn compare_channels(
    a: &ChannelPlanes,
    b: &ChannelPlanes,
    tol: f64,
) -> Result<EquivalenceReport> {
    if a.channel_set() != b.channel_set() {
        return Err(Error::ChannelSetMismatch);
    }
    let per_channel = a
        .iter()
        .map(|(ch, pa)| {
            let pb = b.get(ch).expect("channel sets match");
            pa.max_abs_diff(pb).map(|d| (ch, d))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceReport {
        per_channel,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::{matrix_by_name, Channel};
    use crate::downsample::compute_factor;
    use crate::synth::synth_image;

    fn spec(m: usize) -> DownsampleSpec {
        DownsampleSpec::new(m).unwrap()
    }

    #[test]
    fn passthrough_identity_returns_input_channels() {
        let img = synth_image(5, 7, 3).unwrap();
        let out =
            run_convert_first(&img, &ColorMatrix::identity(), ChannelSet::ALL, spec(1)).unwrap();
        let (r, g, b) = img.to_planes();
        assert_eq!(out.channels().l(), Some(&r));
        assert_eq!(out.channels().c1(), Some(&g));
        assert_eq!(out.channels().c2(), Some(&b));
    }

    #[test]
    fn two_by_two_counters() {
        let img = synth_image(2, 2, 1).unwrap();
        let yiq = matrix_by_name("yiq").unwrap();
        let cf = run_convert_first(&img, &yiq, ChannelSet::ALL, spec(2)).unwrap();
        assert_eq!(cf.counters().conversion.multiplies, 36);
        assert_eq!(cf.counters().filtering, OpCounter::new(3, 9));
        let df = run_downsample_first(&img, &yiq, ChannelSet::ALL, spec(2)).unwrap();
        assert_eq!(df.counters().conversion.multiplies, 9);
        assert_eq!(df.counters().filtering, OpCounter::new(3, 9));
        assert_eq!(
            cf.counters().conversion.multiplies,
            4 * df.counters().conversion.multiplies
        );
    }

    #[test]
    fn observed_counters_match_prediction() {
        let yiq = matrix_by_name("yiq").unwrap();
        for (h, w, m) in [(9, 13, 2), (24, 24, 3), (16, 8, 8), (5, 5, 1)] {
            let img = synth_image(h, w, 11).unwrap();
            for ch in [
                ChannelSet::ALL,
                ChannelSet::LUMA,
                ChannelSet::new(true, true, false).unwrap(),
            ] {
                for s in Strategy::CONCRETE {
                    let plan = PipelinePlan::new(s, ch, spec(m), yiq.clone(), h, w).unwrap();
                    let out = plan.execute(&img).unwrap();
                    assert_eq!(out.counters(), plan.predicted(), "{h}x{w} M={m} {ch} {s}");
                }
            }
        }
    }

    #[test]
    fn strategies_agree_on_table_size() {
        let img = synth_image(384, 512, 42).unwrap();
        let yiq = matrix_by_name("yiq").unwrap();
        let report =
            verify_equivalence(&img, &yiq, ChannelSet::ALL, compute_factor(384, 512), 1e-9)
                .unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.per_channel.len(), 3);
    }

    #[test]
    fn identity_matrix_agrees_exactly() {
        let img = synth_image(30, 41, 5).unwrap();
        for m in [1, 2, 3, 4, 8] {
            let r = verify_equivalence(
                &img,
                &ColorMatrix::identity(),
                ChannelSet::ALL,
                spec(m),
                0.0,
            )
            .unwrap();
            assert_eq!(r.max_abs_diff(), 0.0);
            assert!(r.passed());
        }
    }

    #[test]
    fn small_yiq_case_and_large_coefficients() {
        let img = synth_image(64, 64, 7).unwrap();
        let yiq = matrix_by_name("yiq").unwrap();
        assert!(
            verify_equivalence(&img, &yiq, ChannelSet::ALL, spec(2), 1e-10)
                .unwrap()
                .passed()
        );
        let big =
            ColorMatrix::new("big", [1e3, -999.5, 1e3, -1e3, 1e3, 750.25, 1e3, 1e3, -1e3]).unwrap();
        assert!(
            verify_equivalence(&img, &big, ChannelSet::ALL, spec(4), 1e-6)
                .unwrap()
                .passed()
        );
    }

    #[test]
    fn verify_rejects_bad_tolerance() {
        let img = synth_image(4, 4, 1).unwrap();
        let m = ColorMatrix::identity();
        assert!(verify_equivalence(&img, &m, ChannelSet::ALL, spec(2), -1.0).is_err());
        assert!(verify_equivalence(&img, &m, ChannelSet::ALL, spec(2), f64::NAN).is_err());
    }

    #[test]
    fn selector_examples() {
        assert_eq!(
            select_strategy(ChannelSet::LUMA, spec(4)),
            Strategy::ConvertFirst
        );
        assert_eq!(
            select_strategy(ChannelSet::ALL, spec(4)),
            Strategy::DownsampleFirst
        );
        assert_eq!(
            select_strategy(ChannelSet::ALL, spec(1)),
            Strategy::ConvertFirst
        );
        let plan = PipelinePlan::new(
            Strategy::Auto,
            ChannelSet::ALL,
            spec(2),
            ColorMatrix::identity(),
            4,
            4,
        )
        .unwrap();
        assert_eq!(plan.strategy(), Strategy::DownsampleFirst);
    }

    #[test]
    fn plan_rejects_image_smaller_than_block() {
        let err = PipelinePlan::new(
            Strategy::ConvertFirst,
            ChannelSet::ALL,
            spec(8),
            ColorMatrix::identity(),
            7,
            20,
        );
        assert!(matches!(err, Err(Error::PlaneTooSmall { .. })));
        let plan = PipelinePlan::new(
            Strategy::ConvertFirst,
            ChannelSet::ALL,
            spec(2),
            ColorMatrix::identity(),
            4,
            4,
        )
        .unwrap();
        assert!(plan.execute(&synth_image(4, 5, 1).unwrap()).is_err());
    }

    #[test]
    fn luma_only_outputs_only_luma() {
        let img = synth_image(16, 16, 2).unwrap();
        let lmn = matrix_by_name("lmn").unwrap();
        let out = run_downsample_first(&img, &lmn, ChannelSet::LUMA, spec(4)).unwrap();
        assert_eq!(
            out.channels().iter().map(|(c, _)| c).collect::<Vec<_>>(),
            vec![Channel::L]
        );
        assert_eq!(out.dims(), (4, 4));
        assert_eq!(out.counters().filter_passes, 3);
    }

    #[test]
    fn strategy_parsing() {
        for s in [
            Strategy::ConvertFirst,
            Strategy::DownsampleFirst,
            Strategy::Auto,
        ] {
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
        }
        assert!("fast".parse::<Strategy>().is_err());
    }
}
