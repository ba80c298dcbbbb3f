//! Timed and counted comparisons of the two preprocessing orders.
//!
//! Every size gets a synthetic reference (`synth_image(h, w, seed)`) and a
//! distorted copy (`distort(reference, 24, seed + 1)`). One evaluation is
//! preprocessing both images plus computing the score. Timings take the
//! median over the repetitions after one untimed warm-up; the two strategies
//! alternate within each repetition and never run concurrently.

use std::time::Instant;

use crate::colorspace::{matrix_by_name, ChannelSet, ColorMatrix};
use crate::downsample::{compute_factor, DownsampleSpec};
use crate::error::{Error, Result};
use crate::image::RgbImage8;
use crate::metrics::{score, MetricConfig, QualityScore};
use crate::pipeline::{compare_channels, EquivalenceReport, PipelinePlan, StageCounters, Strategy};
use crate::report::BenchReport;
use crate::synth::{distort, synth_image};

pub const MIN_REPETITIONS: usize = 3;
pub const DISTORTION_AMPLITUDE: u8 = 24;

/// Parses `HxW`, e.g. `384x512`.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::BadSize(s.to_owned());
    let (h, w) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    let h: usize = h.parse().map_err(|_| bad())?;
    let w: usize = w.parse().map_err(|_| bad())?;
    if h == 0 || w == 0 {
        return Err(bad());
    }
    Ok((h, w))
}

/// Parses a comma-separated list of sizes.
pub fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',').map(parse_size).collect()
}

pub fn size_label((h, w): (usize, usize)) -> String {
    format!("{h}x{w}")
}

/// A metric front-end configuration to benchmark.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub label: String,
    pub matrix: ColorMatrix,
    pub channels: ChannelSet,
}

/// YIQ and LMN with all channels, and YIQ luminance only.
pub fn default_pipelines() -> Vec<PipelineConfig> {
    let yiq = matrix_by_name("yiq").expect("builtin");
    let lmn = matrix_by_name("lmn").expect("builtin");
    vec![
        PipelineConfig {
            label: "yiq".into(),
            matrix: yiq.clone(),
            channels: ChannelSet::ALL,
        },
        PipelineConfig {
            label: "lmn".into(),
            matrix: lmn,
            channels: ChannelSet::ALL,
        },
        PipelineConfig {
            label: "yiq-luma".into(),
            matrix: yiq,
            channels: ChannelSet::LUMA,
        },
    ]
}

/// Median, minimum and maximum wall-clock milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timing {
    pub median_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl Timing {
    pub fn from_samples(samples: &[f64]) -> Option<Timing> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        Some(Timing {
            median_ms: median,
            min_ms: sorted[0],
            max_ms: sorted[n - 1],
        })
    }
}

/// One (size, pipeline, strategy) row.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub size: (usize, usize),
    pub pipeline: String,
    pub strategy: Strategy,
    /// All zero for counter-only runs.
    pub timing: Timing,
    /// Counters of one image through the front-end.
    pub counters: StageCounters,
    pub factor: usize,
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub sizes: Vec<(usize, usize)>,
    pub seed: u64,
    pub repetitions: usize,
    pub pipelines: Vec<PipelineConfig>,
    pub metric: MetricConfig,
    /// Skip timing and report zero milliseconds.
    pub counters_only: bool,
}

impl BenchOptions {
    pub fn new(sizes: Vec<(usize, usize)>, seed: u64, repetitions: usize) -> Self {
        Self {
            sizes,
            seed,
            repetitions,
            pipelines: default_pipelines(),
            metric: MetricConfig::default(),
            counters_only: false,
        }
    }
}

/// Reference/distorted pair used for every size.
pub fn image_pair(height: usize, width: usize, seed: u64) -> Result<(RgbImage8, RgbImage8)> {
    let reference = synth_image(height, width, seed)?;
    let distorted = distort(&reference, DISTORTION_AMPLITUDE, seed.wrapping_add(1));
    Ok((reference, distorted))
}

/// Preprocesses both images with `plan` and scores them.
pub fn evaluate(
    plan: &PipelinePlan,
    reference: &RgbImage8,
    distorted: &RgbImage8,
    cfg: &MetricConfig,
) -> Result<(QualityScore, StageCounters)> {
    let r = plan.execute(reference)?;
    let d = plan.execute(distorted)?;
    Ok((score(&r, &d, cfg)?, r.counters()))
}

fn time_ms(f: impl FnOnce() -> Result<()>) -> Result<f64> {
    let start = Instant::now();
    f()?;
    Ok(start.elapsed().as_secs_f64() * 1e3)
}

pub fn run_bench(opts: &BenchOptions) -> Result<BenchReport> {
    if !opts.counters_only && opts.repetitions < MIN_REPETITIONS {
        return Err(Error::TooFewRepetitions {
            min: MIN_REPETITIONS,
            got: opts.repetitions,
        });
    }
    opts.metric.validate()?;
    let mut records = Vec::new();
    for &(h, w) in &opts.sizes {
        let spec = compute_factor(h, w);
        let (reference, distorted) = image_pair(h, w, opts.seed)?;
        for p in &opts.pipelines {
            let plans = Strategy::CONCRETE
                .map(|s| PipelinePlan::new(s, p.channels, spec, p.matrix.clone(), h, w))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            let mut samples = vec![Vec::with_capacity(opts.repetitions); plans.len()];
            let mut counters = vec![StageCounters::default(); plans.len()];
            for (plan, slot) in plans.iter().zip(counters.iter_mut()) {
                // Warm-up, and the source of the reported counters.
                *slot = evaluate(plan, &reference, &distorted, &opts.metric)?.1;
                debug_assert_eq!(*slot, plan.predicted());
            }
            if !opts.counters_only {
                for _ in 0..opts.repetitions {
                    for (plan, times) in plans.iter().zip(samples.iter_mut()) {
                        times.push(time_ms(|| {
                            evaluate(plan, &reference, &distorted, &opts.metric).map(drop)
                        })?);
                    }
                }
            }
            for ((plan, times), counters) in plans.iter().zip(&samples).zip(counters) {
                records.push(BenchRecord {
                    size: (h, w),
                    pipeline: p.label.clone(),
                    strategy: plan.strategy(),
                    timing: Timing::from_samples(times).unwrap_or_default(),
                    counters,
                    factor: spec.factor(),
                });
            }
        }
    }
    Ok(BenchReport::new(records))
}

/// Outcome of comparing both orders on one synthetic pair.
#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub factor: DownsampleSpec,
    pub channels: EquivalenceReport,
    /// Scores under (convert-first, downsample-first); `None` when the
    /// reduced image is too small for the gradient term.
    pub scores: Option<(f64, f64)>,
}

impl VerifyOutcome {
    pub fn score_delta(&self) -> Option<f64> {
        self.scores.map(|(a, b)| (a - b).abs())
    }

    pub fn passed(&self) -> bool {
        self.channels.passed()
            && self
                .score_delta()
                .is_none_or(|d| d <= self.channels.tolerance)
    }
}

/// Runs both orders with all channels on the pair for `(h, w, seed)`.
pub fn verify_pair(
    size: (usize, usize),
    seed: u64,
    matrix: &ColorMatrix,
    tol: f64,
    cfg: &MetricConfig,
) -> Result<VerifyOutcome> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be a finite value >= 0, got {tol}"
        )));
    }
    let (h, w) = size;
    let spec = compute_factor(h, w);
    let (reference, distorted) = image_pair(h, w, seed)?;
    let cf = PipelinePlan::new(
        Strategy::ConvertFirst,
        ChannelSet::ALL,
        spec,
        matrix.clone(),
        h,
        w,
    )?;
    let df = PipelinePlan::new(
        Strategy::DownsampleFirst,
        ChannelSet::ALL,
        spec,
        matrix.clone(),
        h,
        w,
    )?;
    let (ref_cf, ref_df) = (cf.execute(&reference)?, df.execute(&reference)?);
    let channels = compare_channels(ref_cf.channels(), ref_df.channels(), tol)?;
    let (oh, ow) = spec.output_dims(h, w);
    let scores = if oh >= 3 && ow >= 3 {
        let a = score(&ref_cf, &cf.execute(&distorted)?, cfg)?.value;
        let b = score(&ref_df, &df.execute(&distorted)?, cfg)?.value;
        Some((a, b))
    } else {
        None
    };
    Ok(VerifyOutcome {
        factor: spec,
        channels,
        scores,
    })
}
