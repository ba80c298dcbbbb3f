//! Shared preprocessing front-end of full-reference image quality metrics.
//!
//! Metrics in the FSIMc/VSI family convert RGB to one luminance and two
//! chromaticity channels with a 3x3 linear operator, then mean-filter and
//! decimate every channel by `M = round(min(h, w) / 256)`. Both stages are
//! linear, so they can run in either order with the same result. Filtering
//! the RGB planes first means the conversion touches `M²` times fewer pixels.
//!
//! ```
//! use iqa_prep::{compute_factor, matrix_by_name, run_convert_first, run_downsample_first, synth_image, ChannelSet};
//!
//! let img = synth_image(384, 512, 42)?;
//! let spec = compute_factor(img.height(), img.width());
//! let yiq = matrix_by_name("yiq")?;
//! let old = run_convert_first(&img, &yiq, ChannelSet::ALL, spec)?;
//! let new = run_downsample_first(&img, &yiq, ChannelSet::ALL, spec)?;
//! assert_eq!(
//!     old.counters().conversion.multiplies,
//!     4 * new.counters().conversion.multiplies
//! );
//! let diff = old.channels().l().unwrap().max_abs_diff(new.channels().l().unwrap())?;
//! assert!(diff <= 1e-9);
//! # Ok::<(), iqa_prep::Error>(())
//! ```
//!
//! The guide under `book/` walks through each stage.

pub mod bench;
pub mod colorspace;
pub mod downsample;
mod error;
pub mod image;
pub mod metrics;
pub mod pipeline;
pub mod pnm;
pub mod report;
pub mod synth;

pub use colorspace::{
    builtin_matrices, count_transform_ops, matrix_by_name, parse_matrix_table, transform, Channel,
    ChannelPlanes, ChannelSet, ColorMatrix,
};
pub use downsample::{
    block_mean_decimate, compute_factor, count_decimate_ops, separate_filter_then_decimate,
    DownsampleSpec, OpCounter,
};
pub use error::{Error, Result};
pub use image::{Plane, RgbImage8};
pub use metrics::{chroma_similarity, gradient_similarity, score, MetricConfig, QualityScore};
pub use pipeline::{
    predict_counters, run_convert_first, run_downsample_first, select_strategy, verify_equivalence,
    EquivalenceReport, PipelinePlan, PreprocessedChannels, StageCounters, Strategy,
};
pub use pnm::{load_pnm, write_pnm};
pub use synth::{distort, synth_image};

// Compiles and runs the code listings of the guide as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/images.md")]
    mod images {}
    #[doc = include_str!("../../../book/src/color-transforms.md")]
    mod color_transforms {}
    #[doc = include_str!("../../../book/src/downsampling.md")]
    mod downsampling {}
    #[doc = include_str!("../../../book/src/reordering.md")]
    mod reordering {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/benchmarking.md")]
    mod benchmarking {}
}
