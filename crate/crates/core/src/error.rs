use std::path::PathBuf;

/// Everything that can go wrong in the preprocessing front-end.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("image dimensions must be at least 1x1, got {height}x{width}")]
    ZeroDimension { height: usize, width: usize },

    #[error("sample buffer holds {actual} values, expected {expected}")]
    SampleCount { expected: usize, actual: usize },

    #[error("dimension mismatch: {left_height}x{left_width} vs {right_height}x{right_width}")]
    DimensionMismatch {
        left_height: usize,
        left_width: usize,
        right_height: usize,
        right_width: usize,
    },

    #[error("plane of {height}x{width} is smaller than the {factor}x{factor} block")]
    PlaneTooSmall {
        height: usize,
        width: usize,
        factor: usize,
    },

    #[error("plane of {height}x{width} is too small for a 3x3 gradient (need at least 3x3)")]
    GradientTooSmall { height: usize, width: usize },

    #[error("downsample factor must be at least 1")]
    ZeroFactor,

    #[error("at least one of L, C1, C2 must be requested")]
    EmptyChannelSet,

    #[error("channel sets differ between reference and distorted inputs")]
    ChannelSetMismatch,

    #[error("the luminance channel is required to compute a score")]
    MissingLuminance,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid metric configuration: {0}")]
    InvalidConfig(String),

    #[error("pnm header error at byte {offset}: {message}")]
    PnmHeader { offset: usize, message: String },

    #[error("unsupported pnm maxval {maxval} at byte {offset} (only 255 is supported)")]
    PnmMaxval { offset: usize, maxval: u64 },

    #[error("truncated pnm payload at byte {offset}: expected {expected} bytes, found {found}")]
    PnmTruncated {
        offset: usize,
        expected: usize,
        found: usize,
    },

    #[error("matrix table line {line}: {message}")]
    MatrixTable { line: usize, message: String },

    #[error("unknown color matrix '{0}'")]
    UnknownMatrix(String),

    #[error("bad size '{0}', expected HxW such as 384x512")]
    BadSize(String),

    #[error("at least {min} repetitions are required, got {got}")]
    TooFewRepetitions { min: usize, got: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
