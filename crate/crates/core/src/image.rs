//! Image containers.
//!
//! [`RgbImage8`] is the 8-bit planar input of every pipeline. [`Plane`] is the
//! double-precision working raster that holds converted and filtered channels.

use crate::error::{Error, Result};

/// 8-bit RGB raster stored as three separate channel buffers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage8 {
    height: usize,
    width: usize,
    r: Vec<u8>,
    g: Vec<u8>,
    b: Vec<u8>,
}

impl RgbImage8 {
    pub fn from_planar(
        height: usize,
        width: usize,
        r: Vec<u8>,
        g: Vec<u8>,
        b: Vec<u8>,
    ) -> Result<Self> {
        check_dims(height, width)?;
        let expected = height * width;
        for channel in [&r, &g, &b] {
            if channel.len() != expected {
                return Err(Error::SampleCount {
                    expected,
                    actual: channel.len(),
                });
            }
        }
        Ok(Self {
            height,
            width,
            r,
            g,
            b,
        })
    }

    /// Builds an image from interleaved `RGBRGB...` bytes.
    pub fn from_interleaved(height: usize, width: usize, rgb: &[u8]) -> Result<Self> {
        check_dims(height, width)?;
        let expected = height * width * 3;
        if rgb.len() != expected {
            return Err(Error::SampleCount {
                expected,
                actual: rgb.len(),
            });
        }
        let n = height * width;
        let (mut r, mut g, mut b) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for px in rgb.chunks_exact(3) {
            r.push(px[0]);
            g.push(px[1]);
            b.push(px[2]);
        }
        Ok(Self {
            height,
            width,
            r,
            g,
            b,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn red(&self) -> &[u8] {
        &self.r
    }

    pub fn green(&self) -> &[u8] {
        &self.g
    }

    pub fn blue(&self) -> &[u8] {
        &self.b
    }

    pub fn to_interleaved(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.r.len() * 3);
        for ((&r, &g), &b) in self.r.iter().zip(&self.g).zip(&self.b) {
            out.extend_from_slice(&[r, g, b]);
        }
        out
    }

    /// Widens every sample to `f64` without rescaling, so 255 stays 255.0.
    pub fn to_planes(&self) -> (Plane, Plane, Plane) {
        let widen = |c: &[u8]| Plane {
            height: self.height,
            width: self.width,
            data: c.iter().map(|&v| f64::from(v)).collect(),
        };
        (widen(&self.r), widen(&self.g), widen(&self.b))
    }
}

fn check_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::ZeroDimension { height, width });
    }
    Ok(())
}

/// Row-major single-channel raster of finite `f64` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != height * width {
            return Err(Error::SampleCount {
                expected: height * width,
                actual: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("plane samples"));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    /// Constructor for kernels that already guarantee the invariants.
    pub(crate) fn from_parts(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    /// Largest absolute per-sample difference to `other`.
    pub fn max_abs_diff(&self, other: &Plane) -> Result<f64> {
        ensure_same_dims(self, other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Arithmetic mean, summed in row-major order.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

pub(crate) fn ensure_same_dims(a: &Plane, b: &Plane) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            left_height: a.height,
            left_width: a.width,
            right_height: b.height,
            right_width: b.width,
        });
    }
    Ok(())
}
