//! Binary PPM (`P6`, maxval 255) encoding and decoding.
//!
//! The writer always emits `P6\n<width> <height>\n255\n` followed by
//! interleaved RGB bytes. The reader also accepts arbitrary whitespace and
//! `#` comments in the header, as netpbm does.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::RgbImage8;

pub fn encode(image: &RgbImage8) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.to_interleaved());
    out
}

pub fn decode(bytes: &[u8]) -> Result<RgbImage8> {
    let mut cursor = HeaderCursor { bytes, pos: 0 };
    if bytes.get(0..2) != Some(b"P6") {
        return Err(Error::PnmHeader {
            offset: 0,
            message: "missing P6 magic number".into(),
        });
    }
    cursor.pos = 2;
    let (width, _) = cursor.number("width")?;
    let (height, _) = cursor.number("height")?;
    let (maxval, maxval_offset) = cursor.number("maxval")?;
    if maxval != 255 {
        return Err(Error::PnmMaxval {
            offset: maxval_offset,
            maxval,
        });
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => {
            return Err(Error::PnmHeader {
                offset: cursor.pos,
                message: "expected a single whitespace byte after maxval".into(),
            })
        }
    }
    if width == 0 || height == 0 {
        return Err(Error::PnmHeader {
            offset: 2,
            message: format!("zero dimension {width}x{height}"),
        });
    }
    let (width, height) = (to_usize(width, 2)?, to_usize(height, 2)?);
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::PnmHeader {
            offset: 2,
            message: "image dimensions overflow".into(),
        })?;
    let payload = &bytes[cursor.pos..];
    if payload.len() < expected {
        return Err(Error::PnmTruncated {
            offset: bytes.len(),
            expected,
            found: payload.len(),
        });
    }
    RgbImage8::from_interleaved(height, width, &payload[..expected])
}

pub fn load_pnm(path: impl AsRef<Path>) -> Result<RgbImage8> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    decode(&bytes)
}

pub fn write_pnm(image: &RgbImage8, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(image)).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn to_usize(v: u64, offset: usize) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::PnmHeader {
        offset,
        message: format!("dimension {v} does not fit in memory"),
    })
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Reads one decimal field, returning it with the offset of its first digit.
    fn number(&mut self, what: &str) -> Result<(u64, usize)> {
        let before = self.pos;
        self.skip_whitespace_and_comments();
        if self.pos == before {
            return Err(Error::PnmHeader {
                offset: self.pos,
                message: format!("expected whitespace before {what}"),
            });
        }
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u64::from(b - b'0')))
                .ok_or_else(|| Error::PnmHeader {
                    offset: start,
                    message: format!("{what} overflows"),
                })?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::PnmHeader {
                offset: start,
                message: format!("expected decimal {what}"),
            });
        }
        Ok((value, start))
    }
}
