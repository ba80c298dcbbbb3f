//! Per-pixel 3x3 linear color transforms.
//!
//! A [`ColorMatrix`] maps `(R, G, B)` to `(L, C1, C2)`. Only the rows named in
//! a [`ChannelSet`] are evaluated, and each row is evaluated as
//! `λa·R + λb·G + λc·B` left to right with no fused multiply-add.

use std::collections::HashSet;
use std::fmt;

use crate::downsample::OpCounter;
use crate::error::{Error, Result};
use crate::image::{ensure_same_dims, Plane};

const BUILTIN_TABLE: &str = include_str!("../data/matrices.txt");

/// One output row of a color matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    L,
    C1,
    C2,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::L, Channel::C1, Channel::C2];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::L => "L",
            Channel::C1 => "C1",
            Channel::C2 => "C2",
        })
    }
}

/// Non-empty subset of `{L, C1, C2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChannelSet {
    flags: [bool; 3],
}

impl ChannelSet {
    pub const ALL: ChannelSet = ChannelSet { flags: [true; 3] };
    pub const LUMA: ChannelSet = ChannelSet {
        flags: [true, false, false],
    };

    pub fn new(l: bool, c1: bool, c2: bool) -> Result<Self> {
        if !(l || c1 || c2) {
            return Err(Error::EmptyChannelSet);
        }
        Ok(Self { flags: [l, c1, c2] })
    }

    pub fn contains(self, ch: Channel) -> bool {
        self.flags[ch.index()]
    }

    /// Number of requested channels, `k`.
    pub fn len(self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn iter(self) -> impl Iterator<Item = Channel> {
        Channel::ALL.into_iter().filter(move |&c| self.contains(c))
    }
}

impl fmt::Display for ChannelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.iter().map(|c| c.to_string()).collect();
        f.write_str(&names.join("+"))
    }
}

/// Named 3x3 coefficient matrix, rows `(L, C1, C2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorMatrix {
    name: String,
    coefficients: [f64; 9],
}

impl ColorMatrix {
    pub fn new(name: impl Into<String>, coefficients: [f64; 9]) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("color matrix coefficients"));
        }
        Ok(Self {
            name: name.into(),
            coefficients,
        })
    }

    pub fn identity() -> Self {
        Self {
            name: "identity".into(),
            coefficients: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coefficients(&self) -> &[f64; 9] {
        &self.coefficients
    }

    pub fn row(&self, ch: Channel) -> [f64; 3] {
        let i = ch.index() * 3;
        [
            self.coefficients[i],
            self.coefficients[i + 1],
            self.coefficients[i + 2],
        ]
    }

    /// Applies one row to a single RGB triple.
    pub fn apply_row(&self, ch: Channel, r: f64, g: f64, b: f64) -> f64 {
        let [a, c, d] = self.row(ch);
        a * r + c * g + d * b
    }
}

/// Parses the plain-text matrix table (see `data/matrices.txt` for the grammar).
pub fn parse_matrix_table(text: &str) -> Result<Vec<ColorMatrix>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::MatrixTable {
            line: line_no,
            message,
        };
        let mut fields = content.split_whitespace();
        let name = fields.next().expect("non-empty line has a field");
        if !name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
        {
            return Err(err(format!("invalid matrix name '{name}'")));
        }
        let values: Vec<&str> = fields.collect();
        if values.len() != 9 {
            return Err(err(format!(
                "expected 9 coefficients, found {}",
                values.len()
            )));
        }
        let mut coefficients = [0.0; 9];
        for (slot, v) in coefficients.iter_mut().zip(&values) {
            *slot = v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(format!("bad coefficient '{v}'")))?;
        }
        if !seen.insert(name.to_owned()) {
            return Err(err(format!("duplicate matrix name '{name}'")));
        }
        out.push(ColorMatrix {
            name: name.to_owned(),
            coefficients,
        });
    }
    Ok(out)
}

/// The matrices shipped in `data/matrices.txt`.
pub fn builtin_matrices() -> Vec<ColorMatrix> {
    parse_matrix_table(BUILTIN_TABLE).expect("bundled matrix table is valid")
}

/// Looks up a built-in matrix by name; `identity` is also accepted.
pub fn matrix_by_name(name: &str) -> Result<ColorMatrix> {
    if name == "identity" {
        return Ok(ColorMatrix::identity());
    }
    builtin_matrices()
        .into_iter()
        .find(|m| m.name == name)
        .ok_or_else(|| Error::UnknownMatrix(name.to_owned()))
}

/// Planes keyed by channel; absent channels were not requested.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChannelPlanes {
    planes: [Option<Plane>; 3],
}

impl ChannelPlanes {
    pub fn get(&self, ch: Channel) -> Option<&Plane> {
        self.planes[ch.index()].as_ref()
    }

    pub fn set(&mut self, ch: Channel, plane: Plane) {
        self.planes[ch.index()] = Some(plane);
    }

    pub fn l(&self) -> Option<&Plane> {
        self.get(Channel::L)
    }

    pub fn c1(&self) -> Option<&Plane> {
        self.get(Channel::C1)
    }

    pub fn c2(&self) -> Option<&Plane> {
        self.get(Channel::C2)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Channel, &Plane)> {
        Channel::ALL
            .into_iter()
            .filter_map(|c| self.get(c).map(|p| (c, p)))
    }

    pub fn channel_set(&self) -> Option<ChannelSet> {
        ChannelSet::new(
            self.planes[0].is_some(),
            self.planes[1].is_some(),
            self.planes[2].is_some(),
        )
        .ok()
    }
}

/// Converts RGB planes with `m`, computing only the rows in `channels`.
pub fn transform(
    r: &Plane,
    g: &Plane,
    b: &Plane,
    m: &ColorMatrix,
    channels: ChannelSet,
    counter: &mut OpCounter,
) -> Result<ChannelPlanes> {
    ensure_same_dims(r, g)?;
    ensure_same_dims(r, b)?;
    let mut out = ChannelPlanes::default();
    for ch in channels.iter() {
        let [lr, lg, lb] = m.row(ch);
        let mut ops = OpCounter::ZERO;
        let data: Vec<f64> = r
            .as_slice()
            .iter()
            .zip(g.as_slice())
            .zip(b.as_slice())
            .map(|((&rv, &gv), &bv)| {
                ops.multiplies += 3;
                ops.adds += 2;
                lr * rv + lg * gv + lb * bv
            })
            .collect();
        *counter += ops;
        out.set(ch, Plane::from_parts(r.height(), r.width(), data));
    }
    Ok(out)
}

/// Closed-form cost of [`transform`]: `3k·h·w` multiplies and `2k·h·w` adds.
pub fn count_transform_ops(height: usize, width: usize, channels: ChannelSet) -> OpCounter {
    let n = (channels.len() * height * width) as u64;
    OpCounter::new(3 * n, 2 * n)
}
