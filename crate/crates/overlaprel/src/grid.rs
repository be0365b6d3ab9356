//! Voxel-grid data model: dimensions, bit-packed binary masks, real-valued
//! statistic maps, and ordered study sets.
//!
//! Linearization is x-fastest everywhere: `index = x + nx*(y + ny*z)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Voxel counts per axis of a 3D grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridDims {
    pub nx: u32,
    pub ny: u32,
    pub nz: u32,
}

impl GridDims {
    pub fn new(nx: u32, ny: u32, nz: u32) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::DimsZero { nx, ny, nz });
        }
        (nx as u64)
            .checked_mul(ny as u64)
            .and_then(|p| p.checked_mul(nz as u64))
            .ok_or(Error::DimsOverflow { nx, ny, nz })?;
        Ok(GridDims { nx, ny, nz })
    }

    /// Total voxel count nx*ny*nz.
    pub fn len(&self) -> u64 {
        self.nx as u64 * self.ny as u64 * self.nz as u64
    }

    pub fn is_empty(&self) -> bool {
        false // dims are validated positive
    }

    /// x-fastest linear index.
    pub fn index(&self, x: u32, y: u32, z: u32) -> u64 {
        debug_assert!(x < self.nx && y < self.ny && z < self.nz);
        x as u64 + self.nx as u64 * (y as u64 + self.ny as u64 * z as u64)
    }

    /// Inverse of `index`.
    pub fn coords(&self, index: u64) -> (u32, u32, u32) {
        debug_assert!(index < self.len());
        let x = (index % self.nx as u64) as u32;
        let rest = index / self.nx as u64;
        let y = (rest % self.ny as u64) as u32;
        let z = (rest / self.ny as u64) as u32;
        (x, y, z)
    }
}

impl std::fmt::Display for GridDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}

/// Bit-packed binary activation map on a fixed grid.
///
/// Bits are stored in 64-bit words, LSB-first, x-fastest. Padding bits past
/// `dims.len()` are kept zero so word-wise popcounts are exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoxelMask {
    dims: GridDims,
    words: Vec<u64>,
    label: String,
}

impl VoxelMask {
    pub fn empty(dims: GridDims, label: impl Into<String>) -> Self {
        let n_words = (dims.len() as usize).div_ceil(64);
        VoxelMask {
            dims,
            words: vec![0u64; n_words],
            label: label.into(),
        }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get_linear(&self, index: u64) -> bool {
        let w = (index / 64) as usize;
        let b = index % 64;
        (self.words[w] >> b) & 1 == 1
    }

    pub fn set_linear(&mut self, index: u64, value: bool) {
        debug_assert!(index < self.dims.len());
        let w = (index / 64) as usize;
        let b = index % 64;
        if value {
            self.words[w] |= 1u64 << b;
        } else {
            self.words[w] &= !(1u64 << b);
        }
    }

    pub fn get(&self, x: u32, y: u32, z: u32) -> bool {
        self.get_linear(self.dims.index(x, y, z))
    }

    pub fn set(&mut self, x: u32, y: u32, z: u32, value: bool) {
        self.set_linear(self.dims.index(x, y, z), value)
    }

    /// Number of active voxels.
    pub fn active_count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Popcount of the word-wise intersection with `other`. Caller must have
    /// checked dims.
    pub(crate) fn intersection_count(&self, other: &VoxelMask) -> u64 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }

    /// Linear indices of active voxels, ascending.
    pub fn active_indices(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.active_count() as usize);
        for (wi, &w) in self.words.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as u64;
                out.push(wi as u64 * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }

    pub(crate) fn check_same_dims(&self, other: &VoxelMask) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch {
                a_label: self.label.clone(),
                a_dims: self.dims.to_string(),
                b_label: other.label.clone(),
                b_dims: other.dims.to_string(),
            });
        }
        Ok(())
    }
}

/// 3D map of real-valued statistics (e.g. per-study t maps), same
/// linearization as `VoxelMask`. All values are finite after load.
#[derive(Clone, Debug, PartialEq)]
pub struct StatMap {
    dims: GridDims,
    values: Vec<f64>,
    label: String,
}

impl StatMap {
    /// Builds a map, rejecting any non-finite value with its linear index.
    pub fn new(dims: GridDims, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        assert_eq!(
            values.len() as u64,
            dims.len(),
            "value count must match dims"
        );
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { index: i as u64 });
            }
        }
        Ok(StatMap {
            dims,
            values,
            label: label.into(),
        })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn check_same_dims(&self, other: &StatMap) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch {
                a_label: self.label.clone(),
                a_dims: self.dims.to_string(),
                b_label: other.label.clone(),
                b_dims: other.dims.to_string(),
            });
        }
        Ok(())
    }
}

/// Which side of the critical value counts as active when thresholding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdSide {
    Greater,
    Less,
    TwoSided,
}

impl std::str::FromStr for ThresholdSide {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "greater" => Ok(ThresholdSide::Greater),
            "less" => Ok(ThresholdSide::Less),
            "two-sided" => Ok(ThresholdSide::TwoSided),
            other => Err(format!("unknown side: {other}")),
        }
    }
}

/// Thresholds a statistic map into a binary activation mask.
pub fn threshold_statmap(map: &StatMap, critical: f64, side: ThresholdSide) -> Result<VoxelMask> {
    if !critical.is_finite() {
        return Err(Error::Domain {
            detail: format!("critical value must be finite, got {critical}"),
        });
    }
    let mut mask = VoxelMask::empty(map.dims, map.label.clone());
    for (i, &v) in map.values.iter().enumerate() {
        let active = match side {
            ThresholdSide::Greater => v > critical,
            ThresholdSide::Less => v < critical,
            ThresholdSide::TwoSided => v.abs() > critical.abs(),
        };
        if active {
            mask.set_linear(i as u64, true);
        }
    }
    Ok(mask)
}

/// Ordered collection of M comparable masks.
#[derive(Clone, Debug)]
pub struct StudySet {
    masks: Vec<VoxelMask>,
}

impl StudySet {
    /// Validates M >= 2, equal dims, unique labels.
    pub fn new(masks: Vec<VoxelMask>) -> Result<Self> {
        if masks.len() < 2 {
            return Err(Error::TooFewStudies {
                needed: 2,
                got: masks.len(),
            });
        }
        let first = &masks[0];
        for m in &masks[1..] {
            first.check_same_dims(m)?;
        }
        let mut seen = std::collections::HashSet::new();
        for m in &masks {
            if !seen.insert(m.label().to_owned()) {
                return Err(Error::DuplicateLabel {
                    label: m.label().to_owned(),
                });
            }
        }
        Ok(StudySet { masks })
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        false // validated M >= 2
    }

    pub fn masks(&self) -> &[VoxelMask] {
        &self.masks
    }

    pub fn dims(&self) -> GridDims {
        self.masks[0].dims()
    }

    pub fn labels(&self) -> Vec<String> {
        self.masks.iter().map(|m| m.label().to_owned()).collect()
    }
}
