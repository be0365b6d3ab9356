//! On-disk volume formats.
//!
//! - `MSK1`: binary bit-packed mask, byte-exact golden format.
//! - `COORDS`: human-auditable text listing of active voxel coordinates.
//! - `NIFTI1`: read-only subset of the standard 348-byte header format.
//! - `F32RAW`: headerless little-endian float32 payload for statistic maps.

mod coords;
mod f32raw;
mod msk1;
mod nifti;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridDims, StatMap, VoxelMask};

pub use nifti::{build_nifti_bytes, NiftiDatatype};

/// Formats a binary mask can be read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskFormat {
    Msk1,
    Coords,
    Nifti1,
}

impl std::str::FromStr for MaskFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "msk1" => Ok(MaskFormat::Msk1),
            "coords" => Ok(MaskFormat::Coords),
            "nifti1" | "nifti" | "nii" => Ok(MaskFormat::Nifti1),
            other => Err(format!("unknown mask format: {other}")),
        }
    }
}

/// Writable mask formats (NIfTI is read-only in this tool).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskWriteFormat {
    Msk1,
    Coords,
}

/// Formats a statistic map can be read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatMapFormat {
    /// Headerless little-endian f32; dims must be supplied.
    F32Raw(GridDims),
    Nifti1,
}

/// Guesses a mask format from the file extension.
pub fn mask_format_for_path(path: &Path) -> Option<MaskFormat> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("msk") | Some("msk1") => Some(MaskFormat::Msk1),
        Some("coords") | Some("txt") => Some(MaskFormat::Coords),
        Some("nii") => Some(MaskFormat::Nifti1),
        _ => None,
    }
}

/// Loads a binary mask; the mask label defaults to the file stem.
pub fn load_mask(path: &Path, format: MaskFormat) -> Result<VoxelMask> {
    let mut mask = match format {
        MaskFormat::Msk1 => msk1::load(path)?,
        MaskFormat::Coords => coords::load(path)?,
        MaskFormat::Nifti1 => nifti::load_mask(path)?,
    };
    mask.set_label(file_stem(path));
    Ok(mask)
}

/// Writes a binary mask. `load_mask(save_mask(m))` is a bit-exact identity.
pub fn save_mask(mask: &VoxelMask, path: &Path, format: MaskWriteFormat) -> Result<()> {
    match format {
        MaskWriteFormat::Msk1 => msk1::save(mask, path),
        MaskWriteFormat::Coords => coords::save(mask, path),
    }
}

/// Loads a statistic map; NaN/Inf anywhere in the payload is an error.
pub fn load_statmap(path: &Path, format: StatMapFormat) -> Result<StatMap> {
    match format {
        StatMapFormat::F32Raw(dims) => f32raw::load(path, dims),
        StatMapFormat::Nifti1 => nifti::load_statmap(path),
    }
}

/// Writes a statistic map as headerless little-endian f32.
pub fn save_statmap_f32raw(map: &StatMap, path: &Path) -> Result<()> {
    f32raw::save(map, path)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned())
}

pub(crate) fn read_all(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_all(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
