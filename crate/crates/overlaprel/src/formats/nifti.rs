//! Read-only NIfTI-1 subset: single-file uncompressed `.nii`, little-endian,
//! datatypes uint8/int16/int32/float32. Only dim[1..3], datatype, bitpix and
//! vox_offset are honored; orientation metadata is ignored (inputs are
//! assumed pre-registered).

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridDims, StatMap, VoxelMask};

const HEADER_LEN: usize = 348;

// standard header field offsets
const OFF_SIZEOF_HDR: usize = 0;
const OFF_DIM: usize = 40;
const OFF_DATATYPE: usize = 70;
const OFF_BITPIX: usize = 72;
const OFF_VOX_OFFSET: usize = 108;
const OFF_MAGIC: usize = 344;

/// Supported NIfTI-1 datatype codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NiftiDatatype {
    Uint8,
    Int16,
    Int32,
    Float32,
}

impl NiftiDatatype {
    fn from_code(code: i16) -> Option<Self> {
        match code {
            2 => Some(NiftiDatatype::Uint8),
            4 => Some(NiftiDatatype::Int16),
            8 => Some(NiftiDatatype::Int32),
            16 => Some(NiftiDatatype::Float32),
            _ => None,
        }
    }

    fn bitpix(self) -> i16 {
        match self {
            NiftiDatatype::Uint8 => 8,
            NiftiDatatype::Int16 => 16,
            NiftiDatatype::Int32 => 32,
            NiftiDatatype::Float32 => 32,
        }
    }

    fn byte_len(self) -> usize {
        (self.bitpix() / 8) as usize
    }
}

struct Parsed {
    dims: GridDims,
    datatype: NiftiDatatype,
    voxels: Vec<f64>,
}

fn parse(path: &Path) -> Result<Parsed> {
    let bytes = super::read_all(path)?;
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedPayload {
            path: path.into(),
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let i32_at = |off: usize| i32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let i16_at = |off: usize| i16::from_le_bytes(bytes[off..off + 2].try_into().unwrap());
    let f32_at = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());

    let sizeof_hdr = i32_at(OFF_SIZEOF_HDR);
    if sizeof_hdr != HEADER_LEN as i32 {
        let detail = if sizeof_hdr.swap_bytes() == HEADER_LEN as i32 {
            "big-endian NIfTI files are not supported".to_string()
        } else {
            format!("sizeof_hdr = {sizeof_hdr}, expected 348")
        };
        return Err(Error::MalformedHeader {
            path: path.into(),
            offset: OFF_SIZEOF_HDR as u64,
            detail,
        });
    }
    let magic = &bytes[OFF_MAGIC..OFF_MAGIC + 4];
    if magic != b"n+1\0" {
        return Err(Error::MalformedHeader {
            path: path.into(),
            offset: OFF_MAGIC as u64,
            detail: format!("magic {magic:?}, expected \"n+1\\0\" (single-file .nii)"),
        });
    }

    let ndim = i16_at(OFF_DIM);
    if !(1..=7).contains(&ndim) {
        return Err(Error::MalformedHeader {
            path: path.into(),
            offset: OFF_DIM as u64,
            detail: format!("dim[0] = {ndim}, expected 1..7"),
        });
    }
    let dim_at = |i: usize| i16_at(OFF_DIM + 2 * i);
    // dims past dim[0] that exist must be 1 for a plain 3D volume
    for i in 4..=(ndim as usize) {
        if dim_at(i) > 1 {
            return Err(Error::MalformedHeader {
                path: path.into(),
                offset: (OFF_DIM + 2 * i) as u64,
                detail: format!("dim[{i}] = {}, only 3D volumes are supported", dim_at(i)),
            });
        }
    }
    let axis = |i: usize| -> Result<u32> {
        let v = if (i as i16) <= ndim { dim_at(i) } else { 1 };
        if v < 1 {
            return Err(Error::MalformedHeader {
                path: path.into(),
                offset: (OFF_DIM + 2 * i) as u64,
                detail: format!("dim[{i}] = {v}, must be >= 1"),
            });
        }
        Ok(v as u32)
    };
    let dims = GridDims::new(axis(1)?, axis(2)?, axis(3)?)?;

    let datatype_code = i16_at(OFF_DATATYPE);
    let datatype = NiftiDatatype::from_code(datatype_code).ok_or(Error::UnsupportedDatatype {
        path: path.to_path_buf(),
        datatype: datatype_code,
    })?;
    let bitpix = i16_at(OFF_BITPIX);
    if bitpix != datatype.bitpix() {
        return Err(Error::MalformedHeader {
            path: path.into(),
            offset: OFF_BITPIX as u64,
            detail: format!("bitpix = {bitpix} inconsistent with datatype {datatype_code}"),
        });
    }

    let vox_offset = f32_at(OFF_VOX_OFFSET);
    if !vox_offset.is_finite() || vox_offset < HEADER_LEN as f32 || vox_offset.fract() != 0.0 {
        return Err(Error::MalformedHeader {
            path: path.into(),
            offset: OFF_VOX_OFFSET as u64,
            detail: format!("vox_offset = {vox_offset}, expected integer >= 348"),
        });
    }
    let data_start = vox_offset as usize;

    let n = dims.len() as usize;
    let need = data_start + n * datatype.byte_len();
    if bytes.len() < need {
        return Err(Error::TruncatedPayload {
            path: path.into(),
            expected: need as u64,
            found: bytes.len() as u64,
        });
    }

    let data = &bytes[data_start..];
    let mut voxels = Vec::with_capacity(n);
    match datatype {
        NiftiDatatype::Uint8 => {
            voxels.extend(data[..n].iter().map(|&b| b as f64));
        }
        NiftiDatatype::Int16 => {
            for i in 0..n {
                let v = i16::from_le_bytes(data[2 * i..2 * i + 2].try_into().unwrap());
                voxels.push(v as f64);
            }
        }
        NiftiDatatype::Int32 => {
            for i in 0..n {
                let v = i32::from_le_bytes(data[4 * i..4 * i + 4].try_into().unwrap());
                voxels.push(v as f64);
            }
        }
        NiftiDatatype::Float32 => {
            for i in 0..n {
                let v = f32::from_le_bytes(data[4 * i..4 * i + 4].try_into().unwrap());
                voxels.push(v as f64);
            }
        }
    }

    Ok(Parsed {
        dims,
        datatype,
        voxels,
    })
}

/// Loads a volume as a mask: any nonzero voxel is active.
pub fn load_mask(path: &Path) -> Result<VoxelMask> {
    let parsed = parse(path)?;
    let mut mask = VoxelMask::empty(parsed.dims, "");
    for (i, &v) in parsed.voxels.iter().enumerate() {
        if v != 0.0 {
            mask.set_linear(i as u64, true);
        }
    }
    Ok(mask)
}

/// Loads a volume as a statistic map; NaN/Inf in the payload is an error.
pub fn load_statmap(path: &Path) -> Result<StatMap> {
    let parsed = parse(path)?;
    let _ = parsed.datatype;
    StatMap::new(parsed.dims, parsed.voxels, super::file_stem(path))
}

/// Builds a minimal single-file NIfTI-1 byte stream (test and fixture use).
pub fn build_nifti_bytes(dims: GridDims, datatype: NiftiDatatype, payload: &[u8]) -> Vec<u8> {
    let mut bytes = vec![0u8; HEADER_LEN + 4]; // header + extension flag
    bytes[OFF_SIZEOF_HDR..OFF_SIZEOF_HDR + 4].copy_from_slice(&348i32.to_le_bytes());
    let dim: [i16; 8] = [
        3,
        dims.nx as i16,
        dims.ny as i16,
        dims.nz as i16,
        1,
        1,
        1,
        1,
    ];
    for (i, d) in dim.iter().enumerate() {
        bytes[OFF_DIM + 2 * i..OFF_DIM + 2 * i + 2].copy_from_slice(&d.to_le_bytes());
    }
    let code: i16 = match datatype {
        NiftiDatatype::Uint8 => 2,
        NiftiDatatype::Int16 => 4,
        NiftiDatatype::Int32 => 8,
        NiftiDatatype::Float32 => 16,
    };
    bytes[OFF_DATATYPE..OFF_DATATYPE + 2].copy_from_slice(&code.to_le_bytes());
    bytes[OFF_BITPIX..OFF_BITPIX + 2].copy_from_slice(&datatype.bitpix().to_le_bytes());
    bytes[OFF_VOX_OFFSET..OFF_VOX_OFFSET + 4].copy_from_slice(&352.0f32.to_le_bytes());
    bytes[OFF_MAGIC..OFF_MAGIC + 4].copy_from_slice(b"n+1\0");
    bytes.extend_from_slice(payload);
    bytes
}
