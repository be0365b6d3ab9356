//! MSK1: magic "MSK1", little-endian u32 nx, ny, nz, then ceil(n/8) bytes of
//! x-fastest bit-packed data, LSB-first within each byte.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridDims, VoxelMask};

const MAGIC: &[u8; 4] = b"MSK1";
const HEADER_LEN: usize = 16;

pub fn load(path: &Path) -> Result<VoxelMask> {
    let bytes = super::read_all(path)?;
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedPayload {
            path: path.into(),
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::MalformedHeader {
            path: path.into(),
            offset: 0,
            detail: format!("bad magic {:?}, expected \"MSK1\"", &bytes[0..4]),
        });
    }
    let nx = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let ny = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let nz = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
    let dims = GridDims::new(nx, ny, nz)?;
    let n = dims.len();
    let payload_len = (n as usize).div_ceil(8);
    let found = bytes.len() - HEADER_LEN;
    if found != payload_len {
        return Err(Error::TruncatedPayload {
            path: path.into(),
            expected: payload_len as u64,
            found: found as u64,
        });
    }
    let payload = &bytes[HEADER_LEN..];
    // reject set bits past the voxel count in the final byte
    if n % 8 != 0 {
        let last = payload[payload_len - 1];
        let valid = (n % 8) as u32;
        if last >> valid != 0 {
            return Err(Error::MalformedHeader {
                path: path.into(),
                offset: (HEADER_LEN + payload_len - 1) as u64,
                detail: "padding bits in final byte are not zero".into(),
            });
        }
    }
    let mut mask = VoxelMask::empty(dims, "");
    for i in 0..n {
        let byte = payload[(i / 8) as usize];
        if (byte >> (i % 8)) & 1 == 1 {
            mask.set_linear(i, true);
        }
    }
    Ok(mask)
}

pub fn save(mask: &VoxelMask, path: &Path) -> Result<()> {
    let dims = mask.dims();
    let n = dims.len();
    let mut bytes = Vec::with_capacity(HEADER_LEN + (n as usize).div_ceil(8));
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&dims.nx.to_le_bytes());
    bytes.extend_from_slice(&dims.ny.to_le_bytes());
    bytes.extend_from_slice(&dims.nz.to_le_bytes());
    let mut byte = 0u8;
    for i in 0..n {
        if mask.get_linear(i) {
            byte |= 1 << (i % 8);
        }
        if i % 8 == 7 {
            bytes.push(byte);
            byte = 0;
        }
    }
    if !n.is_multiple_of(8) {
        bytes.push(byte);
    }
    super::write_all(path, &bytes)
}
