//! F32RAW: headerless little-endian float32 payload, x-fastest order. Grid
//! dimensions are supplied out of band.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridDims, StatMap};

pub fn load(path: &Path, dims: GridDims) -> Result<StatMap> {
    let bytes = super::read_all(path)?;
    let expected = dims.len() * 4;
    if bytes.len() as u64 != expected {
        return Err(Error::TruncatedPayload {
            path: path.into(),
            expected,
            found: bytes.len() as u64,
        });
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    StatMap::new(dims, values, super::file_stem(path))
}

pub fn save(map: &StatMap, path: &Path) -> Result<()> {
    let bytes: Vec<u8> = map
        .values()
        .iter()
        .flat_map(|&v| (v as f32).to_le_bytes())
        .collect();
    super::write_all(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_eight_voxels() {
        let dims = GridDims::new(2, 2, 2).unwrap();
        let payload: Vec<u8> = (0..8).flat_map(|i| (i as f32).to_le_bytes()).collect();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.f32");
        std::fs::write(&p, payload).unwrap();
        let map = load(&p, dims).unwrap();
        assert_eq!(map.values(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
    }

    #[test]
    fn size_mismatch_rejected() {
        let dims = GridDims::new(2, 2, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("short.f32");
        std::fs::write(&p, [0u8; 12]).unwrap();
        assert!(matches!(
            load(&p, dims),
            Err(Error::TruncatedPayload {
                expected: 32,
                found: 12,
                ..
            })
        ));
    }

    #[test]
    fn nan_rejected_with_index() {
        let dims = GridDims::new(3, 1, 1).unwrap();
        let payload: Vec<u8> = [0.0f32, f32::NAN, 1.0]
            .iter()
            .flat_map(|v| v.to_le_bytes())
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nan.f32");
        std::fs::write(&p, payload).unwrap();
        assert!(matches!(
            load(&p, dims),
            Err(Error::NonFiniteValue { index: 1 })
        ));
    }
}
