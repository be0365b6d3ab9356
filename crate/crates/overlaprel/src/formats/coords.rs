//! COORDS: UTF-8 text. First line "dims nx ny nz", then one "x y z" triple
//! per line, 0-based. Duplicate coordinates are an error.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridDims, VoxelMask};

pub fn load(path: &Path) -> Result<VoxelMask> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| Error::MalformedHeader {
        path: path.into(),
        offset: 0,
        detail: "empty file, expected \"dims nx ny nz\" line".into(),
    })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "dims" {
        return Err(Error::MalformedHeader {
            path: path.into(),
            offset: 0,
            detail: format!("expected \"dims nx ny nz\", got {header:?}"),
        });
    }
    let parse_u32 = |s: &str, field: &str| {
        s.parse::<u32>().map_err(|_| Error::MalformedHeader {
            path: path.into(),
            offset: 0,
            detail: format!("field {field}: invalid integer {s:?}"),
        })
    };
    let dims = GridDims::new(
        parse_u32(parts[1], "nx")?,
        parse_u32(parts[2], "ny")?,
        parse_u32(parts[3], "nz")?,
    )?;

    let mut mask = VoxelMask::empty(dims, "");
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::MalformedHeader {
                path: path.into(),
                offset: lineno as u64,
                detail: format!("line {}: expected \"x y z\", got {line:?}", lineno + 1),
            });
        }
        let field = |s: &str, name: &str| {
            s.parse::<u32>().map_err(|_| Error::MalformedHeader {
                path: path.into(),
                offset: lineno as u64,
                detail: format!("line {}: field {name}: invalid integer {s:?}", lineno + 1),
            })
        };
        let (x, y, z) = (
            field(parts[0], "x")?,
            field(parts[1], "y")?,
            field(parts[2], "z")?,
        );
        if x >= dims.nx || y >= dims.ny || z >= dims.nz {
            return Err(Error::CoordinateOutOfRange {
                path: path.into(),
                line: lineno + 1,
                x,
                y,
                z,
                nx: dims.nx,
                ny: dims.ny,
                nz: dims.nz,
            });
        }
        if mask.get(x, y, z) {
            return Err(Error::DuplicateCoordinate {
                path: path.into(),
                line: lineno + 1,
                x,
                y,
                z,
            });
        }
        mask.set(x, y, z, true);
    }
    Ok(mask)
}

pub fn save(mask: &VoxelMask, path: &Path) -> Result<()> {
    let dims = mask.dims();
    let mut out = format!("dims {} {} {}\n", dims.nx, dims.ny, dims.nz);
    for index in mask.active_indices() {
        let (x, y, z) = dims.coords(index);
        out.push_str(&format!("{x} {y} {z}\n"));
    }
    super::write_all(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dims = GridDims::new(4, 3, 2).unwrap();
        let mut mask = VoxelMask::empty(dims, "m");
        mask.set(0, 0, 0, true);
        mask.set(3, 2, 1, true);
        mask.set(1, 1, 1, true);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.coords");
        save(&mask, &p).unwrap();
        let back = load(&p).unwrap();
        assert_eq!(back.active_count(), 3);
        assert!(back.get(3, 2, 1));
        assert_eq!(back.words(), mask.words());
    }

    #[test]
    fn line_count_equals_active_count() {
        let dims = GridDims::new(8, 8, 4).unwrap();
        let mut mask = VoxelMask::empty(dims, "m");
        for i in (0..dims.len()).step_by(3) {
            mask.set_linear(i, true);
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.coords");
        save(&mask, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count() as u64, 1 + mask.active_count());
    }

    #[test]
    fn duplicates_and_out_of_range_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.coords");
        std::fs::write(&p, "dims 2 2 1\n0 0 0\n0 0 0\n").unwrap();
        assert!(matches!(
            load(&p),
            Err(Error::DuplicateCoordinate { line: 3, .. })
        ));
        std::fs::write(&p, "dims 2 2 1\n2 0 0\n").unwrap();
        assert!(matches!(load(&p), Err(Error::CoordinateOutOfRange { .. })));
    }
}
