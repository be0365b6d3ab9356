//! Composite statistic maps (voxel-wise means over a study subset) and
//! difference maps between two activation masks.

use crate::error::{Error, Result};
use crate::grid::{StatMap, VoxelMask};

/// Voxels gained and lost going from mask A to mask B.
#[derive(Clone, Debug)]
pub struct DiffMap {
    /// Active in B but not A.
    pub gained: VoxelMask,
    /// Active in A but not B.
    pub lost: VoxelMask,
}

/// Voxel-wise arithmetic mean of the included maps, in double precision.
pub fn composite_map(maps: &[StatMap], include: &[usize]) -> Result<StatMap> {
    if include.is_empty() {
        return Err(Error::EmptySubset);
    }
    for &i in include {
        assert!(i < maps.len(), "include index {i} out of range");
    }
    let first = &maps[include[0]];
    for &i in &include[1..] {
        first.check_same_dims(&maps[i])?;
    }
    let n = first.dims().len() as usize;
    let mut sums = vec![0.0f64; n];
    for &i in include {
        for (s, v) in sums.iter_mut().zip(maps[i].values()) {
            *s += v;
        }
    }
    let scale = 1.0 / include.len() as f64;
    for s in &mut sums {
        *s *= scale;
    }
    StatMap::new(first.dims(), sums, "composite")
}

/// Set differences between two masks: gained = b \ a, lost = a \ b.
pub fn diff_masks(a: &VoxelMask, b: &VoxelMask) -> Result<DiffMap> {
    a.check_same_dims(b)?;
    let dims = a.dims();
    let mut gained = VoxelMask::empty(dims, format!("{}.gained", b.label()));
    let mut lost = VoxelMask::empty(dims, format!("{}.lost", a.label()));
    for i in 0..dims.len() {
        match (a.get_linear(i), b.get_linear(i)) {
            (false, true) => gained.set_linear(i, true),
            (true, false) => lost.set_linear(i, true),
            _ => {}
        }
    }
    Ok(DiffMap { gained, lost })
}
