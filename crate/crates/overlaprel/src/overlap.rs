//! Pairwise Dice and Jaccard overlap coefficients and the M x M overlap
//! matrix. Counts stay in 64-bit integers until the final ratio.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{StudySet, VoxelMask};

/// Active-voxel counts for one pair of masks: |A|, |B|, |A n B|.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCounts {
    pub vj: u64,
    pub vl: u64,
    pub vjl: u64,
}

/// Which overlap coefficient to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapKind {
    Dice,
    Jaccard,
}

impl std::str::FromStr for OverlapKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "dice" => Ok(OverlapKind::Dice),
            "jaccard" => Ok(OverlapKind::Jaccard),
            other => Err(format!("unknown overlap kind: {other}")),
        }
    }
}

/// What to do when both masks of a pair are empty and the coefficient is
/// undefined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[derive(Default)]
pub enum EmptyPolicy {
    #[default]
    Error,
    Zero,
    One,
}

impl std::str::FromStr for EmptyPolicy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "error" => Ok(EmptyPolicy::Error),
            "zero" => Ok(EmptyPolicy::Zero),
            "one" => Ok(EmptyPolicy::One),
            other => Err(format!("unknown empty policy: {other}")),
        }
    }
}

/// Word-wise intersection popcount of two masks with equal dims.
pub fn pair_counts(a: &VoxelMask, b: &VoxelMask) -> Result<PairCounts> {
    a.check_same_dims(b)?;
    Ok(PairCounts {
        vj: a.active_count(),
        vl: b.active_count(),
        vjl: a.intersection_count(b),
    })
}

fn empty_pair_value(policy: EmptyPolicy) -> Result<f64> {
    match policy {
        EmptyPolicy::Error => Err(Error::EmptyPair {
            j: String::new(),
            l: String::new(),
        }),
        EmptyPolicy::Zero => Ok(0.0),
        EmptyPolicy::One => Ok(1.0),
    }
}

/// Dice coefficient 2*Vjl / (Vj + Vl).
pub fn dice(c: &PairCounts, policy: EmptyPolicy) -> Result<f64> {
    debug_assert!(c.vjl <= c.vj.min(c.vl));
    if c.vj + c.vl == 0 {
        return empty_pair_value(policy);
    }
    Ok(2.0 * c.vjl as f64 / (c.vj + c.vl) as f64)
}

/// Jaccard coefficient Vjl / (Vj + Vl - Vjl).
pub fn jaccard(c: &PairCounts, policy: EmptyPolicy) -> Result<f64> {
    debug_assert!(c.vjl <= c.vj.min(c.vl));
    let union = c.vj + c.vl - c.vjl;
    if union == 0 {
        return empty_pair_value(policy);
    }
    Ok(c.vjl as f64 / union as f64)
}

/// Maps a Dice coefficient to the Jaccard coefficient of the same pair:
/// w / (2 - w). Monotone increasing, fixes 0 and 1.
pub fn dice_to_jaccard(w: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Domain {
            detail: format!("dice coefficient must lie in [0, 1], got {w}"),
        });
    }
    Ok(w / (2.0 - w))
}

/// Symmetric M x M matrix of pairwise overlap coefficients with unit
/// diagonal. Entries are stored row-major at full double precision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapMatrix {
    m: usize,
    kind: OverlapKind,
    entries: Vec<f64>,
    labels: Vec<String>,
}

impl OverlapMatrix {
    /// Builds a matrix from raw entries, validating symmetry, unit diagonal
    /// and the [0, 1] range.
    pub fn from_entries(kind: OverlapKind, entries: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        let m = labels.len();
        if m < 2 {
            return Err(Error::TooFewStudies { needed: 2, got: m });
        }
        assert_eq!(entries.len(), m * m, "entry count must be m*m");
        for j in 0..m {
            if entries[j * m + j] != 1.0 {
                return Err(Error::Domain {
                    detail: format!("diagonal entry ({j},{j}) must be exactly 1"),
                });
            }
            for l in 0..m {
                let v = entries[j * m + l];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Domain {
                        detail: format!("entry ({j},{l}) = {v} outside [0, 1]"),
                    });
                }
                if entries[j * m + l] != entries[l * m + j] {
                    return Err(Error::Domain {
                        detail: format!("entries ({j},{l}) and ({l},{j}) differ"),
                    });
                }
            }
        }
        Ok(OverlapMatrix {
            m,
            kind,
            entries,
            labels,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> OverlapKind {
        self.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.entries[j * self.m + l]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Principal submatrix with the given study indices removed. Indices may
    /// be in any order; duplicates are ignored.
    pub fn without(&self, drop: &[usize]) -> OverlapMatrix {
        let keep: Vec<usize> = (0..self.m).filter(|i| !drop.contains(i)).collect();
        let k = keep.len();
        assert!(k >= 2, "submatrix must keep at least 2 studies");
        let mut entries = Vec::with_capacity(k * k);
        for &j in &keep {
            for &l in &keep {
                entries.push(self.get(j, l));
            }
        }
        OverlapMatrix {
            m: k,
            kind: self.kind,
            entries,
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }
}

/// Assembles the overlap matrix for a study set. The M(M-1)/2 pair
/// computations run in parallel over the shared read-only masks; the result
/// is deterministic and independent of scheduling.
pub fn overlap_matrix(
    studies: &StudySet,
    kind: OverlapKind,
    policy: EmptyPolicy,
) -> Result<OverlapMatrix> {
    let m = studies.len();
    let masks = studies.masks();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|j| ((j + 1)..m).map(move |l| (j, l)))
        .collect();
    let computed: Vec<Result<(usize, usize, f64)>> = pairs
        .par_iter()
        .map(|&(j, l)| {
            let c = pair_counts(&masks[j], &masks[l])?;
            let v = match kind {
                OverlapKind::Dice => dice(&c, policy),
                OverlapKind::Jaccard => jaccard(&c, policy),
            };
            match v {
                Ok(v) => Ok((j, l, v)),
                Err(Error::EmptyPair { .. }) => Err(Error::EmptyPair {
                    j: masks[j].label().to_owned(),
                    l: masks[l].label().to_owned(),
                }),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut entries = vec![0.0; m * m];
    for j in 0..m {
        entries[j * m + j] = 1.0;
    }
    for item in computed {
        let (j, l, v) = item?;
        entries[j * m + l] = v;
        entries[l * m + j] = v;
    }
    OverlapMatrix::from_entries(kind, entries, studies.labels())
}
