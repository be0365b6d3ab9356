//! Reproducibility analysis for binary activation maps.
//!
//! Given M co-registered binary maps, this crate computes pairwise Dice and
//! Jaccard overlap matrices, summarizes multi-study agreement through the
//! largest eigenvalue of the Jaccard matrix, and flags anomalous studies
//! with a jackknife test whose p-values are FDR-controlled.
//!
//! The `overlaprel` binary exposes the same pipeline as subcommands
//! (`overlap`, `summarize`, `outliers`, `composite`, `simulate`, `report`).

pub mod cli;
pub mod composite;
pub mod error;
pub mod formats;
pub mod grid;
pub mod outlier;
pub mod overlap;
pub mod report;
pub mod spectral;
pub mod synth;
pub mod tdist;

pub use error::{Error, Result};
pub use grid::{GridDims, StatMap, StudySet, ThresholdSide, VoxelMask};
pub use outlier::{jackknife_test, OutlierReport};
pub use overlap::{overlap_matrix, EmptyPolicy, OverlapKind, OverlapMatrix};
pub use spectral::{summarize, SummaryResult};
