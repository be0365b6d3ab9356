use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library. Parse errors name the byte offset or
/// field so that malformed fixtures can be diagnosed without a hex dump.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed header at byte {offset}: {detail}")]
    MalformedHeader {
        path: PathBuf,
        offset: u64,
        detail: String,
    },

    #[error("{path}: truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("grid dimensions {nx}x{ny}x{nz} overflow the voxel count")]
    DimsOverflow { nx: u32, ny: u32, nz: u32 },

    #[error("grid dimensions must be positive, got {nx}x{ny}x{nz}")]
    DimsZero { nx: u32, ny: u32, nz: u32 },

    #[error("{path}: unsupported NIfTI datatype code {datatype}")]
    UnsupportedDatatype { path: PathBuf, datatype: i16 },

    #[error("{path}: duplicate coordinate ({x}, {y}, {z}) at line {line}")]
    DuplicateCoordinate {
        path: PathBuf,
        line: usize,
        x: u32,
        y: u32,
        z: u32,
    },

    #[error("{path}: coordinate ({x}, {y}, {z}) at line {line} outside grid {nx}x{ny}x{nz}")]
    CoordinateOutOfRange {
        path: PathBuf,
        line: usize,
        x: u32,
        y: u32,
        z: u32,
        nx: u32,
        ny: u32,
        nz: u32,
    },

    #[error("non-finite value at linear index {index}")]
    NonFiniteValue { index: u64 },

    #[error("dimension mismatch: {a_label} is {a_dims} but {b_label} is {b_dims}")]
    DimMismatch {
        a_label: String,
        a_dims: String,
        b_label: String,
        b_dims: String,
    },

    #[error("overlap undefined for pair ({j}, {l}): both masks are empty")]
    EmptyPair { j: String, l: String },

    #[error("study set needs at least {needed} studies, got {got}")]
    TooFewStudies { needed: usize, got: usize },

    #[error("duplicate study label: {label}")]
    DuplicateLabel { label: String },

    #[error("eigensolver did not converge after {sweeps} sweeps (residual {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("degenerate jackknife variance for study {study_index} ({label}): all leave-two-out terms identical")]
    DegenerateVariance { study_index: usize, label: String },

    #[error("domain violation: {detail}")]
    Domain { detail: String },

    #[error("empty study subset")]
    EmptySubset,

    #[error("invalid synthetic configuration: {detail}")]
    BadSynthConfig { detail: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
