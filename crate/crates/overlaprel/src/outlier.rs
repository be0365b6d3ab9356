//! Jackknife outlier detection for study sets: leave-one-out summaries,
//! arcsine-transformed deltas, jackknifed variances, tau statistics,
//! t-distribution p-values and Benjamini-Hochberg FDR decisions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::StudySet;
use crate::overlap::{overlap_matrix, EmptyPolicy, OverlapKind, OverlapMatrix};
use crate::spectral::{summarize, SummaryResult};
use crate::tdist::t_sf;

/// Variance-stabilizing arcsine transform (2/pi) * arcsin(sqrt(p)),
/// mapping [0, 1] onto [0, 1].
pub fn arcsine_transform(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            detail: format!("arcsine transform needs p in [0, 1], got {p}"),
        });
    }
    Ok(2.0 / std::f64::consts::PI * p.sqrt().asin())
}

/// Per-study jackknife quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JackknifeRecord {
    pub study_index: usize,
    pub label: String,
    /// Summary with this study deleted.
    pub omega_minus_j: f64,
    /// Arcsine-scale change from deleting this study.
    pub zeta_minus_j: f64,
    /// Deletion effects within the j-deleted set: for each k != j (in k
    /// order), the arcsine-scale change from additionally deleting k.
    pub zeta_pairs: Vec<f64>,
    pub zeta_bar: f64,
    /// Jackknifed variance of zeta_{-j}: the sample variance of the M-1
    /// deletion effects in `zeta_pairs`, which estimates the null spread of
    /// a single-deletion change in the summary.
    pub s2: f64,
    pub tau: f64,
    pub p_value: f64,
}

/// Severity of a flagged study: extreme if flagged even at the strictest q
/// level, moderate if flagged only at looser levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Moderate,
    Extreme,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlaggedStudy {
    pub study_index: usize,
    pub label: String,
    pub severity: Severity,
}

/// FDR decision at one q level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdrDecision {
    pub q: f64,
    pub flagged: Vec<FlaggedStudy>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub m: usize,
    pub kind: OverlapKind,
    pub full_summary: SummaryResult,
    pub records: Vec<JackknifeRecord>,
    /// One decision per requested q level, in the given order.
    pub decisions: Vec<FdrDecision>,
}

/// Leave-one-out summaries from a cached overlap matrix (M >= 3); element j
/// is the summary of the matrix with row/column j removed.
pub fn loo_summaries_matrix(matrix: &OverlapMatrix) -> Result<Vec<f64>> {
    let m = matrix.m();
    if m < 3 {
        return Err(Error::TooFewStudies { needed: 3, got: m });
    }
    (0..m)
        .map(|j| Ok(summarize(&matrix.without(&[j]))?.value))
        .collect()
}

/// Leave-one-out summaries computed from the masks.
pub fn loo_summaries(
    studies: &StudySet,
    kind: OverlapKind,
    policy: EmptyPolicy,
) -> Result<Vec<f64>> {
    let matrix = overlap_matrix(studies, kind, policy)?;
    loo_summaries_matrix(&matrix)
}

/// Benjamini-Hochberg step-up rule: sort p ascending, find the largest i
/// (1-based) with p_(i) <= i*q/M, flag every study whose p-value is at or
/// below that cutoff. Returns flagged indices in ascending order.
pub fn bh_fdr(p_values: &[f64], q: f64) -> Result<Vec<usize>> {
    if !(0.0 < q && q < 1.0) {
        return Err(Error::Domain {
            detail: format!("q must lie in (0, 1), got {q}"),
        });
    }
    for (i, &p) in p_values.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain {
                detail: format!("p-value {p} at index {i} outside [0, 1]"),
            });
        }
    }
    let m = p_values.len();
    let mut sorted: Vec<f64> = p_values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut cutoff = None;
    for i in (1..=m).rev() {
        if sorted[i - 1] <= i as f64 * q / m as f64 {
            cutoff = Some(sorted[i - 1]);
            break;
        }
    }
    Ok(match cutoff {
        None => Vec::new(),
        Some(c) => (0..m).filter(|&i| p_values[i] <= c).collect(),
    })
}

/// Full jackknife test on a precomputed overlap matrix. Needs M >= 4 so that
/// every leave-two-out summary still covers at least two studies.
pub fn jackknife_test_matrix(matrix: &OverlapMatrix, q_levels: &[f64]) -> Result<OutlierReport> {
    let m = matrix.m();
    if m < 4 {
        return Err(Error::TooFewStudies { needed: 4, got: m });
    }
    let full_summary = summarize(matrix)?;
    let psi_full = arcsine_transform(clamp01(full_summary.value))?;

    let loo = loo_summaries_matrix(matrix)?;
    let psi_loo: Vec<f64> = loo
        .iter()
        .map(|&v| arcsine_transform(clamp01(v)))
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(m);
    for j in 0..m {
        let mut zeta_pairs = Vec::with_capacity(m - 1);
        for k in 0..m {
            if k == j {
                continue;
            }
            let omega_jk = summarize(&matrix.without(&[j, k]))?.value;
            zeta_pairs.push(arcsine_transform(clamp01(omega_jk))? - psi_loo[j]);
        }
        let zeta_bar = zeta_pairs.iter().sum::<f64>() / (m - 1) as f64;
        let s2 = zeta_pairs
            .iter()
            .map(|z| (z - zeta_bar).powi(2))
            .sum::<f64>()
            / (m - 2) as f64;
        if s2 <= 0.0 {
            return Err(Error::DegenerateVariance {
                study_index: j,
                label: matrix.labels()[j].clone(),
            });
        }
        let zeta_minus_j = psi_loo[j] - psi_full;
        let tau = zeta_minus_j / s2.sqrt();
        let p_value = t_sf(tau, (m - 2) as u32)?;
        records.push(JackknifeRecord {
            study_index: j,
            label: matrix.labels()[j].clone(),
            omega_minus_j: loo[j],
            zeta_minus_j,
            zeta_pairs,
            zeta_bar,
            s2,
            tau,
            p_value,
        });
    }

    let p_values: Vec<f64> = records.iter().map(|r| r.p_value).collect();
    let strictest = q_levels.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut decisions = Vec::with_capacity(q_levels.len());
    for &q in q_levels {
        let flagged_idx = bh_fdr(&p_values, q)?;
        let at_strictest = bh_fdr(&p_values, strictest)?;
        let flagged = flagged_idx
            .into_iter()
            .map(|i| FlaggedStudy {
                study_index: i,
                label: matrix.labels()[i].clone(),
                severity: if at_strictest.contains(&i) {
                    Severity::Extreme
                } else {
                    Severity::Moderate
                },
            })
            .collect();
        decisions.push(FdrDecision { q, flagged });
    }

    Ok(OutlierReport {
        m,
        kind: matrix.kind(),
        full_summary,
        records,
        decisions,
    })
}

/// Convenience wrapper that builds the overlap matrix once and runs the
/// matrix-based test; masks are never re-read during deletion.
pub fn jackknife_test(
    studies: &StudySet,
    kind: OverlapKind,
    policy: EmptyPolicy,
    q_levels: &[f64],
) -> Result<OutlierReport> {
    let matrix = overlap_matrix(studies, kind, policy)?;
    jackknife_test_matrix(&matrix, q_levels)
}

// Summaries can drift a hair past [0,1] in floating point; the transform
// domain is exact.
fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}
