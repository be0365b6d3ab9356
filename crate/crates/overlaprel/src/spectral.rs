//! Eigenvalues of symmetric overlap matrices and the summarized multiple
//! Jaccard coefficient (largest eigenvalue minus one over M minus one).
//!
//! The solver is cyclic Jacobi: study counts are tens at most, so O(M^3)
//! per sweep is negligible and the rotations are easy to audit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::overlap::{OverlapKind, OverlapMatrix};

const MAX_SWEEPS: usize = 100;

/// Full eigenvalue spectrum of a symmetric matrix, sorted descending, plus
/// the solver's convergence diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Eigenvalues sorted descending; ties keep original diagonal order.
    pub eigenvalues: Vec<f64>,
    /// Jacobi sweeps used.
    pub iterations: usize,
    /// Off-diagonal Frobenius norm at convergence.
    pub residual: f64,
}

impl Spectrum {
    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Summarized multi-study overlap: (lambda_1 - 1) / (M - 1), in [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryResult {
    pub value: f64,
    pub spectrum: Spectrum,
    pub kind: OverlapKind,
    pub m: usize,
}

fn offdiag_frobenius(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += 2.0 * a[p * n + q] * a[p * n + q];
        }
    }
    sum.sqrt()
}

/// Cyclic Jacobi on a row-major symmetric matrix; returns unsorted
/// diagonal eigenvalues with sweep count and final residual.
fn jacobi(a: &mut [f64], n: usize) -> Result<(usize, f64)> {
    let tol = 1e-12 * n as f64;
    for sweep in 0..MAX_SWEEPS {
        let res = offdiag_frobenius(a, n);
        if res <= tol {
            return Ok((sweep, res));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // smaller-magnitude root keeps the rotation angle below pi/4
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    let res = offdiag_frobenius(a, n);
    if res <= tol {
        return Ok((MAX_SWEEPS, res));
    }
    Err(Error::NonConvergence {
        sweeps: MAX_SWEEPS,
        residual: res,
    })
}

/// All real eigenvalues of the overlap matrix, sorted descending with ties
/// broken by original diagonal position.
pub fn eigen_sym(matrix: &OverlapMatrix) -> Result<Spectrum> {
    let n = matrix.m();
    let mut a = matrix.entries().to_vec();
    let (iterations, residual) = jacobi(&mut a, n)?;
    let mut indexed: Vec<(usize, f64)> = (0..n).map(|i| (i, a[i * n + i])).collect();
    indexed.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap()); // stable: ties keep index order
    Ok(Spectrum {
        eigenvalues: indexed.into_iter().map(|(_, v)| v).collect(),
        iterations,
        residual,
    })
}

/// Summarized multiple overlap coefficient from the spectrum of the matrix.
/// For M = 2 this equals the off-diagonal entry.
pub fn summarize(matrix: &OverlapMatrix) -> Result<SummaryResult> {
    let m = matrix.m();
    let spectrum = eigen_sym(matrix)?;
    let value = (spectrum.largest() - 1.0) / (m as f64 - 1.0);
    Ok(SummaryResult {
        value,
        spectrum,
        kind: matrix.kind(),
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlap::OverlapKind;

    fn matrix_from_offdiag(m: usize, off: f64) -> OverlapMatrix {
        let mut entries = vec![off; m * m];
        for i in 0..m {
            entries[i * m + i] = 1.0;
        }
        OverlapMatrix::from_entries(
            OverlapKind::Jaccard,
            entries,
            (0..m).map(|i| format!("s{i}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_matrix_eigenvalues_all_one() {
        let m = matrix_from_offdiag(5, 0.0);
        let s = eigen_sym(&m).unwrap();
        for ev in &s.eigenvalues {
            assert!((ev - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn all_ones_matrix_spectrum() {
        let m = matrix_from_offdiag(5, 1.0);
        let s = eigen_sym(&m).unwrap();
        assert!((s.eigenvalues[0] - 5.0).abs() < 1e-12);
        for ev in &s.eigenvalues[1..] {
            assert!(ev.abs() < 1e-12);
        }
    }

    #[test]
    fn summarize_extremes() {
        for m in 2..=12 {
            let id = matrix_from_offdiag(m, 0.0);
            assert!(summarize(&id).unwrap().value.abs() <= 1e-12);
            let ones = matrix_from_offdiag(m, 1.0);
            assert!((summarize(&ones).unwrap().value - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn m2_reduces_to_offdiagonal() {
        let m = matrix_from_offdiag(2, 0.3);
        let s = summarize(&m).unwrap();
        assert!((s.value - 0.3).abs() <= 1e-12);
    }

    #[test]
    fn equicorrelation_summary() {
        // largest eigenvalue of the equicorrelation matrix is 1 + (M-1)*rho
        let m = matrix_from_offdiag(4, 0.25);
        let s = summarize(&m).unwrap();
        assert!((s.value - 0.25).abs() < 1e-12);
        assert!((s.spectrum.largest() - 1.75).abs() < 1e-12);
    }

    #[test]
    fn trace_preserved() {
        let m = matrix_from_offdiag(6, 0.37);
        let s = eigen_sym(&m).unwrap();
        assert!((s.trace() - 6.0).abs() < 1e-9 * 6.0);
    }
}
