#![allow(dead_code)] // shared across test targets; each uses a subset

//! Independent oracles for the integration suites. Nothing here calls the
//! code paths it is used to check: eigenvalues come from Sturm-count
//! bisection on the characteristic polynomial, t-distribution tails from
//! Simpson quadrature with half-integer gamma constants.

use overlaprel::grid::{GridDims, VoxelMask};
use overlaprel::synth::Xoshiro256;

/// Householder reduction of a symmetric matrix (row-major, n x n) to
/// tridiagonal form; returns the diagonal `d` and subdiagonal `e`
/// (e[i] couples rows i and i+1).
fn tridiagonalize(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m: Vec<f64> = a.to_vec();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = ((k + 1)..n)
            .map(|i| m[i * n + k] * m[i * n + k])
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if m[(k + 1) * n + k] >= 0.0 {
            -norm
        } else {
            norm
        };
        let r2 = 0.5 * (alpha * alpha - m[(k + 1) * n + k] * alpha);
        let r = r2.sqrt();
        let mut v = vec![0.0; n];
        v[k + 1] = (m[(k + 1) * n + k] - alpha) / (2.0 * r);
        for i in (k + 2)..n {
            v[i] = m[i * n + k] / (2.0 * r);
        }
        // A <- (I - 2vv^T) A (I - 2vv^T) via w = Av, c = v^T w
        let w: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum::<f64>())
            .collect();
        let c: f64 = (0..n).map(|i| v[i] * w[i]).sum();
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] += 4.0 * c * v[i] * v[j] - 2.0 * (v[i] * w[j] + w[i] * v[j]);
            }
        }
    }
    let d: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    let e: Vec<f64> = (0..n.saturating_sub(1))
        .map(|i| m[(i + 1) * n + i])
        .collect();
    (d, e)
}

/// Number of eigenvalues of the tridiagonal (d, e) strictly below `x`, from
/// the signs of the Sturm sequence with the usual tiny-pivot substitution.
fn sturm_count_below(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..d.len() {
        let e2 = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = (d[i] - x) - e2 / q;
        if q == 0.0 {
            q = f64::EPSILON * (e2.sqrt() + d[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of a symmetric matrix by tridiagonalization and
/// Sturm-count bisection, ascending order.
pub fn eigenvalues_by_bisection(a: &[f64], n: usize) -> Vec<f64> {
    let (d, e) = tridiagonalize(a, n);
    // Gershgorin bounds on the tridiagonal form
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius =
            if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - radius);
        hi = hi.max(d[i] + radius);
    }
    lo -= 1.0;
    hi += 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (lo, hi);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if sturm_count_below(&d, &e, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Gamma(k/2) for positive integer k, from factorials and sqrt(pi).
fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1);
    if k.is_multiple_of(2) {
        // Gamma(m) = (m-1)!
        let m = k / 2;
        (1..m).map(|i| i as f64).product()
    } else {
        // Gamma(m + 1/2) = (2m)! sqrt(pi) / (4^m m!)
        let m = (k - 1) / 2;
        let fact = |n: u32| -> f64 { (1..=n).map(|i| i as f64).product() };
        fact(2 * m) * std::f64::consts::PI.sqrt() / (4f64.powi(m as i32) * fact(m))
    }
}

/// Student-t density with `df` degrees of freedom.
fn t_density(t: f64, df: u32) -> f64 {
    let nu = df as f64;
    let c = gamma_half(df + 1) / ((nu * std::f64::consts::PI).sqrt() * gamma_half(df));
    c * (1.0 + t * t / nu).powf(-(nu + 1.0) / 2.0)
}

/// Upper-tail probability by Simpson quadrature of the density over [0, |x|]
/// plus symmetry. Independent of the incomplete-beta implementation.
pub fn t_sf_oracle(x: f64, df: u32) -> f64 {
    if x < 0.0 {
        return 1.0 - t_sf_oracle(-x, df);
    }
    if x == 0.0 {
        return 0.5;
    }
    let steps = 20_000; // even
    let h = x / steps as f64;
    let mut sum = t_density(0.0, df) + t_density(x, df);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * t_density(i as f64 * h, df);
    }
    0.5 - sum * h / 3.0
}

/// Random mask with roughly `fill` fraction of active voxels.
pub fn random_mask(rng: &mut Xoshiro256, dims: GridDims, fill: f64, label: &str) -> VoxelMask {
    let mut mask = VoxelMask::empty(dims, label);
    for i in 0..dims.len() {
        if rng.bernoulli(fill) {
            mask.set_linear(i, true);
        }
    }
    mask
}

/// Random symmetric unit-diagonal matrix with off-diagonals in [0, 1],
/// returned row-major.
pub fn random_overlap_entries(rng: &mut Xoshiro256, m: usize) -> Vec<f64> {
    let mut entries = vec![0.0; m * m];
    for j in 0..m {
        entries[j * m + j] = 1.0;
        for l in (j + 1)..m {
            let v = rng.next_f64();
            entries[j * m + l] = v;
            entries[l * m + j] = v;
        }
    }
    entries
}
