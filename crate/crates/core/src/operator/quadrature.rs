//! Inverse square root through the resolvent integral
//! `T^{-1/2} = (1/π) ∫_0^∞ λ^{-1/2} (λ + T)^{-1} dλ`.
//!
//! With `λ = c·tan²φ` the integral becomes
//! `(2/π) √c ∫_0^{π/2} (c sin²φ + T cos²φ)^{-1} dφ`, whose integrand is smooth
//! and π-periodic, so the midpoint rule converges geometrically.

use super::{DenseOperator, HermitianOperator, ZERO};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

fn blocks_of(t: &DenseOperator) -> Vec<Vec<usize>> {
    // same coupling pattern as the eigensolver; duplicated to keep this path
    // independent of the spectral one
    let n = t.dim();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut group = Vec::new();
        seen[start] = true;
        while let Some(i) = stack.pop() {
            group.push(i);
            for j in 0..n {
                if !seen[j] && (t.get(i, j) != ZERO || t.get(j, i) != ZERO) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        group.sort_unstable();
        out.push(group);
    }
    out
}

/// Midpoint-rule approximation of `T^{-1/2}` from the resolvent integral.
pub fn inverse_sqrt_by_integral(t: &HermitianOperator, quadrature_points: usize) -> Result<HermitianOperator> {
    if quadrature_points == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one point".into()));
    }
    let n = t.dim();
    let diag = t.real_diagonal();
    if let Some(&bad) = diag.iter().find(|&&d| d <= 0.0) {
        return Err(Error::NotPositiveDefinite { value: bad });
    }
    let mut out = DenseOperator::zeros(n);
    let h = FRAC_PI_2 / quadrature_points as f64;
    for group in blocks_of(t) {
        let k = group.len();
        let local = DMatrix::from_fn(k, k, |r, c| t.get(group[r], group[c]));
        if local.clone().cholesky().is_none() {
            let min = local.symmetric_eigenvalues().min();
            return Err(Error::NotPositiveDefinite { value: min });
        }
        let dmin = group.iter().map(|&i| diag[i]).fold(f64::INFINITY, f64::min);
        let dmax = group.iter().map(|&i| diag[i]).fold(0.0, f64::max);
        let c = (dmin * dmax).sqrt();
        let mut acc = DMatrix::<Complex64>::zeros(k, k);
        for node in 0..quadrature_points {
            let phi = (node as f64 + 0.5) * h;
            let (s, co) = phi.sin_cos();
            let shifted = DMatrix::from_fn(k, k, |r, cc| {
                let base = local[(r, cc)] * (co * co);
                if r == cc {
                    base + c * s * s
                } else {
                    base
                }
            });
            let inv = shifted
                .cholesky()
                .ok_or(Error::NotPositiveDefinite { value: dmin })?
                .inverse();
            acc += inv;
        }
        let weight = h * 2.0 / std::f64::consts::PI * c.sqrt();
        for r in 0..k {
            for cc in 0..k {
                out.set(group[r], group[cc], acc[(r, cc)] * weight);
            }
        }
    }
    Ok(HermitianOperator::symmetrize(out))
}
