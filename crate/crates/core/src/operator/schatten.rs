//! Singular values, Schatten sums and decay-exponent fits.

use super::{eigh, DenseOperator, HermitianOperator};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Singular values in descending order.
///
/// Self-adjoint inputs use `|λ|` directly; everything else goes through the
/// eigenvalues of `T*T`.
pub fn singular_values(t: &DenseOperator) -> Result<Vec<f64>> {
    let mut values = if t.asymmetry() == 0.0 {
        let h = HermitianOperator::symmetrize(t.clone());
        eigh(&h)?.eigenvalues().into_iter().map(f64::abs).collect::<Vec<_>>()
    } else {
        let gram = HermitianOperator::symmetrize(t.adjoint().matmul(t)?);
        eigh(&gram)?.eigenvalues().into_iter().map(|x| x.max(0.0).sqrt()).collect()
    };
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("Schatten exponent must be positive, got {p}")));
    }
    Ok(())
}

/// `Σ_{m<N} μ_m(T)^p`.
pub fn schatten_sum(t: &DenseOperator, p: f64, n: usize) -> Result<f64> {
    check_exponent(p)?;
    if n > t.dim() {
        return Err(Error::InvalidArgument(format!("partial sum length {n} exceeds dimension {}", t.dim())));
    }
    Ok(singular_values(t)?.iter().take(n).map(|mu| mu.powf(p)).sum())
}

/// `(Σ μ_m^p)^{1/p}` over the whole spectrum.
pub fn schatten_norm(t: &DenseOperator, p: f64) -> Result<f64> {
    Ok(schatten_sum(t, p, t.dim())?.powf(1.0 / p))
}

/// `max_m (m+1)^{1/p} μ_m(T)`, the finite proxy for the weak-ℓ^p quasinorm.
pub fn weak_schatten_stat(t: &DenseOperator, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(weak_stat_of(&singular_values(t)?, p))
}

pub(crate) fn weak_stat_of(descending: &[f64], p: f64) -> f64 {
    descending
        .iter()
        .enumerate()
        .map(|(m, mu)| ((m + 1) as f64).powf(1.0 / p) * mu)
        .fold(0.0, f64::max)
}

/// Power-law fit `μ_m ≈ C·(m+1)^{-α}` on the asymptotic window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Inclusive index range used by the regression.
    pub window: (usize, usize),
    pub fitted_alpha: f64,
    /// `1/α`; infinite when the sequence does not decay.
    #[serde(with = "crate::interchange::finite_or_null")]
    pub implied_order: f64,
    pub r_squared: f64,
    /// Number of values above the zero threshold.
    pub n_eff: usize,
}

/// Least-squares slope of `log μ_m` against `log(m+1)`.
///
/// The window runs from `⌈0.1·n_eff⌉` to `⌊0.8·n_eff⌋`; if that leaves fewer
/// than four points the whole nonzero range is used.
pub fn fit_decay(values: &[f64], zero_tol: f64) -> Result<DecayFit> {
    let n_eff = values.iter().take_while(|&&v| v > zero_tol).count();
    if n_eff < 4 {
        return Err(Error::InsufficientPoints { found: n_eff, needed: 4 });
    }
    let mut lo = (0.1 * n_eff as f64).ceil() as usize;
    let mut hi = ((0.8 * n_eff as f64).floor() as usize).min(n_eff - 1);
    if hi < lo || hi - lo + 1 < 4 {
        lo = 0;
        hi = n_eff - 1;
    }
    let xs: Vec<f64> = (lo..=hi).map(|m| ((m + 1) as f64).ln()).collect();
    let ys: Vec<f64> = (lo..=hi).map(|m| values[m].ln()).collect();
    let (slope, r_squared) = linear_regression(&xs, &ys);
    let fitted_alpha = -slope;
    let implied_order = if fitted_alpha > 0.0 { 1.0 / fitted_alpha } else { f64::INFINITY };
    Ok(DecayFit { window: (lo, hi), fitted_alpha, implied_order, r_squared, n_eff })
}

/// Returns `(slope, r²)`.
pub(crate) fn linear_regression(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, r_squared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn zero_and_unitary_singular_values() {
        assert_eq!(singular_values(&DenseOperator::zeros(4)).unwrap(), vec![0.0; 4]);
        // cyclic shift
        let u = DenseOperator::from_fn(5, |i, j| if i == (j + 1) % 5 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        for mu in singular_values(&u).unwrap() {
            assert!((mu - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn schatten_sums() {
        let t = DenseOperator::from_diagonal(&[1.0, 0.5, 0.25]);
        assert!((schatten_sum(&t, 1.0, 3).unwrap() - 1.75).abs() < 1e-15);
        assert!((schatten_sum(&DenseOperator::identity(5), 2.0, 5).unwrap() - 5.0).abs() < 1e-14);
        assert!(schatten_sum(&t, 0.0, 3).is_err());
        assert!(schatten_sum(&t, 1.0, 4).is_err());
    }

    #[test]
    fn weak_stat_examples() {
        let d: Vec<f64> = (0..100).map(|m| ((m + 1) as f64).powf(-0.5)).collect();
        let w = weak_schatten_stat(&DenseOperator::from_diagonal(&d), 2.0).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
        assert_eq!(weak_schatten_stat(&DenseOperator::zeros(3), 2.0).unwrap(), 0.0);
        let h: Vec<f64> = (0..50).map(|m| 1.0 / (m + 1) as f64).collect();
        // direct max scan oracle
        let oracle = h.iter().enumerate().map(|(m, v)| (m + 1) as f64 * v).fold(0.0, f64::max);
        let w = weak_schatten_stat(&DenseOperator::from_diagonal(&h), 1.0).unwrap();
        assert!((w - oracle).abs() < 1e-12);
        assert!((w - 1.0).abs() < 1e-12);
        assert!(weak_schatten_stat(&DenseOperator::zeros(3), -1.0).is_err());
    }

    #[test]
    fn decay_fit_on_power_laws() {
        let harmonic: Vec<f64> = (0..200).map(|m| 1.0 / (m + 1) as f64).collect();
        let fit = fit_decay(&harmonic, 1e-14).unwrap();
        assert!((0.95..=1.05).contains(&fit.fitted_alpha));
        assert_eq!(fit.window, (20, 160));
        let root: Vec<f64> = (0..200).map(|m| ((m + 1) as f64).powf(-0.5)).collect();
        let fit = fit_decay(&root, 1e-14).unwrap();
        assert!((1.9..=2.1).contains(&fit.implied_order));
        let flat = vec![0.3; 50];
        let fit = fit_decay(&flat, 1e-14).unwrap();
        assert!(fit.fitted_alpha.abs() <= 0.05);
    }

    #[test]
    fn decay_fit_needs_four_points() {
        let err = fit_decay(&[2.0, 0.0, 0.0, 0.0, 0.0], 1e-10).unwrap_err();
        assert!(matches!(err, Error::InsufficientPoints { found: 1, .. }));
    }
}
