//! Seeded random matrices and the randomized inequality suites.

use crate::error::Result;
use crate::lift::f_inv;
use crate::operator::{apply_scalar_function, eigh, psd_order_leq, DenseOperator, HermitianOperator};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Independent per-trial seed (splitmix64 finalizer of `master + trial`).
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut z = master.wrapping_add(trial.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `(Z + Z*)/2` with i.i.d. standard complex Gaussian `Z`, then the spectrum
/// mapped affinely onto `[lo, hi]`.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize, lo: f64, hi: f64) -> Result<HermitianOperator> {
    let z = DenseOperator::from_fn(dim, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let h = HermitianOperator::symmetrize(z);
    let spec = eigh(&h)?;
    let (a, b) = (spec.min(), spec.max());
    let width = if b > a { b - a } else { 1.0 };
    Ok(spec.map(|v| lo + (hi - lo) * (v - a) / width))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: u64,
    pub seed: u64,
    /// Most negative normalized slack.
    pub worst: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialCounts {
    pub trials: u64,
    pub passes: u64,
    pub failures: Vec<TrialFailure>,
    /// Smallest normalized slack seen over all trials.
    pub min_slack: f64,
}

impl TrialCounts {
    fn new() -> Self {
        Self { trials: 0, passes: 0, failures: Vec::new(), min_slack: f64::INFINITY }
    }

    fn record(&mut self, trial: u64, seed: u64, slack: f64, ok: bool) {
        self.trials += 1;
        self.min_slack = self.min_slack.min(slack);
        if ok {
            self.passes += 1;
        } else {
            self.failures.push(TrialFailure { trial, seed, worst: slack });
        }
    }

    pub fn all_pass(&self) -> bool {
        self.passes == self.trials
    }
}

/// Partial-sum submajorization `Σ_{m<N} φ(λ(A+B))_m ≤ Σ_{m<N} φ(λ(A))_m + φ(λ(B))_m`
/// for every `N`, with relative slack `rel_tol`. Returns the smallest
/// normalized margin `(rhs − lhs)/max(rhs, tiny)`.
pub fn rotfeld_margin(
    a: &HermitianOperator,
    b: &HermitianOperator,
    phi: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    let desc = |h: &HermitianOperator| -> Result<Vec<f64>> {
        let mut v: Vec<f64> = eigh(h)?.eigenvalues().into_iter().map(|x| phi(x.max(0.0)).abs()).collect();
        v.sort_by(|x, y| y.total_cmp(x));
        Ok(v)
    };
    let s = desc(&a.add(b)?)?;
    let sa = desc(a)?;
    let sb = desc(b)?;
    let (mut lhs, mut rhs) = (0.0, 0.0);
    let mut worst = f64::INFINITY;
    for m in 0..s.len() {
        lhs += s[m];
        rhs += sa[m] + sb[m];
        let r = (rhs - lhs) / rhs.max(f64::MIN_POSITIVE);
        if r.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.min(r);
    }
    Ok(worst)
}

/// Randomized Rotfel'd suite: PSD `A`, `B` with spectra in `[spec_lo, spec_hi]`.
pub fn check_rotfeld(
    trials: u64,
    dim: usize,
    phi: &dyn Fn(f64) -> f64,
    spectrum: (f64, f64),
    seed: u64,
    rel_tol: f64,
) -> Result<TrialCounts> {
    let mut counts = TrialCounts::new();
    for trial in 0..trials {
        let s = trial_seed(seed, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let a = random_hermitian(&mut rng, dim, spectrum.0, spectrum.1)?;
        let b = random_hermitian(&mut rng, dim, spectrum.0, spectrum.1)?;
        let slack = rotfeld_margin(&a, &b, phi)?;
        counts.record(trial, s, slack, slack >= -rel_tol);
    }
    Ok(counts)
}

/// `f⁻¹` continued to the upper half-plane, `arcosh(1/z)^{-2}` on principal branches.
pub fn f_inv_complex(z: Complex64) -> Complex64 {
    z.inv().acosh().powi(-2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PickSummary {
    pub samples: usize,
    pub min_imag: f64,
    /// Sample attaining `min_imag`, as `[re, im]`.
    pub argmin: [f64; 2],
}

/// Samples `Im f⁻¹(z)` on a `cols × rows` grid with `Re z ∈ [-2, 2.5]` and
/// `Im z` log-spaced in `[1e-2, 10]`.
pub fn pick_samples(count: usize) -> PickSummary {
    let cols = 20usize;
    let rows = count.div_ceil(cols).max(1);
    let mut min_imag = f64::INFINITY;
    let mut argmin = [0.0, 0.0];
    let mut samples = 0;
    'outer: for j in 0..rows {
        let im = if rows == 1 { 1.0 } else { 10f64.powf(-2.0 + 3.0 * j as f64 / (rows - 1) as f64) };
        for i in 0..cols {
            if samples == count {
                break 'outer;
            }
            let re = -2.0 + 4.5 * i as f64 / (cols - 1) as f64;
            let v = f_inv_complex(Complex64::new(re, im)).im;
            if v < min_imag {
                min_imag = v;
                argmin = [re, im];
            }
            samples += 1;
        }
    }
    PickSummary { samples, min_imag, argmin }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoewnerReport {
    pub monotonicity: TrialCounts,
    pub pick: PickSummary,
}

/// Random pairs `A ≤ B = A + P` with `spec A ⊂ [δ, 0.6]`, `spec P ⊂ [0, 0.3]`;
/// checks `f⁻¹(A) ≤ f⁻¹(B)` up to `tol(1 + ‖f⁻¹(A)‖ + ‖f⁻¹(B)‖)`.
pub fn check_loewner(trials: u64, dim: usize, pick_count: usize, seed: u64, tol: f64) -> Result<LoewnerReport> {
    let mut counts = TrialCounts::new();
    let finv = |t: f64| f_inv(t).unwrap_or(f64::NAN);
    for trial in 0..trials {
        let s = trial_seed(seed, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let a = random_hermitian(&mut rng, dim, 0.01, 0.6)?;
        let p = random_hermitian(&mut rng, dim, 0.0, 0.3)?;
        let b = a.add(&p)?;
        let fa = apply_scalar_function(&a, finv, (0.0, 0.95))?;
        let fb = apply_scalar_function(&b, finv, (0.0, 0.95))?;
        let w = psd_order_leq(&fa, &fb, tol)?;
        let scale = w.slack / tol;
        counts.record(trial, s, w.min_eigenvalue / scale, w.holds);
    }
    Ok(LoewnerReport { monotonicity: counts, pick: pick_samples(pick_count) })
}
