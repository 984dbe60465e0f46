//! The lift `F ↦ D = F|D|`: quantum metric, averaging, the scalar pair
//! `f`/`f⁻¹` and assembly of the spectral triple.

mod average;
mod triple;

pub use average::{average, ball_weights, represent, Averaged, Monomial};
pub use triple::{
    build_triple, g0_default, kernel_split, quantum_metric, resolve_ball_radius, theta, KernelSplit, Provenance,
    QuantumMetric, SpectralTriple, TripleResiduals,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

/// `f(s) = 1/cosh(s^{-1/2})`, `f(0) = 0`.
///
/// Evaluated as `2e^{-x}/(1 + e^{-2x})` with `x = s^{-1/2}` so that small
/// arguments underflow gracefully instead of overflowing `cosh`.
pub fn f(s: f64) -> f64 {
    if s.is_nan() || s < 0.0 {
        return f64::NAN;
    }
    if s == 0.0 {
        return 0.0;
    }
    let e = (-s.sqrt().recip()).exp();
    2.0 * e / (1.0 + e * e)
}

/// `arcosh(1/t)` for `t ∈ (0, 1]`.
pub fn arcosh_recip(t: f64) -> f64 {
    if t < 1e-8 {
        // arcosh(y) = ln(2y) - 1/(4y²) - …
        return LN_2 - t.ln() - 0.25 * t * t;
    }
    let a = 1.0 - t;
    ((a + (a * (1.0 + t)).sqrt()) / t).ln_1p()
}

/// `f⁻¹(t) = arcosh(1/t)^{-2}` on `[0, 1)`, `f⁻¹(0) = 0`.
pub fn f_inv(t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 || t >= 1.0 {
        return Err(Error::DomainViolation { value: t, lo: 0.0, hi: 1.0 });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(arcosh_recip(t).powi(-2))
}

/// Which norm normalizes the metric coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    /// `‖·‖_p`
    #[default]
    Schatten,
    /// `max (m+1)^{1/p} μ_m`, the weak-`L^{(p,∞)}` proxy.
    Weak,
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMode::Schatten => "schatten",
            NormMode::Weak => "weak",
        })
    }
}

impl FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schatten" => Ok(NormMode::Schatten),
            "weak" => Ok(NormMode::Weak),
            other => Err(Error::InvalidArgument(format!("unknown norm mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftConfig {
    /// Summability exponent; `None` takes the declared exponent of the module.
    pub p: Option<f64>,
    pub mode: NormMode,
    /// Averaging radius `K`; `None` picks `max(12, half period of the generators)`.
    pub ball_radius: Option<usize>,
    pub scale_margin: f64,
    /// Domain guard `ε` for `f`.
    pub epsilon: f64,
    /// Relative threshold (against `‖Θ‖`) below which `Θ` counts as zero.
    pub kernel_tol: f64,
    /// Exponent of the `H₀` metric; `None` means `6/p`.
    pub g0_exponent: Option<f64>,
}

impl Default for LiftConfig {
    fn default() -> Self {
        Self {
            p: None,
            mode: NormMode::Schatten,
            ball_radius: None,
            scale_margin: 0.1,
            epsilon: 0.9,
            kernel_tol: 1e-12,
            g0_exponent: None,
        }
    }
}

impl LiftConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if let Some(p) = self.p {
            if !(p > 0.0) || !p.is_finite() {
                return bad(format!("p must be positive, got {p}"));
            }
        }
        if self.ball_radius == Some(0) {
            return bad("ball radius must be at least 1".into());
        }
        if !(self.scale_margin > 0.0 && self.scale_margin < 1.0) {
            return bad(format!("scale margin must lie in (0, 1), got {}", self.scale_margin));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.kernel_tol >= 0.0) || !self.kernel_tol.is_finite() {
            return bad(format!("kernel tolerance must be nonnegative, got {}", self.kernel_tol));
        }
        if let Some(g) = self.g0_exponent {
            if !(g > 0.0) || !g.is_finite() {
                return bad(format!("g0 exponent must be positive, got {g}"));
            }
        }
        Ok(())
    }
}
