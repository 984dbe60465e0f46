//! Deterministic checks of the conditions the lift must satisfy.

use crate::error::{Error, Result};
use crate::group::BallGroup;
use crate::lift::{ball_weights, f, f_inv};
use crate::module::FredholmModule;
use crate::operator::{
    commutator, eigh, fit_decay, inverse_sqrt_by_integral, psd_order_leq, singular_values, DecayFit, DenseOperator,
    HermitianOperator, ZERO_THRESHOLD,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Ceiling for bisected constants.
pub const BISECTION_CEILING: f64 = 1e6;
/// Relative precision of bisected constants.
pub const BISECTION_REL: f64 = 1e-6;
/// Relative slack granted to PSD comparisons.
pub const PSD_TOL: f64 = 1e-12;

/// Largest `λ ∈ [0, ‖Θ‖/‖G‖]` with `λG ≤ Θ`.
///
/// A vanishing `G` makes the inequality vacuous; the ceiling is returned.
pub fn check_t1(theta: &HermitianOperator, g: &HermitianOperator) -> Result<f64> {
    let g_norm = eigh(g)?.spectral_radius();
    if g_norm <= ZERO_THRESHOLD {
        return Ok(BISECTION_CEILING);
    }
    let feasible = |lambda: f64| -> Result<bool> { Ok(psd_order_leq(&g.scale(lambda), theta, PSD_TOL)?.holds) };
    let theta_norm = eigh(theta)?.spectral_radius();
    let mut hi = (theta_norm / g_norm).min(BISECTION_CEILING);
    if feasible(hi)? {
        return Ok(hi);
    }
    // values of λG below this are indistinguishable from the PSD slack
    let floor = 1e3 * PSD_TOL * (1.0 + theta_norm) / g_norm;
    let mut lo = 0.0;
    while hi - lo > BISECTION_REL * hi && hi > floor {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo > floor {
        Ok(lo)
    } else {
        Err(Error::NoPositiveLambda)
    }
}

/// Smallest `C ≥ 0` with `−C·S² ≤ uSu* − S ≤ C·S²`, found by doubling then
/// bisection. The returned value is always a feasible one.
pub fn sandwich_constant(s: &HermitianOperator, s2: &HermitianOperator, u: &DenseOperator, label: &str) -> Result<f64> {
    let diff = s.conjugate_by(u)?.sub(s)?;
    let feasible = |c: f64| -> Result<(bool, f64)> {
        let upper = psd_order_leq(&diff, &s2.scale(c), PSD_TOL)?;
        let lower = psd_order_leq(&s2.scale(-c), &diff, PSD_TOL)?;
        Ok((upper.holds && lower.holds, upper.min_eigenvalue.min(lower.min_eigenvalue)))
    };
    if feasible(0.0)?.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    loop {
        let (ok, witness) = feasible(hi)?;
        if ok {
            break;
        }
        if hi >= BISECTION_CEILING {
            return Err(Error::SandwichUnbounded { generator: label.to_string(), ceiling: BISECTION_CEILING, witness });
        }
        hi = (hi * 2.0).min(BISECTION_CEILING);
    }
    let mut lo = 0.0;
    while hi - lo > BISECTION_REL * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)?.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Per-generator constants of the conjugation sandwich around `Θ^{1/2}`.
pub fn check_t2(theta: &HermitianOperator, m: &FredholmModule) -> Result<Vec<(String, f64)>> {
    let root = eigh(theta)?.map(|v| v.max(0.0).sqrt());
    m.unitaries().iter().map(|(l, u)| Ok((l.clone(), sandwich_constant(&root, theta, u, l)?))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct T3Result {
    pub fit: DecayFit,
    /// `p + r + 1 + slack`.
    pub q: f64,
    /// `Σ μ_m(Θ)^{q/2}` over the truncation.
    pub partial_sum: f64,
    /// Implied order at most `q/2`.
    pub verdict: bool,
}

/// Decay of the eigenvalues of `Θ` against the exponent `q/2`.
pub fn check_t3(theta: &HermitianOperator, p: f64, r: f64, slack: f64) -> Result<T3Result> {
    let mut mu: Vec<f64> = eigh(theta)?.eigenvalues().into_iter().map(|v| v.max(0.0)).collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    let top = mu.first().copied().unwrap_or(0.0);
    let fit = fit_decay(&mu, 1e-14 * top)?;
    let q = p + r + 1.0 + slack;
    let partial_sum = mu.iter().map(|v| v.powf(q / 2.0)).sum();
    let verdict = fit.implied_order <= q / 2.0;
    Ok(T3Result { fit, q, partial_sum, verdict })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub q: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Smallest `(rhs_N − lhs_N)/rhs_N` over all prefixes `N`.
    pub min_relative_margin: f64,
    pub holds: bool,
    /// Smallest `C` with `Σ μ(Θ)^q ≤ C Σ_{μ(G)>0} μ(G)^{q-(r+1)/2}`; absent when `G = 0`.
    #[serde(default)]
    pub constant: Option<f64>,
}

/// Prefix-sum comparison of `μ(Θ₁)^q` with the bound obtained by averaging
/// the scalar chain `f⁻¹(ρ(u) f(μ_m(G)))` over the ball of radius `k`.
pub fn check_singular_chain(
    theta1: &HermitianOperator,
    g: &HermitianOperator,
    group: &impl BallGroup,
    k: usize,
    q: f64,
    r: f64,
    rel_tol: f64,
) -> Result<ChainResult> {
    let desc = |h: &HermitianOperator| -> Result<Vec<f64>> {
        let mut v: Vec<f64> = eigh(h)?.eigenvalues().into_iter().map(|x| x.max(0.0)).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        Ok(v)
    };
    let mu_theta = desc(theta1)?;
    let mu_g = desc(g)?;
    let (weights, _) = ball_weights(group, k)?;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let mut min_relative_margin = f64::INFINITY;
    let mut holds = true;
    for (mt, mg) in mu_theta.iter().zip(&mu_g) {
        lhs += mt.powf(q);
        if *mg > 0.0 {
            let fg = f(*mg);
            for (_, w) in &weights {
                rhs += f_inv(w * fg)?.powf(q);
            }
        }
        let margin = if rhs > 0.0 { (rhs - lhs) / rhs } else if lhs > 0.0 { f64::NEG_INFINITY } else { 0.0 };
        min_relative_margin = min_relative_margin.min(margin);
        if lhs > rhs * (1.0 + rel_tol) {
            holds = false;
        }
    }
    let denom: f64 = mu_g.iter().filter(|&&v| v > ZERO_THRESHOLD * mu_g[0].max(f64::MIN_POSITIVE)).map(|v| v.powf(q - 0.5 * (r + 1.0))).sum();
    let constant = if denom > 0.0 { Some(lhs / denom) } else { None };
    if mu_theta.is_empty() {
        min_relative_margin = 0.0;
    }
    Ok(ChainResult { q, lhs, rhs, min_relative_margin, holds, constant })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eq6Sample {
    pub t: f64,
    pub ratio: f64,
}

/// `f⁻¹(t)·(log t)²` at each sample.
pub fn check_eq6(samples: &[f64]) -> Result<Vec<Eq6Sample>> {
    samples
        .iter()
        .map(|&t| {
            if !(t > 0.0 && t <= 0.1) {
                return Err(Error::InvalidArgument(format!("samples must lie in (0, 0.1], got {t}")));
            }
            Ok(Eq6Sample { t, ratio: f_inv(t)? * t.ln().powi(2) })
        })
        .collect()
}

/// Whether the ratios increase strictly as `t` decreases.
pub fn eq6_increasing(samples: &[Eq6Sample]) -> bool {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.t.total_cmp(&a.t));
    sorted.windows(2).all(|w| w[1].ratio > w[0].ratio)
}

/// Spectral sign with `sign(0) = +1`.
pub fn spectral_sign(d: &HermitianOperator) -> Result<HermitianOperator> {
    Ok(eigh(d)?.map(|v| if v >= 0.0 { 1.0 } else { -1.0 }))
}

/// Largest `|λ|` of a Hermitian operator.
pub fn hermitian_norm(h: &HermitianOperator) -> Result<f64> {
    Ok(eigh(h)?.spectral_radius())
}

fn times_i(a: &DenseOperator) -> DenseOperator {
    a.scale(Complex64::new(0.0, 1.0))
}

/// `(u + u*)/2` and `(u − u*)/(2i)`.
pub fn hermitian_parts(u: &DenseOperator) -> (HermitianOperator, HermitianOperator) {
    let ud = u.adjoint();
    let re = HermitianOperator::symmetrize(u.add(&ud).expect("same dim").scale_real(0.5));
    let im = HermitianOperator::symmetrize(u.sub(&ud).expect("same dim").scale(Complex64::new(0.0, -0.5)));
    (re, im)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichMargin {
    pub generator: String,
    /// `re` or `im`.
    pub part: String,
    /// `‖[D, a]‖` for the Hermitian part `a`.
    pub commutator_norm: f64,
    /// Smallest eigenvalue of `‖[D,a]‖|D|^{-1} ∓ i[F,a]`.
    pub margin: f64,
    /// Largest `μ_m(i[F,a]) / (‖[D,a]‖ μ_{⌊m/2⌋}(|D|^{-1}))`; at most one.
    pub decay_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop1Result {
    pub sandwiches: Vec<SandwichMargin>,
    pub min_margin: f64,
    /// `max|quadrature(D²) − |D|^{-1}| / max|(|D|^{-1})|`.
    pub integral_residual: f64,
    pub quadrature_points: usize,
    pub max_decay_ratio: f64,
}

/// Commutator sandwich `−‖[D,a]‖|D|^{-1} ≤ i[F,a] ≤ ‖[D,a]‖|D|^{-1}` for the
/// Hermitian parts of each generator, the resolvent-integral identity for
/// `|D|^{-1}`, and the singular-value comparison that follows.
pub fn check_prop1(
    d: &HermitianOperator,
    abs_d: &HermitianOperator,
    fm: &HermitianOperator,
    generators: &[(String, DenseOperator)],
    quadrature_points: usize,
) -> Result<Prop1Result> {
    let inv = eigh(abs_d)?.map(|v| 1.0 / v);
    let mut inv_mu: Vec<f64> = eigh(&inv)?.eigenvalues().into_iter().map(f64::abs).collect();
    inv_mu.sort_by(|a, b| b.total_cmp(a));
    let mut sandwiches = Vec::new();
    for (label, u) in generators {
        let (re, im) = hermitian_parts(u);
        for (part, a) in [("re", re), ("im", im)] {
            let x = HermitianOperator::symmetrize(times_i(&commutator(d, &a)?));
            let y = HermitianOperator::symmetrize(times_i(&commutator(fm, &a)?));
            let norm = hermitian_norm(&x)?;
            let bound = inv.scale(norm);
            let margin = eigh(&bound.sub(&y)?)?.min().min(eigh(&bound.add(&y)?)?.min());
            let mut y_mu: Vec<f64> = eigh(&y)?.eigenvalues().into_iter().map(f64::abs).collect();
            y_mu.sort_by(|a, b| b.total_cmp(a));
            let mut decay_ratio: f64 = 0.0;
            for (mi, v) in y_mu.iter().enumerate() {
                if *v <= 1e-12 {
                    continue;
                }
                let cap = norm * inv_mu[mi / 2];
                decay_ratio = decay_ratio.max(if cap > 0.0 { v / cap } else { f64::INFINITY });
            }
            sandwiches.push(SandwichMargin {
                generator: label.clone(),
                part: part.to_string(),
                commutator_norm: norm,
                margin,
                decay_ratio,
            });
        }
    }
    let d2 = HermitianOperator::symmetrize(d.matmul(d)?);
    let quad = inverse_sqrt_by_integral(&d2, quadrature_points)?;
    let integral_residual = quad.sub(&inv)?.max_abs() / inv.max_abs().max(f64::MIN_POSITIVE);
    let min_margin = sandwiches.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    let max_decay_ratio = sandwiches.iter().map(|s| s.decay_ratio).fold(0.0, f64::max);
    Ok(Prop1Result { sandwiches, min_margin, integral_residual, quadrature_points, max_decay_ratio })
}

/// `‖P_int X P_int‖` for the module's interior mask.
pub fn interior_norm(x: &DenseOperator, interior: &[bool]) -> Result<f64> {
    Ok(singular_values(&x.compress(interior)?)?.first().copied().unwrap_or(0.0))
}

/// Interior norms `‖[D, u_k]‖` per generator.
pub fn commutator_norms(d: &DenseOperator, m: &FredholmModule) -> Result<Vec<(String, f64)>> {
    m.unitaries()
        .iter()
        .map(|(l, u)| Ok((l.clone(), interior_norm(&commutator(d, u)?, m.interior())?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop3Generator {
    pub generator: String,
    /// Sandwich constant of `T^{-1}` under conjugation.
    pub c_u: f64,
    /// Interior `‖[T, u]‖`.
    pub commutator_norm: f64,
    /// Interior `‖[F, u] T‖`.
    pub f_commutator_t_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRow {
    pub n: usize,
    pub commutator_norm: f64,
    pub f_commutator_t_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop3Evidence {
    pub generators: Vec<Prop3Generator>,
    /// Largest `λ` with `T^{-2} ≥ λG`.
    pub lambda: f64,
    /// `T = diag(1 + |n|)` on circle truncations.
    pub polynomial: Vec<SyntheticRow>,
    /// `T = diag(e^{|n|})` on circle truncations (negative control).
    pub exponential: Vec<SyntheticRow>,
    pub polynomial_bounded: bool,
    pub exponential_unbounded: bool,
}

fn synthetic_rows(sizes: &[usize], weight: impl Fn(i64) -> f64) -> Result<Vec<SyntheticRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        let m = crate::module::build_circle_module(n)?;
        let big = n as i64;
        let diag: Vec<f64> = (-big..=big).map(&weight).collect();
        let t = DenseOperator::from_diagonal(&diag);
        let u = &m.unitaries()[0].1;
        rows.push(SyntheticRow {
            n,
            commutator_norm: interior_norm(&commutator(&t, u)?, m.interior())?,
            f_commutator_t_norm: interior_norm(&commutator(m.f(), u)?.matmul(&t)?, m.interior())?,
        });
    }
    Ok(rows)
}

fn bounded(rows: &[SyntheticRow], ratio: f64) -> bool {
    rows.windows(2).all(|w| {
        w[1].commutator_norm <= ratio * w[0].commutator_norm && w[1].f_commutator_t_norm <= ratio * w[0].f_commutator_t_norm
    })
}

/// Both directions of the equivalence between bounded commutators of `T` and
/// the conjugation sandwich of `T^{-1}`: measured on `T = |D|`, and on
/// synthetic diagonal witnesses across `sizes`.
pub fn check_prop3(
    abs_d: &HermitianOperator,
    m: &FredholmModule,
    g: &HermitianOperator,
    sizes: &[usize],
) -> Result<Prop3Evidence> {
    let spec = eigh(abs_d)?;
    let inv = spec.map(|v| 1.0 / v);
    let inv2 = spec.map(|v| 1.0 / (v * v));
    let mut generators = Vec::new();
    for (label, u) in m.unitaries() {
        generators.push(Prop3Generator {
            generator: label.clone(),
            c_u: sandwich_constant(&inv, &inv2, u, label)?,
            commutator_norm: interior_norm(&commutator(abs_d, u)?, m.interior())?,
            f_commutator_t_norm: interior_norm(&commutator(m.f(), u)?.matmul(abs_d)?, m.interior())?,
        });
    }
    let lambda = match check_t1(&inv2, g) {
        Err(Error::NoPositiveLambda) => 0.0,
        r => r?,
    };
    let polynomial = synthetic_rows(sizes, |n| 1.0 + n.abs() as f64)?;
    let exponential = synthetic_rows(sizes, |n| (n.abs() as f64).exp())?;
    let polynomial_bounded = bounded(&polynomial, 1.5);
    let exponential_unbounded = match (exponential.first(), exponential.last()) {
        (Some(a), Some(b)) if exponential.len() > 1 => b.commutator_norm > 10.0 * a.commutator_norm,
        _ => false,
    };
    Ok(Prop3Evidence { generators, lambda, polynomial, exponential, polynomial_bounded, exponential_unbounded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    #[test]
    fn t1_identity_and_vacuous_cases() {
        let th = HermitianOperator::from_diagonal(&[0.3, 0.1, 0.05]);
        let lambda = check_t1(&th, &th).unwrap();
        assert!((lambda - 1.0).abs() <= 1e-6);
        assert_eq!(check_t1(&th, &HermitianOperator::zeros(3)).unwrap(), BISECTION_CEILING);
        // Θ vanishes where G does not
        let g = HermitianOperator::from_diagonal(&[0.0, 1.0, 0.0]);
        let th = HermitianOperator::from_diagonal(&[1.0, 0.0, 1.0]);
        assert!(matches!(check_t1(&th, &g), Err(Error::NoPositiveLambda)));
    }

    #[test]
    fn t2_trivial_conjugations() {
        let th = HermitianOperator::from_diagonal(&[0.5, 0.2, 0.1]);
        let root = eigh(&th).unwrap().map(f64::sqrt);
        assert_eq!(sandwich_constant(&root, &th, &DenseOperator::identity(3), "e").unwrap(), 0.0);
        let id = HermitianOperator::identity(3);
        let swap = DenseOperator::from_fn(3, |i, j| if i == 2 - j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        assert_eq!(sandwich_constant(&id, &id, &swap, "s").unwrap(), 0.0);
    }

    #[test]
    fn t2_diagonal_oracle() {
        // shift on three modes: C = max |s_{m-1} - s_m| / θ_m
        let th = [0.5, 0.2, 0.1];
        let op = HermitianOperator::from_diagonal(&th);
        let root = eigh(&op).unwrap().map(f64::sqrt);
        let u = DenseOperator::from_fn(3, |i, j| if i == (j + 1) % 3 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        let c = sandwich_constant(&root, &op, &u, "u").unwrap();
        let oracle = (0..3)
            .map(|m| (th[(m + 2) % 3].sqrt() - th[m].sqrt()).abs() / th[m])
            .fold(0.0, f64::max);
        assert!(c >= oracle * (1.0 - 1e-12) && c <= oracle * (1.0 + 2e-6), "{c} vs {oracle}");
    }

    #[test]
    fn t3_synthetic_spectra() {
        let d: Vec<f64> = (0..200).map(|n| ((n + 1) as f64).powi(-2)).collect();
        let r = check_t3(&HermitianOperator::from_diagonal(&d), 1.0, 1.0, 0.5).unwrap();
        assert!((0.45..=0.55).contains(&r.fit.implied_order));
        assert!(r.verdict);
        let r = check_t3(&HermitianOperator::identity(50), 1.0, 1.0, 0.5).unwrap();
        assert!(!r.verdict);
    }

    #[test]
    fn chain_with_zero_metric() {
        let g = GroupSpec::free_abelian(1).unwrap();
        let z = HermitianOperator::zeros(4);
        let c = check_singular_chain(&z, &z, &g, 5, 1.5, 1.0, 1e-10).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        assert!(c.holds);
        assert!(c.constant.is_none());
    }

    #[test]
    fn eq6_values() {
        let s = check_eq6(&[1e-3, 1e-6, 1e-9, 1e-12]).unwrap();
        assert!((s[1].ratio - 0.9067).abs() < 1e-3);
        assert!((s[3].ratio - 0.952).abs() < 1e-3);
        assert!(eq6_increasing(&s));
        assert!(check_eq6(&[0.5]).is_err());
    }

    #[test]
    fn identity_element_commutes() {
        let d = HermitianOperator::from_diagonal(&[-3.0, -1.0, 2.0, 4.0]);
        let abs = eigh(&d).unwrap().map(f64::abs);
        let fm = spectral_sign(&d).unwrap();
        let r = check_prop1(&d, &abs, &fm, &[("e".into(), DenseOperator::identity(4))], 200).unwrap();
        assert!(r.sandwiches.iter().all(|s| s.commutator_norm == 0.0 && s.margin >= 0.0));
        assert!(r.integral_residual < 1e-6);
    }
}
