use super::average::{average, ball_weights, Averaged, Monomial};
use super::{arcosh_recip, f, f_inv, LiftConfig, NormMode};
use crate::error::{Error, Result};
use crate::module::{summability_report, FredholmModule};
use crate::operator::{eigh, schatten_norm, weak_schatten_stat, DenseOperator, HermitianOperator, SpectrumDecomposition, ZERO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Smallest value `σ·ν` the `H₀` metric may take; below it `f` underflows.
const G0_FLOOR: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct QuantumMetric {
    /// Already rescaled by `scale`.
    pub g: HermitianOperator,
    pub coefficients: Vec<(String, f64)>,
    /// The norm each coefficient was normalized by.
    pub commutator_norms: Vec<(String, f64)>,
    pub scale: f64,
    pub p_used: f64,
}

/// `K` from the config, or `max(12, ⌊longest generator cycle / 2⌋)`, the
/// smallest radius whose ball reaches every mode of a cyclic truncation.
pub fn resolve_ball_radius(m: &FredholmModule, cfg: &LiftConfig) -> usize {
    cfg.ball_radius.unwrap_or_else(|| {
        m.unitaries()
            .iter()
            .filter_map(|(_, u)| Monomial::from_dense(u))
            .map(|mono| mono.longest_cycle() / 2)
            .fold(12, usize::max)
    })
}

fn resolve_p(m: &FredholmModule, cfg: &LiftConfig) -> Result<f64> {
    match cfg.p {
        Some(p) => Ok(p),
        None => match summability_report(m) {
            Ok(rep) => Ok(rep.declared_p),
            Err(Error::DegenerateModule) => Ok(1.0),
            Err(e) => Err(e),
        },
    }
}

/// Largest admissible rescaling of a PSD operator of norm `norm`:
/// `σ‖G‖ ≤ ε(1 − margin)` and `W·f(σ‖G‖) ≤ 1 − margin`.
fn admissible_scale(norm: f64, total_weight: f64, cfg: &LiftConfig) -> Result<f64> {
    if norm <= 0.0 {
        return Ok(1.0);
    }
    let room = 1.0 - cfg.scale_margin;
    let mut sigma = (cfg.epsilon * room / norm).min(1.0);
    let target = room / total_weight;
    if target < 1.0 {
        sigma = sigma.min(f_inv(target)? / norm);
    }
    while sigma > 0.0 && total_weight * f(sigma * norm) > room {
        sigma *= 1.0 - 1e-12;
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::NoAdmissibleScale);
    }
    Ok(sigma)
}

fn total_weight(m: &FredholmModule, k: usize) -> Result<f64> {
    let (weights, tail) = ball_weights(m.group(), k)?;
    Ok(weights.iter().map(|(_, w)| w).sum::<f64>() + tail)
}

/// `G = σ Σ_k c_k C_k* C_k` with `C_k` the interior part of `[F, u_k]` and
/// `c_k = 2^{-k} ‖C_k‖^{-2}`.
pub fn quantum_metric(m: &FredholmModule, cfg: &LiftConfig) -> Result<QuantumMetric> {
    cfg.validate()?;
    let p = resolve_p(m, cfg)?;
    let dim = m.dim();
    let mut acc = DenseOperator::zeros(dim);
    let mut coefficients = Vec::new();
    let mut commutator_norms = Vec::new();
    for (k, (label, _)) in m.unitaries().iter().enumerate() {
        let c = m.interior_commutator(k)?;
        let norm = match cfg.mode {
            NormMode::Schatten => schatten_norm(&c, p)?,
            NormMode::Weak => weak_schatten_stat(&c, p)?,
        };
        commutator_norms.push((label.clone(), norm));
        if norm <= crate::operator::ZERO_THRESHOLD {
            coefficients.push((label.clone(), 0.0));
            continue;
        }
        let coef = 0.5f64.powi(k as i32 + 1) / (norm * norm);
        coefficients.push((label.clone(), coef));
        acc = acc.add(&c.adjoint().matmul(&c)?.scale_real(coef))?;
    }
    if coefficients.iter().all(|(_, c)| *c == 0.0) {
        return Err(Error::DegenerateModule);
    }
    let g = HermitianOperator::symmetrize(acc);
    let norm = eigh(&g)?.spectral_radius();
    let scale = admissible_scale(norm, total_weight(m, resolve_ball_radius(m, cfg))?, cfg)?;
    Ok(QuantumMetric { g: g.scale(scale), coefficients, commutator_norms, scale, p_used: p })
}

/// `f(G)` with eigenvalues inside their resolution of zero mapped to zero.
fn apply_f(g: &HermitianOperator) -> Result<HermitianOperator> {
    let spec = eigh(g)?;
    for (&v, &res) in spec.eigenvalues().iter().zip(&spec.resolutions()) {
        if v < -res {
            return Err(Error::DomainViolation { value: v, lo: 0.0, hi: f64::INFINITY });
        }
    }
    Ok(spec.map(|v| f(v.max(0.0))))
}

fn check_breach(spec: &SpectrumDecomposition, cfg: &LiftConfig) -> Result<()> {
    let bound = 1.0 - cfg.scale_margin / 2.0;
    let top = spec.max();
    if top >= bound {
        return Err(Error::DomainBreach { value: top, bound });
    }
    Ok(())
}

/// `Θ(G) = f⁻¹(M_K f(G))` on the whole space, eigenvalues at the noise
/// level of the averaged operator sent to zero.
pub fn theta(g: &HermitianOperator, m: &FredholmModule, cfg: &LiftConfig) -> Result<HermitianOperator> {
    cfg.validate()?;
    let avg = average(&apply_f(g)?, m, resolve_ball_radius(m, cfg))?;
    let spec = eigh(&avg.op)?;
    check_breach(&spec, cfg)?;
    let mut failure = None;
    let out = spec.map_with(|t, res| {
        if t <= res {
            return 0.0;
        }
        f_inv(t).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            0.0
        })
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `diag((n+1)^{-exponent})`, `n = 0..dim0`.
pub fn g0_default(dim0: usize, exponent: f64) -> HermitianOperator {
    let diag: Vec<f64> = (0..dim0).map(|n| ((n + 1) as f64).powf(-exponent)).collect();
    HermitianOperator::from_diagonal(&diag)
}

/// `H = H₀ ⊕ H₁` read off the spectrum of `M_K f(G)`.
#[derive(Clone, Debug)]
pub struct KernelSplit {
    pub p0: HermitianOperator,
    pub p1: HermitianOperator,
    pub kernel_dim: usize,
    /// `max_k ‖C_k P₀‖_F` over the interior commutators; zero in exact arithmetic.
    pub consistency: f64,
    pub averaged: Averaged,
    spectrum: SpectrumDecomposition,
    theta_norm: f64,
}

impl KernelSplit {
    fn is_kernel(&self, t: f64, res: f64, kernel_tol: f64) -> bool {
        is_kernel(t, res, kernel_tol, self.theta_norm)
    }
}

fn is_kernel(t: f64, res: f64, kernel_tol: f64, theta_norm: f64) -> bool {
    // thresholding in the Θ domain keeps tiny but genuine values of M f(G)
    t <= res || f_inv(t).map(|v| v <= kernel_tol * theta_norm).unwrap_or(false)
}

/// `Σ_j w_j v_j v_j*`, skipping zero coordinates.
fn outer_sum(dim: usize, vectors: &[Vec<Complex64>], weights: &[f64]) -> DenseOperator {
    let mut out = DenseOperator::zeros(dim);
    for (v, &w) in vectors.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let support: Vec<(usize, Complex64)> = v.iter().copied().enumerate().filter(|(_, z)| *z != ZERO).collect();
        for &(i, a) in &support {
            for &(j, b) in &support {
                out.add_at(i, j, a * b.conj() * w);
            }
        }
    }
    out
}

pub fn kernel_split(m: &FredholmModule, g: &HermitianOperator, cfg: &LiftConfig) -> Result<KernelSplit> {
    cfg.validate()?;
    let dim = m.dim();
    let averaged = average(&apply_f(g)?, m, resolve_ball_radius(m, cfg))?;
    let spectrum = eigh(&averaged.op)?;
    check_breach(&spectrum, cfg)?;
    let top = spectrum.max();
    let top_res = spectrum.resolutions().iter().copied().fold(0.0, f64::max);
    let theta_norm = if top > top_res { f_inv(top)? } else { 0.0 };
    let kernel = spectrum.select_vectors(|t, res| is_kernel(t, res, cfg.kernel_tol, theta_norm));
    let p0 = HermitianOperator::symmetrize(outer_sum(dim, &kernel, &vec![1.0; kernel.len()]));
    let p1 = HermitianOperator::identity(dim).sub(&p0)?;
    let mut consistency: f64 = 0.0;
    if !kernel.is_empty() {
        for k in 0..m.unitaries().len() {
            let c = m.interior_commutator(k)?;
            consistency = consistency.max(c.matmul(&p0)?.frobenius_norm());
        }
    }
    Ok(KernelSplit { p0, p1, kernel_dim: kernel.len(), consistency, averaged, spectrum, theta_norm })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleResiduals {
    /// `max|D − D*|` before symmetrization.
    pub d_hermiticity: f64,
    /// `max|[F, |D|]|`.
    pub f_abs_d_commutator: f64,
    /// `max|P₀ Θ P₁|`.
    pub theta_leakage: f64,
    /// `max|P₁ M_K f(G₀) P₀|`, the part of the `H₀` average leaving `H₀`.
    pub g0_leakage: f64,
    /// `max|P₀ P₁|`.
    pub projector_overlap: f64,
    pub kernel_consistency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: LiftConfig,
    pub p_used: f64,
    pub ball_radius: usize,
    pub sigma: f64,
    pub sigma0: Option<f64>,
    pub g0_exponent: Option<f64>,
    pub weight_sum: f64,
    pub tail_bound: f64,
    pub kernel_dim: usize,
    pub coefficients: Vec<(String, f64)>,
    pub commutator_norms: Vec<(String, f64)>,
    pub residuals: TripleResiduals,
    /// Set when `P₀` fails to annihilate the commutators to `1e-8`.
    pub kernel_warning: bool,
}

#[derive(Clone, Debug)]
pub struct SpectralTriple {
    pub d: HermitianOperator,
    pub abs_d: HermitianOperator,
    pub f: HermitianOperator,
    pub p0: HermitianOperator,
    pub p1: HermitianOperator,
    pub theta: HermitianOperator,
    /// The rescaled metric on `H₁`.
    pub g: HermitianOperator,
    pub provenance: Provenance,
}

impl SpectralTriple {
    pub fn dim(&self) -> usize {
        self.d.dim()
    }
}

/// Lifts a Fredholm module to a spectral triple with `D = F|D|`.
pub fn build_triple(m: &FredholmModule, cfg: &LiftConfig) -> Result<SpectralTriple> {
    cfg.validate()?;
    let dim = m.dim();
    let k = resolve_ball_radius(m, cfg);
    let metric = match quantum_metric(m, cfg) {
        Ok(q) => q,
        Err(Error::DegenerateModule) => QuantumMetric {
            g: HermitianOperator::zeros(dim),
            coefficients: m.unitaries().iter().map(|(l, _)| (l.clone(), 0.0)).collect(),
            commutator_norms: m.unitaries().iter().map(|(l, _)| (l.clone(), 0.0)).collect(),
            scale: 1.0,
            p_used: resolve_p(m, cfg)?,
        },
        Err(e) => return Err(e),
    };
    let split = kernel_split(m, &metric.g, cfg)?;

    // H₁: Θ₁ and Θ₁^{-1/2} share the eigenvectors of M_K f(G)
    let mut failure = None;
    let theta1 = split.spectrum.map_with(|t, res| {
        if split.is_kernel(t, res, cfg.kernel_tol) {
            return 0.0;
        }
        f_inv(t).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            0.0
        })
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let x1 = split
        .spectrum
        .map_with(|t, res| if split.is_kernel(t, res, cfg.kernel_tol) { 0.0 } else { arcosh_recip(t) });

    let mut theta = theta1;
    let mut x = x1;
    let mut sigma0 = None;
    let mut g0_exponent = None;
    let mut g0_leakage = 0.0;
    if split.kernel_dim > 0 {
        let kernel = split.spectrum.select_vectors(|t, res| split.is_kernel(t, res, cfg.kernel_tol));
        let dim0 = kernel.len();
        let s0 = admissible_scale(1.0, total_weight(m, k)?, cfg)?;
        let mut expo = cfg.g0_exponent.unwrap_or(6.0 / metric.p_used);
        if dim0 > 1 {
            expo = expo.min((s0 / G0_FLOOR).ln() / (dim0 as f64).ln());
        }
        sigma0 = Some(s0);
        g0_exponent = Some(expo);
        let nu: Vec<f64> = g0_default(dim0, expo).real_diagonal();
        let f_g0 = HermitianOperator::symmetrize(outer_sum(dim, &kernel, &nu.iter().map(|v| f(s0 * v)).collect::<Vec<_>>()));
        let avg0 = average(&f_g0, m, k)?;
        g0_leakage = split.p1.matmul(&avg0.op)?.matmul(&split.p0)?.max_abs();
        // compress to the kernel basis: A₀ = V₀* M V₀
        let mut v0 = DenseOperator::zeros(dim);
        for (c, col) in kernel.iter().enumerate() {
            for (r, z) in col.iter().enumerate() {
                if *z != ZERO {
                    v0.set(r, c, *z);
                }
            }
        }
        let full = v0.adjoint().matmul(&avg0.op)?.matmul(&v0)?;
        let a0 = HermitianOperator::symmetrize(DenseOperator::from_fn(dim0, |i, j| full.get(i, j)));
        let spec0 = eigh(&a0)?;
        check_breach(&spec0, cfg)?;
        let values = spec0.eigenvalues();
        let resolutions = spec0.resolutions();
        if let Some((&v, _)) = values.iter().zip(&resolutions).find(|(v, r)| **v <= **r) {
            return Err(Error::ThetaNotInvertible { value: v });
        }
        let w = spec0.eigenvectors();
        let lifted: Vec<Vec<Complex64>> = (0..dim0)
            .map(|j| {
                let mut col = vec![ZERO; dim];
                for (i, kv) in kernel.iter().enumerate() {
                    let coef = w.get(i, j);
                    if coef == ZERO {
                        continue;
                    }
                    for (r, z) in kv.iter().enumerate() {
                        col[r] += z * coef;
                    }
                }
                col
            })
            .collect();
        let th0: Vec<f64> = values.iter().map(|&t| f_inv(t)).collect::<Result<_>>()?;
        let x0: Vec<f64> = values.iter().map(|&t| arcosh_recip(t)).collect();
        theta = theta.add(&HermitianOperator::symmetrize(outer_sum(dim, &lifted, &th0)))?;
        x = x.add(&HermitianOperator::symmetrize(outer_sum(dim, &lifted, &x0)))?;
    }

    let fm = m.f().as_dense();
    let abs_d = HermitianOperator::symmetrize(x.add(&HermitianOperator::symmetrize(fm.matmul(&x)?.matmul(fm)?))?.into_dense());
    let d_raw = fm.matmul(&abs_d)?;
    let d_hermiticity = d_raw.asymmetry();
    let d = HermitianOperator::symmetrize(d_raw);
    let f_abs_d_commutator = crate::operator::commutator(fm, &abs_d)?.max_abs();
    let theta_leakage = split.p0.matmul(&theta)?.matmul(&split.p1)?.max_abs();
    let projector_overlap = split.p0.matmul(&split.p1)?.max_abs();
    let residuals = TripleResiduals {
        d_hermiticity,
        f_abs_d_commutator,
        theta_leakage,
        g0_leakage,
        projector_overlap,
        kernel_consistency: split.consistency,
    };
    let provenance = Provenance {
        config: cfg.clone(),
        p_used: metric.p_used,
        ball_radius: k,
        sigma: metric.scale,
        sigma0,
        g0_exponent,
        weight_sum: split.averaged.weight_sum,
        tail_bound: split.averaged.tail_bound,
        kernel_dim: split.kernel_dim,
        coefficients: metric.coefficients,
        commutator_norms: metric.commutator_norms,
        kernel_warning: split.consistency > 1e-8,
        residuals,
    };
    Ok(SpectralTriple {
        d,
        abs_d,
        f: m.f().clone(),
        p0: split.p0,
        p1: split.p1,
        theta,
        g: metric.g,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::build_circle_module;

    fn circle_theta(n: usize, mode: i64) -> f64 {
        let _ = n;
        let rho = (-(1.0 + (mode + 1).abs() as f64)).exp();
        f_inv(rho * f(0.5)).unwrap()
    }

    #[test]
    fn circle_metric_is_half_projector() {
        let m = build_circle_module(8).unwrap();
        let q = quantum_metric(&m, &LiftConfig::default()).unwrap();
        assert_eq!(q.scale, 1.0);
        assert_eq!(q.coefficients[0].1, 0.125);
        let mut expected = vec![0.0; m.dim()];
        expected[7] = 0.5;
        assert_eq!(q.g.real_diagonal(), expected);
        assert_eq!(q.g.sub(&HermitianOperator::from_diagonal(&expected)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn ball_radius_defaults() {
        let m = build_circle_module(20).unwrap();
        assert_eq!(resolve_ball_radius(&m, &LiftConfig::default()), 20);
        let m = build_circle_module(4).unwrap();
        assert_eq!(resolve_ball_radius(&m, &LiftConfig::default()), 12);
        assert_eq!(resolve_ball_radius(&m, &LiftConfig { ball_radius: Some(3), ..Default::default() }), 3);
    }

    #[test]
    fn circle_triple_matches_closed_form() {
        // N ≥ 12 so the default radius does not wrap around the truncation
        let n = 16usize;
        let m = build_circle_module(n).unwrap();
        let t = build_triple(&m, &LiftConfig::default()).unwrap();
        assert_eq!(t.provenance.kernel_dim, 0);
        for idx in 1..(m.dim() - 1) {
            let mode = idx as i64 - n as i64;
            let th = circle_theta(n, mode);
            assert!((t.theta.get(idx, idx).re / th - 1.0).abs() < 1e-12);
            let abs_d = 2.0 * th.powf(-0.5);
            assert!((t.abs_d.get(idx, idx).re / abs_d - 1.0).abs() < 1e-12);
        }
        assert_eq!(t.provenance.residuals.f_abs_d_commutator, 0.0);
    }

    #[test]
    fn degenerate_module_uses_g0_only() {
        let c = build_circle_module(4).unwrap();
        let m = FredholmModule::new(
            HermitianOperator::identity(c.dim()),
            c.unitaries().to_vec(),
            c.group().clone(),
            None,
            serde_json::json!({}),
            crate::module::AXIOM_TOL,
        )
        .unwrap();
        let t = build_triple(&m, &LiftConfig::default()).unwrap();
        assert_eq!(t.provenance.kernel_dim, m.dim());
        assert_eq!(t.g.max_abs(), 0.0);
        assert!(t.p0.sub(&HermitianOperator::identity(m.dim())).unwrap().max_abs() < 1e-15);
        let spec = eigh(&t.abs_d).unwrap();
        assert!(spec.min() > 0.0);
        assert!(eigh(&t.theta).unwrap().min() > 0.0);
    }

    #[test]
    fn g0_formula() {
        assert_eq!(g0_default(1, 3.0).real_diagonal(), vec![1.0]);
        let d = g0_default(3, 2.0).real_diagonal();
        assert_eq!(d[..2], [1.0, 0.25]);
        assert!((d[2] - 1.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn theta_of_zero_is_zero() {
        let m = build_circle_module(4).unwrap();
        let th = theta(&HermitianOperator::zeros(m.dim()), &m, &LiftConfig::default()).unwrap();
        assert_eq!(th.max_abs(), 0.0);
    }
}
