//! Finite truncations of Fredholm modules `(CΓ, H, F)`.

use crate::error::{Error, Result};
use crate::group::{GroupKind, GroupSpec};
use crate::operator::{commutator, fit_decay, singular_values, weak_schatten_stat, DecayFit, DenseOperator, HermitianOperator, ONE, ZERO, ZERO_THRESHOLD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Residual tolerance applied when loading modules from disk.
pub const AXIOM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct FredholmModule {
    pub(crate) f: HermitianOperator,
    /// Generators in the group's label order.
    pub(crate) unitaries: Vec<(String, DenseOperator)>,
    pub(crate) group: GroupSpec,
    /// `true` for indices away from the truncation boundary.
    pub(crate) interior: Vec<bool>,
    pub(crate) metadata: serde_json::Value,
}

impl FredholmModule {
    /// Assembles a module and checks the axioms at `tol`.
    pub fn new(
        f: HermitianOperator,
        unitaries: Vec<(String, DenseOperator)>,
        group: GroupSpec,
        interior: Option<Vec<bool>>,
        metadata: serde_json::Value,
        tol: f64,
    ) -> Result<Self> {
        let dim = f.dim();
        if group.generator_labels().len() != unitaries.len()
            || group.generator_labels().iter().zip(&unitaries).any(|(l, (k, _))| l != k)
        {
            return Err(Error::Schema("unitary labels must match the group generators in order".into()));
        }
        for (_, u) in &unitaries {
            if u.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: u.dim() });
            }
        }
        let interior = interior.unwrap_or_else(|| vec![true; dim]);
        if interior.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: interior.len() });
        }
        let module = Self { f, unitaries, group, interior, metadata };
        let residuals = validate_axioms(&module)?;
        residuals.enforce(tol)?;
        let mut module = module;
        let mut map = match std::mem::take(&mut module.metadata) {
            serde_json::Value::Object(map) => map,
            serde_json::Value::Null => serde_json::Map::new(),
            other => serde_json::Map::from_iter([("user".to_string(), other)]),
        };
        map.insert("axiom_residuals".into(), serde_json::to_value(&residuals)?);
        module.metadata = serde_json::Value::Object(map);
        Ok(module)
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn f(&self) -> &HermitianOperator {
        &self.f
    }

    pub fn unitaries(&self) -> &[(String, DenseOperator)] {
        &self.unitaries
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn interior(&self) -> &[bool] {
        &self.interior
    }

    pub fn metadata(&self) -> &serde_json::Value {
        &self.metadata
    }

    /// `[F, u]` compressed to the interior indices.
    pub fn interior_commutator(&self, k: usize) -> Result<DenseOperator> {
        commutator(&self.f, &self.unitaries[k].1)?.compress(&self.interior)
    }
}

fn sign(n: i64) -> f64 {
    if n >= 0 {
        1.0
    } else {
        -1.0
    }
}

/// Fourier-mode model of the Hilbert transform on the circle.
///
/// Basis `e_n`, `-N ≤ n ≤ N`; `F = sign(n)` with `sign(0) = +1`; `u` is the
/// cyclic shift `e_n ↦ e_{n+1}` with `e_N ↦ e_{-N}`.
pub fn build_circle_module(n: usize) -> Result<FredholmModule> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("circle module needs N >= 2, got {n}")));
    }
    let big = n as i64;
    let dim = 2 * n + 1;
    let diag: Vec<f64> = (-big..=big).map(sign).collect();
    let f = HermitianOperator::from_diagonal(&diag);
    let u = DenseOperator::from_fn(dim, |i, j| if i == (j + 1) % dim { ONE } else { ZERO });
    let interior = (-big..=big).map(|m| m.abs() < big).collect();
    FredholmModule::new(
        f,
        vec![("u1".into(), u)],
        GroupSpec::free_abelian(1)?,
        Some(interior),
        serde_json::json!({ "example": "circle", "N": n }),
        AXIOM_TOL,
    )
}

fn pauli() -> [[Complex64; 4]; 2] {
    // row-major sigma_1 and sigma_2
    [[ZERO, ONE, ONE, ZERO], [ZERO, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), ZERO]]
}

/// Torus model over `Z^r`, `r ∈ {1, 2}`.
///
/// For `r = 2` the space is `ℓ²([-N,N]²) ⊗ C²` with
/// `F(n) = (n₁σ₁ + n₂σ₂)/|n|`, `F(0) = σ₁`, and `u_j` the cyclic shift by `e_j`.
/// `r = 1` is the circle model.
pub fn build_torus_module(r: usize, n: usize) -> Result<FredholmModule> {
    match r {
        1 => build_circle_module(n),
        2 => build_torus2(n),
        _ => Err(Error::InvalidArgument(format!("torus rank must be 1 or 2, got {r}"))),
    }
}

fn build_torus2(n: usize) -> Result<FredholmModule> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("torus module needs N >= 2, got {n}")));
    }
    let side = 2 * n + 1;
    let big = n as i64;
    let dim = 2 * side * side;
    let site = |a: usize, b: usize| 2 * (a * side + b);
    let [s1, s2] = pauli();
    let mut f = DenseOperator::zeros(dim);
    for a in 0..side {
        for b in 0..side {
            let (n1, n2) = (a as i64 - big, b as i64 - big);
            let (c1, c2) = if n1 == 0 && n2 == 0 {
                (1.0, 0.0)
            } else {
                let norm = ((n1 * n1 + n2 * n2) as f64).sqrt();
                (n1 as f64 / norm, n2 as f64 / norm)
            };
            let base = site(a, b);
            for r in 0..2 {
                for c in 0..2 {
                    f.set(base + r, base + c, s1[2 * r + c] * c1 + s2[2 * r + c] * c2);
                }
            }
        }
    }
    let f = HermitianOperator::new(f)?;
    let mut u1 = DenseOperator::zeros(dim);
    let mut u2 = DenseOperator::zeros(dim);
    for a in 0..side {
        for b in 0..side {
            for s in 0..2 {
                u1.set(site((a + 1) % side, b) + s, site(a, b) + s, ONE);
                u2.set(site(a, (b + 1) % side) + s, site(a, b) + s, ONE);
            }
        }
    }
    let mut interior = vec![false; dim];
    for a in 0..side {
        for b in 0..side {
            let inside = (a as i64 - big).abs() < big && (b as i64 - big).abs() < big;
            interior[site(a, b)] = inside;
            interior[site(a, b) + 1] = inside;
        }
    }
    FredholmModule::new(
        f,
        vec![("u1".into(), u1), ("u2".into(), u2)],
        GroupSpec::free_abelian(2)?,
        Some(interior),
        serde_json::json!({ "example": "torus2", "N": n }),
        AXIOM_TOL,
    )
}

/// Norm residuals of the module axioms (max-abs entry norms).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomResiduals {
    pub f_hermitian: f64,
    pub f_involution: f64,
    /// `max(‖u*u − I‖, ‖uu* − I‖)` per generator.
    pub unitarity: Vec<(String, f64)>,
    /// `‖[u_i, u_j]‖` for abelian groups, pairwise.
    pub commutation: Vec<(String, String, f64)>,
    /// `‖u^n − I‖` for cyclic groups of order `n`.
    pub relation: Option<f64>,
}

impl AxiomResiduals {
    pub fn enforce(&self, tol: f64) -> Result<()> {
        let fail = |what: String, residual: f64| Err(Error::AxiomViolation { what, residual, tolerance: tol });
        if self.f_hermitian > tol {
            return fail("F - F*".into(), self.f_hermitian);
        }
        if self.f_involution > tol {
            return fail("F^2 - I".into(), self.f_involution);
        }
        for (label, r) in &self.unitarity {
            if *r > tol {
                return fail(format!("{label}*{label} - I"), *r);
            }
        }
        for (a, b, r) in &self.commutation {
            if *r > tol {
                return fail(format!("[{a}, {b}]"), *r);
            }
        }
        if let Some(r) = self.relation {
            if r > tol {
                return fail("u^n - I".into(), r);
            }
        }
        Ok(())
    }

    pub fn max(&self) -> f64 {
        let mut worst = self.f_hermitian.max(self.f_involution);
        worst = self.unitarity.iter().map(|x| x.1).fold(worst, f64::max);
        worst = self.commutation.iter().map(|x| x.2).fold(worst, f64::max);
        worst.max(self.relation.unwrap_or(0.0))
    }
}

/// Measures how far the module is from satisfying its axioms.
pub fn validate_axioms(m: &FredholmModule) -> Result<AxiomResiduals> {
    let dim = m.dim();
    let id = DenseOperator::identity(dim);
    let f = m.f.as_dense();
    let f_hermitian = f.asymmetry();
    let f_involution = f.matmul(f)?.sub(&id)?.max_abs();
    let mut unitarity = Vec::new();
    for (label, u) in &m.unitaries {
        let ud = u.adjoint();
        let r1 = ud.matmul(u)?.sub(&id)?.max_abs();
        let r2 = u.matmul(&ud)?.sub(&id)?.max_abs();
        unitarity.push((label.clone(), r1.max(r2)));
    }
    let mut commutation = Vec::new();
    let mut relation = None;
    match m.group.kind() {
        GroupKind::FreeAbelian { .. } => {
            for i in 0..m.unitaries.len() {
                for j in (i + 1)..m.unitaries.len() {
                    let r = commutator(&m.unitaries[i].1, &m.unitaries[j].1)?.max_abs();
                    commutation.push((m.unitaries[i].0.clone(), m.unitaries[j].0.clone(), r));
                }
            }
        }
        GroupKind::Cyclic { order } => {
            let u = &m.unitaries[0].1;
            let mut power = DenseOperator::identity(dim);
            for _ in 0..*order {
                power = power.matmul(u)?;
            }
            relation = Some(power.sub(&id)?.max_abs());
        }
    }
    Ok(AxiomResiduals { f_hermitian, f_involution, unitarity, commutation, relation })
}

/// Per-generator decay data of `μ_m([F, u])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSummability {
    pub label: String,
    /// `None` when fewer than four singular values are nonzero.
    pub fit: Option<DecayFit>,
    pub weak_stat: f64,
    pub operator_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub generators: Vec<GeneratorSummability>,
    pub declared_p: f64,
}

/// Decay fits of the interior commutators and the resulting summability
/// exponent, `max(1, max implied order)`.
pub fn summability_report(m: &FredholmModule) -> Result<SummabilityReport> {
    let mut spectra = Vec::new();
    let mut global_max: f64 = 0.0;
    for k in 0..m.unitaries.len() {
        let mu = singular_values(&m.interior_commutator(k)?)?;
        global_max = global_max.max(mu.first().copied().unwrap_or(0.0));
        spectra.push(mu);
    }
    if global_max <= ZERO_THRESHOLD {
        return Err(Error::DegenerateModule);
    }
    let mut fits = Vec::new();
    let mut declared_p: f64 = 1.0;
    for mu in &spectra {
        let zero_tol = ZERO_THRESHOLD * mu.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
        let fit = fit_decay(mu, zero_tol).ok();
        if let Some(fit) = &fit {
            if fit.implied_order.is_finite() {
                declared_p = declared_p.max(fit.implied_order);
            }
        }
        fits.push(fit);
    }
    let mut generators = Vec::new();
    for (k, (mu, fit)) in spectra.iter().zip(fits).enumerate() {
        generators.push(GeneratorSummability {
            label: m.unitaries[k].0.clone(),
            fit,
            weak_stat: crate::operator::schatten::weak_stat_of(mu, declared_p),
            operator_norm: mu.first().copied().unwrap_or(0.0),
        });
    }
    Ok(SummabilityReport { generators, declared_p })
}

/// Weak statistic of one generator commutator at exponent `p`.
pub fn generator_weak_stat(m: &FredholmModule, k: usize, p: f64) -> Result<f64> {
    weak_schatten_stat(&m.interior_commutator(k)?, p)
}
