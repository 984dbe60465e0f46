//! Certification of a lifted triple: every condition the construction
//! relies on, measured on the finite truncation.

mod checks;
mod random;
mod sweep;

pub use checks::{
    check_eq6, check_prop1, check_prop3, check_singular_chain, check_t1, check_t2, check_t3, commutator_norms,
    eq6_increasing, hermitian_norm, hermitian_parts, interior_norm, sandwich_constant, spectral_sign, ChainResult,
    Eq6Sample, Prop1Result, Prop3Evidence, Prop3Generator, SandwichMargin, SyntheticRow, T3Result, BISECTION_CEILING,
    BISECTION_REL, PSD_TOL,
};
pub use random::{
    check_loewner, check_rotfeld, f_inv_complex, pick_samples, random_hermitian, rotfeld_margin, trial_seed,
    LoewnerReport, PickSummary, TrialCounts, TrialFailure,
};
pub use sweep::{commutator_norm_sweep, decay_csv, decay_table, DecayRow, SweepRow, SweepTable, SWEEP_RATIO};

use crate::error::{Error, Result};
use crate::lift::{f_inv, SpectralTriple};
use crate::module::FredholmModule;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Largest spectral extent of the random Rotfel'd matrices; keeps `A + B`
/// inside the interval where `f⁻¹` is concave.
pub const ROTFELD_SPECTRUM_MAX: f64 = 0.045;
pub const EQ6_SAMPLES: [f64; 4] = [1e-3, 1e-6, 1e-9, 1e-12];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub rotfeld_trials: u64,
    pub rotfeld_dim: usize,
    pub loewner_trials: u64,
    pub loewner_dim: usize,
    pub pick_samples: usize,
    pub quadrature_points: usize,
    pub prop3_sizes: Vec<usize>,
    /// Added to `p + r + 1` when forming `q`.
    pub q_slack: f64,
    pub tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            rotfeld_trials: 100,
            rotfeld_dim: 8,
            loewner_trials: 100,
            loewner_dim: 6,
            pick_samples: 200,
            quadrature_points: 200,
            prop3_sizes: vec![16, 32, 64],
            q_slack: 0.5,
            tolerance: 1e-8,
        }
    }
}

/// One line of the flat report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance rule, empty for informational rows.
    pub threshold: String,
    pub pass: bool,
    /// Hard rows decide the exit status.
    pub hard: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lambda_t1: f64,
    pub c_u: BTreeMap<String, f64>,
    pub t3: T3Result,
    pub chain: ChainResult,
    pub sign_residual: f64,
    pub f_abs_d_residual: f64,
    pub commutator_norms: BTreeMap<String, f64>,
    pub prop1: Prop1Result,
    pub prop1_sandwich_margin: f64,
    pub prop3: Prop3Evidence,
    pub rotfeld: TrialCounts,
    pub loewner: LoewnerReport,
    pub eq6: Vec<Eq6Sample>,
    pub checks: Vec<CheckRow>,
    pub all_hard_pass: bool,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.checks.iter().filter(|c| c.hard && !c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// `name,value,threshold,pass` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,threshold,pass\n");
        for c in &self.checks {
            out.push_str(&format!("{},{},{},{}\n", c.name, fmt_num(c.value), c.threshold, c.pass));
        }
        out
    }
}

/// Seventeen significant digits; `nan`/`inf` spelled out.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

struct Rows(Vec<CheckRow>);

impl Rows {
    fn push(&mut self, name: impl Into<String>, value: f64, threshold: impl Into<String>, pass: bool, hard: bool) {
        self.0.push(CheckRow { name: name.into(), value, threshold: threshold.into(), pass, hard });
    }
}

/// Runs every check on a lifted triple against its module.
pub fn verify_triple(m: &FredholmModule, t: &SpectralTriple, cfg: &VerifyConfig) -> Result<VerificationReport> {
    if t.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: t.dim() });
    }
    let tol = cfg.tolerance;
    let mut rows = Rows(Vec::new());
    let fm = m.f();

    let f_mismatch = t.f.sub(fm)?.max_abs();
    rows.push("F_consistency", f_mismatch, format!("<= {tol:e}"), f_mismatch <= tol, true);

    let d_asym = t.d.removed_asymmetry();
    rows.push("D_hermiticity", d_asym, format!("<= {tol:e}"), d_asym <= tol, true);

    // (D1)
    let sign_residual = hermitian_norm(&spectral_sign(&t.d)?.sub(fm)?)?;
    rows.push("D1_sign_residual", sign_residual, format!("<= {tol:e}"), sign_residual <= tol, true);
    let f_abs_d = crate::operator::commutator(fm, &t.abs_d)?.max_abs();
    rows.push("F_absD_commutator", f_abs_d, format!("<= {tol:e}"), f_abs_d <= tol, true);

    // (T1)
    let theta1 = crate::operator::HermitianOperator::symmetrize(t.p1.matmul(&t.theta)?.matmul(&t.p1)?);
    let lambda_t1 = check_t1(&theta1, &t.g).unwrap_or(0.0);
    rows.push("T1_lambda", lambda_t1, "> 0", lambda_t1 > 0.0, true);

    // (T2)
    let mut c_u = BTreeMap::new();
    let root = crate::operator::eigh(&t.theta)?.map(|v| v.max(0.0).sqrt());
    for (label, u) in m.unitaries() {
        let c = sandwich_constant(&root, &t.theta, u, label).unwrap_or(f64::INFINITY);
        rows.push(format!("T2_C_{label}"), c, format!("< {BISECTION_CEILING:e}"), c.is_finite(), true);
        c_u.insert(label.clone(), c);
    }

    // (T3)
    let p = t.provenance.p_used;
    let r = m.group().growth_order() as f64;
    let t3 = check_t3(&t.theta, p, r, cfg.q_slack)?;
    rows.push("T3_implied_order", t3.fit.implied_order, format!("<= {}", fmt_num(t3.q / 2.0)), t3.verdict, true);

    // singular-value chain at exponent q/2
    let chain = check_singular_chain(&theta1, &t.g, m.group(), t.provenance.ball_radius, t3.q / 2.0, r, 1e-10)?;
    rows.push("chain_margin", chain.min_relative_margin, ">= -1e-10 (relative)", chain.holds, true);
    rows.push("chain_constant", chain.constant.unwrap_or(f64::NAN), "", true, false);

    // (D2)
    let norms = commutator_norms(&t.d, m)?;
    for (label, v) in &norms {
        rows.push(format!("D2_commutator_norm_{label}"), *v, "finite", v.is_finite(), true);
    }

    // Proposition 1
    let prop1 = check_prop1(&t.d, &t.abs_d, fm, m.unitaries(), cfg.quadrature_points)?;
    rows.push("prop1_sandwich_margin", prop1.min_margin, format!(">= -{tol:e}"), prop1.min_margin >= -tol, true);
    rows.push("prop1_integral_residual", prop1.integral_residual, "<= 1e-6", prop1.integral_residual <= 1e-6, true);
    rows.push(
        "prop1_decay_ratio",
        prop1.max_decay_ratio,
        "<= 1 + 1e-8",
        prop1.max_decay_ratio <= 1.0 + tol,
        true,
    );

    // Proposition 3 (evidence)
    let prop3 = check_prop3(&t.abs_d, m, &t.g, &cfg.prop3_sizes)?;
    for g in &prop3.generators {
        rows.push(format!("prop3_C_{}", g.generator), g.c_u, "finite", g.c_u.is_finite(), false);
        rows.push(format!("prop3_absD_commutator_{}", g.generator), g.commutator_norm, "", true, false);
        rows.push(format!("prop3_F_commutator_absD_{}", g.generator), g.f_commutator_t_norm, "", true, false);
    }
    rows.push("prop3_lambda", prop3.lambda, "> 0", prop3.lambda > 0.0, false);
    rows.push("prop3_polynomial_bounded", prop3.polynomial_bounded as u8 as f64, "ratio <= 1.5", prop3.polynomial_bounded, false);
    rows.push(
        "prop3_exponential_unbounded",
        prop3.exponential_unbounded as u8 as f64,
        "growth > 10x",
        prop3.exponential_unbounded,
        false,
    );

    // scalar and randomized suites
    let finv = |x: f64| f_inv(x).unwrap_or(f64::NAN);
    let rotfeld = check_rotfeld(
        cfg.rotfeld_trials,
        cfg.rotfeld_dim,
        &finv,
        (1e-3 * ROTFELD_SPECTRUM_MAX, ROTFELD_SPECTRUM_MAX),
        cfg.seed,
        1e-10,
    )?;
    rows.push("rotfeld_failures", rotfeld.failures.len() as f64, "== 0", rotfeld.all_pass(), true);
    let loewner = check_loewner(cfg.loewner_trials, cfg.loewner_dim, cfg.pick_samples, cfg.seed ^ 0x10e3, 1e-10)?;
    rows.push(
        "loewner_failures",
        loewner.monotonicity.failures.len() as f64,
        "== 0",
        loewner.monotonicity.all_pass(),
        true,
    );
    rows.push("pick_min_imag", loewner.pick.min_imag, ">= -1e-12", loewner.pick.min_imag >= -1e-12, true);
    let eq6 = check_eq6(&EQ6_SAMPLES)?;
    for s in &eq6 {
        rows.push(format!("eq6_ratio_{:e}", s.t), s.ratio, "", true, false);
    }
    let inc = eq6_increasing(&eq6);
    rows.push("eq6_increasing", inc as u8 as f64, "strictly increasing", inc, true);

    let all_hard_pass = rows.0.iter().all(|r| !r.hard || r.pass);
    Ok(VerificationReport {
        lambda_t1,
        c_u,
        t3,
        chain,
        sign_residual,
        f_abs_d_residual: f_abs_d,
        commutator_norms: norms.into_iter().collect(),
        prop1_sandwich_margin: prop1.min_margin,
        prop1,
        prop3,
        rotfeld,
        loewner,
        eq6,
        checks: rows.0,
        all_hard_pass,
    })
}
