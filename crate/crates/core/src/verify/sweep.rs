//! Truncation sweeps: commutator norms, decay exponents and constants as
//! the module grows.

use super::checks::{check_t1, commutator_norms, sandwich_constant};
use super::fmt_num;
use crate::error::{Error, Result};
use crate::lift::{build_triple, LiftConfig, SpectralTriple};
use crate::module::FredholmModule;
use crate::operator::{eigh, fit_decay};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

/// Consecutive-size growth tolerated for a norm still called bounded.
pub const SWEEP_RATIO: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub m: usize,
    pub mu_theta: f64,
    pub mu_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub size: usize,
    pub dim: usize,
    pub commutator_norms: BTreeMap<String, f64>,
    #[serde(with = "crate::interchange::finite_or_null")]
    pub theta_implied_order: f64,
    pub lambda: f64,
    pub c_u: BTreeMap<String, f64>,
    pub kernel_dim: usize,
    /// Wall-clock seconds; only filled in on request since it breaks
    /// reproducibility of the output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime: Option<f64>,
    #[serde(skip)]
    pub decay: Vec<DecayRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Largest `‖[D,u]‖_N+1 / ‖[D,u]‖_N` over generators and consecutive sizes.
    pub max_ratio: f64,
    pub bounded: bool,
}

/// `μ_m(Θ)` against `μ_m(G)`, both descending.
pub fn decay_table(t: &SpectralTriple) -> Result<Vec<DecayRow>> {
    let desc = |h| -> Result<Vec<f64>> {
        let mut v: Vec<f64> = eigh(h)?.eigenvalues().into_iter().map(f64::abs).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        Ok(v)
    };
    let th = desc(&t.theta)?;
    let g = desc(&t.g)?;
    Ok(th.into_iter().zip(g).enumerate().map(|(m, (mu_theta, mu_g))| DecayRow { m, mu_theta, mu_g }).collect())
}

fn sweep_one(
    builder: &(dyn Fn(usize) -> Result<FredholmModule> + Sync),
    size: usize,
    cfg: &LiftConfig,
    timings: bool,
) -> Result<SweepRow> {
    let start = Instant::now();
    let m = builder(size)?;
    let t = build_triple(&m, cfg)?;
    let commutator_norms = commutator_norms(&t.d, &m)?.into_iter().collect();
    let decay = decay_table(&t)?;
    let mu: Vec<f64> = decay.iter().map(|r| r.mu_theta).collect();
    let theta_implied_order = fit_decay(&mu, 1e-14 * mu.first().copied().unwrap_or(0.0))?.implied_order;
    let theta1 = crate::operator::HermitianOperator::symmetrize(t.p1.matmul(&t.theta)?.matmul(&t.p1)?);
    let lambda = match check_t1(&theta1, &t.g) {
        Err(Error::NoPositiveLambda) => 0.0,
        r => r?,
    };
    let root = eigh(&t.theta)?.map(|v| v.max(0.0).sqrt());
    let mut c_u = BTreeMap::new();
    for (label, u) in m.unitaries() {
        let c = match sandwich_constant(&root, &t.theta, u, label) {
            Err(Error::SandwichUnbounded { .. }) => f64::INFINITY,
            r => r?,
        };
        c_u.insert(label.clone(), c);
    }
    Ok(SweepRow {
        size,
        dim: m.dim(),
        commutator_norms,
        theta_implied_order,
        lambda,
        c_u,
        kernel_dim: t.provenance.kernel_dim,
        runtime: timings.then(|| start.elapsed().as_secs_f64()),
        decay,
    })
}

/// Builds, lifts and measures the module at every size. Sizes run on
/// separate threads; rows come back in input order.
pub fn commutator_norm_sweep(
    builder: &(dyn Fn(usize) -> Result<FredholmModule> + Sync),
    sizes: &[usize],
    cfg: &LiftConfig,
    timings: bool,
) -> Result<SweepTable> {
    if sizes.len() < 2 {
        return Err(Error::InvalidArgument(format!("a sweep needs at least two sizes, got {}", sizes.len())));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("sweep sizes must be strictly ascending".into()));
    }
    let rows: Vec<Result<SweepRow>> = std::thread::scope(|s| {
        let handles: Vec<_> = sizes.iter().map(|&n| s.spawn(move || sweep_one(builder, n, cfg, timings))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut max_ratio: f64 = 0.0;
    for w in rows.windows(2) {
        for (label, &next) in &w[1].commutator_norms {
            let prev = w[0].commutator_norms[label];
            let ratio = if prev > 0.0 {
                next / prev
            } else if next > 0.0 {
                f64::INFINITY
            } else {
                1.0
            };
            max_ratio = max_ratio.max(ratio);
        }
    }
    Ok(SweepTable { bounded: max_ratio <= SWEEP_RATIO, max_ratio, rows })
}

impl SweepTable {
    /// One row per size; generator columns in label order.
    pub fn to_csv(&self) -> String {
        let labels: Vec<&String> = self.rows.first().map(|r| r.commutator_norms.keys().collect()).unwrap_or_default();
        let timed = self.rows.iter().any(|r| r.runtime.is_some());
        let mut head = vec!["size".to_string(), "dim".into()];
        head.extend(labels.iter().map(|l| format!("commutator_norm_{l}")));
        head.push("theta_implied_order".into());
        head.push("lambda".into());
        head.extend(labels.iter().map(|l| format!("c_{l}")));
        head.push("kernel_dim".into());
        if timed {
            head.push("runtime_s".into());
        }
        let mut out = head.join(",") + "\n";
        for r in &self.rows {
            let mut cells = vec![r.size.to_string(), r.dim.to_string()];
            cells.extend(labels.iter().map(|l| fmt_num(r.commutator_norms[*l])));
            cells.push(fmt_num(r.theta_implied_order));
            cells.push(fmt_num(r.lambda));
            cells.extend(labels.iter().map(|l| fmt_num(r.c_u[*l])));
            cells.push(r.kernel_dim.to_string());
            if timed {
                cells.push(r.runtime.map(fmt_num).unwrap_or_default());
            }
            out += &(cells.join(",") + "\n");
        }
        out
    }
}

/// `m,mu_theta,mu_g` with a header row.
pub fn decay_csv(rows: &[DecayRow]) -> String {
    let mut out = String::from("m,mu_theta,mu_g\n");
    for r in rows {
        out += &format!("{},{},{}\n", r.m, fmt_num(r.mu_theta), fmt_num(r.mu_g));
    }
    out
}
