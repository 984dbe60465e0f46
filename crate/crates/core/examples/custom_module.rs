//! A user-defined module over Z: ℓ²([-N, N]) ⊗ C² with the shift acting on
//! the first factor and `F(n) = (nσ₁ + σ₃)/√(n² + 1)`, a smooth interpolation
//! between the two spinor directions. Lifted and verified like the built-in
//! examples.
//!
//!     cargo run --release --example custom_module -- 24

use num_complex::Complex64;
use spectral_lift::group::GroupSpec;
use spectral_lift::lift::{build_triple, LiftConfig};
use spectral_lift::module::{FredholmModule, AXIOM_TOL};
use spectral_lift::operator::{DenseOperator, HermitianOperator};
use spectral_lift::verify::{verify_triple, VerifyConfig};

fn main() -> spectral_lift::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(24);
    let sites = 2 * n + 1;
    let dim = 2 * sites;
    let c = |x: f64| Complex64::new(x, 0.0);

    let mut f = DenseOperator::zeros(dim);
    for s in 0..sites {
        let k = s as f64 - n as f64;
        let r = (k * k + 1.0).sqrt();
        f.set(2 * s, 2 * s, c(1.0 / r));
        f.set(2 * s + 1, 2 * s + 1, c(-1.0 / r));
        f.set(2 * s, 2 * s + 1, c(k / r));
        f.set(2 * s + 1, 2 * s, c(k / r));
    }
    let shift = DenseOperator::from_fn(dim, |i, j| {
        if i % 2 == j % 2 && i / 2 == (j / 2 + 1) % sites { c(1.0) } else { c(0.0) }
    });
    let group = GroupSpec::free_abelian(1)?;
    let label = group.generator_labels()[0].clone();
    // the wrap-around edge is not part of the model
    let interior = (0..dim).map(|i| (i / 2) % (sites - 1) != 0).collect();
    let m = FredholmModule::new(
        HermitianOperator::new(f)?,
        vec![(label, shift)],
        group,
        Some(interior),
        serde_json::json!({ "example": "smooth-spinor", "N": n }),
        AXIOM_TOL,
    )?;

    let t = build_triple(&m, &LiftConfig::default())?;
    let pv = &t.provenance;
    println!("dim {} p {:.3} K {} sigma {:.4} kernel dim {}", m.dim(), pv.p_used, pv.ball_radius, pv.sigma, pv.kernel_dim);
    let report = verify_triple(&m, &t, &VerifyConfig::default())?;
    for row in report.checks.iter().filter(|r| r.hard) {
        println!("{:<28} {:>14.6e} {}", row.name, row.value, if row.pass { "ok" } else { "FAIL" });
    }
    println!("all hard checks pass: {}", report.all_hard_pass);
    Ok(())
}
