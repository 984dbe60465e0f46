//! Lift the circle module and compare against the closed form
//! `Θ(e_m) = f⁻¹(e^{-(1+|m+1|)} f(1/2))`, `|D| = 2Θ^{-1/2}`.
//!
//!     cargo run --example lift_circle -- 32

use spectral_lift::lift::{build_triple, f, f_inv, LiftConfig};
use spectral_lift::module::build_circle_module;

fn main() -> spectral_lift::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let m = build_circle_module(n)?;
    let t = build_triple(&m, &LiftConfig::default())?;
    let pv = &t.provenance;
    println!("sigma {} K {} p {} weight sum {:.6} tail {:.2e} kernel dim {}", pv.sigma, pv.ball_radius, pv.p_used, pv.weight_sum, pv.tail_bound, pv.kernel_dim);
    println!("{:>5} {:>14} {:>14} {:>12}", "mode", "theta", "closed form", "|D|");
    let mut worst: f64 = 0.0;
    for i in 0..m.dim() {
        if !m.interior()[i] {
            continue;
        }
        let mode = i as i64 - n as i64;
        let closed = f_inv((-(1.0 + (mode + 1).abs() as f64)).exp() * f(0.5))?;
        let th = t.theta.get(i, i).re;
        worst = worst.max((th / closed - 1.0).abs());
        if (mode + 1).abs() <= 4 || mode.abs() == n as i64 - 1 {
            println!("{mode:>5} {th:>14.10} {closed:>14.10} {:>12.6}", t.abs_d.get(i, i).re);
        }
    }
    println!("largest relative deviation on interior modes: {worst:.2e}");
    Ok(())
}
