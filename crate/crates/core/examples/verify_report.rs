//! Lift an example module and print the flat verification report.
//!
//!     cargo run --release --example verify_report -- torus2 6

use spectral_lift::lift::{build_triple, LiftConfig};
use spectral_lift::module::{build_circle_module, build_torus_module};
use spectral_lift::verify::{verify_triple, VerifyConfig};

fn main() -> spectral_lift::Result<()> {
    let mut args = std::env::args().skip(1);
    let example = args.next().unwrap_or_else(|| "circle".into());
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(32);
    let m = match example.as_str() {
        "torus2" => build_torus_module(2, n)?,
        _ => build_circle_module(n)?,
    };
    let t = build_triple(&m, &LiftConfig::default())?;
    let report = verify_triple(&m, &t, &VerifyConfig::default())?;
    print!("{}", report.to_csv());
    println!("all hard checks pass: {}", report.all_hard_pass);
    Ok(())
}
