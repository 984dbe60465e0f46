//! Commutator norms, decay exponents and constants across truncation sizes.
//!
//!     cargo run --release --example norm_sweep -- torus2 6,10,14

use spectral_lift::lift::LiftConfig;
use spectral_lift::module::{build_circle_module, build_torus_module};
use spectral_lift::verify::commutator_norm_sweep;

fn main() -> spectral_lift::Result<()> {
    let mut args = std::env::args().skip(1);
    let example = args.next().unwrap_or_else(|| "circle".into());
    let sizes: Vec<usize> = args
        .next()
        .unwrap_or_else(|| "16,32,64".into())
        .split(',')
        .map(|s| s.trim().parse().expect("sizes are integers"))
        .collect();
    let table = match example.as_str() {
        "torus2" => commutator_norm_sweep(&|n| build_torus_module(2, n), &sizes, &LiftConfig::default(), true)?,
        _ => commutator_norm_sweep(&build_circle_module, &sizes, &LiftConfig::default(), true)?,
    };
    print!("{}", table.to_csv());
    println!("max consecutive ratio {:.4}, bounded: {}", table.max_ratio, table.bounded);
    Ok(())
}
