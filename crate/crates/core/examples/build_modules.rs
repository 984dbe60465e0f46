//! Build the example Fredholm modules, inspect their axioms and summability,
//! and write them in the interchange format.
//!
//!     cargo run --example build_modules -- /tmp/modules

use spectral_lift::interchange::{load_module, save_module};
use spectral_lift::module::{build_circle_module, build_torus_module, summability_report, validate_axioms};
use std::path::PathBuf;

fn main() -> spectral_lift::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().display().to_string()));
    std::fs::create_dir_all(&dir)?;
    for (name, m) in [("circle-16", build_circle_module(16)?), ("torus2-4", build_torus_module(2, 4)?)] {
        let res = validate_axioms(&m)?;
        let sum = summability_report(&m)?;
        println!("{name}: dim {}, max axiom residual {:.1e}, declared p {:.4}", m.dim(), res.max(), sum.declared_p);
        for g in &sum.generators {
            let order = g.fit.as_ref().map(|f| f.implied_order).unwrap_or(f64::NAN);
            println!("    {}: |[F,u]| = {:.4}, fitted order {order:.4}, weak stat {:.4}", g.label, g.operator_norm, g.weak_stat);
        }
        let path = dir.join(format!("{name}.json"));
        save_module(&path, &m)?;
        let back = load_module(&path)?;
        assert_eq!(back.f().data(), m.f().data());
        println!("    wrote {}", path.display());
    }
    Ok(())
}
