//! The `build → lift → verify` file pipeline of the command-line tool,
//! driven from library calls: module and triple files, CSV and JSON reports.
//!
//!     cargo run --release --example file_pipeline -- /tmp/run

use spectral_lift::interchange::{load_module, load_triple, save_module, save_triple};
use spectral_lift::lift::{build_triple, LiftConfig};
use spectral_lift::module::build_torus_module;
use spectral_lift::verify::{verify_triple, VerifyConfig};
use std::path::PathBuf;

fn main() -> spectral_lift::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().display().to_string()));
    std::fs::create_dir_all(&dir)?;
    let (module_path, triple_path) = (dir.join("torus2-4.module.json"), dir.join("torus2-4.triple.json"));

    save_module(&module_path, &build_torus_module(2, 4)?)?;
    let m = load_module(&module_path)?;
    save_triple(&triple_path, &build_triple(&m, &LiftConfig::default())?)?;
    let t = load_triple(&triple_path)?;

    let report = verify_triple(&m, &t, &VerifyConfig { seed: 7, ..VerifyConfig::default() })?;
    std::fs::write(dir.join("report.csv"), report.to_csv())?;
    std::fs::write(dir.join("report.json"), report.to_json()?)?;
    println!("lambda {:.6}  C_u {:?}", report.lambda_t1, report.c_u);
    println!("chain margin {:.4}  sandwich margin {:.3e}", report.chain.min_relative_margin, report.prop1_sandwich_margin);
    println!("{} checks, all hard checks pass: {}; reports in {}", report.checks.len(), report.all_hard_pass, dir.display());
    Ok(())
}
