//! The scalar and randomized inequality suites behind the lift: Rotfel'd
//! submajorization, Löwner monotonicity, Pick samples and the log ratio.
//!
//!     cargo run --release --example inequality_suites -- 7

use spectral_lift::lift::f_inv;
use spectral_lift::verify::{check_eq6, check_loewner, check_rotfeld, eq6_increasing, ROTFELD_SPECTRUM_MAX};

fn main() -> spectral_lift::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0x5eed);
    let phi = |t: f64| f_inv(t).unwrap_or(f64::NAN);

    let r = check_rotfeld(100, 8, &phi, (1e-3 * ROTFELD_SPECTRUM_MAX, ROTFELD_SPECTRUM_MAX), seed, 1e-10)?;
    println!("Rotfel'd, concave range: {}/{} pass, min slack {:.3e}", r.passes, r.trials, r.min_slack);
    // past 0.095 the inverse turns convex and the inequality may fail
    let r = check_rotfeld(100, 8, &phi, (0.2, 0.45), seed, 1e-10)?;
    println!("Rotfel'd, convex range:  {}/{} pass (expected failures)", r.passes, r.trials);

    let l = check_loewner(100, 6, 200, seed, 1e-10)?;
    println!(
        "Loewner: {}/{} monotone; Pick min Im {:.3e} at {:?}",
        l.monotonicity.passes, l.monotonicity.trials, l.pick.min_imag, l.pick.argmin
    );

    let s = check_eq6(&[1e-3, 1e-6, 1e-9, 1e-12])?;
    for x in &s {
        println!("f_inv(t) (ln t)^2 at t = {:e}: {:.6}", x.t, x.ratio);
    }
    println!("increasing: {}", eq6_increasing(&s));
    Ok(())
}
