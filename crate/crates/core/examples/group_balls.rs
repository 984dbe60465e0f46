//! Balls, growth and averaging weights for the built-in groups.
//!
//!     cargo run --example group_balls

use spectral_lift::group::{fit_growth_order, weight_tail_bound, BallGroup, GroupSpec};

fn main() -> spectral_lift::Result<()> {
    for (name, g) in [
        ("Z", GroupSpec::free_abelian(1)?),
        ("Z^2", GroupSpec::free_abelian(2)?),
        ("Z/7", GroupSpec::cyclic(7)?),
    ] {
        let sizes: Vec<u128> = (0..=6).map(|k| g.ball_size(k)).collect();
        let fit = fit_growth_order(&g, 10)?;
        println!("{name:>4}: |B_0..6| = {sizes:?}  fitted growth order {:.3}", fit.fitted_order);
        for k in [2, 6, 12] {
            let inside: f64 = g.ball(k)?.iter().map(|x| g.weight(x)).sum::<spectral_lift::Result<f64>>()?;
            println!("      K = {k:>2}: weight in ball {inside:.9}, tail bound {:.3e}", weight_tail_bound(&g, k, k + 32)?);
        }
    }
    // canonical order: by length, then lexicographic
    let z2 = GroupSpec::free_abelian(2)?;
    let b1: Vec<_> = z2.ball(1)?.into_iter().map(|e| e.exponents).collect();
    println!("B_1(Z^2) = {b1:?}");
    Ok(())
}
