//! Functional calculus, PSD comparison, Schatten data and the resolvent
//! integral for `T^{-1/2}` on a small Hermitian matrix.
//!
//!     cargo run --example operator_calculus

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_lift::operator::{
    apply_scalar_function, eigh, inverse_sqrt_by_integral, psd_order_leq, schatten_norm, singular_values,
    weak_schatten_stat,
};
use spectral_lift::verify::random_hermitian;

fn main() -> spectral_lift::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = random_hermitian(&mut rng, 6, 0.1, 9.0)?;
    let spec = eigh(&t)?;
    println!("spectrum {:?}", spec.eigenvalues());

    let root = apply_scalar_function(&t, f64::sqrt, (0.0, f64::INFINITY))?;
    println!("|sqrt(T)^2 - T| = {:.2e}", root.matmul(&root)?.sub(&t)?.max_abs());

    let exact = spec.map(|v| v.powf(-0.5));
    for points in [25, 50, 100, 200] {
        let q = inverse_sqrt_by_integral(&t, points)?;
        println!("quadrature with {points:>3} points: error {:.2e}", q.sub(&exact)?.max_abs());
    }

    let bigger = t.add(&root)?;
    let w = psd_order_leq(&t, &bigger, 1e-12)?;
    println!("T <= T + sqrt(T): {} (min eigenvalue of difference {:.3})", w.holds, w.min_eigenvalue);

    let sv = singular_values(&t)?;
    println!("singular values {sv:.3?}");
    println!("Schatten-1 {:.4}, Schatten-2 {:.4}, weak-1 statistic {:.4}", schatten_norm(&t, 1.0)?, schatten_norm(&t, 2.0)?, weak_schatten_stat(&t, 1.0)?);
    Ok(())
}
