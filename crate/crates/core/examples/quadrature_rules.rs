// Gauss–Jacobi rules for integrands with an algebraic singularity at 0,
// compared with the adaptive panel integrator used as a reference.

use fpou::quadrature::{adaptive_singular, gauss_jacobi, gauss_legendre, SingularEnd};

pub fn run_example() -> fpou::Result<()> {
    // ∫₀¹ x^{-0.3} cos x dx: the weight x^{-0.3} is absorbed by the rule.
    let beta = -0.3;
    let reference = adaptive_singular(|x| x.powf(beta) * x.cos(), 0.0, 1.0, SingularEnd::Left, 1e-14)?;
    println!("reference (adaptive)      {reference:.15}");
    for order in [2, 4, 8, 16] {
        let gj = gauss_jacobi(order, beta)?.integrate(f64::cos);
        let gl = gauss_legendre(order)?.integrate(|x| x.powf(beta) * x.cos());
        println!(
            "order {order:>2}: jacobi err {:.2e}   legendre err {:.2e}",
            (gj - reference).abs(),
            (gl - reference).abs()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fpou::Result<()> {
    run_example()
}
