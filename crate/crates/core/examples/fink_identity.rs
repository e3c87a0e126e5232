// Fink's expansion at a point, the Sherman-difference identity of order n,
// and the higher-order bound when the kernel keeps one sign.

use sherman_bounds::fink::{fink_identity_check, higher_order_sherman_bound, sherman_difference_identity};
use sherman_bounds::{named_function, Interval, QuadratureConfig, WeightedPair, WeightedVector};
use sherman_bounds::convexity::estimate_strong_modulus;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let quad = QuadratureConfig::with_abs_tol(1e-11);
    let exp = named_function("exp", Interval::new(0.0, 1.0)?)?;
    for n in 1..=4 {
        let e = fink_identity_check(&exp, 0.4, n, &quad)?;
        println!(
            "n={n}: f(0.4) = {:.12}, mean {:+.6}, boundary {:+.6}, integral {:+.6}, residual {:.1e}",
            e.value, e.mean_term, e.boundary_sum, e.kernel_integral, e.residual
        );
    }

    // (0.5, 0.5) ≺ (0, 1) with unit weights
    let pair = WeightedPair::assume(
        WeightedVector::new(vec![0.0, 1.0], vec![1.0, 1.0])?,
        WeightedVector::new(vec![0.5, 0.5], vec![1.0, 1.0])?,
    );
    for n in 2..=4 {
        let r = sherman_difference_identity(&pair, &exp, n, &quad)?;
        println!(
            "order {n}: lhs {:.12} = boundary {:+.12} + integral {:+.12}  (kernel {:?}, residual {:.1e})",
            r.lhs, r.boundary_terms, r.integral_term, r.kernel_condition, r.residual
        );
    }

    let n = 4;
    let c = estimate_strong_modulus(&exp, n, 10_001)?.modulus;
    match higher_order_sherman_bound(&pair, &exp, n, c, &quad) {
        Ok(b) => println!(
            "order {n} bound with c = {c:.5}: corrected difference {:.6} vs boundary {:.6}, holds = {}",
            b.lhs_with_correction, b.rhs_boundary, b.holds
        ),
        Err(e) => println!("order {n} bound unavailable: {e}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
