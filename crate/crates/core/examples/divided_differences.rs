// Divided differences, including repeated nodes, and modulus certificates.

use sherman_bounds::convexity::{estimate_strong_modulus, is_n_strongly_convex, shift_to_convex};
use sherman_bounds::{divided_difference, named_function, Interval};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let unit = Interval::new(0.0, 1.0)?;
    let square = named_function("square", unit)?;
    let exp = named_function("exp", unit)?;

    // [x0, x1, x2; t²] = 1 for any three nodes
    println!("[0, 0.5, 1; t^2] = {}", divided_difference(&[0.0, 0.5, 1.0], &square)?);

    // repeated nodes fall back on derivatives
    let z = 0.3;
    let confluent = divided_difference(&[z, z, z], &exp)?;
    println!("[z, z, z; e^t]   = {confluent:.12}  (e^z/2 = {:.12})", z.exp() / 2.0);
    println!("[z, z; e^t]      = {:.12}", divided_difference(&[z, z], &exp)?);

    let cert = estimate_strong_modulus(&exp, 2, 10_001)?;
    println!(
        "e^t on [0,1]: certified modulus {:.6} ({:?}), exact e^0/2 = 0.5",
        cert.modulus, cert.verdict
    );

    let cube = named_function("cube", Interval::new(1.0, 2.0)?)?;
    let cert3 = estimate_strong_modulus(&cube, 3, 10_001)?;
    println!("t^3 on [1,2] is 3-strongly convex with c = {}", cert3.modulus);

    let sampled = is_n_strongly_convex(&exp, 2, cert.modulus, 2_000, 7)?;
    println!("sampling check at the certified modulus: {sampled:?}");

    // g = f - c t² is convex exactly when f is strongly convex with modulus c
    let g = shift_to_convex(&exp, 2, cert.modulus)?;
    let g_cert = estimate_strong_modulus(&g, 2, 10_001)?;
    println!("e^t - c t^2: min g''/2 = {:.3e}", g_cert.min_scaled_derivative);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
