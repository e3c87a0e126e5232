// Classical majorization with a constructed doubly stochastic witness, and
// a weighted pair generated from a row-stochastic matrix.

use sherman_bounds::majorization::{majorization_certificate, majorizes};
use sherman_bounds::{StochasticKind, StochasticMatrix, WeightedPair};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let x = [3.0, 2.0, 1.0];
    let y = [2.0, 2.0, 2.0];
    let cert = majorization_certificate(&x, &y, 1e-12)?;
    println!("(2,2,2) ≺ (3,2,1): {:?}", cert.relation);
    if let Some(p) = &cert.matrix {
        for row in p.entries() {
            println!("  {row:?}");
        }
        println!("  P x = {:?}", p.apply(&x)?);
    }

    let fails = majorizes(&[1.0, 1.0, 4.0], &[3.0, 3.0, 0.0], 1e-12)?;
    println!("(3,3,0) ≺ (1,1,4)? {:?}, first failing k = {:?}", fails.relation, fails.witness_k);

    // a = bA, y = xAᵀ
    let a = StochasticMatrix::new(
        vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5]],
        StochasticKind::Row,
    )?;
    let pair = WeightedPair::generate(vec![0.1, 0.9, 0.5], vec![0.3, 0.7], a)?;
    println!("x = {:?}, a = {:?}", pair.source().points(), pair.source().weights());
    println!("y = {:?}, b = {:?}", pair.target().points(), pair.target().weights());
    println!("verified: {:?}", pair.check());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
