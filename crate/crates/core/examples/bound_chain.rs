// The four-term chain for several functions, plus its Jensen special case.

use sherman_bounds::bounds::{jensen_strong, lah_ribaric_strong, CHAIN_SLACK};
use sherman_bounds::{full_chain, named_function, Interval, Modulus, StochasticKind, StochasticMatrix};
use sherman_bounds::{WeightedPair, WeightedVector};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let a = StochasticMatrix::new(
        vec![vec![0.6, 0.4, 0.0], vec![0.1, 0.2, 0.7], vec![0.0, 0.5, 0.5]],
        StochasticKind::Row,
    )?;
    let pair = WeightedPair::generate(vec![0.2, 2.5, 1.1], vec![0.2, 0.5, 0.3], a)?;

    for (name, lo, hi) in [("square", 0.1, 3.0), ("xlogx", 0.1, 3.0), ("exp", 0.0, 3.0), ("pow:4", 0.1, 3.0)] {
        let spec = named_function(name, Interval::new(lo, hi)?)?;
        let chain = full_chain(&pair, &spec, Modulus::Auto)?;
        println!(
            "{name:>7} c={:.4}: {:.6} <= {:.6} <= {:.6} <= {:.6}  holds={}",
            chain.modulus,
            chain.lhs,
            chain.strong_bound,
            chain.plain_bound,
            chain.converse_bound,
            chain.holds(CHAIN_SLACK)
        );
    }

    // m = 1, b = (1): Sherman collapses to Jensen
    let x = WeightedVector::new(vec![0.5, 1.5, 2.5], vec![0.2, 0.5, 0.3])?;
    let spec = named_function("xlogx", Interval::new(0.5, 2.5)?)?;
    let c = 1.0 / (2.0 * 2.5);
    let jensen = jensen_strong(&x, &spec, c)?;
    let lr = lah_ribaric_strong(&x, &spec, c)?;
    println!(
        "Jensen: f(mean) = {:.6} <= {:.6};  Lah-Ribaric: {:.6} <= {:.6}",
        jensen.lhs, jensen.rhs, lr.lhs, lr.rhs
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
