// Csiszár divergences from the kernel catalog, their certified two-sided
// bounds, and the aggregated form with a column-stochastic R.

use sherman_bounds::divergence::{
    aggregated_divergence_bounds, catalog, csiszar_divergence, divergence_bounds, kl_divergence, shannon_entropy,
};
use sherman_bounds::{DistributionPair, StochasticKind, StochasticMatrix};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let pair = DistributionPair::new(vec![0.1, 0.2, 0.3, 0.4], vec![0.25, 0.25, 0.25, 0.25])?;
    let interval = pair.ratio_interval()?;
    println!("ratios q/p lie in [{:.4}, {:.4}]", interval.lower(), interval.upper());
    println!("H(p) = {:.6} nats, KL(q||p) = {:.6}", shannon_entropy(pair.p())?, kl_divergence(&pair)?);

    for kernel in catalog(interval, 2.0)? {
        let value = csiszar_divergence(&pair, &kernel)?;
        match kernel.strong_modulus() {
            Some(c) => {
                let s = divergence_bounds(&pair, &kernel, c)?;
                println!(
                    "{:>12}: {:.6} <= {:.6} <= {:.6} <= {:.6}",
                    kernel.name(),
                    s.lower_ck,
                    s.lower_strong,
                    value,
                    s.upper_converse
                );
            }
            None => println!("{:>12}: {value:.6} (no strong modulus, bounds skipped)", kernel.name()),
        }
    }

    // merge the first two and last two cells
    let r = StochasticMatrix::new(
        vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]],
        StochasticKind::Column,
    )?;
    let kl = catalog(interval, 2.0)?.into_iter().next().expect("kl is first");
    let c = kl.strong_modulus().unwrap_or(0.0);
    let s = aggregated_divergence_bounds(&pair, &r, &kl, c)?;
    println!(
        "aggregated KL: {:.6} <= {:.6} <= {:.6} <= {:.6}",
        s.lower_ck, s.lower_strong, s.value, s.upper_converse
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
