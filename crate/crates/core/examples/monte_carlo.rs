//! Reference sampler: Dirichlet draws of the chances, evaluated through I.
//! The result does not depend on the number of worker threads.

use bayesmi::mc::{mi_posterior_mc, tail_exponent_probe, McConfig};
use bayesmi::{moments, CountTable, PriorSpec};

fn main() -> bayesmi::Result<()> {
    let t = CountTable::parse_inline("40,10;20,80")?;
    let s = moments::summarize(&t, PriorSpec::none())?;
    let one = mi_posterior_mc(&t, &McConfig::new(1_000_000, 42).with_workers(1))?;
    let many = mi_posterior_mc(&t, &McConfig::new(1_000_000, 42).with_workers(4))?;
    assert_eq!(one, many);

    println!("            closed form      Monte Carlo (+- batch-means SE)");
    println!("mean        {:.6}         {:.6} +- {:.1e}", s.mean(), one.mean, one.mean_se);
    println!("variance    {:.4e}       {:.4e} +- {:.1e}", s.variance(), one.variance, one.variance_se);
    println!("skewness    {:.4}           {:.4} +- {:.1e}", s.skewness.unwrap(), one.skewness, one.skewness_se);
    println!("kurtosis    {:.4}           {:.4} +- {:.1e}", s.kurtosis.unwrap(), one.kurtosis, one.kurtosis_se);

    // Near zero the density of I behaves like I^((r-1)(s-1)/2 - 1).
    for text in ["10,10;10,10", "10,10,10;10,10,10;10,10,10"] {
        let probe = tail_exponent_probe(&CountTable::parse_inline(text)?, 2_000_000, 1)?;
        println!("{text}: small-I exponent {:.3} (expected {})", probe.exponent, probe.expected);
    }
    Ok(())
}
