//! Mutual information when some units only record one of the two variables.

use bayesmi::dataio::{generate, SyntheticSpec};
use bayesmi::mc::{incomplete_posterior_mc, McConfig};
use bayesmi::missing::{covariance_general, em_mle, mean_leading, variance_general};
use bayesmi::{moments, PriorSpec};

fn main() -> bayesmi::Result<()> {
    let pi = vec![0.30, 0.05, 0.05, 0.10, 0.30, 0.20];
    let spec = SyntheticSpec::new(2, 3, 400, pi, 3).with_missing(0.15, 0.25);
    let table = generate(&spec)?.to_table()?;
    println!("joint counts   {:?}", table.counts());
    println!("row-only units {:?}", table.row_missing());
    println!("col-only units {:?}", table.col_missing());

    let mle = em_mle(&table, 1e-12, 10_000)?;
    println!("EM converged in {} iterations, log-likelihood {:.4}", mle.iterations, mle.loglik_trace.last().unwrap());
    let cov = covariance_general(&table, &mle)?;
    let var = variance_general(&table, &mle, &cov)?;
    println!("leading order: E[I] ~ {:.5}, sd ~ {:.5}", mean_leading(&mle), var.sqrt());

    // Dropping the incomplete units wastes information.
    let complete = moments::summarize(&table.complete_part()?, PriorSpec::none())?;
    println!("complete units only: E[I] = {:.5}, sd = {:.5}", complete.mean(), complete.variance().sqrt());

    let sampled = incomplete_posterior_mc(&table, &McConfig::new(200_000, 9), 1_000)?;
    println!("Gibbs reference: E[I] = {:.5} +- {:.1e}, sd = {:.5}", sampled.mean, sampled.mean_se, sampled.variance.sqrt());
    Ok(())
}
