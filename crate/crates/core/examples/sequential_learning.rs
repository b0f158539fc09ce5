//! Incremental naive Bayes where each prediction uses only the attributes a
//! filter accepts given the instances seen so far.

use bayesmi::dataio::{generate_stream, StreamSpec};
use bayesmi::filters::{FilterConfig, FilterKind};
use bayesmi::nb::{paired_t_test, run_many};

fn main() -> bayesmi::Result<()> {
    let ds = generate_stream(&StreamSpec {
        seed: 11,
        missing_rate: 0.05,
        ..StreamSpec::default()
    })?;
    let configs = [FilterKind::F, FilterKind::FF, FilterKind::BF].map(FilterConfig::new);
    let runs = run_many(&ds, &configs)?;
    for run in &runs {
        println!(
            "{:<2} final accuracy {:.3}, mean attributes used {:.2}",
            run.kind,
            run.final_accuracy(),
            run.mean_attributes
        );
    }
    let t = paired_t_test(&runs[1].correct, &runs[0].correct)?;
    println!("FF vs F: t = {:.3}, p = {:.3}, significant: {}", t.t, t.p_value, t.significant);
    for k in [10, 50, 100, 250, 500] {
        println!("after {k:>3}: F {:.3}  FF {:.3}  BF {:.3}", runs[0].accuracy[k - 1], runs[1].accuracy[k - 1], runs[2].accuracy[k - 1]);
    }
    Ok(())
}
