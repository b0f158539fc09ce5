//! The three attribute filters on a synthetic stream: F thresholds the
//! empirical index, FF keeps attributes that are probably informative, BF
//! drops only attributes that are probably uninformative.

use bayesmi::dataio::{generate_stream, StreamSpec};
use bayesmi::filters::{decide_all, FilterConfig, FilterKind};
use bayesmi::{PriorSpec, Verdict};

fn main() -> bayesmi::Result<()> {
    let ds = generate_stream(&StreamSpec {
        n: 150,
        seed: 5,
        ..StreamSpec::default()
    })?;
    let tables = (0..ds.attributes.len())
        .map(|a| ds.attribute_class_table(a))
        .collect::<bayesmi::Result<Vec<_>>>()?;
    println!("attributes 0, 1 and 2 carry class information; the rest are noise");
    for kind in [FilterKind::F, FilterKind::FF, FilterKind::BF] {
        let mut config = FilterConfig::new(kind);
        config.prior = PriorSpec::uniform();
        let decisions = decide_all(&tables, &config)?;
        let kept: Vec<usize> = decisions
            .iter()
            .filter(|d| d.verdict == Verdict::Include)
            .map(|d| d.attribute)
            .collect();
        println!("{kind:<2} keeps {kept:?}");
        for d in decisions.iter().take(4) {
            println!("     attribute {}: statistic {:.4}, E[I] {:.4}", d.attribute, d.statistic, d.mean);
        }
    }
    Ok(())
}
