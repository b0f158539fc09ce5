//! Moment-matched Gaussian, Gamma and Beta approximations of p(I | n),
//! compared with the Monte Carlo posterior by sup-distance of the cdfs.

use bayesmi::distfit::{fit, Family};
use bayesmi::mc::{mi_posterior_mc, McConfig};
use bayesmi::{moments, CountTable, PriorSpec};

fn main() -> bayesmi::Result<()> {
    for text in ["40,10;20,80", "20,5;10,40", "8,2;4,16"] {
        let t = CountTable::parse_inline(text)?;
        let s = moments::summarize(&t, PriorSpec::none())?;
        let reference = mi_posterior_mc(&t, &McConfig::new(200_000, 7))?;
        println!("{text}: mean {:.4}, sd {:.4}", s.mean(), s.variance().sqrt());
        for family in Family::ALL {
            let d = fit(s.mean(), s.variance(), s.i_max, family)?;
            let ks = reference.ks_distance(|x| d.cdf(x));
            let (lo, hi) = (d.quantile(0.05)?, d.quantile(0.95)?);
            println!("  {family:<8} 90% interval [{lo:.4}, {hi:.4}]  sup|F - F_mc| = {ks:.4}");
        }
    }
    Ok(())
}
