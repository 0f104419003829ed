//! Species sensitivity distribution from censored toxicity data: fit a
//! lognormal mixture to left-, right- and interval-censored concentrations
//! and report the hazardous concentration for 5% of species (HC5).
//!
//! cargo run --release --example censored_ssd -- [iterations]

use nggmix::cli::parse_dataset;
use nggmix::model::{CensoringKind, KernelFamily};
use nggmix::posterior::quantile_estimate;
use nggmix::sampler::{run_chain, ModelKind, SamplerConfig};

fn main() -> nggmix::Result<()> {
    let nit: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3000);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/carbaryl_like.csv");
    let data = parse_dataset(std::path::Path::new(path))?;
    for kind in [
        CensoringKind::Exact,
        CensoringKind::LeftCensored,
        CensoringKind::RightCensored,
        CensoringKind::Interval,
    ] {
        let count = data.iter().filter(|o| o.kind() == kind).count();
        println!("{kind:?}: {count}");
    }

    let mut cfg = SamplerConfig::for_data(
        &data,
        ModelKind::FullyNonparametric,
        KernelFamily::Lognormal,
    )?;
    cfg.iterations = nit;
    cfg.burnin = nit / 10;
    cfg.seed = 3;
    let trace = run_chain(&data, &cfg)?;

    for p in [0.05, 0.5] {
        let q = quantile_estimate(&trace, p, 0.95)?;
        println!(
            "HC{:<2} = {:.3}  (95% credible interval {:.3} to {:.3})",
            (100.0 * p).round(),
            q.point,
            q.lower,
            q.upper
        );
    }
    Ok(())
}
