//! Four chains from jittered starting points on the acidity data, checked
//! with the potential scale reduction factor of the monitored summaries.
//!
//! cargo run --release --example convergence_diagnostics -- [iterations]

use nggmix::cli::parse_dataset;
use nggmix::diagnostics::{psrf, ScalarTraceSet};
use nggmix::model::KernelFamily;
use nggmix::sampler::{run_chains, ModelKind, SamplerConfig};

fn main() -> nggmix::Result<()> {
    let nit: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4000);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/acidity.csv");
    let data = parse_dataset(std::path::Path::new(path))?;

    let mut cfg = SamplerConfig::for_data(&data, ModelKind::Semiparametric, KernelFamily::Normal)?;
    cfg.iterations = nit;
    cfg.burnin = nit / 10;
    cfg.seed = 1;
    let traces = run_chains(&data, &cfg, 4)?
        .into_iter()
        .collect::<nggmix::Result<Vec<_>>>()?;

    let report = psrf(&ScalarTraceSet::from_traces(&traces)?)?;
    println!(
        "Potential scale reduction factors ({} chains, {} kept iterations each):",
        report.chains, report.iterations
    );
    println!("{:>16}  point  upper", "");
    for (name, v) in &report.univariate {
        println!("{:>16}  {:.3}  {:.3}", name.name(), v.point, v.upper);
    }
    match report.multivariate {
        Some(m) => println!("multivariate: {m:.3}"),
        None => println!("multivariate: not available"),
    }
    Ok(())
}
