//! Compare a semiparametric double exponential mixture with a fully
//! nonparametric normal mixture on the acidity data through conditional
//! predictive ordinates.
//!
//! cargo run --release --example model_comparison_cpo -- [iterations]

use nggmix::cli::parse_dataset;
use nggmix::model::KernelFamily;
use nggmix::posterior::cpo;
use nggmix::sampler::{run_chain, ModelKind, SamplerConfig};

fn main() -> nggmix::Result<()> {
    let nit: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3000);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/acidity.csv");
    let data = parse_dataset(std::path::Path::new(path))?;

    println!(
        "{:<44} {:>9} {:>11} {:>8}",
        "model", "mean CPO", "median CPO", "LPML"
    );
    for (name, model, family) in [
        (
            "fully nonparametric normal",
            ModelKind::FullyNonparametric,
            KernelFamily::Normal,
        ),
        (
            "semiparametric double exponential",
            ModelKind::Semiparametric,
            KernelFamily::DoubleExponential,
        ),
    ] {
        let mut cfg = SamplerConfig::for_data(&data, model, family)?;
        cfg.iterations = nit;
        cfg.burnin = nit / 10;
        cfg.seed = 0;
        let trace = run_chain(&data, &cfg)?;
        let c = cpo(&trace, &data)?;
        println!(
            "{name:<44} {:>9.3} {:>11.3} {:>8.2}",
            c.mean(),
            c.median(),
            c.log_pseudo_marginal()
        );
    }
    Ok(())
}
