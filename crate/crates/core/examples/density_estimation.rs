//! Posterior mean density of the acidity data with a 95% pointwise band,
//! under a semiparametric normal mixture driven by a normalized stable
//! process.
//!
//! cargo run --release --example density_estimation -- [iterations]

use nggmix::cli::parse_dataset;
use nggmix::model::KernelFamily;
use nggmix::posterior::{default_grid, density_estimate, trapezoid};
use nggmix::sampler::{run_chain, ModelKind, SamplerConfig};

fn main() -> nggmix::Result<()> {
    let nit: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3000);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/acidity.csv");
    let data = parse_dataset(std::path::Path::new(path))?;

    let mut cfg = SamplerConfig::for_data(&data, ModelKind::Semiparametric, KernelFamily::Normal)?;
    cfg.iterations = nit;
    cfg.burnin = nit / 10;
    cfg.seed = 1;
    let trace = run_chain(&data, &cfg)?;
    let n_comp = trace.n_components();
    println!(
        "{} kept iterations, mean number of components {:.2}, u acceptance {:.2}",
        trace.len(),
        n_comp.iter().sum::<f64>() / n_comp.len() as f64,
        trace.acceptance.u_rate()
    );

    let grid = default_grid(&data, &cfg.kernel, 60)?;
    let est = density_estimate(&trace, &grid, 0.95)?;
    println!(
        "integral of the mean density over the grid: {:.4}",
        trapezoid(&grid, &est.mean)
    );
    println!("\n     x     lower      mean     upper");
    for i in (0..grid.len()).step_by(3) {
        let bar = "#".repeat((est.mean[i] * 60.0).round() as usize);
        println!(
            "{:6.3}  {:8.4}  {:8.4}  {:8.4}  {bar}",
            grid[i], est.lower[i], est.mean[i], est.upper[i]
        );
    }
    Ok(())
}
