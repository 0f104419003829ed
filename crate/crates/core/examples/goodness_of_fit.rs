//! Percentile-percentile and quantile-quantile checks of a fitted mixture
//! against the Turnbull estimate of censored data.
//!
//! cargo run --release --example goodness_of_fit -- [iterations]

use nggmix::cli::parse_dataset;
use nggmix::diagnostics::{cdf_overlay, gof_data, turnbull};
use nggmix::model::finite_bounds;
use nggmix::model::KernelFamily;
use nggmix::sampler::{run_chain, ModelKind, SamplerConfig};

fn main() -> nggmix::Result<()> {
    let nit: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3000);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/carbaryl_like.csv");
    let data = parse_dataset(std::path::Path::new(path))?;

    let est = turnbull(&data, 1e-10, 10_000)?;
    println!(
        "Turnbull: {} innermost intervals, {} EM iterations, converged {}",
        est.intervals.len(),
        est.iterations,
        est.converged
    );

    let mut cfg = SamplerConfig::for_data(
        &data,
        ModelKind::FullyNonparametric,
        KernelFamily::Lognormal,
    )?;
    cfg.iterations = nit;
    cfg.burnin = nit / 10;
    cfg.seed = 5;
    let trace = run_chain(&data, &cfg)?;

    let tables = gof_data(&trace, &data, 10)?;
    let worst_pp = tables
        .pp
        .iter()
        .map(|p| (p.empirical - p.model).abs())
        .fold(0.0, f64::max);
    println!(
        "{} PP points from {} iterations, largest |empirical - model| {:.3}",
        tables.pp.len(),
        tables.iterations_used,
        worst_pp
    );
    println!("\n    p  empirical      model");
    for q in tables.qq.iter().step_by((tables.qq.len() / 10).max(1)) {
        println!("{:.3}  {:9.3}  {:9.3}", q.p, q.empirical, q.model);
    }

    // concentrations span orders of magnitude, so the grid is geometric
    let bounds = finite_bounds(&data);
    let lo = bounds.iter().copied().fold(f64::INFINITY, f64::min) / 2.0;
    let hi = bounds.iter().copied().fold(0.0, f64::max) * 2.0;
    let grid: Vec<f64> = (0..12)
        .map(|i| lo * (hi / lo).powf(i as f64 / 11.0))
        .collect();
    println!("\n        x  Turnbull   model  (95% band)");
    for o in cdf_overlay(&trace, &data, &grid, 0.95)? {
        println!(
            "{:9.3}  {:8.3}  {:6.3}  ({:.3}, {:.3})",
            o.x, o.empirical, o.model, o.lower, o.upper
        );
    }
    Ok(())
}
