//! Optimal partitions from the posterior of a two-component synthetic
//! sample, under the variation of information and Binder losses.
//!
//! cargo run --release --example clustering -- [iterations]

use nggmix::clustering::{minimize_loss_trace, posterior_similarity, GreedyConfig, Loss};
use nggmix::model::{KernelFamily, Observation};
use nggmix::sampler::{run_chain, ModelKind, SamplerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> nggmix::Result<()> {
    let nit: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3000);
    // 60 points around -2 followed by 60 around 2
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 0.7).unwrap();
    let data: Vec<Observation> = (0..120)
        .map(|i| {
            let centre = if i < 60 { -2.0 } else { 2.0 };
            Observation::exact(centre + noise.sample(&mut rng))
        })
        .collect::<nggmix::Result<_>>()?;

    let mut cfg =
        SamplerConfig::for_data(&data, ModelKind::FullyNonparametric, KernelFamily::Normal)?;
    cfg.iterations = nit;
    cfg.burnin = nit / 10;
    cfg.seed = rng.random();
    let trace = run_chain(&data, &cfg)?;

    let psm = posterior_similarity(&trace)?;
    println!(
        "co-clustering probability: same group {:.3}, across groups {:.3}",
        psm.get(0, 1),
        psm.get(0, 119)
    );
    for loss in [Loss::Vi, Loss::Binder] {
        let est = minimize_loss_trace(&trace, loss, &GreedyConfig::default())?;
        let p = &est.partition;
        let first = p.labels()[0];
        let agree = (0..120)
            .filter(|&i| (p.labels()[i] == first) == (i < 60))
            .count();
        println!(
            "{loss:?}: {} clusters with sizes {:?}, expected loss {:.4}, {agree}/120 points on the generating side",
            p.num_clusters(),
            p.sizes(),
            est.expected_loss
        );
    }
    Ok(())
}
