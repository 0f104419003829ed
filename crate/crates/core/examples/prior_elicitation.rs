//! Compare the prior number of clusters under a Dirichlet process and a
//! normalized stable process, and pick a stable discount that matches a
//! prior guess of the number of clusters.
//!
//! cargo run --release --example prior_elicitation -- [n] [expected clusters]

use nggmix::priors::{
    dirichlet_cluster_pmf, dirichlet_expected_clusters, prior_components_table, stable_cluster_pmf,
    stable_expected_clusters,
};

fn main() -> nggmix::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let target: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(10.0);

    println!("n = {n}");
    println!(
        "E[K] dirichlet(alpha = 1) = {:.6}",
        dirichlet_expected_clusters(n, 1.0)?
    );
    println!(
        "E[K] stable(gamma = 0.4)  = {:.6}",
        stable_expected_clusters(n, 0.4)?
    );

    println!("\n   k  dirichlet     stable");
    for row in prior_components_table(n, 1.0, 0.4)?.iter().take(15) {
        println!("{:4}  {:.6}  {:.6}", row.k, row.dirichlet, row.stable);
    }

    // E[K] grows with gamma, so bisection finds the matching discount
    let (mut lo, mut hi) = (1e-3, 0.99);
    if stable_expected_clusters(n, lo)? > target || stable_expected_clusters(n, hi)? < target {
        println!("\nno stable process on (0, 1) has E[K] = {target}");
        return Ok(());
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if stable_expected_clusters(n, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    let stable = stable_cluster_pmf(n, gamma)?;
    println!(
        "\nstable gamma = {gamma:.4} gives E[K] = {:.4}, entropy {:.3} nats",
        stable.expectation,
        stable.entropy()
    );

    let (mut lo, mut hi): (f64, f64) = (1e-3, 1e3);
    for _ in 0..80 {
        let mid = (lo * hi).sqrt();
        if dirichlet_expected_clusters(n, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dp = dirichlet_cluster_pmf(n, (lo * hi).sqrt())?;
    println!(
        "dirichlet alpha = {:.4} gives E[K] = {:.4}, entropy {:.3} nats",
        (lo * hi).sqrt(),
        dp.expectation,
        dp.entropy()
    );
    Ok(())
}
