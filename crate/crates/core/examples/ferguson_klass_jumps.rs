//! Draw truncated Ferguson–Klass series of a generalized gamma process and
//! compare the truncated total mass with its exact moments.
//!
//! cargo run --release --example ferguson_klass_jumps -- [gamma] [u]

use nggmix::process::{
    levy_tail_mass, sample_unfixed_jumps, total_mass_moment, truncation_level_for, TruncationPolicy,
};
use nggmix::NggParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> nggmix::Result<()> {
    let mut args = std::env::args().skip(1);
    let gamma: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.4);
    let u: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let p = NggParams::new(1.0, 1.0, gamma)?;

    let level = truncation_level_for(&TruncationPolicy::default(), &p, u)?;
    println!(
        "alpha = 1, kappa = 1, gamma = {gamma}, u = {u}: keep {} jumps (moment error {:.4}{})",
        level.jumps,
        level.index,
        if level.reached { "" } else { ", cap reached" }
    );

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let series = sample_unfixed_jumps(&p, u, level.jumps, &mut rng)?;
    println!("\nlargest jumps and their tail masses:");
    for (i, j) in series.jumps().iter().take(8).enumerate() {
        println!(
            "  J_{:<2} = {:.6e}   N(J) = {:.4}",
            i + 1,
            j,
            levy_tail_mass(*j, &p, u)
        );
    }

    let draws = 5000;
    let totals: Vec<f64> = (0..draws)
        .map(|_| sample_unfixed_jumps(&p, u, level.jumps, &mut rng).map(|s| s.total()))
        .collect::<nggmix::Result<_>>()?;
    let m1 = totals.iter().sum::<f64>() / draws as f64;
    let m2 = totals.iter().map(|t| t * t).sum::<f64>() / draws as f64;
    println!("\ntotal mass over {draws} series:");
    println!(
        "  E[T]   truncated {m1:.4}  exact {:.4}",
        total_mass_moment(1, &p, u)?
    );
    println!(
        "  E[T^2] truncated {m2:.4}  exact {:.4}",
        total_mass_moment(2, &p, u)?
    );
    Ok(())
}
