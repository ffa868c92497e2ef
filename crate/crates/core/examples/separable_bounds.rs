//! Compares the separable bounds with sampled and optimized product instruments.
//!
//! `cargo run --release --example separable_bounds -- [samples] [restarts]`

use ndsd::instruments::{
    bell_ensemble, optimize_separable, sample_bounds, theorem1_bound, Adaptivity, SearchConfig,
};

fn main() -> ndsd::error::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let samples = args.next().unwrap_or(2000);
    let restarts = args.next().unwrap_or(20);

    for k in 2..=4u8 {
        let ids: Vec<u8> = (0..k).collect();
        let ens = bell_ensemble(&ids)?;
        let bound = theorem1_bound(&ens)?;
        let product = sample_bounds(&ens, samples, 2, Adaptivity::Product, 1)?;
        let one_way = sample_bounds(&ens, samples, 2, Adaptivity::OneWay, 1)?;
        let config = SearchConfig { restarts, iterations: 500, seed: 1, ..SearchConfig::default() };
        let best = optimize_separable(&ens, &config)?;
        println!(
            "k={k}: bound {:.4} (1/k = {:.4})  sampled product {:.4}  sampled one-way {:.4}  optimized {:.4}",
            bound.clipped,
            1.0 / k as f64,
            product.max_ndsd,
            one_way.max_ndsd,
            best.probability
        );
    }
    Ok(())
}
