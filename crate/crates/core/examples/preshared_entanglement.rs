//! Pre-shared ebits lift the separable bound: repreparation and teleportation.

use ndsd::instruments::{
    attach_preshared, bell_ensemble, ndsd_success, repreparation_instrument, teleportation_instrument,
    theorem1_bound, theorem2_bound,
};

fn main() -> ndsd::error::Result<()> {
    let pair = attach_preshared(&bell_ensemble(&[0, 2])?, 2)?;
    let rep = ndsd_success(&pair, &repreparation_instrument(&pair)?)?;
    println!(
        "Φ0 vs Φ2 with 1 ebit: repreparation succeeds with {:.4}, bound {:.4}",
        rep.ndsd,
        theorem1_bound(&pair)?.clipped
    );

    let four = attach_preshared(&bell_ensemble(&[0, 1, 2, 3])?, 4)?;
    let tele = teleportation_instrument(&four)?;
    let rep = ndsd_success(&four, &tele)?;
    println!("all four Bell states with 2 ebits: teleportation succeeds with {:.4} over {} branches", rep.ndsd, tele.len());

    println!("\nbound min(1, 2^c/k) on k states given c ebits:");
    for k in [2usize, 4, 8] {
        let row: Vec<String> = (0..=3).map(|c| format!("{:.3}", theorem2_bound(k, c))).collect();
        println!("  k={k}: {}", row.join("  "));
    }
    Ok(())
}
