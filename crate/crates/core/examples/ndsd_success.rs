//! Non-destructive discrimination success of three named instruments on Bell ensembles.

use ndsd::instruments::{
    bell_basis_instrument, bell_ensemble, local_z_instrument, ndsd_success, trivial_instrument,
};

fn main() -> ndsd::error::Result<()> {
    let four = bell_ensemble(&[0, 1, 2, 3])?;
    let pair = bell_ensemble(&[0, 2])?;

    let cases = [
        ("guess Φ0, do nothing", &four, trivial_instrument(&four, 0)?),
        ("Bell-basis measurement", &four, bell_basis_instrument(&four, "A", "B")?),
        ("local Z readout", &pair, local_z_instrument(&pair, "A", "B")?),
    ];
    for (name, ens, inst) in cases {
        let rep = ndsd_success(ens, &inst)?;
        println!(
            "{name:<24} k={}  ndsd={:.4}  conventional={:.4}  product form: {}",
            ens.k(),
            rep.ndsd,
            rep.conventional,
            inst.is_product_form()
        );
    }

    // Local Z discriminates {Φ0, Φ2} perfectly but leaves a product state behind.
    let rep = ndsd_success(&pair, &local_z_instrument(&pair, "A", "B")?)?;
    for d in rep.diagnostics.iter().filter(|d| d.probability > 0.0) {
        println!("  state {} branch {:<3} p={:.2} fidelity={:.2} guessed={}", d.state, d.label, d.probability, d.fidelity, d.guessed);
    }
    Ok(())
}
