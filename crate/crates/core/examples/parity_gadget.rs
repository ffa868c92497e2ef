//! Measures a two-party Pauli parity with one ebit and compares it with the ideal projection.

use ndsd::linalg::{fidelity_pure, StateVector};
use ndsd::protocol::{append_resource, parity_measure, project_parity};
use ndsd::states::{multi_bell, pair_labels, PauliString};

fn main() -> ndsd::error::Result<()> {
    let pairs = pair_labels(2);
    let register: Vec<String> = pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    let side_a: Vec<String> = pairs.iter().map(|(a, _)| a.clone()).collect();

    // Φ⁰⁰ and Φ²⁰ differ only in the ZZ sign of the first pair.
    let a = multi_bell(&[0, 0], &pairs)?;
    let b = multi_bell(&[2, 0], &pairs)?;
    let amps = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x + y * 0.6).collect();
    let psi = StateVector::unnormalized(amps, register.clone())?.normalized();

    let zz = PauliString::from_sparse(4, &[(0, 'Z'), (1, 'Z')])?;
    let with_pair = append_resource(&psi, "A'", "B'")?;
    let gadget = parity_measure(&with_pair, &zz, &register, &side_a, ("A'", "B'"))?;
    let ideal = project_parity(&psi, &zz, &register)?;

    for (g, p) in gadget.iter().zip(&ideal) {
        let f = if p.probability > 0.0 { fidelity_pure(&g.post_state, &p.post_state)? } else { 1.0 };
        println!(
            "{} branch: gadget p={:.4}  projector p={:.4}  post-state fidelity {:.6}  ebits {}",
            g.sign.symbol(),
            g.probability,
            p.probability,
            f,
            g.ebits_consumed
        );
    }
    println!("register after the gadget: {:?}", gadget[0].post_state.register());
    Ok(())
}
