//! Discriminates three GHZ states held by three parties, one qubit each.

use ndsd::protocol::{average_cost, build_strategy, run_strategy, uniform_probs, Parties, StrategyMode};
use ndsd::states::{ghz_basis, ghz_family, ghz_generators, ghz_labels, ghz_three, sign_table, PauliString};

fn main() -> ndsd::error::Result<()> {
    let register = ghz_labels(3);
    let family = ghz_family(&ghz_three())?;
    let table = sign_table(&family, &ghz_generators())?;
    for (id, row) in table.states.iter().zip(table.row_strings()) {
        println!("{id:?} {row}");
    }
    let tree = build_strategy(&table, &uniform_probs(family.len()), StrategyMode::Optimal)?;
    println!("strategy {}  average {} ebits", tree.root, average_cost(&tree));

    let parties = Parties::per_qubit(&register);
    for (z, s) in family.iter().enumerate() {
        let out = run_strategy(&tree, &parties, &s.state)?;
        println!("hidden {z}: guess {} fidelity {:.6} ebits {}", out.guess, out.fidelity, out.ebits);
    }

    let xxx: PauliString = "XXX".parse()?;
    if let Err(e) = parties.gadget_side(&xxx, &register) {
        println!("XXX spans three parties: {e}");
    }

    let basis = ghz_family(&ghz_basis())?;
    let mut overlap = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i + 1..] {
            overlap = overlap.max(a.state.inner(&b.state)?.norm());
        }
    }
    println!("GHZ basis: {} states, largest overlap {overlap:.1e}", basis.len());
    Ok(())
}
