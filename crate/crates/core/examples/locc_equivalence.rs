//! Pauli word traces separate stabilizer sets that no local Clifford maps into each other.

use ndsd::equivalence::{
    four_bell_comparator, inequivalence_witness, six_mes_set, two_bell_comparator, word_trace_profile,
    PauliSet,
};

fn main() -> ndsd::error::Result<()> {
    let six = six_mes_set();
    let labels: Vec<String> = six.elements().iter().map(|p| p.operator_label()).collect();
    println!("six-MES stabilizer set: {}", labels.join(" "));

    let profile = word_trace_profile(&six, 2)?;
    for e in profile.entries.iter().take(8) {
        println!("  {:<12} {:<4} |tr| = {}", e.word.to_string(), e.operator, e.trace);
    }

    for (name, other) in [("four-Bell comparator", four_bell_comparator()), ("two-Bell comparator", two_bell_comparator())] {
        match inequivalence_witness(&six, &other, 3)? {
            Some(w) => println!("{name}: word {} gives |tr| {} vs {}", w.word, w.trace_a, w.trace_b),
            None => println!("{name}: no witness up to length 3"),
        }
    }

    let twin = six.conjugated(&PauliSet::parse(&["XYZ"])?.elements()[0])?;
    println!("conjugated copy: witness {:?}", inequivalence_witness(&six, &twin, 3)?.map(|w| w.word.to_string()));
    Ok(())
}
