//! Builds the Bell and multi-pair states and prints their stabilizer sign tables.

use ndsd::linalg::schmidt_coefficients;
use ndsd::states::{bell_state, multi_bell_table, pair_generators, six_mes_ids, three_index_ids};

fn main() -> ndsd::error::Result<()> {
    for j in 0..4 {
        let phi = bell_state(j, "A", "B")?;
        let schmidt = schmidt_coefficients(&phi, &["A".to_string()])?;
        let amps: Vec<String> = phi.amplitudes().iter().map(|a| format!("{:+.3}", a.re)).collect();
        println!("Φ{j}: amplitudes [{}], schmidt {:.3?}", amps.join(" "), schmidt);
    }

    let gens = pair_generators(2);
    let labels: Vec<_> = gens.iter().map(|g| g.operator_label()).collect();
    println!("\ngenerators: {}", labels.join(" "));

    let three = multi_bell_table(&three_index_ids(2))?;
    println!("two pairs, indices 0..=2:");
    for (id, row) in three.states.iter().zip(three.row_strings()) {
        println!("  {id:?}  {row}");
    }

    let six = multi_bell_table(&six_mes_ids())?;
    let labels: Vec<_> = six.generators.iter().map(|g| g.operator_label()).collect();
    println!("\nsix-MES family on {} (rows distinct: {}):", labels.join(" "), six.rows_distinct());
    for (id, row) in six.states.iter().zip(six.row_strings()) {
        println!("  {id:?}  {row}");
    }
    Ok(())
}
