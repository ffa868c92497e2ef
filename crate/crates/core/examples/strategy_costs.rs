//! Optimal and greedy parity strategies, their ebit costs and the teleportation comparison.

use ndsd::protocol::{
    average_cost, build_strategy, teleportation_cost_model, uniform_probs, CostReport, StrategyMode,
};
use ndsd::states::{multi_bell_table, six_mes_ids, three_index_ids};

fn main() -> ndsd::error::Result<()> {
    let table = multi_bell_table(&three_index_ids(1))?;
    let tree = build_strategy(&table, &uniform_probs(3), StrategyMode::Optimal)?;
    println!("Φ0, Φ1, Φ2: {}", tree.root);
    let report = CostReport::new(&tree, teleportation_cost_model(3, 2, true)?);
    println!("{}", report.to_csv()?);

    let six = multi_bell_table(&six_mes_ids())?;
    for mode in [StrategyMode::Optimal, StrategyMode::Greedy] {
        let tree = build_strategy(&six, &uniform_probs(6), mode)?;
        println!("six-MES {mode:?}: average {} ebits, depths {:?}", average_cost(&tree), tree.depths());
    }
    let tree = build_strategy(&six, &uniform_probs(6), StrategyMode::Optimal)?;
    let report = CostReport::new(&tree, teleportation_cost_model(6, 8, true)?);
    println!("{}", report.to_json()?);

    println!("\nn pairs with indices 0..=2, 3^n states: parity cost vs teleportation");
    for n in 1..=4 {
        let ids = three_index_ids(n);
        let table = multi_bell_table(&ids)?;
        let tree = build_strategy(&table, &uniform_probs(ids.len()), StrategyMode::Optimal)?;
        println!("  n={n}: {} vs {}", average_cost(&tree), teleportation_cost_model(ids.len(), 1 << n, true)?);
    }
    Ok(())
}
