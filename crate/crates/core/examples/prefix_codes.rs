//! Optimal prefix-code lengths for m equiprobable outcomes, checked against exhaustive search.

use ndsd::protocol::{brute_force_prefix_lengths, kraft_sum, optimal_prefix_lengths};
use num_rational::Rational64;

fn main() -> ndsd::error::Result<()> {
    println!("{:>3} {:>10} {:>6}  lengths", "m", "average", "kraft");
    for m in 1..=12 {
        let lengths = optimal_prefix_lengths(m)?;
        assert_eq!(lengths, brute_force_prefix_lengths(m)?);
        let total: i64 = lengths.iter().map(|&l| l as i64).sum();
        let avg = Rational64::new(total, m as i64);
        println!("{m:>3} {avg:>10} {:>6}  {lengths:?}", kraft_sum(&lengths));
    }
    let big = optimal_prefix_lengths(1000)?;
    println!("m=1000: lengths {}..{}, kraft {}", big[0], big[big.len() - 1], kraft_sum(&big));
    Ok(())
}
