//! Late-time entropy of the rotor pair next to its stationary ensembles and the
//! energy-only bound.

use zeromode::ensembles::{compare_ensembles, ComparisonOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:>7} {:>6} {:>4} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "omega^2", "kappa", "M", "S_max", "S_DE", "S_BDE", "S_GGE", "S_est", "bound"
    );
    for (w2, k) in [(5.0, 10.0), (10.0, 100.0), (100.0, 50.0)] {
        let r = compare_ensembles(w2, k, &ComparisonOptions::default())?;
        println!(
            "{w2:>7} {k:>6} {:>4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            r.m, r.s_max, r.s_de, r.s_bde, r.s_gge, r.s_estimate, r.bound.bound
        );
    }
    Ok(())
}
