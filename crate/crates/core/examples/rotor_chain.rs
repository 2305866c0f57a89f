//! Exact dynamics of short rotor chains: the half-chain entropy saturates.

use zeromode::chains::{rotor_chain_dynamics, RotorChainOptions, RotorChainParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ts: Vec<f64> = (0..=40).map(|k| k as f64).collect();
    for n in 2..=4 {
        let p = RotorChainParams::new(n, 1.5, 0.5, 4)?;
        let run = rotor_chain_dynamics(&p, &ts, &RotorChainOptions::default())?;
        let max = run.entropies.iter().copied().fold(0.0, f64::max);
        println!(
            "N = {n} (dim {:>5}): S(10) = {:.4}  S(40) = {:.4}  max = {max:.4}",
            p.dim(),
            run.entropies[10],
            run.entropies[40]
        );
    }
    Ok(())
}
