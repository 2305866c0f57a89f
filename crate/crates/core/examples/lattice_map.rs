//! Discretize the condensate into a rotor chain and compare its small-angle
//! modes with the continuum ones.

use zeromode::chains::{neumann_modes, ChainParams};
use zeromode::fieldtheory::{lattice_map, mode_frequencies, CondensateParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = CondensateParams::experiment_2024();
    println!("{:>5} {:>12} {:>10} {:>12} {:>12}", "N", "omega^2", "kappa", "time unit", "k=1 error");
    for n in [8, 16, 32, 64, 128] {
        let map = lattice_map(&p, n)?;
        let modes = neumann_modes(&ChainParams::new(n, map.omega_sq, map.kappa)?);
        let exact = mode_frequencies(&p, 1).omega_i;
        let err = (map.to_continuum_frequency(modes.frequencies[1]) - exact).abs() / exact;
        println!("{n:>5} {:>12.4e} {:>10.4} {:>10.3e} s {err:>12.3e}", map.omega_sq, map.kappa, map.time_unit);
    }
    Ok(())
}
