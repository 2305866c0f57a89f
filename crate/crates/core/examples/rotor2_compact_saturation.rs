//! Two coupled rotors against two coupled oscillators with the same small-angle
//! limit. They agree until the centre-of-mass packet wraps the circle; then
//! the rotor entropy saturates.

use zeromode::cho2::{entanglement_point, ChoQuench};
use zeromode::rotor2::{
    auto_cutoff, entanglement_entropy, expectation_cos, reduce_site, CosOperator,
    GroundStateOptions, Propagator,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (omega_sq, kappa) = (10.0, 100.0);
    let auto = auto_cutoff(omega_sq, kappa, 80, &GroundStateOptions::default())?;
    println!("cutoff M = {} (boundary weight {:.1e})", auto.params.m, auto.ground.boundary_weight);
    let cho = ChoQuench::frequency_quench(omega_sq, kappa)?;
    let ts: Vec<f64> = (0..=30).map(|k| k as f64).collect();
    let rows = Propagator::post_quench(&auto.params, 0.0, 0)?.map_series(&auto.ground.psi, &ts, |t, psi| {
        (t, entanglement_entropy(&reduce_site(psi)), expectation_cos(psi, CosOperator::Sum))
    })?;
    println!("{:>5} {:>9} {:>9} {:>12}", "t", "S_CR", "S_CHO", "<cos x1+x2>");
    for (t, s, c) in rows {
        println!("{t:>5.1} {:>9.5} {:>9.5} {c:>12.5}", s?, entanglement_point(&cho, t)?.entropy);
    }
    Ok(())
}
