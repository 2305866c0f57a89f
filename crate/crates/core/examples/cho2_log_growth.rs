//! Entanglement of two coupled oscillators after the on-site frequency is
//! switched off. The zero mode spreads freely and `S` grows like `ln t`.

use zeromode::cho2::{entanglement_entropy_series, ChoQuench};
use zeromode::numerics::fit_polynomial;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = ChoQuench::frequency_quench(10.0, 100.0)?;
    let ts: Vec<f64> = (0..=40).map(|k| 10f64.powf(-1.0 + 0.125 * k as f64)).collect();
    let points = entanglement_entropy_series(&q, &ts)?;
    println!("{:>12} {:>10} {:>12}", "t", "S", "1 - xi");
    for p in points.iter().step_by(4) {
        println!("{:>12.4e} {:>10.5} {:>12.4e}", p.t, p.entropy, p.one_minus_xi);
    }
    let late: Vec<_> = points.iter().filter(|p| p.t >= 100.0).collect();
    let lx: Vec<f64> = late.iter().map(|p| p.t.ln()).collect();
    let s: Vec<f64> = late.iter().map(|p| p.entropy).collect();
    let fit = fit_polynomial(&lx, &s, 1)?;
    println!("late-time slope dS/d ln t = {:.4}", fit.coefficients[0]);
    Ok(())
}
