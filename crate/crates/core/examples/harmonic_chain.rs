//! Half-chain entropy of a harmonic chain with free ends after the mass is
//! quenched to zero. The zero mode keeps the growth logarithmic.

use zeromode::chains::{ChainParams, ChainQuench};
use zeromode::numerics::fit_polynomial;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ChainParams::new(32, 1.5, 0.5)?;
    let q = ChainQuench::to_zero(params)?;
    let ts: Vec<f64> = (0..=64).map(|k| 10f64.powf(-1.0 + 0.0625 * k as f64)).collect();
    let s = q.entropy_series(&ts, params.cut())?;
    for (t, s) in ts.iter().zip(&s).step_by(8) {
        println!("t = {t:>9.3}  S = {s:.5}");
    }
    let (lx, ys): (Vec<f64>, Vec<f64>) = ts.iter().zip(&s).filter(|(t, _)| **t >= 20.0).map(|(t, s)| (t.ln(), *s)).unzip();
    let fit = fit_polynomial(&lx, &ys, 1)?;
    println!("S ~ {:.3} ln t + {:.3}", fit.coefficients[0], fit.coefficients[1]);
    Ok(())
}
