//! When does the relative phase of two split condensates notice that it lives
//! on a circle?

use zeromode::fieldtheory::{
    compactness_timescale, freezing_ratio, sample_wrapped_gaussian, wrapped_variance,
    zero_mode_variance, CondensateParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = CondensateParams::experiment_2024();
    let r0 = p.natural_radius();
    let tc = compactness_timescale(&p, r0)?;
    println!("t_c = {:.2} ms (exact root {:.2} ms, deep quench: {})", 1e3 * tc.t_c, 1e3 * tc.t_c_exact, tc.deep_quench);
    println!("k = 1 freezing ratio {:.3}", freezing_ratio(&p, 1, 0.01)?.r_k);
    println!("{:>8} {:>12} {:>12}", "t [ms]", "var(angle)", "wrapped");
    for k in 0..=6 {
        let t = 5e-3 * k as f64;
        let sigma = zero_mode_variance(&p, t)?.sqrt() / r0;
        let w = wrapped_variance(&sample_wrapped_gaussian(sigma, 100_000, k)?)?;
        println!("{:>8.1} {:>12.4} {:>12.4}", 1e3 * t, sigma * sigma, w);
    }
    println!("uniform limit pi^2/3 = {:.4}", std::f64::consts::PI.powi(2) / 3.0);
    Ok(())
}
