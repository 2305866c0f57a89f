use nalgebra::{DMatrix, DVector};

use super::{NumericsError, Result};

/// Least-squares polynomial, coefficients from the highest power down.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
}

impl PolyFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().fold(0.0, |acc, c| acc * t + c)
    }

    /// Leading (highest-power) coefficient.
    pub fn leading(&self) -> f64 {
        self.coefficients[0]
    }
}

/// Fit `ys ≈ poly(ts)` with `degree` in `{1, 2}`.
pub fn fit_polynomial(ts: &[f64], ys: &[f64], degree: usize) -> Result<PolyFit> {
    if !(1..=2).contains(&degree) {
        return Err(NumericsError::InvalidInput(format!(
            "polynomial degree must be 1 or 2, got {degree}"
        )));
    }
    if ts.len() != ys.len() {
        return Err(NumericsError::DimensionMismatch {
            expected: ts.len(),
            got: ys.len(),
        });
    }
    if ts.len() < degree + 2 {
        return Err(NumericsError::InvalidInput(format!(
            "need at least {} samples for degree {degree}, got {}",
            degree + 2,
            ts.len()
        )));
    }
    // center and scale the abscissa so the Vandermonde matrix stays well conditioned
    let n = ts.len();
    let mean = ts.iter().sum::<f64>() / n as f64;
    let spread = ts.iter().fold(0.0f64, |m, t| m.max((t - mean).abs()));
    if spread == 0.0 {
        return Err(NumericsError::DegenerateDesign(f64::INFINITY));
    }
    let cols = degree + 1;
    let design = DMatrix::from_fn(n, cols, |i, j| ((ts[i] - mean) / spread).powi((degree - j) as i32));
    let rhs = DVector::from_column_slice(ys);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax {
        return Err(NumericsError::DegenerateDesign(smax / smin));
    }
    let scaled = svd
        .solve(&rhs, 0.0)
        .map_err(|e| NumericsError::InvalidInput(e.to_string()))?;

    // undo the affine change of variable u = (t - mean) / spread
    let coefficients = match degree {
        1 => {
            let (a, b) = (scaled[0] / spread, scaled[1]);
            vec![a, b - a * mean]
        }
        _ => {
            let a = scaled[0] / (spread * spread);
            let b = scaled[1] / spread;
            let c = scaled[2];
            vec![a, b - 2.0 * a * mean, c - b * mean + a * mean * mean]
        }
    };

    let resid = &design * &scaled - &rhs;
    let ss_res = resid.norm_squared();
    let ybar = ys.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(PolyFit {
        coefficients,
        r_squared,
    })
}
