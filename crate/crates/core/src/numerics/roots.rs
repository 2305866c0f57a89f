use super::{NumericsError, Result};

/// Closed interval known (or claimed) to bracket a sign change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(NumericsError::InvalidInput(format!(
                "bracket needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Root of `f` inside `bracket`, to absolute x-tolerance `tol`.
pub fn find_root_1d<F: Fn(f64) -> f64>(f: F, bracket: RootBracket, tol: f64) -> Result<f64> {
    find_root_1d_bracketed(f, bracket, tol).map(|(x, _)| x)
}

/// Brent's method; returns the root together with the final enclosing
/// interval, whose width is at most `tol` (or `f` vanished exactly).
///
/// Secant/inverse-quadratic steps are only accepted while they shrink the
/// bracket fast enough, so the bisection rate is a worst-case guarantee.
pub fn find_root_1d_bracketed<F: Fn(f64) -> f64>(
    f: F,
    bracket: RootBracket,
    tol: f64,
) -> Result<(f64, RootBracket)> {
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() || fa * fb > 0.0 {
        return Err(NumericsError::InvalidBracket {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }
    if fa == 0.0 {
        return Ok((a, RootBracket { lo: a, hi: a }));
    }
    if fb == 0.0 {
        return Ok((b, RootBracket { lo: b, hi: b }));
    }
    let tol = tol.max(0.0);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..400 {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            let (lo, hi) = if b < c { (b, c) } else { (c, b) };
            let enclosing = if fb == 0.0 {
                RootBracket { lo: b, hi: b }
            } else {
                RootBracket { lo, hi }
            };
            return Ok((b, enclosing));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(NumericsError::NoConvergence {
        what: "Brent root finder",
        iterations: 400,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct Root2dOptions {
    /// Target on the Euclidean norm of `F`.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for Root2dOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            fd_step: 1e-6,
        }
    }
}

/// Solve `F(x, y) = 0` by damped Newton with a finite-difference Jacobian.
///
/// When a Newton direction fails to reduce `|F|` (or the Jacobian is
/// singular), one sweep of alternating 1D solves along each coordinate is made
/// instead before Newton resumes.
pub fn find_root_2d<F>(f: F, guess: (f64, f64), opts: &Root2dOptions) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let norm = |v: (f64, f64)| v.0.hypot(v.1);
    let (mut x, mut y) = guess;
    let mut fv = f(x, y);
    if !fv.0.is_finite() || !fv.1.is_finite() {
        return Err(NumericsError::InvalidInput(format!(
            "F is not finite at the initial guess ({x}, {y})"
        )));
    }
    for _ in 0..opts.max_iter {
        let r = norm(fv);
        if r <= opts.tol {
            return Ok((x, y));
        }
        let hx = opts.fd_step * x.abs().max(1.0);
        let hy = opts.fd_step * y.abs().max(1.0);
        let (fxp, fxm) = (f(x + hx, y), f(x - hx, y));
        let (fyp, fym) = (f(x, y + hy), f(x, y - hy));
        let j11 = (fxp.0 - fxm.0) / (2.0 * hx);
        let j21 = (fxp.1 - fxm.1) / (2.0 * hx);
        let j12 = (fyp.0 - fym.0) / (2.0 * hy);
        let j22 = (fyp.1 - fym.1) / (2.0 * hy);
        let det = j11 * j22 - j12 * j21;
        let jscale = (j11.abs() + j12.abs()) * (j21.abs() + j22.abs());

        let mut improved = false;
        if det.is_finite() && det.abs() > 1e-14 * jscale {
            let dx = -(j22 * fv.0 - j12 * fv.1) / det;
            let dy = -(-j21 * fv.0 + j11 * fv.1) / det;
            let mut lambda = 1.0;
            for _ in 0..40 {
                let (nx, ny) = (x + lambda * dx, y + lambda * dy);
                let nf = f(nx, ny);
                if nf.0.is_finite() && nf.1.is_finite() && norm(nf) < r {
                    x = nx;
                    y = ny;
                    fv = nf;
                    improved = true;
                    break;
                }
                lambda *= 0.5;
            }
        }
        if !improved {
            let before = r;
            x = solve_along(|s| f(s, y).0, x, opts.tol * 1e-3).unwrap_or(x);
            y = solve_along(|s| f(x, s).1, y, opts.tol * 1e-3).unwrap_or(y);
            fv = f(x, y);
            if !(norm(fv) < before) {
                break;
            }
        }
    }
    if norm(fv) <= opts.tol {
        return Ok((x, y));
    }
    Err(NumericsError::NoConvergence {
        what: "damped Newton (2D)",
        iterations: opts.max_iter,
    })
}

/// Expand a bracket around `x0` geometrically until `g` changes sign, then
/// polish with Brent.
fn solve_along<G: Fn(f64) -> f64>(g: G, x0: f64, tol: f64) -> Option<f64> {
    let g0 = g(x0);
    if g0 == 0.0 {
        return Some(x0);
    }
    let mut step = 1e-3 * x0.abs().max(1.0);
    for _ in 0..80 {
        for cand in [x0 - step, x0 + step] {
            let gc = g(cand);
            if gc.is_finite() && gc * g0 <= 0.0 {
                let (lo, hi) = if cand < x0 { (cand, x0) } else { (x0, cand) };
                return find_root_1d(&g, RootBracket { lo, hi }, tol).ok();
            }
        }
        step *= 2.0;
    }
    None
}
