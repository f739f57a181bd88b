//! Bracketing root finder and adaptive Simpson quadrature.

use crate::error::{Error, Result};

const MAX_BRACKET_STEPS: usize = 2000;
const MAX_ITER: usize = 400;

/// Solves `f(x) = target` for a monotone `f` on `(0, inf)`.
///
/// The bracket starts at `[lo, hi]` and is grown geometrically until it
/// straddles the target, then narrowed by bisection interleaved with secant
/// (regula falsi, Illinois-modified) steps. Stops once
/// `|f(x) - target| <= tol_abs` or the bracket collapses to machine width.
pub fn monotone_root<F>(mut f: F, target: f64, lo: f64, hi: f64, tol_abs: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a)? - target;
    let mut fb = f(b)? - target;
    let increasing = fb >= fa;
    let below = |v: f64| if increasing { v < 0.0 } else { v > 0.0 };

    let mut steps = 0;
    while below(fa) && below(fb) {
        // root lies to the right of b
        a = b;
        fa = fb;
        b *= 2.0;
        fb = f(b)? - target;
        steps += 1;
        if steps > MAX_BRACKET_STEPS || !b.is_finite() {
            return Err(Error::NoConvergence(format!(
                "no upper bracket for target {target}"
            )));
        }
    }
    while !below(fa) && !below(fb) {
        b = a;
        fb = fa;
        a *= 0.5;
        fa = f(a)? - target;
        steps += 1;
        if steps > MAX_BRACKET_STEPS || a == 0.0 {
            return Err(Error::NoConvergence(format!(
                "no lower bracket for target {target}"
            )));
        }
    }
    if fa.abs() <= tol_abs {
        return Ok(a);
    }
    if fb.abs() <= tol_abs {
        return Ok(b);
    }

    let mut side = 0i8;
    for iter in 0..MAX_ITER {
        let x = if iter % 2 == 0 && fa.is_finite() && fb.is_finite() && fa != fb {
            let s = (a * fb - b * fa) / (fb - fa);
            if s > a && s < b {
                s
            } else {
                0.5 * (a + b)
            }
        } else {
            0.5 * (a + b)
        };
        let fx = f(x)? - target;
        if fx.abs() <= tol_abs || (b - a) <= 4.0 * f64::EPSILON * b.abs() {
            return Ok(x);
        }
        if below(fx) == below(fa) {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NoConvergence(format!(
        "bracket [{a}, {b}] did not reach tolerance {tol_abs}"
    )))
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?,
    )
}
