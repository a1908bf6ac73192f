//! Inversion of strictly increasing scalar functions.

use crate::error::{Error, Result};

const EXPANSION_LIMIT: f64 = 1e15;

/// Solve `h(x) = target` for strictly increasing `h`.
///
/// The bracket is grown geometrically from `bracket_hint` until it straddles
/// the target, then refined with Brent's method until the bracket is
/// narrower than `1e-12·max(1, |x|)`, which keeps the root accurate where `h`
/// is flat. Returns
/// [`Error::OutOfRange`] carrying the nearest attainable value when the
/// bracket hits ±1e15 without a sign change.
pub fn invert_monotone<H>(h: H, target: f64, bracket_hint: (f64, f64)) -> Result<f64>
where
    H: Fn(f64) -> Result<f64>,
{
    let residual = |x: f64| -> Result<f64> { Ok(h(x)? - target) };

    let (mut a, mut b) = if bracket_hint.0 <= bracket_hint.1 {
        bracket_hint
    } else {
        (bracket_hint.1, bracket_hint.0)
    };
    if a == b {
        a -= 0.5;
        b += 0.5;
    }
    let mut fa = residual(a)?;
    if fa == 0.0 {
        return Ok(a);
    }
    let mut fb = residual(b)?;
    if fb == 0.0 {
        return Ok(b);
    }

    let mut step = b - a;
    while fa > 0.0 {
        if a <= -EXPANSION_LIMIT {
            return Err(Error::OutOfRange {
                target,
                nearest: fa + target,
            });
        }
        b = a;
        fb = fa;
        a = (a - step).max(-EXPANSION_LIMIT);
        step *= 2.0;
        fa = residual(a)?;
        if fa == 0.0 {
            return Ok(a);
        }
    }
    while fb < 0.0 {
        if b >= EXPANSION_LIMIT {
            return Err(Error::OutOfRange {
                target,
                nearest: fb + target,
            });
        }
        a = b;
        fa = fb;
        b = (b + step).min(EXPANSION_LIMIT);
        step *= 2.0;
        fb = residual(b)?;
        if fb == 0.0 {
            return Ok(b);
        }
    }

    brent(residual, a, fa, b, fb)
}

fn brent<F>(f: F, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb == 0.0 {
            return Ok(b);
        }
        if (fb > 0.0) == (fc > 0.0) {
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
        let xtol = 2.0 * f64::EPSILON * b.abs() + 0.5e-12 * b.abs().max(1.0);
        let m = 0.5 * (c - b);
        if m.abs() <= xtol {
            return Ok(b);
        }
        if e.abs() >= xtol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (xtol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > xtol { d } else { xtol.copysign(m) };
        fb = f(b)?;
    }
    Ok(b)
}
