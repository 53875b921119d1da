//! Bracketed scalar root finding.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{a:e}, {b:e}] (f = {fa:e}, {fb:e})")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("function not finite at x = {x:e}")]
    NonFinite { x: f64 },
    #[error("root finder did not converge after {iterations} iterations (last x = {x:e})")]
    MaxIterations { iterations: usize, x: f64 },
}

/// Newton iteration safeguarded by bisection.
///
/// `f` returns the value and derivative. The root must be bracketed by
/// `[lo, hi]`. A Newton step is taken whenever it stays strictly inside the
/// current bracket and shrinks the residual fast enough; otherwise the
/// bracket is bisected. Terminates when `|f| <= f_tol` or the bracket is
/// narrower than `x_tol_rel * |x|`.
pub fn newton_bisect<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    guess: Option<f64>,
    x_tol_rel: f64,
    f_tol: f64,
    max_iter: usize,
) -> Result<f64, RootError>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if !flo.is_finite() {
        return Err(RootError::NonFinite { x: lo });
    }
    if !fhi.is_finite() {
        return Err(RootError::NonFinite { x: hi });
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NoSignChange {
            a: lo,
            b: hi,
            fa: flo,
            fb: fhi,
        });
    }
    // orient so that f(neg) < 0 < f(pos)
    let (mut neg, mut pos) = if flo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = match guess {
        Some(g) if g > lo.min(hi) && g < lo.max(hi) => g,
        _ => 0.5 * (lo + hi),
    };
    let mut dx_old = (hi - lo).abs();
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if !fx.is_finite() {
            return Err(RootError::NonFinite { x });
        }
        if fx.abs() <= f_tol {
            return Ok(x);
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        let newton = x - fx / dfx;
        let (a, b) = (neg.min(pos), neg.max(pos));
        let inside = dfx.is_finite() && dfx != 0.0 && newton > a && newton < b;
        let x_new = if inside && (newton - x).abs() < 0.5 * dx_old {
            newton
        } else {
            0.5 * (a + b)
        };
        dx_old = (x_new - x).abs();
        x = x_new;
        if (b - a) <= x_tol_rel * x.abs().max(f64::MIN_POSITIVE) || dx_old == 0.0 {
            return Ok(x);
        }
    }
    Err(RootError::MaxIterations {
        iterations: max_iter,
        x,
    })
}

/// Brent's method (inverse quadratic interpolation with bisection fallback).
pub fn brent<F>(mut f: F, a: f64, b: f64, x_tol: f64, max_iter: usize) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() {
        return Err(RootError::NonFinite { x: a });
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite { x: b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange { a, b, fa, fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
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
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
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
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(RootError::NonFinite { x: b });
        }
    }
    Err(RootError::MaxIterations {
        iterations: max_iter,
        x: b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_bisect_finds_sqrt2() {
        let r = newton_bisect(|x| (x * x - 2.0, 2.0 * x), 0.0, 2.0, None, 1e-15, 0.0, 100).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn newton_bisect_survives_bad_derivative() {
        // derivative deliberately wrong: bisection must still converge
        let r = newton_bisect(|x| (x.powi(3) - 0.1, 1e-12), 0.0, 1.0, None, 1e-14, 0.0, 200).unwrap();
        assert!((r - 0.1f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn brent_finds_cos_root() {
        let r = brent(f64::cos, 1.0, 2.0, 1e-15, 100).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn missing_sign_change_is_reported() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 50),
            Err(RootError::NoSignChange { .. })
        ));
        assert!(matches!(
            newton_bisect(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, None, 1e-12, 0.0, 50),
            Err(RootError::NoSignChange { .. })
        ));
    }
}
