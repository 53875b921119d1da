//! Adaptive quadrature.
//!
//! Two integrators are provided:
//!
//! * [`gauss_kronrod`]: globally adaptive 21-point Gauss-Kronrod with
//!   bisection of the worst interval (QUADPACK `qag` style). Use it for
//!   integrands that are smooth up to mild endpoint behaviour.
//! * [`tanh_sinh`]: double-exponential quadrature for integrands with
//!   algebraic endpoint singularities. The integrand receives the abscissa
//!   together with its exact distances to both endpoints so that factors
//!   like `(b - x)^p` can be evaluated without cancellation.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge on [{a}, {b}]: value {value:e}, error estimate {abs_err:e}")]
    NoConvergence {
        a: f64,
        b: f64,
        value: f64,
        abs_err: f64,
    },
    #[error("integrand is not finite at x = {x:e}")]
    NonFinite { x: f64 },
    #[error("invalid integration interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
}

/// Result of a successful quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn qk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { x: center });
    }
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { x: x1 });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { x: x2 });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

/// Globally adaptive Gauss-Kronrod quadrature of `f` over `[a, b]`.
///
/// Stops when the summed error estimate drops below
/// `max(abs_tol, rel_tol * |I|)`. Relative tolerances below the roundoff
/// floor of the rule (`100 eps`) are raised to it. `max_segments` bounds the
/// number of bisections.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<Quadrature, QuadError> {
    if !a.is_finite() || !b.is_finite() {
        return Err(QuadError::BadInterval { a, b });
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            abs_err: 0.0,
            evaluations: 0,
        });
    }
    let rel_tol = rel_tol.max(100.0 * f64::EPSILON);
    let (value, err) = qk21(&mut f, a, b)?;
    let mut segments = vec![Segment { a, b, value, err }];
    let mut evaluations = 21;
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let total_err: f64 = segments.iter().map(|s| s.err).sum();
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Quadrature {
                value: total,
                abs_err: total_err,
                evaluations,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        // interval can no longer be split in floating point
        if segments.len() + 2 > max_segments || mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            segments.push(seg);
            let value: f64 = segments.iter().map(|s| s.value).sum();
            let abs_err: f64 = segments.iter().map(|s| s.err).sum();
            return Err(QuadError::NoConvergence {
                a,
                b,
                value,
                abs_err,
            });
        }
        let (v1, e1) = qk21(&mut f, seg.a, mid)?;
        let (v2, e2) = qk21(&mut f, mid, seg.b)?;
        evaluations += 42;
        segments.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            err: e1,
        });
        segments.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            err: e2,
        });
    }
}

/// Largest `u = (pi/2) sinh(t)` used by [`tanh_sinh`]; endpoint distances
/// shrink like `exp(-2u)`, so this reaches roughly 1e-260 of the interval.
const TS_MAX_U: f64 = 300.0;
const TS_MAX_LEVEL: usize = 12;

/// Tanh-sinh quadrature of `f(x, x - a, b - x)` over `[a, b]`.
///
/// The endpoint distances passed to `f` are computed directly from the
/// transformation and are accurate even where `x` rounds to an endpoint.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature, QuadError> {
    if !a.is_finite() || !b.is_finite() || b < a {
        return Err(QuadError::BadInterval { a, b });
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            abs_err: 0.0,
            evaluations: 0,
        });
    }
    let width = b - a;
    let half = 0.5 * width;
    let t_max = (TS_MAX_U / FRAC_PI_2).asinh();
    let mut evaluations = 0usize;

    // contribution of the symmetric pair of nodes at +-t (or the centre node)
    let mut node = |t: f64, f: &mut F| -> Result<f64, QuadError> {
        let u = FRAC_PI_2 * t.sinh();
        let cosh_u = u.cosh();
        let weight = half * FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        if t == 0.0 {
            evaluations += 1;
            let x = a + half;
            let v = f(x, half, half);
            if !v.is_finite() {
                return Err(QuadError::NonFinite { x });
            }
            return Ok(weight * v);
        }
        if weight == 0.0 {
            return Ok(0.0);
        }
        // distance from the nearer endpoint: width / (1 + exp(2u))
        let near = width / (1.0 + (2.0 * u).exp());
        let far = width - near;
        evaluations += 2;
        let xl = a + near;
        let xr = b - near;
        let vl = f(xl, near, far);
        let vr = f(xr, far, near);
        if !vl.is_finite() {
            return Err(QuadError::NonFinite { x: xl });
        }
        if !vr.is_finite() {
            return Err(QuadError::NonFinite { x: xr });
        }
        Ok(weight * (vl + vr))
    };

    // level 0: unit spacing
    let mut sum = node(0.0, &mut f)?;
    let mut k = 1;
    while (k as f64) <= t_max {
        sum += node(k as f64, &mut f)?;
        k += 1;
    }
    let mut h = 1.0;
    let mut estimate = h * sum;
    let mut previous = estimate;
    let mut last_diff = f64::INFINITY;
    for level in 1..=TS_MAX_LEVEL {
        h *= 0.5;
        let mut t = h;
        while t <= t_max {
            sum += node(t, &mut f)?;
            t += 2.0 * h;
        }
        estimate = h * sum;
        let diff = (estimate - previous).abs();
        let tol = abs_tol.max(rel_tol * estimate.abs());
        // double-exponential convergence is quadratic in the level, so a
        // small difference between successive levels bounds the error
        if level >= 3 && (diff <= tol || (diff <= 1e-3 * last_diff.max(tol) && diff <= 1e3 * tol)) {
            return Ok(Quadrature {
                value: estimate,
                abs_err: diff,
                evaluations,
            });
        }
        last_diff = diff;
        previous = estimate;
    }
    Err(QuadError::NoConvergence {
        a,
        b,
        value: estimate,
        abs_err: last_diff,
    })
}
