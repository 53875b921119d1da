//! Least-squares power-law fits on log-log data.

use serde::Serialize;

/// Straight-line fit `ln y = exponent * ln x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `ln y`.
    pub residual: f64,
    pub points: usize,
}

/// Fits a line through `(x, y)` by ordinary least squares.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = (0..n)
        .map(|i| (y[i] - slope * x[i] - intercept).powi(2))
        .sum();
    Some((slope, intercept, (rss / n as f64).sqrt()))
}

/// Power-law fit over the samples with `x` in `[x_lo, x_hi]` and `y > 0`.
/// The window is widened by a few ulps so grid points computed by `powf`
/// land inside it.
pub fn power_fit(x: &[f64], y: &[f64], x_lo: f64, x_hi: f64) -> Option<PowerFit> {
    let (x_lo, x_hi) = (x_lo * (1.0 - 1e-12), x_hi * (1.0 + 1e-12));
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(&xi, &yi)| xi >= x_lo && xi <= x_hi && xi > 0.0 && yi > 0.0 && yi.is_finite())
        .map(|(xi, yi)| (xi.ln(), yi.ln()))
        .unzip();
    let (exponent, intercept, residual) = linear_fit(&lx, &ly)?;
    Some(PowerFit {
        exponent,
        intercept,
        residual,
        points: lx.len(),
    })
}

/// Power-law fit over the last `decades` decades of the grid.
pub fn tail_power_fit(x: &[f64], y: &[f64], decades: f64) -> Option<PowerFit> {
    let x_hi = *x.last()?;
    power_fit(x, y, x_hi * 10f64.powf(-decades), x_hi)
}
