//! Dormand-Prince 5(4) embedded Runge-Kutta pair with 4th-order dense
//! output (Hairer, Norsett & Wanner, `DOPRI5`).
//!
//! Only the single-step machinery lives here; the step-size loop and event
//! handling belong to the caller, which knows what an "event" means.

/// Right-hand side of `dx/dt = f(t, x)`. May fail (e.g. a root-finding
/// sub-problem inside the model); the error type is chosen by the caller.
pub trait OdeSystem<const N: usize> {
    type Error;
    fn rhs(&mut self, t: f64, x: &[f64; N]) -> Result<[f64; N], Self::Error>;
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Error-control settings. The per-component scale is
/// `rel_tol * (max(|x_old|, |x_new|) + abs_tol)`, i.e. relative control with
/// an absolute floor, which suits components spanning many decades.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    /// Interpolated state at `t` (meant for `t` inside the step).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let c = &self.coeffs;
        std::array::from_fn(|i| {
            c[0][i] + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])))
        })
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }
}

/// Outcome of one attempted step.
#[derive(Debug, Clone, Copy)]
pub struct Attempt<const N: usize> {
    pub x1: [f64; N],
    /// Derivative at the new point (first stage of the next step).
    pub f1: [f64; N],
    /// Scaled RMS error norm; the step is acceptable when `<= 1`.
    pub error: f64,
    pub dense: DenseStep<N>,
}

fn axpy<const N: usize>(x: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| x[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

/// Attempts a single step of size `h` from `(t, x)` where `f0 = f(t, x)`.
pub fn attempt_step<S, const N: usize>(
    sys: &mut S,
    tol: Tolerances,
    t: f64,
    x: &[f64; N],
    f0: &[f64; N],
    h: f64,
) -> Result<Attempt<N>, S::Error>
where
    S: OdeSystem<N>,
{
    let k1 = *f0;
    let k2 = sys.rhs(t + C2 * h, &axpy(x, h, &[(A21, &k1)]))?;
    let k3 = sys.rhs(t + C3 * h, &axpy(x, h, &[(A31, &k1), (A32, &k2)]))?;
    let k4 = sys.rhs(t + C4 * h, &axpy(x, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = sys.rhs(
        t + C5 * h,
        &axpy(x, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = sys.rhs(
        t + h,
        &axpy(x, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let x1 = axpy(x, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = sys.rhs(t + h, &x1)?;

    let mut sum = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = tol.rel_tol * (x[i].abs().max(x1[i].abs()) + tol.abs_tol);
        sum += (e / scale).powi(2);
    }
    let error = (sum / N as f64).sqrt();

    let mut coeffs = [[0.0; N]; 5];
    for i in 0..N {
        let diff = x1[i] - x[i];
        let bspl = h * k1[i] - diff;
        coeffs[0][i] = x[i];
        coeffs[1][i] = diff;
        coeffs[2][i] = bspl;
        coeffs[3][i] = diff - h * k7[i] - bspl;
        coeffs[4][i] =
            h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Ok(Attempt {
        x1,
        f1: k7,
        error,
        dense: DenseStep { t0: t, h, coeffs },
    })
}

/// Step-size proposal after an attempt with scaled error `error`.
pub fn propose_step(h: f64, error: f64, accepted: bool) -> f64 {
    let factor = if error == 0.0 {
        5.0
    } else {
        0.9 * error.powf(-0.2)
    };
    let factor = if accepted {
        factor.clamp(0.2, 5.0)
    } else {
        factor.clamp(0.1, 0.9)
    };
    h * factor
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl OdeSystem<2> for Oscillator {
        type Error = ();
        fn rhs(&mut self, _t: f64, x: &[f64; 2]) -> Result<[f64; 2], ()> {
            Ok([x[1], -x[0]])
        }
    }

    fn run(tol: f64) -> (f64, usize) {
        let tol = Tolerances {
            rel_tol: tol,
            abs_tol: 1e-12,
        };
        let mut sys = Oscillator;
        let (mut t, mut x) = (0.0, [1.0, 0.0]);
        let mut f = sys.rhs(t, &x).unwrap();
        let mut h: f64 = 0.01;
        let mut steps = 0;
        let mut worst: f64 = 0.0;
        while t < 10.0 {
            h = h.min(10.0 - t);
            let a = attempt_step(&mut sys, tol, t, &x, &f, h).unwrap();
            if a.error <= 1.0 {
                // dense output in the middle of the step
                let tm = t + 0.37 * h;
                let xm = a.dense.eval(tm);
                worst = worst.max((xm[0] - tm.cos()).abs());
                t += h;
                x = a.x1;
                f = a.f1;
                steps += 1;
            }
            h = propose_step(h, a.error, a.error <= 1.0);
        }
        worst = worst.max((x[0] - 10f64.cos()).abs());
        (worst, steps)
    }

    #[test]
    fn harmonic_oscillator_accuracy_scales_with_tolerance() {
        let (e1, n1) = run(1e-6);
        let (e2, n2) = run(1e-10);
        assert!(e1 < 1e-4, "{e1}");
        assert!(e2 < 1e-8, "{e2}");
        assert!(e2 < e1 * 1e-2);
        assert!(n2 > n1);
    }

    #[test]
    fn dense_output_matches_endpoints() {
        let mut sys = Oscillator;
        let x = [1.0, 0.0];
        let f = sys.rhs(0.0, &x).unwrap();
        let tol = Tolerances {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
        };
        let a = attempt_step(&mut sys, tol, 0.0, &x, &f, 0.1).unwrap();
        let start = a.dense.eval(0.0);
        let end = a.dense.eval(0.1);
        for i in 0..2 {
            assert!((start[i] - x[i]).abs() < 1e-15);
            assert!((end[i] - a.x1[i]).abs() < 1e-15);
        }
    }
}
