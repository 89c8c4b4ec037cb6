//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

pub trait OdeScalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl OdeScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl OdeScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on `|h|`; also used as the first trial step.
    pub h_max: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).  `observe`
/// sees every accepted point, including the start.
pub fn integrate<T, const D: usize, F, O>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: [T; D],
    opts: &OdeOptions,
    mut observe: O,
) -> Result<([T; D], OdeStats), String>
where
    T: OdeScalar,
    F: FnMut(f64, &[T; D]) -> [T; D],
    O: FnMut(f64, &[T; D]),
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h_max.min(span).max(f64::MIN_POSITIVE);
    let mut stats = OdeStats { accepted: 0, rejected: 0 };
    observe(t, &y);
    if span == 0.0 {
        return Ok((y, stats));
    }
    let mut k = [[T::zero(); D]; 7];
    k[0] = f(t, &y);
    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(format!("step budget exhausted at t = {t}"));
        }
        let last = h >= (t1 - t).abs() * (1.0 - 1e-12);
        if last {
            h = (t1 - t).abs();
        }
        let hs = h * dir;
        for s in 1..7 {
            let mut ys = y;
            for i in 0..D {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        acc = acc + kj[i] * A[s][j];
                    }
                }
                ys[i] = y[i] + acc * hs;
            }
            k[s] = f(t + C[s] * hs, &ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..D {
            let mut a5 = T::zero();
            let mut a4 = T::zero();
            for s in 0..7 {
                a5 = a5 + k[s][i] * B5[s];
                a4 = a4 + k[s][i] * B4[s];
            }
            y5[i] = y[i] + a5 * hs;
            let e = ((a5 - a4) * hs).magnitude();
            let sc = opts.atol + opts.rtol * y[i].magnitude().max(y5[i].magnitude());
            err = err.max(e / sc);
        }
        if !err.is_finite() {
            return Err(format!("non-finite solution at t = {t}"));
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            y = y5;
            k[0] = k[6];
            stats.accepted += 1;
            observe(t, &y);
        } else {
            stats.rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * fac).min(opts.h_max);
        if h < 1e-14 * span.max(t.abs()) {
            return Err(format!("step size underflow at t = {t}"));
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_closes_after_one_period() {
        let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, h_max: 0.1, max_steps: 100_000 };
        let (y, stats) = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            2.0 * std::f64::consts::PI,
            [1.0, 0.0],
            &opts,
            |_, _| {},
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-11 && y[1].abs() < 1e-11);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn backward_complex_exponential() {
        let i = Complex64::new(0.0, 1.0);
        let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, h_max: 0.05, max_steps: 100_000 };
        let (y, _) = integrate(|_, y: &[Complex64; 1]| [i * y[0]], 1.0, -2.0, [Complex64::new(1.0, 0.0)], &opts, |_, _| {})
            .unwrap();
        let expect = (i * -3.0).exp();
        assert!((y[0] - expect).norm() < 1e-11);
    }
}
