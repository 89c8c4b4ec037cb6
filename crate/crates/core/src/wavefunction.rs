//! The physical solution `w = zeta_1 w_1 + zeta_2 w_2`, evaluated on the
//! half-line from whichever representation is most accurate at each point,
//! back-transformed to `R(r)` and normalized.

use crate::error::{Error, Result};
use crate::floquet::FloquetPair;
use crate::quadrature::composite;
use crate::spectrum::{EigenResult, Problem};
use crate::thome::{thome_infinity, thome_origin, ThomeInfinity, ThomeOrigin};
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

type C = Complex64;

/// Largest relative error accepted at any evaluation point.
pub const POINT_TOL: f64 = 1e-6;

/// Representation used at one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `zeta_1 w_1 + zeta_2 w_2` (Floquet series).
    Floquet,
    /// `(zeta_1 T15 + zeta_2 T25) w_5` (Thome series at the origin).
    Origin,
    /// `(zeta_1 T13 + zeta_2 T23) w_3` (Thome series at infinity).
    Infinity,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WavefunctionPoint {
    pub r: f64,
    /// Normalized `R(r)` with the global phase removed.
    pub value: C,
    pub rel_error: f64,
    pub region: Region,
}

/// A normalized bound state.
#[derive(Debug, Clone, Serialize)]
pub struct PhysicalSolution {
    pub energy: f64,
    /// `z = r^(1/k)`.
    pub k: f64,
    pub zeta: [C; 2],
    pub k3: C,
    pub k5: C,
    /// `R = scale * z^((k-1)/2) w`, including normalization and phase removal.
    pub scale: C,
    /// Range of `r` outside which `|R|^2` is below `1e-20` of its peak.
    pub support: (f64, f64),
    /// Quadrature panels used for the normalization integral.
    pub panels: usize,
    /// Relative change of the norm integral in the last panel doubling.
    pub quadrature_change: f64,
    #[serde(skip)]
    pair: FloquetPair,
    #[serde(skip)]
    w3: ThomeInfinity,
    #[serde(skip)]
    w5: ThomeOrigin,
}

impl PhysicalSolution {
    pub fn new(problem: &Problem, result: &EigenResult) -> Result<Self> {
        let mut sol = Self::unnormalized(problem, result)?;
        sol.normalize()?;
        Ok(sol)
    }

    /// The solution with unit scale, before normalization.
    pub fn unnormalized(problem: &Problem, result: &EigenResult) -> Result<Self> {
        let eq = problem.form.at_energy(result.energy);
        let terms = problem.settings.max_thome_terms.min(400);
        let w3 = thome_infinity(&eq, 3, terms)?;
        let w5 = thome_origin(&eq, 5, terms)?;
        let t = |j: usize, k: usize| result.connection[j - 1][k - 3];
        let [z1, z2] = result.zeta;
        Ok(Self {
            energy: result.energy,
            k: problem.form.k_f64(),
            zeta: result.zeta,
            k3: z1 * t(1, 3) + z2 * t(2, 3),
            k5: z1 * t(1, 5) + z2 * t(2, 5),
            scale: C::new(1.0, 0.0),
            support: (0.0, 0.0),
            panels: 0,
            quadrature_change: 0.0,
            pair: result.point.pair.clone(),
            w3,
            w5,
        })
    }

    /// `ln w(z)` of the unnormalized solution by each representation, with
    /// relative error estimates.
    pub fn candidates(&self, z: f64) -> [(C, f64, Region); 3] {
        let [a, b] = &self.pair.solutions;
        let (wa, _, ea) = a.eval(z);
        let (wb, _, eb) = b.eval(z);
        let (ta, tb) = (self.zeta[0] * wa, self.zeta[1] * wb);
        let w = ta + tb;
        let floquet_err = (ta.norm() * (ea + f64::EPSILON) + tb.norm() * (eb + f64::EPSILON)) / w.norm();
        let (l5, e5) = self.w5.eval_ln(z);
        let (l3, e3) = self.w3.eval_ln(z);
        let ln_or_nan = |v: C| if v.norm() > 0.0 { v.ln() } else { C::new(f64::NEG_INFINITY, 0.0) };
        [
            (ln_or_nan(w), if floquet_err.is_finite() { floquet_err } else { f64::INFINITY }, Region::Floquet),
            (ln_or_nan(self.k5) + l5, e5, Region::Origin),
            (ln_or_nan(self.k3) + l3, e3, Region::Infinity),
        ]
    }

    /// Most accurate `ln w(z)`.
    fn ln_w(&self, z: f64) -> (C, f64, Region) {
        self.candidates(z)
            .into_iter()
            .filter(|c| c.0.re.is_finite() || c.0.re == f64::NEG_INFINITY)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((C::new(f64::NAN, 0.0), f64::INFINITY, Region::Floquet))
    }

    /// `ln` of the unnormalized `R` at `r`.
    fn ln_r(&self, r: f64) -> (C, f64, Region) {
        let z = r.powf(1.0 / self.k);
        let (lw, e, reg) = self.ln_w(z);
        (lw + 0.5 * (self.k - 1.0) * z.ln(), e, reg)
    }

    /// Normalized, phase-free `R(r)`; `RegionGap` when no representation is
    /// accurate enough.
    pub fn evaluate(&self, r: f64) -> Result<WavefunctionPoint> {
        let (lr, e, region) = self.ln_r(r);
        if !(e <= POINT_TOL) {
            return Err(Error::RegionGap(e));
        }
        let value = if lr.re == f64::NEG_INFINITY { C::new(0.0, 0.0) } else { self.scale * lr.exp() };
        Ok(WavefunctionPoint { r, value, rel_error: e, region })
    }

    /// `n` equally spaced points across the support.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.support;
        let n = n.max(2);
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn sample(&self, rs: &[f64]) -> Vec<Result<WavefunctionPoint>> {
        rs.iter().map(|&r| self.evaluate(r)).collect()
    }

    /// Integrand of `int |R|^2 dr` in `u = ln z`: `k z^(2k-1) |w|^2`, as a log.
    fn ln_density(&self, u: f64) -> f64 {
        let z = u.exp();
        let (lw, _, _) = self.ln_w(z);
        self.k.ln() + (2.0 * self.k - 1.0) * u + 2.0 * lw.re
    }

    fn normalize(&mut self) -> Result<()> {
        const DROP: f64 = 46.0; // e^-46 ~ 1e-20
        let step = 0.05;
        // coarse scan for the peak, widened until both ends are negligible
        let (mut lo, mut hi) = (-4.0f64, 4.0f64);
        let (peak_u, peak) = loop {
            let n = ((hi - lo) / step) as usize;
            let (pu, pv) = (0..=n)
                .map(|i| lo + i as f64 * step)
                .map(|u| (u, self.ln_density(u)))
                .filter(|p| p.1.is_finite())
                .fold((0.0, f64::NEG_INFINITY), |b, p| if p.1 > b.1 { p } else { b });
            if !pv.is_finite() {
                return Err(Error::QuadratureFailure("density is not finite anywhere".into()));
            }
            let low_end = self.ln_density(lo);
            let high_end = self.ln_density(hi);
            let mut grown = false;
            if !(low_end < pv - DROP) && lo > -60.0 {
                lo -= 4.0;
                grown = true;
            }
            if !(high_end < pv - DROP) && hi < 60.0 {
                hi += 4.0;
                grown = true;
            }
            if !grown {
                break (pu, pv);
            }
        };
        let edge = |dir: f64| {
            let mut u = peak_u;
            while (self.ln_density(u) > peak - DROP) && (u - peak_u).abs() < 120.0 {
                u += dir * step;
            }
            u
        };
        let (ua, ub) = (edge(-1.0), edge(1.0));
        let dens = |u: f64| (self.ln_density(u) - peak).exp();
        let mut panels = 32;
        let mut prev = composite(dens, ua, ub, panels).0;
        let mut change;
        loop {
            panels *= 2;
            let cur = composite(dens, ua, ub, panels).0;
            change = ((cur - prev) / cur).abs();
            prev = cur;
            if change < 1e-10 {
                break;
            }
            if panels >= 8192 {
                return Err(Error::QuadratureFailure(format!("norm integral changed by {change:e} at {panels} panels")));
            }
        }
        // Laplace estimates of the two exponential tails
        let tail = |u: f64, dir: f64| {
            let h = 1e-3;
            let slope = (self.ln_density(u + dir * h) - self.ln_density(u)) / h;
            if slope < 0.0 {
                dens(u) / -slope
            } else {
                0.0
            }
        };
        let integral = prev + tail(ua, -1.0) + tail(ub, 1.0);
        let to_r = |u: f64| (self.k * u).exp();
        self.support = (to_r(ua), to_r(ub));
        self.panels = panels;
        self.quadrature_change = change;
        // ln scale = -(peak + ln integral)/2; phase from the support midpoint
        let magnitude = (-(peak + integral.ln()) / 2.0).exp();
        self.scale = C::new(magnitude, 0.0);
        let mid = 0.5 * (self.support.0 + self.support.1);
        let (lr, _, _) = self.ln_r(mid);
        self.scale *= C::from_polar(1.0, -lr.im);
        Ok(())
    }

    /// Sign changes of `Re R` on `n` grid points (points below `1e-6` of the
    /// largest magnitude are ignored).
    pub fn nodes(&self, n: usize) -> Result<usize> {
        let pts: Vec<WavefunctionPoint> = self.sample(&self.grid(n)).into_iter().collect::<Result<_>>()?;
        let peak = pts.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
        let mut count = 0;
        let mut last = 0.0f64;
        for p in pts.iter().filter(|p| p.value.norm() > 1e-6 * peak) {
            if last != 0.0 && p.value.re.signum() != last.signum() {
                count += 1;
            }
            last = p.value.re;
        }
        Ok(count)
    }

    /// `max |Im R| / max |R|` on `n` grid points.
    pub fn imaginary_residue(&self, n: usize) -> Result<f64> {
        let pts: Vec<WavefunctionPoint> = self.sample(&self.grid(n)).into_iter().collect::<Result<_>>()?;
        let peak = pts.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
        Ok(pts.iter().map(|p| p.value.im.abs()).fold(0.0, f64::max) / peak)
    }

    /// Largest relative disagreement between the Floquet and an asymptotic
    /// representation where both are estimated better than `tol`.
    pub fn overlap_discrepancy(&self, n: usize, tol: f64) -> (f64, usize) {
        let mut worst = 0.0f64;
        let mut compared = 0;
        for r in self.grid(n) {
            let z = r.powf(1.0 / self.k);
            let [f, o, i] = self.candidates(z);
            for other in [o, i] {
                if f.1 < tol && other.1 < tol {
                    let d = ((other.0 - f.0).exp() - 1.0).norm();
                    worst = worst.max(d);
                    compared += 1;
                }
            }
        }
        (worst, compared)
    }

    /// `r,Re_R,Im_R`, one row per point.
    pub fn write_csv<W: Write>(&self, points: &[WavefunctionPoint], mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,Re_R,Im_R")?;
        for p in points {
            writeln!(out, "{:.15e},{:.15e},{:.15e}", p.r, p.value.re, p.value.im)?;
        }
        Ok(())
    }
}
