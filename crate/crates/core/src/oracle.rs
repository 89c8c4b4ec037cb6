//! Independent shooting solver for the radial equation
//! `R'' = (l(l+1)/r^2 + V(r) - E) R`, used to cross-check eigenvalues and
//! count nodes.  It shares nothing with the series machinery except the ODE
//! integrator and the root finder.

use crate::error::{Error, Result};
use crate::model::PotentialSpec;
use crate::ode::{integrate, OdeOptions};
use crate::quadrature::composite;
use crate::roots::brent;
use num_traits::ToPrimitive;
use serde::Serialize;

/// `V(r) = sum a r^q` with any real exponents; unlike `PotentialSpec` the
/// origin need not be singular.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialPotential {
    pub terms: Vec<(f64, f64)>,
    pub l: u32,
}

impl From<&PotentialSpec> for RadialPotential {
    fn from(p: &PotentialSpec) -> Self {
        Self { terms: p.terms().iter().map(|t| (t.q.to_f64().unwrap(), t.a)).collect(), l: p.l() }
    }
}

impl RadialPotential {
    pub fn new(terms: Vec<(f64, f64)>, l: u32) -> Self {
        Self { terms, l }
    }

    /// Effective potential including the centrifugal term.
    pub fn effective(&self, r: f64) -> f64 {
        let l = self.l as f64;
        l * (l + 1.0) / (r * r) + self.terms.iter().map(|&(q, a)| a * r.powf(q)).sum::<f64>()
    }

    /// Whether the origin is strongly repulsive (exponent below -2).
    pub fn spiked(&self) -> bool {
        self.terms.iter().any(|&(q, a)| q < -2.0 && a > 0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShootingOptions {
    pub rtol: f64,
    pub energy_tol: f64,
    /// WKB action `int sqrt(Q) dr` required through each forbidden region.
    pub action: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, energy_tol: 1e-10, action: 69.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShootingResult {
    pub energy: f64,
    pub mismatch: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    pub r_match: f64,
    pub nodes: usize,
    pub iterations: usize,
}

/// Mismatch at one energy together with the geometry used.
#[derive(Debug, Clone, Copy)]
pub struct Shot {
    /// Wronskian of the two partial solutions, each normalized to unit
    /// `(R, R')` length at the matching point.
    pub mismatch: f64,
    pub nodes: usize,
    pub r_inner: f64,
    pub r_outer: f64,
    pub r_match: f64,
}

const LN_R_MIN: f64 = -12.0;
const LN_R_MAX: f64 = 8.0;

fn minimize_effective(p: &RadialPotential) -> f64 {
    let n = 800;
    let at = |i: usize| LN_R_MIN + (LN_R_MAX - LN_R_MIN) * i as f64 / n as f64;
    let best = (0..=n).min_by(|&a, &b| p.effective(at(a).exp()).total_cmp(&p.effective(at(b).exp()))).unwrap();
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(n)));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if p.effective(c.exp()) < p.effective(d.exp()) {
            b = d;
        } else {
            a = c;
        }
    }
    (0.5 * (a + b)).exp()
}

/// Point where `Q = V_eff - E` changes sign between `a` and `b` (log scale).
fn turning_point(p: &RadialPotential, e: f64, a: f64, b: f64) -> f64 {
    let q = |x: f64| Ok::<_, ()>(p.effective(x.exp()) - e);
    match brent(q, a.ln(), b.ln(), 1e-14, 200) {
        Ok(Some(r)) => r.x.exp(),
        _ => b,
    }
}

/// `int_a^b sqrt(max(Q, 0)) dr`, integrated in `ln r`.
fn action(p: &RadialPotential, e: f64, a: f64, b: f64) -> f64 {
    let f = |u: f64| {
        let r = u.exp();
        (p.effective(r) - e).max(0.0).sqrt() * r
    };
    composite(f, a.ln(), b.ln(), 64).0.abs()
}

/// Distance from `turn` into the forbidden region at which the action
/// reaches `target` (bisection in `ln r`).
fn forbidden_start(p: &RadialPotential, e: f64, turn: f64, inward: bool, target: f64) -> f64 {
    let at = |step: f64| if inward { turn * (-step).exp() } else { turn * step.exp() };
    let reach = |step: f64| {
        let r = at(step);
        if inward {
            action(p, e, r, turn)
        } else {
            action(p, e, turn, r)
        }
    };
    let limit = if inward { turn.ln() - LN_R_MIN + 30.0 } else { LN_R_MAX - turn.ln() };
    let (mut lo, mut hi) = (0.0, 0.05f64);
    while reach(hi) < target && hi < limit {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if reach(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(hi)
}

/// Integrates inward and outward to the matching point at energy `e`.
pub fn shoot(p: &RadialPotential, e: f64, opts: &ShootingOptions) -> Result<Shot> {
    let r_min = minimize_effective(p);
    let lo = LN_R_MIN.exp();
    let hi = LN_R_MAX.exp();
    let allowed = p.effective(r_min) < e;
    let (t_in, t_out) = if allowed {
        let t_in = if p.spiked() { turning_point(p, e, lo, r_min) } else { 0.0 };
        (t_in, turning_point(p, e, r_min, hi))
    } else {
        (r_min, r_min)
    };
    let r_match = if allowed { 0.5 * (t_in + t_out) } else { r_min };
    let r_outer = forbidden_start(p, e, t_out.max(r_match), false, opts.action);
    let r_inner = if p.spiked() { forbidden_start(p, e, t_in, true, opts.action) } else { 1e-6 };

    // In u = ln r with y = (R, r R'): y0' = y1, y1' = y1 + r^2 Q y0.
    let q = |r: f64| p.effective(r) - e;
    let rhs = |u: f64, y: &[f64; 2]| {
        let r = u.exp();
        [y[1], y[1] + r * r * q(r) * y[0]]
    };
    let ode = |span: f64| OdeOptions { rtol: opts.rtol, atol: 1e-280, h_max: span.abs() / 64.0, max_steps: 2_000_000 };
    // dominant WKB direction: R'/R = +-sqrt(Q) - Q'/(4Q)
    let wkb = |r: f64, sign: f64| {
        let qr = q(r);
        let h = 1e-6 * r;
        let dq = (q(r + h) - q(r - h)) / (2.0 * h);
        [1.0, r * (sign * qr.sqrt() - dq / (4.0 * qr))]
    };
    let start_in = if p.spiked() { wkb(r_inner, 1.0) } else { [1.0, p.l as f64 + 1.0] };
    let (u_in, u_match, u_out) = (r_inner.ln(), r_match.ln(), r_outer.ln());
    let mut nodes = 0;
    let mut last = start_in[0];
    let (yi, _) = integrate(rhs, u_in, u_match, start_in, &ode(u_match - u_in), |_, y| {
        if y[0] != 0.0 && y[0].signum() != last.signum() {
            nodes += 1;
        }
        last = y[0];
    })
    .map_err(|m| Error::StiffnessFailure(format!("outward integration from r = {r_inner:e}: {m}")))?;
    let mut last = 1.0f64;
    let (yo, _) = integrate(rhs, u_out, u_match, wkb(r_outer, -1.0), &ode(u_out - u_match), |_, y| {
        if y[0] != 0.0 && y[0].signum() != last.signum() {
            nodes += 1;
        }
        last = y[0];
    })
    .map_err(|m| Error::StiffnessFailure(format!("inward integration from r = {r_outer:e}: {m}")))?;
    let (ri, rpi) = (yi[0], yi[1] / r_match);
    let (ro, rpo) = (yo[0], yo[1] / r_match);
    let mismatch = (ri * rpo - rpi * ro) / (ri.hypot(rpi) * ro.hypot(rpo));
    if !mismatch.is_finite() {
        return Err(Error::StiffnessFailure(format!("non-finite mismatch at E = {e}")));
    }
    Ok(Shot { mismatch, nodes, r_inner, r_outer, r_match })
}

/// Refines a sign change of the mismatch inside `[lo, hi]`.
pub fn shoot_eigenvalue(p: &RadialPotential, lo: f64, hi: f64, opts: &ShootingOptions) -> Result<ShootingResult> {
    let f = |e: f64| shoot(p, e, opts).map(|s| s.mismatch);
    let root = brent(f, lo, hi, opts.energy_tol, 200)?.ok_or(Error::NoSignChange { lo, hi })?;
    let s = shoot(p, root.x, opts)?;
    Ok(ShootingResult {
        energy: root.x,
        mismatch: s.mismatch,
        r_inner: s.r_inner,
        r_outer: s.r_outer,
        r_match: s.r_match,
        nodes: s.nodes,
        iterations: root.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_levels() {
        let p = RadialPotential::new(vec![(2.0, 1.0)], 0);
        let o = ShootingOptions::default();
        let r = shoot_eigenvalue(&p, 2.5, 3.5, &o).unwrap();
        assert!((r.energy - 3.0).abs() < 1e-7, "{}", r.energy);
        assert_eq!(r.nodes, 0);
        let r = shoot_eigenvalue(&p, 6.5, 7.5, &o).unwrap();
        assert!((r.energy - 7.0).abs() < 1e-7, "{}", r.energy);
        assert_eq!(r.nodes, 1);
    }

    #[test]
    fn centrifugal_levels() {
        // 2n + l + 3/2 in units where -R'' + r^2 R = E R: E = 4n + 2l + 3
        let p = RadialPotential::new(vec![(2.0, 1.0)], 2);
        let r = shoot_eigenvalue(&p, 6.5, 7.5, &ShootingOptions::default()).unwrap();
        assert!((r.energy - 7.0).abs() < 1e-7, "{}", r.energy);
    }
}
