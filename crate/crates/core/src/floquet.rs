//! Floquet solutions `w = z^nu sum c_n z^n` about the origin.
//!
//! Indices come from the circuit matrix (monodromy around `z = 0`); the
//! Laurent coefficients are refined by Newton iteration on the truncated
//! three-term-like recurrence, and the tails are then rebuilt from the
//! recurrence itself so that their relative accuracy survives into the
//! factorially weighted extraction sums.

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::model::CanonicalEquation;
use crate::ode::{integrate, OdeOptions};
use crate::settings::{Normalization, SolverSettings};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

type C = Complex64;

fn cplx(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Monodromy of the solutions fixed by `(w, w') = (1, 0), (0, 1)` at `z = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct CircuitMatrix {
    /// Rotation order `d` of the coefficient lattice; `sector` is the map for `z -> e^{2 pi i/d} z`.
    pub order: usize,
    pub sector: [[C; 2]; 2],
    /// Full turn `z -> e^{2 pi i} z`.
    pub full: [[C; 2]; 2],
    /// `|det(full) - 1|`.
    pub residual_det: f64,
    pub integration_steps: usize,
}

/// Integrates around the unit circle, reporting both the sector and full-turn maps.
pub fn circuit_matrix(eq: &CanonicalEquation, settings: &SolverSettings) -> Result<CircuitMatrix> {
    circuit_matrix_with_steps(eq, settings, settings.circuit_steps)
}

pub fn circuit_matrix_with_steps(
    eq: &CanonicalEquation,
    settings: &SolverSettings,
    steps: usize,
) -> Result<CircuitMatrix> {
    let d = eq.lattice.max(1);
    let i = cplx(0.0, 1.0);
    let rhs = |theta: f64, y: &[C; 4]| {
        let z = C::from_polar(1.0, theta);
        let gz = eq.eval(z) / z;
        [i * z * y[1], i * gz * y[0], i * z * y[3], i * gz * y[2]]
    };
    let opts = OdeOptions {
        rtol: settings.circuit_rtol,
        atol: settings.circuit_rtol * 1e-3,
        h_max: 2.0 * PI / steps.max(16) as f64,
        max_steps: 20 * steps.max(16) + 2_000_000,
    };
    // The turn is split into segments over which solutions grow by at most
    // about e, so each segment propagator is well conditioned.  The
    // determinant of the product is the product of their determinants; the
    // assembled matrix can have entries far beyond 1/eps, where expanding
    // its determinant directly would lose every digit.
    let per_sector = ((eq.abs_sum().sqrt() * 2.0 * PI / d as f64).ceil() as usize).clamp(8, 4096);
    let h = 2.0 * PI / (d * per_sector) as f64;
    let mut acc = [[cplx(1.0, 0.0), cplx(0.0, 0.0)], [cplx(0.0, 0.0), cplx(1.0, 0.0)]];
    let mut sector = acc;
    let mut det = cplx(1.0, 0.0);
    let mut accepted = 0;
    let y0 = [cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0)];
    for seg in 0..d * per_sector {
        let (t0, t1) = (seg as f64 * h, (seg + 1) as f64 * h);
        let (y, st) = integrate(rhs, t0, t1, y0, &opts, |_, _| {}).map_err(Error::IntegrationDiverged)?;
        accepted += st.accepted;
        let p = [[y[0], y[2]], [y[1], y[3]]];
        det *= p[0][0] * p[1][1] - p[0][1] * p[1][0];
        acc = mat_mul(&p, &acc);
        if seg + 1 == per_sector {
            sector = acc;
        }
    }
    let omega = C::from_polar(1.0, 2.0 * PI / d as f64);
    let sector = [[sector[0][0], sector[0][1]], [omega * sector[1][0], omega * sector[1][1]]];
    Ok(CircuitMatrix { order: d, sector, full: acc, residual_det: (det - 1.0).norm(), integration_steps: accepted })
}

fn mat_mul(a: &[[C; 2]; 2], b: &[[C; 2]; 2]) -> [[C; 2]; 2] {
    let mut out = [[cplx(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// Whether the two indices are real or a complex-conjugate pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Real,
    Conjugate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexPair {
    pub nu: [C; 2],
    pub regime: Regime,
    pub lattice: usize,
}

fn reduce(x: f64, lo: f64, period: f64) -> f64 {
    // representative in (lo, lo + period]
    x - period * ((x - lo) / period).ceil() + period
}

/// Cold-start re-seeds after a Newton failure.
const NEWTON_RETRIES: usize = 3;

/// Index separation below which a failed refinement is attributed to the
/// nearby merger of the two indices.
const NEAR_DEGENERATE: f64 = 1e-3;

fn lattice_distance(x: C, d: f64) -> f64 {
    let r = x.re - d * (x.re / d).round();
    cplx(r, x.im).norm()
}

/// Eigenvalues of the sector map, converted to indices and labelled.
///
/// Real pair: `nu1` is the largest representative not above 1/2 and
/// `nu2 = 1 - nu1`.  Conjugate pair: `nu1 = a + i|y|`, `nu2 = conj(nu1)`
/// with `a` in `(-d/2, d/2]`.  `index_offset` then shifts `nu1` down (and,
/// for a real pair, `nu2` up) by that many lattice steps.
pub fn initial_indices(cm: &CircuitMatrix, settings: &SolverSettings) -> Result<IndexPair> {
    let d = cm.order as f64;
    let s = &cm.sector;
    let omega = C::from_polar(1.0, 2.0 * PI / d);
    let tr = s[0][0] + s[1][1];
    let disc = (tr * tr - 4.0 * omega).sqrt();
    let big = if (tr + disc).norm() >= (tr - disc).norm() { (tr + disc) / 2.0 } else { (tr - disc) / 2.0 };
    let small = omega / big;
    let to_nu = |l: C| {
        let ln = l.ln();
        cplx(ln.im, -ln.re) * (d / (2.0 * PI))
    };
    let (na, nb) = (to_nu(big), to_nu(small));
    if !na.re.is_finite() || !na.im.is_finite() {
        return Err(Error::IntegrationDiverged("non-finite circuit eigenvalue".into()));
    }
    if lattice_distance(na - nb, d) < settings.degeneracy_tol {
        return Err(Error::DegenerateIndices { nu1: format!("{na}"), nu2: format!("{nb}") });
    }
    let m = settings.index_offset as f64 * d;
    if big.norm().ln().abs() > 1e-9 {
        let a = reduce(na.re, -d / 2.0, d);
        let nu1 = cplx(a - m, na.im.abs());
        Ok(IndexPair { nu: [nu1, nu1.conj()], regime: Regime::Conjugate, lattice: cm.order })
    } else {
        let ra = reduce(na.re, 0.5 - d, d);
        let rb = reduce(nb.re, 0.5 - d, d);
        let nu1 = ra.max(rb);
        Ok(IndexPair {
            nu: [cplx(nu1 - m, 0.0), cplx(1.0 - nu1 + m, 0.0)],
            regime: Regime::Real,
            lattice: cm.order,
        })
    }
}

/// Laurent coefficients on the lattice `n = lo, lo + d, ..., hi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloquetSolution {
    pub nu: C,
    pub lattice: usize,
    pub lo: i64,
    pub hi: i64,
    coeffs: Vec<C>,
    /// Newton window `[-M, N]` that fixed the solution.
    pub window: (usize, usize),
    pub newton_iterations: usize,
    /// Recurrence residual of each accepted Newton iterate.
    pub residual_history: Vec<f64>,
    pub tail_sweeps: usize,
}

impl FloquetSolution {
    /// `c_n`; zero off the lattice or outside the stored range.
    pub fn coeff(&self, n: i64) -> C {
        let d = self.lattice as i64;
        if n < self.lo || n > self.hi || (n - self.lo) % d != 0 {
            return C::new(0.0, 0.0);
        }
        self.coeffs[((n - self.lo) / d) as usize]
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (self.lo..=self.hi).step_by(self.lattice)
    }

    pub fn coefficients(&self) -> &[C] {
        &self.coeffs
    }

    pub fn conj(&self) -> Self {
        let mut s = self.clone();
        s.nu = s.nu.conj();
        s.coeffs.iter_mut().for_each(|c| *c = c.conj());
        s
    }

    /// Multiplies every coefficient by `f`.
    pub fn scale(&mut self, f: C) {
        self.coeffs.iter_mut().for_each(|c| *c *= f);
    }

    /// `(w, w', relative error)` at real `z > 0`; the error counts rounding
    /// and the truncation of the window.
    pub fn eval(&self, z: f64) -> (C, C, f64) {
        let lz = z.ln();
        let mut w = C::new(0.0, 0.0);
        let mut dw = C::new(0.0, 0.0);
        let mut mag = 0.0;
        let mut ends = [0.0; 2];
        for (n, c) in self.indices().zip(&self.coeffs) {
            if *c == C::new(0.0, 0.0) {
                continue;
            }
            let p = self.nu + n as f64;
            let t = (c.ln() + p * lz).exp();
            w += t;
            dw += t * p / z;
            mag += t.norm();
            if ends[0] == 0.0 {
                ends[0] = t.norm();
            }
            ends[1] = t.norm();
        }
        // rounding plus the size of the outermost retained terms (truncation)
        let rel = (f64::EPSILON * mag + ends[0] + ends[1]) / w.norm().max(f64::MIN_POSITIVE);
        (w, dw, rel)
    }

    /// Writes `n,Re c_n,Im c_n`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,Re_c,Im_c")?;
        for (n, c) in self.indices().zip(&self.coeffs) {
            writeln!(out, "{n},{:.16e},{:.16e}", c.re, c.im)?;
        }
        Ok(())
    }
}

/// Truncated recurrence matrix `B(nu)` on lattice indices `nlo, nlo+d, ...`.
fn build_matrix(eq: &CanonicalEquation, nu: C, nlo: i64, dim: usize) -> BandMatrix {
    let d = eq.lattice as i64;
    let kl = 2 * eq.n / eq.lattice;
    let ku = 2 * eq.m / eq.lattice;
    let mut b = BandMatrix::zeros(dim, kl, ku);
    let g0 = eq.g(0);
    for i in 0..dim {
        let n = (nlo + i as i64 * d) as f64;
        b.set(i, i, (nu + n) * (nu + n - 1.0) - g0);
        for (s, gs) in eq.terms() {
            if s == 0 {
                continue;
            }
            let j = i as i64 - s / d;
            if j >= 0 && (j as usize) < dim {
                b.set(i, j as usize, cplx(-gs, 0.0));
            }
        }
    }
    b
}

fn norm(v: &[C]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalized(v: Vec<C>) -> Vec<C> {
    let s = 1.0 / norm(&v);
    v.into_iter().map(|x| x * s).collect()
}

struct NewtonResult {
    nu: C,
    c: Vec<C>,
    iterations: usize,
    history: Vec<f64>,
}

fn residual(eq: &CanonicalEquation, nu: C, c: &[C], nlo: i64, scale: f64) -> f64 {
    let b = build_matrix(eq, nu, nlo, c.len());
    norm(&b.mul_vec(c)) / (norm(c) * scale)
}

/// Inverse-iteration seed for the null vector of `B(nu)`.
pub fn initial_coefficients(eq: &CanonicalEquation, nu: C, nlo: i64, dim: usize) -> Result<Vec<C>> {
    let lu = build_matrix(eq, nu, nlo, dim)
        .factor()
        .ok_or_else(|| Error::SingularTruncation(format!("B(nu) singular at nu = {nu}")))?;
    let mut c = vec![cplx(1.0, 0.0); dim];
    for _ in 0..3 {
        c = normalized(lu.solve(&c));
        if c.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::SingularTruncation("inverse iteration overflowed".into()));
        }
    }
    Ok(c)
}

/// Bordered Newton iteration on `(nu, c)` with `B(nu) c = 0`, `|c| = 1`,
/// Plain Newton steps until the index settles; afterwards the steps are
/// damped so that the residual never increases between accepted iterates.
fn newton(
    eq: &CanonicalEquation,
    nu0: C,
    c0: Vec<C>,
    nlo: i64,
    settings: &SolverSettings,
) -> Result<NewtonResult> {
    let d = eq.lattice as i64;
    let dim = c0.len();
    let nmax = (nlo.abs().max((nlo + (dim as i64 - 1) * d).abs()) + 2) as f64;
    let scale = nmax * nmax + nu0.norm_sqr() + eq.abs_sum();
    let mut nu = nu0;
    let mut c = normalized(c0);
    let mut r = residual(eq, nu, &c, nlo, scale);
    let mut history = vec![r];
    let mut local = false;
    for it in 1..=settings.newton_max_iter {
        let lu = build_matrix(eq, nu, nlo, dim)
            .factor()
            .ok_or_else(|| Error::SingularTruncation(format!("B(nu) singular at nu = {nu}")))?;
        let u: Vec<C> = (0..dim)
            .map(|i| c[i] * ((nlo + i as i64 * d) as f64 * 2.0 - 1.0 + 2.0 * nu))
            .collect();
        let x = lu.solve(&u);
        let chx: C = c.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
        if chx.norm() == 0.0 || !chx.re.is_finite() {
            return Err(Error::NoConvergence { what: "Floquet Newton".into(), residual: r });
        }
        let dnu = -1.0 / chx;
        let c_new: Vec<C> = x.iter().map(|v| -dnu * v).collect();
        if !local {
            // global phase: plain Newton until the index settles
            let step = dnu.norm();
            nu += dnu;
            c = normalized(c_new);
            r = residual(eq, nu, &c, nlo, scale);
            if step < 1e-4 * nu.norm().max(1.0) {
                local = true;
                history = vec![r];
            }
            continue;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let nu_t = nu + dnu * t;
            let c_t = if t == 1.0 {
                c_new.clone()
            } else {
                normalized(c.iter().zip(&c_new).map(|(a, b)| a + (b - a) * t).collect())
            };
            let r_t = residual(eq, nu_t, &c_t, nlo, scale);
            if r_t <= r * (1.0 + 1e-12) || r_t < 1e-15 {
                accepted = Some((nu_t, c_t, r_t));
                break;
            }
            t *= 0.5;
        }
        let Some((nu_t, c_t, r_t)) = accepted else {
            // no descent direction left: we sit on the rounding floor
            return Ok(NewtonResult { nu, c, iterations: it, history });
        };
        let step = (nu_t - nu).norm() + norm(&c_t.iter().zip(&c).map(|(a, b)| a - b).collect::<Vec<_>>());
        nu = nu_t;
        c = c_t;
        r = r_t;
        history.push(r);
        if step < settings.newton_tol * nu.norm().max(1.0) {
            return Ok(NewtonResult { nu, c, iterations: it, history });
        }
    }
    if r < 1e-13 {
        return Ok(NewtonResult { nu, c, iterations: settings.newton_max_iter, history });
    }
    Err(Error::NoConvergence { what: "Floquet Newton".into(), residual: r })
}

fn phase_aligned(c: &[C]) -> Vec<C> {
    let (imax, _) = c
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
    let p = c[imax].conj() / c[imax].norm();
    c.iter().map(|v| v * p).collect()
}

/// Rebuilds the tails from the recurrence.  Entries beyond the point where
/// both `|c_n| < 1e-3 max|c|` and the diagonal dominates are recomputed by
/// Gauss-Seidel sweeps, and the range is extended until the coefficients
/// underflow.  Returns `(lo, coeffs, sweeps)`.
fn refine_tails(
    eq: &CanonicalEquation,
    nu: C,
    nlo: i64,
    mut c: Vec<C>,
    max_extent: usize,
) -> (i64, Vec<C>, usize) {
    let d = eq.lattice as i64;
    let g0 = eq.g(0);
    let off: Vec<(i64, f64)> = eq.terms().filter(|t| t.0 != 0).collect();
    let offsum: f64 = off.iter().map(|t| t.1.abs()).sum();
    let diag = |n: i64| (nu + n as f64) * (nu + n as f64 - 1.0) - g0;
    let cmax = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let dim = c.len() as i64;
    let z = cplx(0.0, 0.0);
    // boundaries, as lattice positions relative to nlo
    let i0 = ((0 - nlo) / d).clamp(0, dim - 1);
    let small = |i: i64, c: &[C]| c[i as usize].norm() < 1e-3 * cmax;
    let dominant = |i: i64| diag(nlo + i * d).norm() > 2.0 * offsum;
    let mut p = i0;
    while p < dim && !(small(p, &c) && dominant(p) && (p..dim).all(|j| dominant(j))) {
        p += 1;
    }
    let mut q = i0;
    while q >= 0 && !(small(q, &c) && dominant(q) && (0..=q).all(|j| dominant(j))) {
        q -= 1;
    }
    // extend by a forward pass until underflow
    let reach = off.iter().map(|t| t.0.unsigned_abs() as usize).max().unwrap_or(1) / d as usize;
    let extend = |c: &mut Vec<C>, lo: &mut i64, upward: bool| {
        let mut quiet = 0;
        let mut added = 0;
        while quiet < 2 * reach + 2 && added < max_extent {
            let val = |c: &Vec<C>, lo: i64, n: i64| -> C {
                let mut s = z;
                for &(sh, gs) in &off {
                    let m = n - sh;
                    if m >= lo && m < lo + c.len() as i64 * d {
                        s += c[((m - lo) / d) as usize] * gs;
                    }
                }
                s / diag(n)
            };
            let v;
            if upward {
                let n = *lo + c.len() as i64 * d;
                v = val(c, *lo, n);
                c.push(v);
            } else {
                let n = *lo - d;
                v = val(c, *lo, n);
                c.insert(0, v);
                *lo -= d;
            }
            added += 1;
            if v.norm() < 1e-300 * cmax {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
    };
    let mut lo = nlo;
    extend(&mut c, &mut lo, true);
    let before = c.len();
    extend(&mut c, &mut lo, false);
    let added_low = (c.len() - before) as i64;
    let p = p + added_low;
    let q = q + added_low;
    let len = c.len() as i64;
    for i in (p..len).chain(0..=q.max(-1)) {
        if i >= 0 && i < len && c[i as usize].norm() < 1e-3 * cmax {
            c[i as usize] = z;
        }
    }
    let update = |c: &mut Vec<C>, i: i64| -> f64 {
        let n = lo + i * d;
        let mut s = z;
        for &(sh, gs) in &off {
            let j = i - sh / d;
            if j >= 0 && j < len {
                s += c[j as usize] * gs;
            }
        }
        let v = s / diag(n);
        let old = c[i as usize];
        c[i as usize] = v;
        if v.norm() < 1e-300 * cmax {
            0.0
        } else {
            (v - old).norm() / v.norm()
        }
    };
    let mut sweeps = 0;
    for _ in 0..400 {
        sweeps += 1;
        let mut change: f64 = 0.0;
        for i in p.max(0)..len {
            change = change.max(update(&mut c, i));
        }
        let mut i = q;
        while i >= 0 {
            change = change.max(update(&mut c, i));
            i -= 1;
        }
        if change < 1e-15 {
            break;
        }
    }
    (lo, c, sweeps)
}

/// Refines the Floquet solution with index near `nu0`, labelled so that its
/// index is `nu0` up to rounding (a converged index differing by a lattice
/// multiple is relabelled).
pub fn refine_floquet(eq: &CanonicalEquation, nu0: C, settings: &SolverSettings) -> Result<FloquetSolution> {
    let d = eq.lattice.max(1);
    let di = d as i64;
    let base = 40 * eq.n.max(1);
    let round_up = |x: usize| x.div_ceil(d) * d;
    let mut mw = round_up(settings.window_m.unwrap_or(base));
    let mut nw = round_up(settings.window_n.unwrap_or(base));
    let grow = round_up(settings.window_growth.max(1));
    let mut last_err = None;
    while mw.max(nw) <= settings.max_window {
        let nlo = -(mw as i64);
        let dim = (mw + nw) / d + 1;
        let seed = initial_coefficients(eq, nu0, nlo, dim)?;
        let a = match newton(eq, nu0, seed, nlo, settings) {
            Ok(a) => a,
            Err(e) => {
                last_err = Some(e);
                mw += grow;
                nw += grow;
                continue;
            }
        };
        let amax = a.c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tails_ok = a.c[0].norm() < 1e-20 * amax && a.c[dim - 1].norm() < 1e-20 * amax;
        // recheck on a window enlarged by one growth step
        let nlo2 = nlo - grow as i64;
        let dim2 = dim + 2 * grow / d;
        let mut seed2 = vec![cplx(0.0, 0.0); grow / d];
        seed2.extend_from_slice(&a.c);
        seed2.resize(dim2, cplx(0.0, 0.0));
        let b = newton(eq, a.nu, seed2, nlo2, settings)?;
        let pa = phase_aligned(&a.c);
        let pb = phase_aligned(&b.c[grow / d..grow / d + dim]);
        let dc = pa.iter().zip(&pb).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let stable = (b.nu - a.nu).norm() < 1e-12 * a.nu.norm().max(1.0) && dc < 1e-10 * amax;
        if !(tails_ok && stable) {
            last_err = Some(Error::InsufficientWindow(format!(
                "window [-{mw}, {nw}]: tails {:e}, index change {:e}, coefficient change {:e}",
                a.c[0].norm().max(a.c[dim - 1].norm()) / amax,
                (b.nu - a.nu).norm(),
                dc / amax
            )));
            mw += grow;
            nw += grow;
            continue;
        }
        // relabel if Newton slid to another representative of the same class
        let shift = (b.nu - nu0).re / d as f64;
        let m = shift.round();
        if (shift - m).abs() > 0.25 || (b.nu - nu0 - m * d as f64).norm() > 0.25 {
            return Err(Error::NoConvergence {
                what: format!("Floquet Newton from index {nu0} (reached {})", b.nu),
                residual: *b.history.last().unwrap(),
            });
        }
        let m = m as i64 * di;
        let nu = b.nu - m as f64;
        let (lo, mut coeffs, sweeps) = refine_tails(eq, b.nu, nlo2, b.c, settings.max_window * 2);
        let lo = lo + m;
        let c0 = coeffs[((0 - lo) / di) as usize];
        match settings.normalization {
            Normalization::Unit => {
                if c0.norm() == 0.0 {
                    return Err(Error::SingularTruncation("c_0 vanishes".into()));
                }
                let f = 1.0 / c0;
                coeffs.iter_mut().for_each(|v| *v *= f);
            }
            Normalization::L2 => {
                coeffs = phase_aligned(&normalized(coeffs));
            }
        }
        if nu.im == 0.0 {
            coeffs.iter_mut().for_each(|v| v.im = 0.0);
        }
        let hi = lo + (coeffs.len() as i64 - 1) * di;
        return Ok(FloquetSolution {
            nu,
            lattice: d,
            lo,
            hi,
            coeffs,
            window: (mw + grow, nw + grow),
            newton_iterations: a.iterations + b.iterations,
            residual_history: a.history.into_iter().chain(b.history).collect(),
            tail_sweeps: sweeps,
        });
    }
    Err(last_err.unwrap_or_else(|| Error::InsufficientWindow("window limit reached".into())))
}

/// Both Floquet solutions at one energy.
#[derive(Debug, Clone, Serialize)]
pub struct FloquetPair {
    pub indices: IndexPair,
    pub solutions: [FloquetSolution; 2],
    pub circuit: Option<CircuitMatrix>,
}

impl FloquetPair {
    pub fn nu(&self) -> [C; 2] {
        [self.solutions[0].nu, self.solutions[1].nu]
    }

    pub fn regime(&self) -> Regime {
        self.indices.regime
    }
}

fn pair_from_indices(
    eq: &CanonicalEquation,
    idx: IndexPair,
    circuit: Option<CircuitMatrix>,
    settings: &SolverSettings,
) -> Result<FloquetPair> {
    let d = idx.lattice as f64;
    // Close to a merger the refinement is ill-conditioned (index error ~ eps
    // / |nu1 - nu2|); its failure there is reported as the degeneracy it is.
    let near = lattice_distance(idx.nu[0] - idx.nu[1], d) < NEAR_DEGENERATE;
    let refine = |nu: C| {
        refine_floquet(eq, nu, settings).map_err(|e| match e {
            Error::InsufficientWindow(_) | Error::NoConvergence { .. } | Error::SingularTruncation(_) if near => {
                Error::DegenerateIndices { nu1: format!("{}", idx.nu[0]), nu2: format!("{}", idx.nu[1]) }
            }
            e => e,
        })
    };
    let w1 = refine(idx.nu[0])?;
    let w2 = match idx.regime {
        Regime::Conjugate => w1.conj(),
        Regime::Real => refine(idx.nu[1])?,
    };
    if lattice_distance(w1.nu - w2.nu, d) < settings.degeneracy_tol {
        return Err(Error::DegenerateIndices { nu1: format!("{}", w1.nu), nu2: format!("{}", w2.nu) });
    }
    let nu = [w1.nu, w2.nu];
    Ok(FloquetPair { indices: IndexPair { nu, ..idx }, solutions: [w1, w2], circuit })
}

/// Cold start: circuit matrix, labelled indices, refined coefficients.
/// A Newton failure re-seeds from a circuit matrix at doubled step count,
/// at most `NEWTON_RETRIES` times.
pub fn floquet_pair(eq: &CanonicalEquation, settings: &SolverSettings) -> Result<FloquetPair> {
    let mut steps = settings.circuit_steps;
    let mut retries = 0;
    loop {
        let cm = circuit_matrix_with_steps(eq, settings, steps)?;
        let idx = initial_indices(&cm, settings)?;
        match pair_from_indices(eq, idx, Some(cm), settings) {
            Err(Error::NoConvergence { .. }) if retries < NEWTON_RETRIES => {
                retries += 1;
                steps *= 2;
            }
            r => return r,
        }
    }
}

/// Warm start from previously converged indices; falls back to a cold start
/// whenever the seeds fail or the regime changed.
pub fn floquet_pair_warm(eq: &CanonicalEquation, warm: &IndexPair, settings: &SolverSettings) -> Result<FloquetPair> {
    let near_transition = match warm.regime {
        Regime::Conjugate => warm.nu[0].im.abs() < 1e-3,
        Regime::Real => lattice_distance(warm.nu[0] - warm.nu[1], warm.lattice as f64) < 1e-3,
    };
    if !near_transition {
        if let Ok(p) = pair_from_indices(eq, *warm, None, settings) {
            let stays_complex = p.solutions[0].nu.im.abs() > 1e-7;
            if (warm.regime == Regime::Conjugate) == stays_complex {
                return Ok(p);
            }
        }
    }
    floquet_pair(eq, settings)
}
