//! Connection factors `w_j = T_{j,3} w_3 + T_{j,4} w_4 = T_{j,5} w_5 + T_{j,6} w_6`
//! from Wronskians evaluated through large-index coefficient identities.

use crate::error::{Error, Result};
use crate::floquet::{FloquetPair, FloquetSolution, Regime};
use crate::model::CanonicalEquation;
use crate::settings::SolverSettings;
use crate::special::ln_gamma;
use crate::thome::{thome_infinity, thome_origin, ThomeInfinity, ThomeOrigin};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

type C = Complex64;

fn zero() -> C {
    C::new(0.0, 0.0)
}

/// Coefficients of `exp(sum_p x_p t^p / p)` in powers of `t`, up to where they
/// become negligible.
fn exp_series(x: &[C]) -> Vec<C> {
    if x.iter().all(|v| v.norm() == 0.0) {
        return vec![C::new(1.0, 0.0)];
    }
    let mut e = vec![C::new(1.0, 0.0)];
    let mut peak: f64 = 1.0;
    let mut quiet = 0;
    let reach = x.len();
    for i in 1..4000 {
        let mut s = zero();
        for (p, xp) in x.iter().enumerate().skip(1) {
            if p <= i {
                s += xp * e[i - p];
            }
        }
        let v = s / i as f64;
        peak = peak.max(v.norm());
        e.push(v);
        if v.norm() < 1e-20 * peak {
            quiet += 1;
            if quiet > reach {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    e
}

/// Floquet coefficients multiplied by the sub-leading exponential,
/// `hat c_n = sum_i e_i c_{n - sign i}`.  Equal to `c` when there is no
/// sub-leading exponent.
pub struct Hatted<'a> {
    sol: &'a FloquetSolution,
    kernel: Vec<C>,
    /// +1 at infinity (kernel in positive powers), -1 at the origin.
    direction: i64,
}

impl<'a> Hatted<'a> {
    /// `x[p]` are the sub-leading exponents `alpha_p` (or `beta_q`), `p < N`.
    pub fn new(sol: &'a FloquetSolution, sub_leading: &[C], direction: i64) -> Self {
        Self { sol, kernel: exp_series(sub_leading), direction }
    }

    pub fn get(&self, n: i64) -> C {
        if self.kernel.len() == 1 {
            return self.sol.coeff(n);
        }
        self.kernel
            .iter()
            .enumerate()
            .map(|(i, e)| e * self.sol.coeff(n - self.direction * i as i64))
            .sum()
    }
}

/// Running-sum controller.  The Thome coefficients can be sparse and vary by
/// orders of magnitude within one recurrence span, so both tests act on the
/// envelope `max |t|` over the last `span` terms: stop once a whole span is
/// negligible, abort if the envelope grows again after having become small.
struct SumControl {
    sum: C,
    quiet: usize,
    recent: std::collections::VecDeque<f64>,
    min_envelope: f64,
    count: usize,
    min_count: usize,
    span: usize,
}

enum Step {
    More,
    Done,
    Diverging,
}

impl SumControl {
    fn new(min_count: usize, span: usize) -> Self {
        Self {
            sum: zero(),
            quiet: 0,
            recent: std::collections::VecDeque::with_capacity(span + 1),
            min_envelope: f64::INFINITY,
            count: 0,
            min_count,
            span: span.max(1),
        }
    }

    fn push(&mut self, t: C) -> Step {
        self.count += 1;
        let m = t.norm();
        if !m.is_finite() {
            return Step::Diverging;
        }
        self.sum += t;
        let s = self.sum.norm();
        self.recent.push_back(m);
        if self.recent.len() > self.span {
            self.recent.pop_front();
        }
        if self.count >= self.span {
            let env = self.recent.iter().copied().fold(0.0, f64::max);
            if env > 0.0 {
                if self.min_envelope < 1e-6 * s && env > 1e4 * self.min_envelope {
                    return Step::Diverging;
                }
                self.min_envelope = self.min_envelope.min(env);
            }
        }
        if m <= 1e-16 * s {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        if self.quiet >= self.span.max(5) && self.count >= self.min_count {
            Step::Done
        } else {
            Step::More
        }
    }
}

/// Outcome of one adaptive sum.
enum SumOutcome {
    Value(C, usize),
    NeedTerms,
}

fn gamma_infinity(hat: &Hatted, nu: C, th: &ThomeInfinity, n: i64) -> Result<SumOutcome> {
    let nn = th.alpha.len() - 1;
    let ni = nn as i64;
    let an = th.alpha[nn];
    let mut ctl = SumControl::new(2 * nn + 2, th.span());
    for (m, am) in th.a.iter().enumerate() {
        let mi = m as i64;
        if !am.re.is_finite() || !am.im.is_finite() {
            return Err(Error::ExtractionUnstable(format!("a_{m} overflowed before gamma_{n} converged")));
        }
        let mut t = an * hat.get(n + mi + 1 - ni);
        for p in 1..nn {
            t += 2.0 * th.alpha[p] * hat.get(n + mi + 1 - p as i64);
        }
        t -= (nu - th.mu + (n + 2 * mi + 1) as f64) * hat.get(n + mi + 1);
        match ctl.push(am * t) {
            Step::More => {}
            Step::Done => return Ok(SumOutcome::Value(ctl.sum, m + 1)),
            Step::Diverging => {
                return Err(Error::ExtractionUnstable(format!("terms of gamma_{n} grow after {m} terms")))
            }
        }
    }
    Ok(SumOutcome::NeedTerms)
}

fn gamma_origin(hat: &Hatted, nu: C, th: &ThomeOrigin, n: i64) -> Result<SumOutcome> {
    let mm = th.beta.len() - 1;
    let mi = mm as i64;
    let bm = th.beta[mm];
    let mut ctl = SumControl::new(2 * mm + 2, th.span());
    for (m, b) in th.b.iter().enumerate() {
        let k = m as i64;
        if !b.re.is_finite() || !b.im.is_finite() {
            return Err(Error::ExtractionUnstable(format!("b_{m} overflowed before gamma_{n} converged")));
        }
        let mut t = -bm * hat.get(n - k + 1 + mi);
        for q in 1..mm {
            t -= 2.0 * th.beta[q] * hat.get(n - k + 1 + q as i64);
        }
        t += (th.rho - nu + (-n + 2 * k - 1) as f64) * hat.get(n - k + 1);
        match ctl.push(b * t) {
            Step::More => {}
            Step::Done => return Ok(SumOutcome::Value(ctl.sum, m + 1)),
            Step::Diverging => {
                return Err(Error::ExtractionUnstable(format!("terms of gamma_{n} grow after {m} terms")))
            }
        }
    }
    Ok(SumOutcome::NeedTerms)
}

/// `Gamma(n + 1 + delta) base^-(n + delta) gamma`, evaluated in log space.
fn weighted(n: usize, delta: C, ln_base: C, gamma: C) -> C {
    if gamma.norm() == 0.0 {
        return zero();
    }
    let nd = delta + n as f64;
    (ln_gamma(nd + 1.0) - nd * ln_base + gamma.ln()).exp()
}

/// Which side of the Stokes line the recessive-branch base is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Average of both sides: the `(-1)^n cos(pi delta)` form.
    Averaged,
    Upper,
    Lower,
}

fn extend_inf(th: &mut ThomeInfinity, settings: &SolverSettings) -> Result<()> {
    if th.terms() >= settings.max_thome_terms {
        return Err(Error::InsufficientWindow(format!(
            "Thome series at infinity needs more than {} terms",
            settings.max_thome_terms
        )));
    }
    th.extend((2 * th.terms()).min(settings.max_thome_terms));
    Ok(())
}

fn extend_org(th: &mut ThomeOrigin, settings: &SolverSettings) -> Result<()> {
    if th.terms() >= settings.max_thome_terms {
        return Err(Error::InsufficientWindow(format!(
            "Thome series at the origin needs more than {} terms",
            settings.max_thome_terms
        )));
    }
    th.extend((2 * th.terms()).min(settings.max_thome_terms));
    Ok(())
}

/// `W[w_j, w_3]` (branch 3) or `W[w_j, w_4]` (branch 4) from index `n`.
/// Returns the value and the number of Thome terms used.
pub fn wronskian_infinity(
    sol: &FloquetSolution,
    th: &mut ThomeInfinity,
    n: usize,
    side: Side,
    settings: &SolverSettings,
) -> Result<(C, usize)> {
    let nn = th.alpha.len() - 1;
    let hat = Hatted::new(sol, &th.alpha[..nn], 1);
    let base = th.alpha[nn].norm() / nn as f64;
    let mut total = zero();
    let mut used = 0;
    for l in 0..nn {
        let idx = (n * nn + l) as i64;
        let g = loop {
            match gamma_infinity(&hat, sol.nu, th, idx)? {
                SumOutcome::Value(v, k) => {
                    used = used.max(k);
                    break v;
                }
                SumOutcome::NeedTerms => extend_inf(th, settings)?,
            }
        };
        let delta = (sol.nu + th.mu + l as f64) / nn as f64;
        let v = match (th.branch, side) {
            (3, _) => weighted(n, delta, C::new(base.ln(), 0.0), g),
            (_, Side::Averaged) => {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                weighted(n, delta, C::new(base.ln(), 0.0), g) * (delta * PI).cos() * sign
            }
            // -alpha_{N,4}/N = (alpha_{N,4}/N) e^{+- i pi}
            (_, Side::Upper) => weighted(n, delta, C::new(base.ln(), PI), g),
            (_, Side::Lower) => weighted(n, delta, C::new(base.ln(), -PI), g),
        };
        total += v;
    }
    Ok((total, used))
}

/// `W[w_j, w_5]` (branch 5) or `W[w_j, w_6]` (branch 6) from index `n`.
pub fn wronskian_origin(
    sol: &FloquetSolution,
    th: &mut ThomeOrigin,
    n: usize,
    side: Side,
    settings: &SolverSettings,
) -> Result<(C, usize)> {
    let mm = th.beta.len() - 1;
    let hat = Hatted::new(sol, &th.beta[..mm], -1);
    let base = th.beta[mm].norm() / mm as f64;
    let mut total = zero();
    let mut used = 0;
    for l in 0..mm {
        let idx = -((n * mm + l) as i64);
        let g = loop {
            match gamma_origin(&hat, sol.nu, th, idx)? {
                SumOutcome::Value(v, k) => {
                    used = used.max(k);
                    break v;
                }
                SumOutcome::NeedTerms => extend_org(th, settings)?,
            }
        };
        let delta = (-sol.nu - th.rho + l as f64) / mm as f64;
        let v = match (th.branch, side) {
            (5, _) => weighted(n, delta, C::new(base.ln(), 0.0), g),
            (_, Side::Averaged) => {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                weighted(n, delta, C::new(base.ln(), 0.0), g) * (delta * PI).cos() * sign
            }
            (_, Side::Upper) => weighted(n, delta, C::new(base.ln(), PI), g),
            (_, Side::Lower) => weighted(n, delta, C::new(base.ln(), -PI), g),
        };
        total += v;
    }
    Ok((total, used))
}

/// Smallest admissible extraction index plus the safety margin.
pub fn extraction_index(eq: &CanonicalEquation, nu: C, at_origin: bool, settings: &SolverSettings) -> usize {
    let bound = eq.abs_sum();
    let step = if at_origin { eq.m } else { eq.n } as f64;
    let mut k = 1usize;
    loop {
        let x = if at_origin { -(k as f64) * step } else { k as f64 * step };
        if ((nu + x) * (nu + x - 1.0)).norm() > bound {
            break;
        }
        k += 1;
    }
    (k + settings.extraction_margin).max(settings.extraction_n.unwrap_or(0))
}

/// Agreement of the extraction at consecutive indices.
#[derive(Debug, Clone, Serialize)]
pub struct ExtractionCertificate {
    pub solution: usize,
    pub branch: u8,
    pub n_star: usize,
    pub value: C,
    pub next: C,
    pub rel_change: f64,
    pub terms_used: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectionMatrix {
    /// `t[j][k - 3]` is `T_{j+1, k}`.
    pub t: [[C; 4]; 2],
    pub w34: C,
    pub w56: C,
    pub nu: [C; 2],
    pub certificates: Vec<ExtractionCertificate>,
}

impl ConnectionMatrix {
    /// `T_{j,k}` with `j` in 1..=2 and `k` in 3..=6.
    pub fn get(&self, j: usize, k: usize) -> C {
        self.t[j - 1][k - 3]
    }

    pub fn max_rel_change(&self) -> f64 {
        self.certificates.iter().map(|c| c.rel_change).fold(0.0, f64::max)
    }
}

enum Expansion<'a> {
    Inf(&'a mut ThomeInfinity),
    Org(&'a mut ThomeOrigin),
}

fn certified(
    sol: &FloquetSolution,
    j: usize,
    exp: Expansion,
    n0: usize,
    settings: &SolverSettings,
) -> Result<ExtractionCertificate> {
    let (branch, mut eval): (u8, Box<dyn FnMut(usize) -> Result<(C, usize)>>) = match exp {
        Expansion::Inf(th) => (th.branch, Box::new(move |n| wronskian_infinity(sol, th, n, Side::Averaged, settings))),
        Expansion::Org(th) => (th.branch, Box::new(move |n| wronskian_origin(sol, th, n, Side::Averaged, settings))),
    };
    let mut last = None;
    let mut prev = eval(n0)?;
    for n in n0..n0 + 6 {
        let next = eval(n + 1)?;
        let rel = (next.0 - prev.0).norm() / prev.0.norm().max(next.0.norm()).max(f64::MIN_POSITIVE);
        let cert = ExtractionCertificate {
            solution: j,
            branch,
            n_star: n,
            value: prev.0,
            next: next.0,
            rel_change: rel,
            terms_used: prev.1.max(next.1),
        };
        if rel < settings.stability_tol {
            return Ok(cert);
        }
        last = Some(cert);
        prev = next;
    }
    let c = last.unwrap();
    Err(Error::ExtractionUnstable(format!(
        "solution {j}, branch {branch}: relative change {:e} at n* = {}",
        c.rel_change, c.n_star
    )))
}

/// All eight connection factors for a Floquet pair.
pub fn connection_matrix(
    eq: &CanonicalEquation,
    pair: &FloquetPair,
    settings: &SolverSettings,
) -> Result<ConnectionMatrix> {
    let s = settings.thome_terms.max(4);
    let mut th3 = thome_infinity(eq, 3, s)?;
    let mut th4 = thome_infinity(eq, 4, s)?;
    let mut th5 = thome_origin(eq, 5, s)?;
    let mut th6 = thome_origin(eq, 6, s)?;
    let w34 = -2.0 * th3.alpha[eq.n] * settings.denominator_scale;
    let w56 = 2.0 * th5.beta[eq.m] * settings.denominator_scale;
    let count = if pair.regime() == Regime::Conjugate { 1 } else { 2 };
    let mut t = [[zero(); 4]; 2];
    let mut certificates = Vec::new();
    for j in 0..count {
        let sol = &pair.solutions[j];
        let ni = extraction_index(eq, sol.nu, false, settings);
        let no = extraction_index(eq, sol.nu, true, settings);
        let c4 = certified(sol, j + 1, Expansion::Inf(&mut th4), ni, settings)?;
        let c3 = certified(sol, j + 1, Expansion::Inf(&mut th3), ni, settings)?;
        let c6 = certified(sol, j + 1, Expansion::Org(&mut th6), no, settings)?;
        let c5 = certified(sol, j + 1, Expansion::Org(&mut th5), no, settings)?;
        t[j] = [c4.value / w34, -c3.value / w34, c6.value / w56, -c5.value / w56];
        certificates.extend([c4, c3, c6, c5]);
    }
    if count == 1 {
        t[1] = t[0].map(|v| v.conj());
    }
    Ok(ConnectionMatrix { t, w34, w56, nu: pair.nu(), certificates })
}

/// `W[w_1, w_2]` from the Laurent coefficients: the `z^0` coefficient of the
/// Wronskian series (it is constant because the equation has no `w'` term).
pub fn floquet_wronskian(pair: &FloquetPair) -> C {
    let [a, b] = &pair.solutions;
    let k = 1.0 - a.nu - b.nu;
    let ki = k.re.round() as i64;
    let mut s = zero();
    for n in a.indices() {
        let cb = b.coeff(ki - n);
        if cb.norm() == 0.0 {
            continue;
        }
        s += a.coeff(n) * cb * ((ki - 2 * n) as f64 + b.nu - a.nu);
    }
    s
}
