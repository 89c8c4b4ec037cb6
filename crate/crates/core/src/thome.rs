//! Formal (Thome) solutions at the two irregular singular points.
//!
//! At infinity: `w ~ exp(sum_{p=1}^N alpha_p z^p / p) z^mu sum_m a_m z^-m`.
//! At the origin: `w ~ exp(sum_{q=1}^M beta_q z^-q / q) z^rho sum_m b_m z^m`.
//! Branches 3 and 5 are the recessive ones on the positive real axis.

use crate::error::{Error, Result};
use crate::model::CanonicalEquation;
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

type C = Complex64;

fn zero() -> C {
    C::new(0.0, 0.0)
}

/// Dense Laurent polynomial with powers `lo..lo + len`.
#[derive(Debug, Clone, Serialize)]
struct Laurent {
    lo: i64,
    c: Vec<C>,
}

impl Laurent {
    fn new(lo: i64, hi: i64) -> Self {
        Self { lo, c: vec![zero(); (hi - lo + 1).max(0) as usize] }
    }
    fn get(&self, s: i64) -> C {
        let i = s - self.lo;
        if i < 0 || i as usize >= self.c.len() {
            zero()
        } else {
            self.c[i as usize]
        }
    }
    fn add(&mut self, s: i64, v: C) {
        let i = (s - self.lo) as usize;
        self.c[i] += v;
    }
}

/// Expansion around infinity (branch 3 or 4).
#[derive(Debug, Clone, Serialize)]
pub struct ThomeInfinity {
    pub branch: u8,
    /// `alpha[p]` for `p = 0..=N` (`alpha[0]` is unused and zero).
    pub alpha: Vec<C>,
    pub mu: C,
    pub a: Vec<C>,
    f: Laurent,
}

/// Expansion around the origin (branch 5 or 6).
#[derive(Debug, Clone, Serialize)]
pub struct ThomeOrigin {
    pub branch: u8,
    /// `beta[q]` for `q = 0..=M`.
    pub beta: Vec<C>,
    pub rho: C,
    pub b: Vec<C>,
    h: Laurent,
}

fn check_branch(branch: u8, allowed: [u8; 2]) -> Result<()> {
    if allowed.contains(&branch) {
        Ok(())
    } else {
        Err(Error::Parse(format!("branch {branch} not in {allowed:?}")))
    }
}

/// Leading exponents by matching the top `N` powers of `P^2 = g`.
fn leading_exponents(lead: f64, g_at: impl Fn(usize) -> f64, n: usize, sign: f64) -> Vec<C> {
    let mut x = vec![zero(); n + 1];
    x[n] = C::new(lead, 0.0).sqrt() * sign;
    for r in 1..n {
        let p = n - r;
        let mut s = C::new(g_at(r), 0.0);
        for i in p + 1..n {
            let j = 2 * n - r - i;
            if j > p && j < n {
                s -= x[i] * x[j];
            }
        }
        x[p] = s / (2.0 * x[n]);
    }
    x
}

pub fn thome_infinity(eq: &CanonicalEquation, branch: u8, terms: usize) -> Result<ThomeInfinity> {
    check_branch(branch, [3, 4])?;
    let n = eq.n;
    let ni = n as i64;
    let lead = eq.g(2 * ni);
    let sign = if branch == 3 { -1.0 } else { 1.0 };
    let alpha = leading_exponents(lead, |r| eq.g(2 * ni - r as i64), n, sign);
    // F = P^2 + sum (p-1) alpha_p z^p - g
    let mut f = Laurent::new(-2 * eq.m as i64, 2 * ni);
    for i in 1..=n {
        for j in 1..=n {
            f.add((i + j) as i64, alpha[i] * alpha[j]);
        }
        f.add(i as i64, alpha[i] * (i as f64 - 1.0));
    }
    for (s, gs) in eq.terms() {
        f.add(s, C::new(-gs, 0.0));
    }
    let mu = -f.get(ni) / (2.0 * alpha[n]);
    let mut t = ThomeInfinity { branch, alpha, mu, a: vec![C::new(1.0, 0.0)], f };
    t.extend(terms);
    Ok(t)
}

impl ThomeInfinity {
    /// Computes coefficients up to `a_{terms-1}`.
    pub fn extend(&mut self, terms: usize) {
        let n = self.alpha.len() - 1;
        let ni = n as i64;
        let an = self.alpha[n];
        let mu = self.mu;
        let alpha = |p: i64| if p >= 1 && p < ni { self.alpha[p as usize] } else { zero() };
        while self.a.len() < terms {
            let r = self.a.len();
            let ri = r as i64;
            let mut s = zero();
            for (m, am) in self.a.iter().enumerate() {
                let mi = m as i64;
                let idx = ni - ri + mi;
                s += am * (self.f.get(idx) + 2.0 * alpha(idx) * (mu - m as f64));
            }
            if r >= n {
                let k = (ri - ni) as f64;
                s += self.a[r - n] * (mu - k) * (mu - k - 1.0);
            }
            self.a.push(s / (2.0 * an * r as f64));
        }
    }

    /// Number of past coefficients each recurrence step reaches.
    pub fn span(&self) -> usize {
        self.f.c.len() + 2
    }

    pub fn terms(&self) -> usize {
        self.a.len()
    }

    /// Optimally truncated value at real `z > 0` and the relative size of the
    /// first omitted term.  Overflow-safe: returns `(ln w, err)`.
    pub fn eval_ln(&self, z: f64) -> (C, f64) {
        let mut expo = self.mu * z.ln();
        for (p, ap) in self.alpha.iter().enumerate().skip(1) {
            expo += ap * z.powi(p as i32) / p as f64;
        }
        let (s, err) = optimal_sum(self.a.iter().enumerate().map(|(m, a)| a * z.powi(-(m as i32))), self.span());
        (expo + s.ln(), err)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_series(out, &self.a)
    }
}

pub fn thome_origin(eq: &CanonicalEquation, branch: u8, terms: usize) -> Result<ThomeOrigin> {
    check_branch(branch, [5, 6])?;
    let m = eq.m;
    let mi = m as i64;
    let lead = eq.g(-2 * mi);
    let sign = if branch == 5 { -1.0 } else { 1.0 };
    let beta = leading_exponents(lead, |r| eq.g(-2 * mi + r as i64), m, sign);
    // H = B^2 + sum (q+1) beta_q z^-q - g
    let mut h = Laurent::new(-2 * mi, 2 * eq.n as i64);
    for i in 1..=m {
        for j in 1..=m {
            h.add(-((i + j) as i64), beta[i] * beta[j]);
        }
        h.add(-(i as i64), beta[i] * (i as f64 + 1.0));
    }
    for (s, gs) in eq.terms() {
        h.add(s, C::new(-gs, 0.0));
    }
    let rho = h.get(-mi) / (2.0 * beta[m]);
    let mut t = ThomeOrigin { branch, beta, rho, b: vec![C::new(1.0, 0.0)], h };
    t.extend(terms);
    Ok(t)
}

impl ThomeOrigin {
    pub fn extend(&mut self, terms: usize) {
        let m = self.beta.len() - 1;
        let mi = m as i64;
        let bm = self.beta[m];
        let rho = self.rho;
        let beta = |q: i64| if q >= 1 && q < mi { self.beta[q as usize] } else { zero() };
        while self.b.len() < terms {
            let r = self.b.len();
            let ri = r as i64;
            let mut s = zero();
            for (k, bk) in self.b.iter().enumerate() {
                let ki = k as i64;
                s += bk * (self.h.get(ri - mi - ki) - 2.0 * beta(ki + mi - ri) * (k as f64 + rho));
            }
            if r >= m {
                let k = (ri - mi) as f64;
                s += self.b[r - m] * (k + rho) * (k + rho - 1.0);
            }
            self.b.push(s / (2.0 * bm * r as f64));
        }
    }

    /// Number of past coefficients each recurrence step reaches.
    pub fn span(&self) -> usize {
        self.h.c.len() + 2
    }

    pub fn terms(&self) -> usize {
        self.b.len()
    }

    pub fn eval_ln(&self, z: f64) -> (C, f64) {
        let mut expo = self.rho * z.ln();
        for (q, bq) in self.beta.iter().enumerate().skip(1) {
            expo += bq * z.powi(-(q as i32)) / q as f64;
        }
        let (s, err) = optimal_sum(self.b.iter().enumerate().map(|(m, b)| b * z.powi(m as i32)), self.span());
        (expo + s.ln(), err)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_series(out, &self.b)
    }
}

/// Sums an asymptotic series while its terms decrease; the error estimate
/// is the smallest term kept, relative to the sum.
/// Formal Wronskian of two Thome expansions.  For each power up to `order`
/// returns the coefficient and the sum of the moduli of its contributions;
/// the constant term must reproduce the closed form and all others cancel.
#[derive(Debug, Clone, Serialize)]
pub struct FormalWronskian {
    /// Exponent of the algebraic prefactor, `mu_3 + mu_4` or `rho_5 + rho_6`.
    pub exponent_sum: C,
    pub coefficients: Vec<(C, f64)>,
}

impl FormalWronskian {
    /// Largest `|coefficient| / scale` among the powers that must vanish.
    pub fn max_cancellation(&self) -> f64 {
        self.coefficients[1..].iter().map(|(c, s)| if *s > 0.0 { c.norm() / s } else { 0.0 }).fold(0.0, f64::max)
    }

    pub fn constant(&self) -> C {
        self.coefficients[0].0
    }
}

fn series_product(x: &[C], y: &[C], len: usize) -> Vec<(C, f64)> {
    (0..len)
        .map(|t| {
            (0..=t.min(x.len().saturating_sub(1))).filter(|&i| t - i < y.len()).fold((zero(), 0.0), |(s, m), i| {
                let v = x[i] * y[t - i];
                (s + v, m + v.norm())
            })
        })
        .collect()
}

/// `W[w_3, w_4]` multiplied out as a series in `1/z`; needs `a` up to `order + N`.
pub fn formal_wronskian_infinity(w3: &ThomeInfinity, w4: &ThomeInfinity, order: usize) -> FormalWronskian {
    let n = w3.alpha.len() - 1;
    let len = order + n + 2;
    let (s3, s4) = (&w3.a[..w3.a.len().min(len)], &w4.a[..w4.a.len().min(len)]);
    // d/dz of sum a_m u^m is -sum m a_m u^{m+1}
    let deriv = |s: &[C]| -> Vec<C> {
        let mut d = vec![zero(); s.len() + 1];
        for (m, v) in s.iter().enumerate() {
            d[m + 1] = -v * m as f64;
        }
        d
    };
    let (d3, d4) = (deriv(s3), deriv(s4));
    let a = series_product(s3, &d4, len);
    let b = series_product(&d3, s4, len);
    let ss = series_product(s3, s4, len);
    let mut out = vec![(zero(), 0.0); order + 1];
    let mut add = |t: i64, v: C, scale: f64| {
        if t >= 0 && (t as usize) <= order {
            out[t as usize].0 += v;
            out[t as usize].1 += scale;
        }
    };
    let ni = n as i64;
    for j in 0..len {
        let jj = j as i64;
        // z^{1-N} (S3 S4' - S3' S4) at u^{N-1+j}
        add(ni - 1 + jj, a[j].0 - b[j].0, a[j].1 + b[j].1);
        // z^{1-N} (mu_4 - mu_3) u S3 S4
        let dmu = w4.mu - w3.mu;
        add(ni + jj, dmu * ss[j].0, dmu.norm() * ss[j].1);
        // z^{1-N} 2 P_4' S3 S4 with P_4' = sum alpha_{p,4} z^{p-1}
        for p in 1..=n {
            let c = 2.0 * w4.alpha[p];
            add(ni - p as i64 + jj, c * ss[j].0, c.norm() * ss[j].1);
        }
    }
    FormalWronskian { exponent_sum: w3.mu + w4.mu, coefficients: out }
}

/// `W[w_5, w_6]` multiplied out as a series in `z`; needs `b` up to `order + M`.
pub fn formal_wronskian_origin(w5: &ThomeOrigin, w6: &ThomeOrigin, order: usize) -> FormalWronskian {
    let m = w5.beta.len() - 1;
    let len = order + m + 2;
    let (s5, s6) = (&w5.b[..w5.b.len().min(len)], &w6.b[..w6.b.len().min(len)]);
    // d/dz of sum b_k z^k is sum (k+1) b_{k+1} z^k, kept at z^{k} with a z^{-1} shift below
    let deriv = |s: &[C]| -> Vec<C> { s.iter().enumerate().map(|(k, v)| v * k as f64).collect() };
    let (d5, d6) = (deriv(s5), deriv(s6));
    let a = series_product(s5, &d6, len);
    let b = series_product(&d5, s6, len);
    let ss = series_product(s5, s6, len);
    let mut out = vec![(zero(), 0.0); order + 1];
    let mut add = |t: i64, v: C, scale: f64| {
        if t >= 0 && (t as usize) <= order {
            out[t as usize].0 += v;
            out[t as usize].1 += scale;
        }
    };
    let mi = m as i64;
    for j in 0..len {
        let jj = j as i64;
        // z^{M+1} (S5 S6' - S5' S6) z^{-1} at z^{M+j}; (rho_6 - rho_5) z^{-1} S5 S6 likewise
        let drho = w6.rho - w5.rho;
        add(mi + jj, a[j].0 - b[j].0 + drho * ss[j].0, a[j].1 + b[j].1 + drho.norm() * ss[j].1);
        // z^{M+1} (Q_6' - Q_5') S5 S6 with Q' = -sum beta_q z^{-q-1}
        for q in 1..=m {
            let c = -(w6.beta[q] - w5.beta[q]);
            add(mi - q as i64 + jj, c * ss[j].0, c.norm() * ss[j].1);
        }
    }
    FormalWronskian { exponent_sum: w5.rho + w6.rho, coefficients: out }
}

/// Sums an asymptotic series up to its smallest block of `span` terms (the
/// coefficients can be sparse or vary strongly within one recurrence span).
/// The error estimate is the largest term of the first omitted block.
fn optimal_sum(terms: impl Iterator<Item = C>, span: usize) -> (C, f64) {
    let terms: Vec<C> = terms.collect();
    let mut s = zero();
    let mut prev = f64::INFINITY;
    let mut err = 0.0;
    for block in terms.chunks(span.max(1)) {
        if block.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) {
            err = f64::INFINITY;
            break;
        }
        let peak = block.iter().map(|t| t.norm()).fold(0.0, f64::max);
        if peak > prev {
            err = peak;
            break;
        }
        s += block.iter().sum::<C>();
        prev = peak;
        err = peak;
        if peak <= 1e-17 * s.norm() {
            break;
        }
    }
    (s, err / s.norm().max(f64::MIN_POSITIVE) + f64::EPSILON)
}

fn write_series<W: Write>(mut out: W, c: &[C]) -> std::io::Result<()> {
    writeln!(out, "m,Re,Im")?;
    for (m, v) in c.iter().enumerate() {
        writeln!(out, "{m},{:.16e},{:.16e}", v.re, v.im)?;
    }
    Ok(())
}
