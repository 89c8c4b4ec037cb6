//! Potential description and the canonical equation `-z^2 w'' + g(z) w = 0`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub type Rational = Ratio<i64>;

/// Largest exponent denominator accepted when searching for the transform.
pub const MAX_EXPONENT_DENOMINATOR: i64 = 16;

/// One term `A r^q` of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub q: Rational,
    pub a: f64,
}

/// A spiked-oscillator potential `V(r) = sum A(q) r^q` with angular momentum `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    terms: Vec<Term>,
    l: u32,
}

impl PotentialSpec {
    /// Validates and sorts the terms.  Zero coefficients are dropped.
    pub fn new(mut terms: Vec<Term>, l: u32) -> Result<Self> {
        terms.retain(|t| t.a != 0.0);
        if terms.iter().any(|t| !t.a.is_finite()) {
            return Err(Error::NotSpiked("non-finite coefficient".into()));
        }
        terms.sort_by(|x, y| x.q.cmp(&y.q));
        if terms.windows(2).any(|w| w[0].q == w[1].q) {
            return Err(Error::NotSpiked("duplicate exponent".into()));
        }
        let (first, last) = match (terms.first(), terms.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(Error::NotSpiked("empty potential".into())),
        };
        if first.q >= Rational::from_integer(-2) {
            return Err(Error::NotSpiked(format!(
                "most singular exponent {} must be below -2",
                first.q
            )));
        }
        if last.q < Rational::from_integer(2) {
            return Err(Error::NotSpiked(format!(
                "confining exponent {} must be at least 2",
                last.q
            )));
        }
        if first.a <= 0.0 || last.a <= 0.0 {
            return Err(Error::NotSpiked(
                "extreme coefficients must be positive".into(),
            ));
        }
        Ok(Self { terms, l })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// `V(r)` for `r > 0`.
    pub fn potential(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.a * r.powf(t.q.to_f64().unwrap()))
            .sum()
    }

    /// Returns a copy with the coefficient of `r^q` replaced (or inserted).
    pub fn with_coefficient(&self, q: Rational, a: f64) -> Result<Self> {
        let mut terms: Vec<Term> = self.terms.iter().copied().filter(|t| t.q != q).collect();
        terms.push(Term { q, a });
        Self::new(terms, self.l)
    }
}

/// Energy-independent part of the canonical equation, with exact rational
/// bookkeeping for the transform and the constant term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalForm {
    /// Transform exponent: `z = r^(1/k)`, `w = r^(-(k-1)/(2k)) R`.
    pub k: Rational,
    pub l: u32,
    /// `g` spans powers `z^(-2M) .. z^(2N)`.
    pub m: usize,
    pub n: usize,
    /// gcd of all powers present in `g`; only every `d`-th Laurent coefficient is non-zero.
    pub lattice: usize,
    /// `k^2 A(q)` placed at power `s = 2k + kq`.
    pub potential_terms: BTreeMap<i64, f64>,
    /// `k^2 l(l+1) + (k^2 - 1)/4` at power zero.
    pub constant: Rational,
    /// Power `2k` carrying `-k^2 E`.
    pub energy_power: i64,
    pub energy_scale: Rational,
}

fn integer(q: Rational) -> Option<i64> {
    q.is_integer().then(|| q.to_integer())
}

/// Finds the smallest half-integer `k` for which every power of `g` is an
/// integer and the two extreme powers are even, then assembles `g`.
pub fn canonicalize(spec: &PotentialSpec) -> Result<CanonicalForm> {
    let terms = spec.terms();
    for t in terms {
        if *t.q.denom() > MAX_EXPONENT_DENOMINATOR {
            return Err(Error::NonIntegrizable(format!(
                "exponent {} has denominator above {}",
                t.q, MAX_EXPONENT_DENOMINATOR
            )));
        }
    }
    let lcm = terms.iter().fold(1i64, |acc, t| acc.lcm(t.q.denom()));
    let two = Rational::from_integer(2);
    let q_min = terms[0].q;
    let q_max = terms[terms.len() - 1].q;
    let mut found = None;
    // j = 4 * lcm always satisfies every condition, so the search terminates.
    for j in 1..=4 * lcm {
        let k = Rational::new(j, 2);
        let ok_all = terms.iter().all(|t| integer(k * t.q).is_some());
        let even = |q: Rational| integer(k * (two + q)).map_or(false, |s| s.is_even());
        if ok_all && even(q_min) && even(q_max) {
            found = Some(k);
            break;
        }
    }
    let k = found.ok_or_else(|| Error::NonIntegrizable("no half-integer k found".into()))?;
    let k2 = k * k;
    let k2f = k2.to_f64().unwrap();
    let mut potential_terms = BTreeMap::new();
    for t in terms {
        let s = integer(k * (two + t.q)).expect("checked above");
        *potential_terms.entry(s).or_insert(0.0) += k2f * t.a;
    }
    let l = Rational::from_integer(spec.l() as i64);
    let constant = k2 * l * (l + Rational::one()) + (k2 - Rational::one()) / Rational::from_integer(4);
    let energy_power = integer(two * k).expect("2k is an integer");
    let s_min = *potential_terms.keys().next().unwrap();
    let s_max = *potential_terms.keys().next_back().unwrap();
    let mut lattice = 0i64;
    for &s in potential_terms.keys().chain(std::iter::once(&energy_power)) {
        if s != 0 {
            lattice = lattice.gcd(&s);
        }
    }
    Ok(CanonicalForm {
        k,
        l: spec.l(),
        m: (-s_min / 2) as usize,
        n: (s_max / 2) as usize,
        lattice: lattice.abs() as usize,
        potential_terms,
        constant,
        energy_power,
        energy_scale: k2,
    })
}

impl CanonicalForm {
    pub fn k_f64(&self) -> f64 {
        self.k.to_f64().unwrap()
    }

    /// Inserts the energy.  Only the coefficient of `z^(2k)` depends on `e`.
    pub fn at_energy(&self, e: f64) -> CanonicalEquation {
        let m = self.m as i64;
        let mut g = vec![0.0; 2 * (self.m + self.n) + 1];
        for (&s, &v) in &self.potential_terms {
            g[(s + 2 * m) as usize] += v;
        }
        g[(2 * m) as usize] += self.constant.to_f64().unwrap();
        g[(self.energy_power + 2 * m) as usize] -= self.energy_scale.to_f64().unwrap() * e;
        CanonicalEquation {
            m: self.m,
            n: self.n,
            lattice: self.lattice,
            k: self.k_f64(),
            energy: e,
            g,
        }
    }
}

/// `-z^2 w'' + g(z) w = 0` with `g(z) = sum_{s=-2M}^{2N} g_s z^s` at fixed energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalEquation {
    pub m: usize,
    pub n: usize,
    pub lattice: usize,
    pub k: f64,
    pub energy: f64,
    g: Vec<f64>,
}

impl CanonicalEquation {
    /// Builds an equation directly from Laurent coefficients (used for synthetic tests).
    pub fn from_coefficients(coeffs: &[(i64, f64)], energy: f64) -> Self {
        let s_min = coeffs.iter().map(|c| c.0).min().unwrap_or(0).min(0);
        let s_max = coeffs.iter().map(|c| c.0).max().unwrap_or(0).max(0);
        assert!(s_min % 2 == 0 && s_max % 2 == 0, "extreme powers must be even");
        let m = (-s_min / 2) as usize;
        let n = (s_max / 2) as usize;
        let mut g = vec![0.0; 2 * (m + n) + 1];
        let mut lattice = 0i64;
        for &(s, v) in coeffs {
            g[(s + 2 * m as i64) as usize] += v;
            if s != 0 && v != 0.0 {
                lattice = lattice.gcd(&s);
            }
        }
        Self {
            m,
            n,
            lattice: lattice.abs().max(1) as usize,
            k: 1.0,
            energy,
            g,
        }
    }

    /// Coefficient of `z^s` (zero outside `[-2M, 2N]`).
    pub fn g(&self, s: i64) -> f64 {
        let i = s + 2 * self.m as i64;
        if i < 0 || i as usize >= self.g.len() {
            0.0
        } else {
            self.g[i as usize]
        }
    }

    /// Non-zero `(s, g_s)` pairs in increasing `s`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let m = self.m as i64;
        self.g
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(move |(i, v)| (i as i64 - 2 * m, *v))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let m = self.m as i32;
        let mut acc = Complex64::zero();
        for &v in self.g.iter().rev() {
            acc = acc * z + v;
        }
        acc * z.powi(-2 * m)
    }

    /// `sum |g_s|`, the bound used for index thresholds.
    pub fn abs_sum(&self) -> f64 {
        self.g.iter().map(|v| v.abs()).sum()
    }

    pub fn abs_sum_offdiag(&self) -> f64 {
        self.terms().filter(|t| t.0 != 0).map(|t| t.1.abs()).sum()
    }
}

/// Parses `"p/r"`, `"p"` (with ASCII or Unicode minus) into a rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim().replace('\u{2212}', "-");
    let bad = || Error::Parse(format!("invalid exponent {s:?}"));
    let (p, r) = match t.split_once('/') {
        Some((p, r)) => (p.trim().parse::<i64>().map_err(|_| bad())?, r.trim().parse::<i64>().map_err(|_| bad())?),
        None => (t.parse::<i64>().map_err(|_| bad())?, 1),
    };
    if r == 0 {
        return Err(bad());
    }
    let q = Rational::new(p, r);
    Ok(q)
}
