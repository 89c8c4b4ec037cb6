//! JSON problem description.
//!
//! ```json
//! { "potential": [ {"q": 2, "A": 1.0}, {"q": "-4", "A": 0.4} ],
//!   "L": 0,
//!   "solver": { "precision_digits": 15, "window": {"M_trunc": 40, "N_trunc": 40},
//!               "thome_terms": 60, "extraction_n": 20, "energy_bracket": [3.5, 4.5] } }
//! ```

use crate::error::{Error, Result};
use crate::model::{parse_rational, PotentialSpec, Rational, Term};
use crate::settings::{Normalization, SolverSettings};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    potential: Vec<TermDoc>,
    #[serde(rename = "L", default)]
    l: u32,
    #[serde(default)]
    solver: SolverDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    q: Exponent,
    #[serde(rename = "A")]
    a: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Exponent {
    Int(i64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowDoc {
    #[serde(rename = "M_trunc")]
    m: Option<usize>,
    #[serde(rename = "N_trunc")]
    n: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverDoc {
    precision_digits: Option<u32>,
    window: Option<WindowDoc>,
    max_window: Option<usize>,
    thome_terms: Option<usize>,
    max_thome_terms: Option<usize>,
    extraction_n: Option<usize>,
    energy_bracket: Option<(f64, f64)>,
    index_offset: Option<i64>,
    normalization: Option<Normalization>,
    denominator_scale: Option<f64>,
    root_tol: Option<f64>,
    scan_step: Option<f64>,
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub spec: PotentialSpec,
    pub settings: SolverSettings,
}

fn exponent(q: &Exponent) -> Result<Rational> {
    match q {
        Exponent::Int(i) => Ok(Rational::from_integer(*i)),
        Exponent::Text(s) => parse_rational(s),
    }
}

/// Parses and validates a configuration document.
pub fn parse_problem(text: &str) -> Result<ProblemConfig> {
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let terms = doc
        .potential
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let q = exponent(&t.q).map_err(|e| Error::Parse(format!("potential[{i}].q: {e}")))?;
            Ok(Term { q, a: t.a })
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = PotentialSpec::new(terms, doc.l)?;

    let s = doc.solver;
    let mut settings = SolverSettings::default();
    if let Some(p) = s.precision_digits {
        if !(1..=15).contains(&p) {
            return Err(Error::Parse(format!("solver.precision_digits: {p} is outside 1..=15 (binary64)")));
        }
        settings.precision_digits = p;
    }
    if let Some(w) = s.window {
        settings.window_m = w.m;
        settings.window_n = w.n;
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = s.$field { settings.$field = v; } )* };
    }
    set!(max_window, thome_terms, max_thome_terms, index_offset, normalization, denominator_scale, root_tol, scan_step);
    settings.extraction_n = s.extraction_n;
    if let Some((lo, hi)) = s.energy_bracket {
        if !(lo < hi) {
            return Err(Error::Parse(format!("solver.energy_bracket: [{lo}, {hi}] is empty")));
        }
        settings.energy_bracket = Some((lo, hi));
    }
    if !(settings.denominator_scale.is_finite() && settings.denominator_scale != 0.0) {
        return Err(Error::Parse("solver.denominator_scale must be finite and nonzero".into()));
    }
    if !(settings.scan_step > 0.0) {
        return Err(Error::Parse("solver.scan_step must be positive".into()));
    }
    Ok(ProblemConfig { spec, settings })
}

pub fn load_problem(path: &std::path::Path) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_problem(&text)
}
