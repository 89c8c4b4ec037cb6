//! Quantization condition, eigenvalue refinement and bracketing scans.

use crate::connection::{connection_matrix, floquet_wronskian, ConnectionMatrix, ExtractionCertificate};
use crate::error::{Error, Result};
use crate::floquet::{floquet_pair, floquet_pair_warm, FloquetPair, IndexPair, Regime};
use crate::model::{canonicalize, CanonicalForm, PotentialSpec};
use crate::roots::brent;
use crate::settings::SolverSettings;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Mutex;

type C = Complex64;

/// Everything computed at one trial energy.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyPoint {
    pub energy: f64,
    pub pair: FloquetPair,
    pub connection: ConnectionMatrix,
    /// `T16 T24 - T14 T26`.
    pub determinant: C,
    /// `W[w_1, w_2]`.
    pub floquet_wronskian: C,
    /// `determinant / floquet_wronskian`, real for real potentials.
    pub residual: f64,
    pub residual_imag: f64,
}

/// Quantization functional.  The determinant of the connection system is
/// divided by `W[w_1, w_2]`; by the Plucker identity the quotient equals
/// `W[w_5, w_3] / (W34 W56)`, so it is independent of how the Floquet basis
/// is normalized or labelled and stays finite where the two indices merge.
pub fn quantization_residual(conn: &ConnectionMatrix, pair: &FloquetPair) -> (f64, f64, C, C) {
    let t = |j, k| conn.get(j, k);
    let det = t(1, 6) * t(2, 4) - t(1, 4) * t(2, 6);
    let w12 = floquet_wronskian(pair);
    let q = det / w12;
    (q.re, q.im, det, w12)
}

/// A solver bound to one potential.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: PotentialSpec,
    pub form: CanonicalForm,
    pub settings: SolverSettings,
}

impl Problem {
    pub fn new(spec: PotentialSpec, settings: SolverSettings) -> Result<Self> {
        let form = canonicalize(&spec)?;
        Ok(Self { spec, form, settings })
    }

    /// Full pipeline at energy `e`, optionally seeded with earlier indices.
    pub fn evaluate(&self, e: f64, warm: Option<&IndexPair>) -> Result<EnergyPoint> {
        let eq = self.form.at_energy(e);
        let pair = match warm {
            Some(w) => floquet_pair_warm(&eq, w, &self.settings)?,
            None => floquet_pair(&eq, &self.settings)?,
        };
        let connection = connection_matrix(&eq, &pair, &self.settings)?;
        let (re, im, det, w12) = quantization_residual(&connection, &pair);
        Ok(EnergyPoint {
            energy: e,
            pair,
            connection,
            determinant: det,
            floquet_wronskian: w12,
            residual: re,
            residual_imag: im,
        })
    }

    pub fn residual(&self, e: f64) -> Result<f64> {
        self.evaluate(e, None).map(|p| p.residual)
    }

    /// Refines a root inside `[lo, hi]`.  Without a sign change the interval
    /// is scanned with `scan_step` for one.
    pub fn find_eigenvalue(&self, lo: f64, hi: f64) -> Result<EigenResult> {
        self.find_eigenvalue_with(lo, hi, true)
    }

    pub fn find_eigenvalue_with(&self, lo: f64, hi: f64, warm_start: bool) -> Result<EigenResult> {
        let warm: Mutex<Option<IndexPair>> = Mutex::new(None);
        let evals = Mutex::new(0usize);
        let f = |e: f64| -> Result<f64> {
            let seed = if warm_start { *warm.lock().unwrap() } else { None };
            let p = self.evaluate(e, seed.as_ref())?;
            *warm.lock().unwrap() = Some(p.pair.indices);
            *evals.lock().unwrap() += 1;
            Ok(p.residual)
        };
        let root = match brent(&f, lo, hi, self.settings.root_tol, 200)? {
            Some(r) => r,
            None => {
                let brackets = self.scan(lo, hi, self.settings.scan_step)?;
                let (a, b) = *brackets.first().ok_or(Error::NoSignChange { lo, hi })?;
                brent(&f, a, b, self.settings.root_tol, 200)?.ok_or(Error::NoSignChange { lo: a, hi: b })?
            }
        };
        let point = self.evaluate(root.x, None)?;
        let zeta = physical_coefficients(&point.connection)?;
        let evaluations = *evals.lock().unwrap();
        Ok(EigenResult::new(point, zeta, root.iterations, evaluations, root.width, &self.settings))
    }

    /// Residual on a uniform grid (evaluated in parallel; the result does not
    /// depend on the thread count) and the sub-intervals where it changes sign.
    pub fn scan(&self, lo: f64, hi: f64, step: f64) -> Result<Vec<(f64, f64)>> {
        let samples = self.scan_samples(lo, hi, step);
        let mut out = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        for (e, r) in samples {
            let Ok(r) = r else { prev = None; continue };
            if let Some((pe, pr)) = prev {
                if pr.signum() != r.signum() {
                    out.push((pe, e));
                }
            }
            prev = Some((e, r));
        }
        Ok(out)
    }

    pub fn scan_samples(&self, lo: f64, hi: f64, step: f64) -> Vec<(f64, Result<f64>)> {
        let n = (((hi - lo) / step).ceil() as usize).max(1);
        (0..=n)
            .into_par_iter()
            .map(|i| {
                let e = if i == n { hi } else { lo + i as f64 * step };
                (e, self.residual(e))
            })
            .collect()
    }

    /// Refines every bracketed root in `[lo, hi]`.
    pub fn scan_and_solve(&self, lo: f64, hi: f64, step: f64) -> Result<Vec<EigenResult>> {
        let brackets = self.scan(lo, hi, step)?;
        brackets.par_iter().map(|&(a, b)| self.find_eigenvalue(a, b)).collect()
    }
}

/// `(zeta_1, zeta_2) = (T26, -T16)`, scaled so the larger has modulus one,
/// and checked against the infinity-side condition.
pub fn physical_coefficients(conn: &ConnectionMatrix) -> Result<PhysicalCoefficients> {
    let t = |j, k| conn.get(j, k);
    let (z1, z2) = (t(2, 6), -t(1, 6));
    let s = z1.norm().max(z2.norm());
    if s == 0.0 {
        return Err(Error::InconsistentSystem(f64::INFINITY));
    }
    let (z1, z2) = (z1 / s, z2 / s);
    let origin = (t(1, 6) * z1 + t(2, 6) * z2).norm() / ((t(1, 6) * z1).norm() + (t(2, 6) * z2).norm());
    let infinity = (t(1, 4) * z1 + t(2, 4) * z2).norm() / ((t(1, 4) * z1).norm() + (t(2, 4) * z2).norm());
    let residual = origin.max(infinity);
    if !(residual < 1e-6) {
        return Err(Error::InconsistentSystem(residual));
    }
    Ok(PhysicalCoefficients { zeta: [z1, z2], residual })
}

#[derive(Debug, Clone, Serialize)]
pub struct PhysicalCoefficients {
    pub zeta: [C; 2],
    pub residual: f64,
}

/// A refined eigenvalue with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub energy: f64,
    /// Digits of `energy` backed by the root tolerance and extraction certificates.
    pub certified_digits: u32,
    pub nu: [C; 2],
    pub regime: Regime,
    /// `t[j][k-3] = T_{j+1,k}`.
    pub connection: [[C; 4]; 2],
    pub zeta: [C; 2],
    pub consistency_residual: f64,
    pub certificates: Vec<ExtractionCertificate>,
    pub root_iterations: usize,
    pub residual_evaluations: usize,
    pub bracket_width: f64,
    pub circuit_residual_det: Option<f64>,
    #[serde(skip)]
    pub point: EnergyPoint,
}

impl EigenResult {
    fn new(
        point: EnergyPoint,
        zeta: PhysicalCoefficients,
        iterations: usize,
        evaluations: usize,
        width: f64,
        settings: &SolverSettings,
    ) -> Self {
        let e = point.energy;
        let rel = point.connection.max_rel_change();
        let de = settings.root_tol.max(width) + rel * e.abs().max(1.0);
        let digits = (-(de / e.abs().max(1e-300)).log10()).floor().clamp(0.0, 15.0) as u32;
        Self {
            energy: e,
            certified_digits: digits,
            nu: point.pair.nu(),
            regime: point.pair.regime(),
            connection: point.connection.t,
            zeta: zeta.zeta,
            consistency_residual: zeta.residual,
            certificates: point.connection.certificates.clone(),
            root_iterations: iterations,
            residual_evaluations: evaluations,
            bracket_width: width,
            circuit_residual_det: point.pair.circuit.as_ref().map(|c| c.residual_det),
            point,
        }
    }

    /// Energy rounded to the certified number of significant digits.
    pub fn certified_energy(&self) -> String {
        let d = self.certified_digits.max(1) as usize;
        format!("{:.*e}", d - 1, self.energy)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}
