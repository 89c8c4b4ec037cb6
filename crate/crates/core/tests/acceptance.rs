//! Acceptance suite: one line per criterion.

use num_complex::Complex64 as C;
use spiked::oracle::{shoot_eigenvalue, RadialPotential, ShootingOptions};
use spiked::tables::*;
use spiked::wavefunction::PhysicalSolution;
use spiked::{
    circuit_matrix, formal_wronskian_infinity, formal_wronskian_origin, thome_infinity, thome_origin,
    Error, PotentialSpec, Problem, Regime, SolverSettings,
};
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn table_outcome(t: &TableReport, limit: f64) -> Outcome {
    let failed: Vec<&RowCheck> = t.rows.iter().filter(|r| !r.pass).collect();
    let worst = t.rows.iter().map(|r| r.error / r.tolerance).fold(0.0, f64::max);
    let mut detail = format!("{} checks, worst error/tolerance {:.1e}, {:.2} s (limit {limit} s)", t.rows.len(), worst, t.seconds);
    for r in &failed {
        detail += &format!("\n      FAIL {}: computed {} expected {} error {:e}", r.label, r.computed, r.expected, r.error);
    }
    outcome(t.passed() && t.seconds <= limit, detail)
}

fn criterion_1(s: &SolverSettings) -> Outcome {
    let t = table1(s);
    table_outcome(&t, 60.0)
}

fn criterion_2(s: &SolverSettings) -> Outcome {
    let t0 = Instant::now();
    let run = || -> spiked::Result<f64> {
        let (p, e) = fixture(false, s)?;
        let pt = p.evaluate(e, None)?;
        let mut worst = 0.0f64;
        for (k, &(re, im)) in FIXTURE_A_T.iter().enumerate() {
            let t1 = C::new(re, im);
            worst = worst.max((pt.connection.get(1, k + 3) - t1).norm());
            worst = worst.max((pt.connection.get(2, k + 3) - t1.conj()).norm());
        }
        Ok(worst)
    };
    let secs = || t0.elapsed().as_secs_f64();
    match run() {
        Ok(worst) => outcome(worst <= 1e-8 && secs() <= 10.0, format!("8 factors, max |dT| {worst:.1e}, {:.2} s", secs())),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

/// `a_m` at infinity for `r^2 + A r^-4` by direct substitution, coded here
/// independently of the library recurrence.
fn quartic_a(a: f64, e: f64, terms: usize) -> Vec<f64> {
    let mu = (e - 1.0) / 2.0;
    let mut c = vec![0.0; terms];
    c[0] = 1.0;
    for m in 1..terms {
        let mf = m as f64;
        let p2 = if m >= 2 { c[m - 2] } else { 0.0 };
        let p4 = if m >= 4 { c[m - 4] } else { 0.0 };
        c[m] = (-(mu - mf + 2.0) * (mu - mf + 1.0) * p2 + a * p4) / (2.0 * mf);
    }
    c
}

fn criterion_3(s: &SolverSettings) -> Outcome {
    let t0 = Instant::now();
    let mut total = 0;
    let mut worst = 0.0f64;
    let mut failures = String::new();
    for table in 2..=7 {
        let t = coefficient_table(table, s);
        total += t.rows.len();
        for r in &t.rows {
            worst = worst.max(r.error / r.tolerance);
            if !r.pass {
                failures += &format!("\n      FAIL table {table} {}: computed {} expected {}", r.label, r.computed, r.expected);
            }
        }
        if t.rows.is_empty() {
            failures += &format!("\n      FAIL table {table}: no rows");
        }
    }
    // the corrected misprint must itself follow from the recurrence
    let (_, _, row, printed, corrected) = ERRATA[0];
    let oracle = quartic_a(FIXTURE_A.0, FIXTURE_A.2, 2 * row + 1)[2 * row];
    let erratum_ok = (oracle - corrected).abs() <= 1e-10 * corrected.abs();
    if !erratum_ok {
        failures += &format!("\n      FAIL erratum: recurrence gives {oracle:e}, corrected value {corrected:e}");
    }
    let detail = format!(
        "{total} values, worst error/tolerance {worst:.1e}; printed a_10,3 = {printed} replaced by recurrence value {oracle:.12e}; {:.2} s{failures}",
        t0.elapsed().as_secs_f64()
    );
    outcome(failures.is_empty(), detail)
}

fn criterion_4(s: &SolverSettings) -> Outcome {
    table_outcome(&table8(s), 180.0)
}

fn criterion_5(s: &SolverSettings) -> Outcome {
    table_outcome(&table9(s), 300.0)
}

fn all_fixtures() -> Vec<(String, PotentialSpec, f64, i64)> {
    let mut v: Vec<(String, PotentialSpec, f64, i64)> = Vec::new();
    v.extend(TABLE1.iter().map(|&(a, e, _)| (format!("A-4={a}"), quartic_spike(a, 0), e, 0)));
    v.extend(TABLE8.iter().map(|&(a6, a4, e, _)| (format!("A-6={a6},A-4={a4}"), sextic_spike(a6, a4), e, 0)));
    v.extend(TABLE9.iter().map(|&(l, e, _)| (format!("lambda={l}"), critical_spike(l), e, 0)));
    v.push(("A-4=1,l=2".into(), quartic_spike(FIXTURE_B.0, FIXTURE_B.1), FIXTURE_B.2, 1));
    v
}

fn criterion_6(s: &SolverSettings) -> Outcome {
    use rayon::prelude::*;
    let t0 = Instant::now();
    let fixtures = all_fixtures();
    let results: Vec<Result<[f64; 5], String>> = fixtures
        .par_iter()
        .map(|(label, spec, e, offset)| {
            let run = || -> spiked::Result<[f64; 5]> {
                let settings = SolverSettings { index_offset: *offset, ..s.clone() };
                let p = Problem::new(spec.clone(), settings.clone())?;
                let eq = p.form.at_energy(*e);
                let (m, n) = (eq.m as f64, eq.n as f64);
                let (w3, w4) = (thome_infinity(&eq, 3, 60)?, thome_infinity(&eq, 4, 60)?);
                let (w5, w6) = (thome_origin(&eq, 5, 60)?, thome_origin(&eq, 6, 60)?);
                let sums = ((w3.mu + w4.mu - (1.0 - n)).norm() / n).max((w5.rho + w6.rho - (m + 1.0)).norm() / (m + 1.0));
                let det = circuit_matrix(&eq, &settings)?.residual_det;
                // formal Wronskians: constant closed forms, all other orders cancel
                let wi = formal_wronskian_infinity(&w3, &w4, 30);
                let wo = formal_wronskian_origin(&w5, &w6, 30);
                let closed = ((wi.constant() + 2.0 * w3.alpha[eq.n]).norm() / w3.alpha[eq.n].norm())
                    .max((wo.constant() - 2.0 * w5.beta[eq.m]).norm() / w5.beta[eq.m].norm())
                    .max(wi.max_cancellation())
                    .max(wo.max_cancellation());
                let r = p.find_eigenvalue(e - 0.1, e + 0.1)?;
                let used = ((r.point.connection.w34 + 2.0 * w3.alpha[eq.n]).norm() / w3.alpha[eq.n].norm())
                    .max((r.point.connection.w56 - 2.0 * w5.beta[eq.m]).norm() / w5.beta[eq.m].norm());
                let stability = r.certificates.iter().map(|c| c.rel_change).fold(0.0, f64::max);
                Ok([sums, det, closed, used, stability])
            };
            run().map_err(|e| format!("{label}: {e}"))
        })
        .collect();
    let mut worst = [0.0f64; 5];
    let mut failures = String::new();
    for (r, f) in results.iter().zip(&fixtures) {
        match r {
            Ok(v) => {
                for i in 0..5 {
                    worst[i] = worst[i].max(v[i]);
                }
                let ok = v[0] <= 1e-14 && v[1] < 1e-8 && v[2] <= 1e-14 && v[3] <= 1e-15 && v[4] < 1e-9;
                if !ok {
                    failures += &format!("\n      FAIL {}: {:?}", f.0, v);
                }
            }
            Err(e) => failures += &format!("\n      FAIL {e}"),
        }
    }
    let detail = format!(
        "{} fixtures: exponent sums {:.1e}, |det C - 1| {:.1e}, formal Wronskians {:.1e}, denominators {:.1e}, n*/n*+1 {:.1e}; {:.2} s{failures}",
        fixtures.len(),
        worst[0],
        worst[1],
        worst[2],
        worst[3],
        worst[4],
        t0.elapsed().as_secs_f64()
    );
    outcome(failures.is_empty(), detail)
}

fn criterion_7(s: &SolverSettings) -> Outcome {
    use rayon::prelude::*;
    let t0 = Instant::now();
    let cases: Vec<(&str, PotentialSpec, f64, i64)> = vec![
        ("A-4=0.4", quartic_spike(0.4, 0), 4.0319714400, 0),
        ("A-4=1,l=2", quartic_spike(1.0, 2), 7.2242871639, 1),
        ("A-4=100", quartic_spike(100.0, 0), 11.265080432, 0),
        ("A-6=10,A-4=10", sextic_spike(10.0, 10.0), 7.13826093998, 0),
        ("lambda=1", critical_spike(1.0), 4.31731168925, 0),
        ("lambda=0.001", critical_spike(0.001), 3.00401125101, 0),
    ];
    let results: Vec<String> = cases
        .par_iter()
        .map(|(label, spec, e, offset)| {
            let run = || -> spiked::Result<(f64, usize, usize)> {
                let p = Problem::new(spec.clone(), SolverSettings { index_offset: *offset, ..s.clone() })?;
                let r = p.find_eigenvalue(e - 0.1, e + 0.1)?;
                let o = shoot_eigenvalue(&RadialPotential::from(spec), r.energy - 1e-3, r.energy + 1e-3, &ShootingOptions::default())?;
                let w = PhysicalSolution::new(&p, &r)?;
                Ok(((o.energy - r.energy).abs(), o.nodes, w.nodes(400)?))
            };
            match run() {
                Ok((d, on, wn)) if d < 1e-6 && on == 0 && wn == 0 => String::new(),
                Ok((d, on, wn)) => format!("\n      FAIL {label}: delta {d:e}, oracle nodes {on}, wavefunction nodes {wn}"),
                Err(e) => format!("\n      FAIL {label}: {e}"),
            }
        })
        .collect();
    let failures: String = results.concat();
    outcome(
        failures.is_empty(),
        format!("{} fixtures over three potentials, |dE| < 1e-6 and 0 nodes; {:.2} s{failures}", cases.len(), t0.elapsed().as_secs_f64()),
    )
}

fn criterion_8(s: &SolverSettings) -> Outcome {
    let t0 = Instant::now();
    let solve = |a: f64| Problem::new(quartic_spike(a, 0), s.clone())?.find_eigenvalue(3.55, 3.75);
    let (lo_r, hi_r) = (solve(0.12), solve(0.14));
    let sides = match (&lo_r, &hi_r) {
        (Ok(a), Ok(b)) => a.regime == Regime::Real && b.regime == Regime::Conjugate,
        _ => false,
    };
    let run = || -> spiked::Result<(f64, f64, bool, bool)> {
        // coarse location by bisection on the regime of the ground state
        let (mut lo, mut hi) = (0.12, 0.14);
        while hi - lo > 2e-6 {
            let a = 0.5 * (lo + hi);
            if solve(a)?.regime == Regime::Real {
                lo = a;
            } else {
                hi = a;
            }
        }
        // (nu1 - nu2)^2 is analytic in A and changes sign at the merger: fit a
        // quadratic through well-separated samples and take its root
        let a0 = 0.5 * (lo + hi);
        let mut pts = Vec::new();
        for k in [-6.0, -5.0, -4.0, -3.0, 3.0, 4.0, 5.0, 6.0] {
            let a = a0 + k * 1e-6;
            let r = solve(a)?;
            let d = r.nu[0] - r.nu[1];
            pts.push((a - a0, (d * d).re, r.energy));
        }
        let fit = |y: &dyn Fn(&(f64, f64, f64)) -> f64| {
            // least squares for c0 + c1 x + c2 x^2 (normal equations, x scaled to O(1))
            let mut m = [[0.0f64; 4]; 3];
            for p in &pts {
                let x = p.0 * 1e6;
                let row = [1.0, x, x * x];
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] += row[i] * row[j];
                    }
                    m[i][3] += row[i] * y(p);
                }
            }
            for i in 0..3 {
                for r in i + 1..3 {
                    let f = m[r][i] / m[i][i];
                    for c in i..4 {
                        m[r][c] -= f * m[i][c];
                    }
                }
            }
            let mut c = [0.0; 3];
            for i in (0..3).rev() {
                c[i] = (m[i][3] - (i + 1..3).map(|j| m[i][j] * c[j]).sum::<f64>()) / m[i][i];
            }
            c
        };
        let f = fit(&|p| p.1);
        let mut x = -f[0] / f[1];
        for _ in 0..20 {
            x -= (f[0] + f[1] * x + f[2] * x * x) / (f[1] + 2.0 * f[2] * x);
        }
        let ac = a0 + x * 1e-6;
        let e = fit(&|p| p.2);
        let ec = e[0] + e[1] * x + e[2] * x * x;
        let degenerate = |a: f64| matches!(solve(a), Err(Error::DegenerateIndices { .. }));
        let neighbourhood = [ac - 5e-14, ac, ac + 5e-14].into_iter().all(degenerate);
        let message = matches!(solve(ac), Err(e) if e.to_string().contains("the value 0.5 for"));
        Ok((ac, ec, neighbourhood, message))
    };
    match run() {
        Ok((ac, ec, neighbourhood, message)) => {
            let near_quoted = (ac - 0.1305).abs() < 1e-4 && (ec - 3.6454).abs() < 1e-4;
            let detail = format!(
                "merger at A-4 = {ac:.12}, E = {ec:.6}; DegenerateIndices on [A_c - 5e-14, A_c + 5e-14]: {neighbourhood}; \
                 A-4 = 0.12 {:?}, A-4 = 0.14 {:?}; {:.2} s",
                lo_r.map(|r| r.regime),
                hi_r.map(|r| r.regime),
                t0.elapsed().as_secs_f64()
            );
            outcome(sides && neighbourhood && message && near_quoted, detail)
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn criterion_9(s: &SolverSettings) -> Outcome {
    use rayon::prelude::*;
    let t0 = Instant::now();
    let variants = [
        SolverSettings { index_offset: 1, ..s.clone() },
        SolverSettings { index_offset: -1, ..s.clone() },
        SolverSettings { denominator_scale: 2.0, ..s.clone() },
    ];
    let worst: Vec<Result<f64, String>> = TABLE1
        .par_iter()
        .map(|&(a, e, _)| {
            let solve = |st: &SolverSettings| Problem::new(quartic_spike(a, 0), st.clone())?.find_eigenvalue(e - 0.1, e + 0.1).map(|r| r.energy);
            let run = || -> spiked::Result<f64> {
                let base = solve(s)?;
                let mut d = 0.0f64;
                for v in &variants {
                    d = d.max((solve(v)? - base).abs());
                }
                Ok(d)
            };
            run().map_err(|e| format!("A-4={a}: {e}"))
        })
        .collect();
    let mut max = 0.0f64;
    let mut failures = String::new();
    for w in worst {
        match w {
            Ok(d) => max = max.max(d),
            Err(e) => failures += &format!("\n      FAIL {e}"),
        }
    }
    outcome(
        failures.is_empty() && max <= 1e-10,
        format!("9 rows x (offset +1, offset -1, denominators x2): max |dE| {max:.1e}; {:.2} s{failures}", t0.elapsed().as_secs_f64()),
    )
}

fn main() {
    let s = SolverSettings::default();
    let criteria: [(&str, fn(&SolverSettings) -> Outcome); 9] = [
        ("Table 1 ground states", criterion_1),
        ("connection factors at A-4 = 0.4", criterion_2),
        ("Floquet and Thome coefficient tables", criterion_3),
        ("Table 8 ground states", criterion_4),
        ("Table 9 ground states", criterion_5),
        ("structural invariants", criterion_6),
        ("shooting oracle equivalence", criterion_7),
        ("degeneracy detection", criterion_8),
        ("convention invariance", criterion_9),
    ];
    let t0 = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f(&s);
        println!("{} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria pass in {:.1} s", criteria.len() - failed, criteria.len(), t0.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
