//! Connection factors, quantization, refinement and wavefunctions.

use num_complex::Complex64 as C;
use spiked::oracle::{shoot_eigenvalue, RadialPotential, ShootingOptions};
use spiked::tables::{critical_spike, fixture, quartic_spike, sextic_spike, FIXTURE_A_T, FIXTURE_B_T};
use spiked::wavefunction::{PhysicalSolution, Region};
use spiked::{Error, Normalization, Problem, Regime, SolverSettings};

fn problem(spec: spiked::PotentialSpec) -> Problem {
    Problem::new(spec, SolverSettings::default()).unwrap()
}

#[test]
fn fixture_connection_factors() {
    let s = SolverSettings::default();
    let (p, e) = fixture(false, &s).unwrap();
    let pt = p.evaluate(e, None).unwrap();
    for (k, &(re, im)) in FIXTURE_A_T.iter().enumerate() {
        let t = pt.connection.get(1, k + 3);
        assert!((t - C::new(re, im)).norm() < 1e-8, "T1{}: {t}", k + 3);
        assert!((pt.connection.get(2, k + 3) - t.conj()).norm() < 1e-14);
    }
    let (p, e) = fixture(true, &s).unwrap();
    let pt = p.evaluate(e, None).unwrap();
    for (k, row) in FIXTURE_B_T.iter().enumerate() {
        for j in 0..2 {
            let t = pt.connection.get(j + 1, k + 3);
            assert!((t - C::new(row[j], 0.0)).norm() < 1e-8, "T{}{}: {t}", j + 1, k + 3);
        }
    }
}

#[test]
fn connection_factors_reconstruct_the_floquet_solution() {
    // w_1 = T13 w_3 + T14 w_4 at large z where w_3 is negligible against w_4:
    // w_1 / w_4 -> T14.  Likewise w_1 / w_6 -> T16 at small z.
    let s = SolverSettings::default();
    let (p, e) = fixture(false, &s).unwrap();
    let pt = p.evaluate(e, None).unwrap();
    let eq = p.form.at_energy(e);
    let w4 = spiked::thome_infinity(&eq, 4, 200).unwrap();
    let w6 = spiked::thome_origin(&eq, 6, 200).unwrap();
    let sol = &pt.pair.solutions[0];
    let z = 6.0;
    let (l4, e4) = w4.eval_ln(z);
    let (w1, _, _) = sol.eval(z);
    let ratio = (w1.ln() - l4).exp();
    assert!(e4 < 1e-8);
    assert!((ratio - pt.connection.get(1, 4)).norm() < 1e-6 * ratio.norm(), "{ratio}");
    let z = 0.04;
    let (l6, e6) = w6.eval_ln(z);
    let (w1, _, _) = sol.eval(z);
    let ratio = (w1.ln() - l6).exp();
    assert!(e6 < 1e-8);
    assert!((ratio - pt.connection.get(1, 6)).norm() < 1e-6 * ratio.norm(), "{ratio}");
}

#[test]
fn extraction_is_stable_and_denominators_are_closed_form() {
    for spec in [quartic_spike(0.4, 0), sextic_spike(10.0, 10.0), critical_spike(1.0)] {
        let p = problem(spec);
        let r = p.find_eigenvalue(3.0, 8.0).unwrap();
        assert!(r.certificates.iter().all(|c| c.rel_change < 1e-9));
        let eq = p.form.at_energy(r.energy);
        let w3 = spiked::thome_infinity(&eq, 3, 4).unwrap();
        let w5 = spiked::thome_origin(&eq, 5, 4).unwrap();
        assert_eq!(r.point.connection.w34, -2.0 * w3.alpha[eq.n]);
        assert_eq!(r.point.connection.w56, 2.0 * w5.beta[eq.m]);
    }
}

#[test]
fn residual_changes_sign_at_the_eigenvalue() {
    let p = problem(quartic_spike(0.4, 0));
    let a = p.evaluate(4.0, None).unwrap();
    let b = p.evaluate(4.1, None).unwrap();
    assert!(a.residual.signum() != b.residual.signum());
    assert!(a.residual_imag.abs() < 1e-10 * a.residual.abs().max(1e-3));
}

#[test]
fn warm_and_cold_refinement_agree() {
    for (spec, lo, hi) in [(quartic_spike(0.1, 0), 3.5, 3.7), (quartic_spike(0.4, 0), 3.9, 4.2), (critical_spike(0.005), 2.95, 3.1)] {
        let p = problem(spec);
        let warm = p.find_eigenvalue_with(lo, hi, true).unwrap();
        let cold = p.find_eigenvalue_with(lo, hi, false).unwrap();
        assert!((warm.energy - cold.energy).abs() <= 1e-10 * cold.energy, "{} {}", warm.energy, cold.energy);
    }
}

#[test]
fn eigenvalue_is_independent_of_basis_conventions() {
    let base = SolverSettings::default();
    let spec = quartic_spike(1.0, 0);
    let e0 = Problem::new(spec.clone(), base.clone()).unwrap().find_eigenvalue(4.4, 4.6).unwrap().energy;
    for s in [
        SolverSettings { normalization: Normalization::L2, ..base.clone() },
        SolverSettings { index_offset: 1, ..base.clone() },
        SolverSettings { index_offset: -2, ..base.clone() },
        SolverSettings { denominator_scale: 2.0, ..base.clone() },
    ] {
        let e = Problem::new(spec.clone(), s).unwrap().find_eigenvalue(4.4, 4.6).unwrap().energy;
        assert!((e - e0).abs() <= 1e-10 * e0, "{e} vs {e0}");
    }
}

#[test]
fn regimes_and_conjugate_rows() {
    let real = problem(quartic_spike(0.01, 0)).find_eigenvalue(3.1, 3.3).unwrap();
    assert_eq!(real.regime, Regime::Real);
    assert!(real.nu.iter().all(|v| v.im == 0.0));
    let complex = problem(quartic_spike(0.4, 0)).find_eigenvalue(3.9, 4.2).unwrap();
    assert_eq!(complex.regime, Regime::Conjugate);
    assert!((complex.nu[1] - complex.nu[0].conj()).norm() < 1e-14);
}

#[test]
fn scan_is_deterministic_across_thread_counts() {
    let p = problem(quartic_spike(0.4, 0));
    let run = |n: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| p.scan(3.0, 9.0, 0.1).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert!(one[0].0 < 4.0319714400 && 4.0319714400 < one[0].1, "{one:?}");
    assert!(problem(quartic_spike(0.4, 0)).scan(3.0, 3.05, 0.1).unwrap().is_empty());
}

#[test]
fn scan_and_solve_finds_excited_states_with_nodes() {
    let p = problem(quartic_spike(0.4, 0));
    let roots = p.scan_and_solve(3.0, 9.0, 0.1).unwrap();
    assert!(roots.len() >= 2);
    let rp = RadialPotential::from(&p.spec);
    for (i, r) in roots.iter().enumerate() {
        let o = shoot_eigenvalue(&rp, r.energy - 1e-3, r.energy + 1e-3, &ShootingOptions::default()).unwrap();
        assert!((o.energy - r.energy).abs() < 1e-6);
        assert_eq!(o.nodes, i);
        let w = PhysicalSolution::new(&p, r).unwrap();
        assert_eq!(w.nodes(600).unwrap(), i);
    }
}

#[test]
fn no_sign_change_is_reported() {
    let p = problem(quartic_spike(0.4, 0));
    assert!(matches!(p.find_eigenvalue(4.2, 4.3), Err(Error::NoSignChange { .. })));
}

#[test]
fn wavefunction_is_real_normalized_and_consistent() {
    let p = problem(quartic_spike(0.4, 0));
    let r = p.find_eigenvalue(3.9, 4.2).unwrap();
    let w = PhysicalSolution::new(&p, &r).unwrap();
    assert_eq!(w.nodes(400).unwrap(), 0);
    assert!(w.imaginary_residue(400).unwrap() < 1e-8);
    let (gap, compared) = w.overlap_discrepancy(400, 1e-8);
    assert!(compared > 0 && gap < 1e-6, "{gap}");
    // trapezoid norm on a fine r grid, independent of the internal quadrature
    let (a, b) = w.support;
    let n = 20000;
    let h = (b - a) / n as f64;
    let norm: f64 = (0..=n)
        .map(|i| {
            let v = w.evaluate(a + i as f64 * h).unwrap().value.norm_sqr();
            if i == 0 || i == n { 0.5 * v } else { v }
        })
        .sum::<f64>()
        * h;
    assert!((norm - 1.0).abs() < 1e-6, "{norm}");
    let regions: Vec<Region> = w.grid(400).iter().map(|&r| w.evaluate(r).unwrap().region).collect();
    assert!(regions.contains(&Region::Floquet));
}

#[test]
fn wavefunction_csv() {
    let p = problem(quartic_spike(1.0, 0));
    let r = p.find_eigenvalue(4.4, 4.6).unwrap();
    let w = PhysicalSolution::new(&p, &r).unwrap();
    let pts: Vec<_> = w.sample(&w.grid(5)).into_iter().map(|p| p.unwrap()).collect();
    let mut out = Vec::new();
    w.write_csv(&pts, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,Re_R,Im_R");
    assert_eq!(lines.len(), 6);
    let cols: Vec<f64> = lines[3].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(cols.len(), 3);
    assert!(cols[1] > 0.0);
}
