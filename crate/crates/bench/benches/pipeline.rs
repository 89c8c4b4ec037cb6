use criterion::{black_box, criterion_group, criterion_main, Criterion};
use spiked::tables::{critical_spike, quartic_spike, sextic_spike};
use spiked::{refine_floquet, Complex64, Problem, SolverSettings};

fn problems() -> Vec<(&'static str, Problem, f64)> {
    let s = SolverSettings::default();
    vec![
        ("quartic", Problem::new(quartic_spike(0.4, 0), s.clone()).unwrap(), 4.0319714400),
        ("sextic", Problem::new(sextic_spike(10.0, 10.0), s.clone()).unwrap(), 7.13826093998),
        ("critical", Problem::new(critical_spike(1.0), s).unwrap(), 4.31731168925),
    ]
}

fn residual(c: &mut Criterion) {
    let mut g = c.benchmark_group("residual");
    for (name, p, e) in problems() {
        g.bench_function(name, |b| b.iter(|| p.residual(black_box(e)).unwrap()));
    }
    g.finish();
}

fn floquet(c: &mut Criterion) {
    let mut g = c.benchmark_group("refine_floquet");
    for (name, p, e) in problems() {
        let eq = p.form.at_energy(e);
        let nu: Complex64 = p.evaluate(e, None).unwrap().pair.nu()[0];
        g.bench_function(name, |b| b.iter(|| refine_floquet(&eq, black_box(nu), &p.settings).unwrap()));
    }
    g.finish();
}

fn eigenvalue(c: &mut Criterion) {
    let mut g = c.benchmark_group("find_eigenvalue");
    g.sample_size(10);
    for (name, p, e) in problems() {
        g.bench_function(name, |b| b.iter(|| p.find_eigenvalue(black_box(e - 0.1), e + 0.1).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, residual, floquet, eigenvalue);
criterion_main!(benches);
