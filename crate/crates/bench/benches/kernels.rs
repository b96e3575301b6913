use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hamqaoa::formula::infinite::RescaledParams;
use hamqaoa::formula::{FiniteFormula, InfiniteFormula, SiteDistribution};
use hamqaoa::{AnsatzSpec, HamiltonianSpec, HqsEngine, InteractionGraph, ParamSchedule, SignString};

fn schedule(p: usize) -> ParamSchedule {
    let x: Vec<f64> = (0..4 * p).map(|k| 0.37 * k as f64 - 1.1).collect();
    ParamSchedule::from_flat(p, &x).unwrap()
}

fn statevector(c: &mut Criterion) {
    let mut group = c.benchmark_group("statevector");
    for n in [10usize, 14] {
        let g = InteractionGraph::ring(n).unwrap();
        let engine = HqsEngine::new(&g, &AnsatzSpec::Simplified(SignString::alternating(n))).unwrap();
        let op = HamiltonianSpec::qmc(g).operator().unwrap();
        let params = schedule(3);
        group.bench_with_input(BenchmarkId::new("state_p3", n), &n, |b, _| {
            b.iter(|| engine.state(black_box(&params)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("energy_gradient_p3", n), &n, |b, _| {
            b.iter(|| engine.energy_and_gradient(&op, black_box(&params)).unwrap())
        });
    }
    group.finish();
}

fn finite_formula(c: &mut Criterion) {
    let mut group = c.benchmark_group("finite_formula");
    for p in [2usize, 4] {
        let params = schedule(p);
        group.bench_with_input(BenchmarkId::new("pair_expectations_d3", p), &p, |b, _| {
            b.iter(|| {
                FiniteFormula::new(black_box(&params), 3, SiteDistribution::SignedX)
                    .unwrap()
                    .pair_expectations()
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn infinite_formula(c: &mut Criterion) {
    let mut group = c.benchmark_group("infinite_formula");
    for p in [3usize, 6] {
        let alpha: Vec<f64> = (0..p).map(|k| 0.3 - 0.1 * k as f64).collect();
        let delta: Vec<f64> = (0..p).map(|k| 0.2 * k as f64 - 0.5).collect();
        let beta: Vec<i64> = (0..p as i64).map(|k| k % 2).collect();
        let params = RescaledParams::from_quarter_turns(alpha, &beta, delta);
        group.bench_with_input(BenchmarkId::new("objective", p), &p, |b, _| {
            b.iter(|| {
                InfiniteFormula::new(black_box(&params), &SiteDistribution::SignedX)
                    .unwrap()
                    .heisenberg_objective()
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, statevector, finite_formula, infinite_formula);
criterion_main!(benches);
