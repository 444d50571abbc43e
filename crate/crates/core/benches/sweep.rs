//! Sequential against data-parallel execution: a whole plan sweep, and the
//! checks inside a single large decomposition.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use utgrading::decompose::decompose_with;
use utgrading::group::{Group, GroupElement};
use utgrading::par::{self, Execution};
use utgrading::scalar::Field;
use utgrading::verify::{generate_instance, run_plan, standard_grid, ConjugatorChoice, DivisionChoice, InstancePlan};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sweep(c: &mut Criterion) {
    let plans: Vec<_> = standard_grid().into_iter().step_by(4).collect();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                let reports = par::map_slice(exec, &plans, |(n, p)| run_plan(n, p, Execution::Sequential, false).unwrap());
                black_box(reports.iter().all(|r| r.pass()))
            })
        });
    }
    group.finish();
}

fn single_instance(c: &mut Criterion) {
    let idx = GroupElement::Index;
    let plan = InstancePlan {
        seed: 5,
        field: Field::prime(10007).unwrap(),
        group: Group::klein_four(),
        blocks: vec![1, 2, 3],
        eta: vec![idx(0), idx(1), idx(2), idx(3), idx(1), idx(0)],
        division: DivisionChoice::Pauli { a: idx(1), b: idx(2) },
        conjugator: ConjugatorChoice::Random,
    };
    let grading = generate_instance(&plan).unwrap().grading;
    let mut group = c.benchmark_group("decompose_dim100");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| black_box(decompose_with(&grading, exec).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, sweep, single_instance);
criterion_main!(benches);
