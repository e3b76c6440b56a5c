use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use polylogic::corpus;
use polylogic::deduction::{family, SetTerm};
use polylogic::optimizer::{oracle, Bounds, Constraint, Objective, VarBounds};
use polylogic::parallel::Execution;
use polylogic::polynomial::Polynomial;
use polylogic::runner::RunOptions;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn family_enumeration(c: &mut Criterion) {
    let term = SetTerm::parse("bf(bf(A & B => C) & bf(D => A) => bf(A => C) | bf(B & D => C))").unwrap();
    let atoms: Vec<String> = ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect();
    let mut g = c.benchmark_group("family_status_4_atoms");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| family::family_status(black_box(&term), Some(&atoms), exec).unwrap())
        });
    }
    g.finish();
}

fn grid_oracle(c: &mut Criterion) {
    let p = |s: &str| Polynomial::parse(s).unwrap();
    let objective = Objective::from(p("z + x y - x z"));
    let constraints = vec![Constraint::ge(p("x y"), p("1/4")), Constraint::le(p("z"), p("1 - x"))];
    let bounds: Bounds = ["x", "y", "z"].iter().map(|v| (v.to_string(), VarBounds::unit())).collect();
    let mut g = c.benchmark_group("grid_oracle_3d_r80");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| oracle::grid_oracle_with(&objective, &constraints, &bounds, 80, 1e-3, exec).unwrap())
        });
    }
    g.finish();
}

fn corpus_run(c: &mut Criterion) {
    let mut g = c.benchmark_group("corpus_all");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = RunOptions { execution: exec, ..RunOptions::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                for m in corpus::names() {
                    black_box(corpus::run(m, &opts).unwrap().unwrap());
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, family_enumeration, grid_oracle, corpus_run);
criterion_main!(benches);
