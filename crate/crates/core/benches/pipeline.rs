use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pdpaths::corpus::{generate, CorpusSpec};
use pdpaths::pipeline::{solve_pipeline, RunConfig};

fn corpus_solve(c: &mut Criterion) {
    // instances that reach the candidate search, where the parallel paths live
    let insts: Vec<_> = generate(1, 60, &CorpusSpec::default())
        .into_iter()
        .filter(|inst| solve_pipeline(inst, &RunConfig { jobs: Some(1), ..RunConfig::default() }).is_ok_and(|r| r.candidates_tried > 0))
        .take(12)
        .collect();
    let mut group = c.benchmark_group("solve_corpus");
    group.sample_size(10);
    for (name, jobs) in [("sequential", Some(1)), ("parallel", None)] {
        let cfg = RunConfig { jobs, ..RunConfig::default() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| {
                for inst in &insts {
                    solve_pipeline(inst, cfg).unwrap();
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, corpus_solve);
criterion_main!(benches);
