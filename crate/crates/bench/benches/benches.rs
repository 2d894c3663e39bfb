use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use nettc_bench::rv_instance;
use nettc_core::engine::{contains, EngineOptions, Verdict};
use nettc_core::lca::LcaIndex;
use nettc_core::newick::{parse_network, serialize_network};

fn bench_engine(c: &mut Criterion) {
    let mut group = c.benchmark_group("contains_rv");
    for exp in [10u32, 12, 14] {
        let size = 1usize << exp;
        let (net, t) = rv_instance(exp as u64, size);
        group.throughput(Throughput::Elements(net.vertex_count() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(size), &size, |b, _| {
            b.iter(|| {
                let out = contains(&net, &t, &EngineOptions::default()).unwrap();
                assert_eq!(out.verdict, Verdict::Yes);
            })
        });
    }
    group.finish();
}

fn bench_lca(c: &mut Criterion) {
    let (net, t) = rv_instance(3, 1 << 12);
    drop(net);
    let idx = LcaIndex::build(t.as_net()).unwrap();
    let ids: Vec<_> = t.vertex_ids().collect();
    c.bench_function("lca_build_4k", |b| {
        b.iter(|| LcaIndex::build(t.as_net()).unwrap())
    });
    c.bench_function("lca_query", |b| {
        let mut i = 0;
        b.iter(|| {
            i = (i + 7919) % ids.len();
            let j = (i * 31 + 13) % ids.len();
            idx.lca(ids[i], ids[j]).unwrap()
        })
    });
}

fn bench_newick(c: &mut Criterion) {
    let (net, _) = rv_instance(5, 1 << 12);
    let text = serialize_network(&net);
    c.bench_function("parse_network_4k", |b| {
        b.iter(|| parse_network(&text).unwrap())
    });
    c.bench_function("serialize_network_4k", |b| {
        b.iter(|| serialize_network(&net))
    });
}

criterion_group!(benches, bench_engine, bench_lca, bench_newick);
criterion_main!(benches);
