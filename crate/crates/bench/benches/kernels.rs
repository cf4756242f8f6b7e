use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use superindex::examples::{random_superconnection, spectral_flow_family, RandomOptions};
use superindex::family::assemble_index;
use superindex::family::cocycle::IndexOptions;
use superindex::{Complex64, RingElement, RingSignature};

fn ring_mul(c: &mut Criterion) {
    let sig = RingSignature::new(2, 3, &["a", "b"]).unwrap();
    let gens: Vec<RingElement> = (0..2)
        .flat_map(|i| [RingElement::x(&sig, i), RingElement::dx(&sig, i)])
        .chain(["a", "b"].iter().map(|n| RingElement::odd(&sig, n).unwrap()))
        .collect();
    let mut x = RingElement::one(&sig);
    for (k, g) in gens.iter().enumerate() {
        x = &x + &g.scale(&Complex64::new(0.1 * (k + 1) as f64, 0.0));
    }
    let y = &x * &x;
    c.bench_function("ring_mul_m2_d3_odd2", |b| b.iter(|| &x * &y));
}

fn heat(c: &mut Criterion) {
    let mut group = c.benchmark_group("heat");
    for rank in [2usize, 4, 8] {
        let opts = RandomOptions { max_rank: rank, max_m: 2, max_degree: 3, real: false, scale: 0.6 };
        let a = random_superconnection(rank as u64, &opts).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(rank), &a, |b, a| b.iter(|| a.heat(1.0).unwrap()));
    }
    group.finish();
}

fn index_pipeline(c: &mut Criterion) {
    let fam = spectral_flow_family(1.0, 64).unwrap();
    let mut group = c.benchmark_group("index");
    group.sample_size(10);
    group.bench_function("spectral_flow_64", |b| {
        b.iter(|| assemble_index(&fam, &[0.25, 0.5625], IndexOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, ring_mul, heat, index_pipeline);
criterion_main!(benches);
