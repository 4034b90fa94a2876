use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mvcolor_bench::{case, colors};
use mvcolor_core::metrics::{local_discriminability, raw_metrics, Colormap};
use mvcolor_core::optimizer::pareto::front_indices;
use mvcolor_core::params::CaseExtrema;
use mvcolor_core::spec::ColormapKind;
use mvcolor_core::{ciede2000, optimize, GaConfig, PaletteLibrary, Weights};

fn color_difference(c: &mut Criterion) {
    let cs = colors(64);
    c.bench_function("ciede2000_64x64", |b| {
        b.iter(|| {
            let mut s = 0.0;
            for x in &cs {
                for y in &cs {
                    s += ciede2000(x, y);
                }
            }
            black_box(s)
        })
    });
}

fn pareto(c: &mut Criterion) {
    let points: Vec<(f64, f64)> = (0..200).map(|i| (((i * 7919) % 1000) as f64, ((i * 104_729) % 997) as f64)).collect();
    c.bench_function("front_indices_200", |b| b.iter(|| front_indices(black_box(&points))));
}

fn metrics(c: &mut Criterion) {
    let entries = colors(12).into_iter().enumerate().map(|(i, c)| (format!("k{i}"), c)).collect();
    let map = Colormap::keyed(ColormapKind::Discrete, entries);
    c.bench_function("local_discriminability_12", |b| b.iter(|| local_discriminability(black_box(&map))));

    let g = case("case4_superstore");
    let lib = PaletteLibrary::bundled();
    let r = optimize(&g, &lib, &CaseExtrema::default(), &Weights::default(), &GaConfig { pop_size: 4, generations: 1, n_best: 2, ..GaConfig::default() }).unwrap();
    let views = r.front.members[0].views.clone();
    c.bench_function("raw_metrics_superstore", |b| b.iter(|| raw_metrics(black_box(&views), &g)));
}

fn search(c: &mut Criterion) {
    let g = case("case2_pets");
    let lib = PaletteLibrary::bundled();
    let cfg = GaConfig { pop_size: 20, generations: 10, n_best: 5, ..GaConfig::default() };
    let mut group = c.benchmark_group("optimize");
    group.sample_size(10);
    group.bench_function("pets_20x10", |b| b.iter(|| optimize(&g, &lib, &CaseExtrema::default(), &Weights::default(), &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, color_difference, pareto, metrics, search);
criterion_main!(benches);
