use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use phaseflow_core::spectral::{
    squeezed_vacuum_wavefunction, wigner_transform, zero_mode_residual,
};
use phaseflow_core::{Axis, CamouflageParams, SpectralOptions};

fn wigner(c: &mut Criterion) {
    let mut group = c.benchmark_group("wigner_transform");
    group.sample_size(10);
    for n in [256usize, 512, 1024] {
        let axis = Axis::symmetric(20.0, n).unwrap();
        let psi = squeezed_vacuum_wavefunction(0.4, &axis).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &psi, |b, psi| {
            b.iter(|| wigner_transform(psi).unwrap())
        });
    }
    group.finish();
}

fn zero_mode(c: &mut Criterion) {
    let p = CamouflageParams::simplified(0.5, 2.0).unwrap();
    let opts = SpectralOptions::default();
    let mut group = c.benchmark_group("zero_mode_residual");
    for n in [512usize, 2048, 8192] {
        let axis = Axis::symmetric(12.0, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &axis, |b, axis| {
            b.iter(|| zero_mode_residual(&p, axis, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, wigner, zero_mode);
criterion_main!(benches);
