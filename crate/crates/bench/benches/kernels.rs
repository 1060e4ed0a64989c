use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pmnoise_core::oracle::{lens_transform_slice, Fft2, NearFieldBuilder, SimulationConfig};
use pmnoise_core::spectra::default_qx_grid;
use pmnoise_core::{
    analytic_spectrum, envelope, lattice_factor, EnvelopeKind, GaussianMode, OpticalGeometry, PixelLattice, Scheme,
    SignBranch, SourceParams, SpectrumQuery, Vec2,
};

fn geometry() -> OpticalGeometry {
    OpticalGeometry::new(2.0 * PI, 1.0, 1.0).unwrap()
}

fn lattice(c: &mut Criterion) {
    let mut group = c.benchmark_group("lattice_factor");
    for n in [7, 99] {
        let lat = PixelLattice::new(10.0, n, 1.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &lat, |b, lat| {
            b.iter(|| lattice_factor(lat, black_box(Vec2::new(0.123, 0.456))))
        });
    }
    group.finish();
}

fn envelopes(c: &mut Criterion) {
    let g = geometry();
    let lat = PixelLattice::new(10.0, 99, 1.0).unwrap();
    let mut group = c.benchmark_group("envelope_n99");
    for (name, kind) in [
        ("two_beam", EnvelopeKind::TwoBeamPixellised),
        ("single_beam_plus", EnvelopeKind::SingleBeamPixellised(SignBranch::Plus)),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| envelope(kind, black_box(Vec2::new(37.3, 0.0)), Some(&lat), &g).unwrap())
        });
    }
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let g = geometry();
    let lat = PixelLattice::new(10.0, 99, 1.0).unwrap();
    let query = SpectrumQuery {
        source: SourceParams::spl(1.0, 1.0).unwrap(),
        mode: GaussianMode::new(1.0).unwrap(),
        q_grid: default_qx_grid(&lat, &g, 40),
        lattice: Some(lat),
        geometry: g,
        scheme: Scheme::SingleBeam,
        branch: SignBranch::Plus,
        omega_grid: vec![0.0],
    };
    let mut group = c.benchmark_group("analytic_spectrum");
    group.sample_size(10);
    group.bench_function("fig4_n99_axis", |b| b.iter(|| analytic_spectrum(&query).unwrap()));
    group.finish();
}

fn oracle_slice(c: &mut Criterion) {
    let lat = PixelLattice::new(10.0, 3, 1.0).unwrap();
    let cfg = SimulationConfig::recommended(
        SourceParams::dopo(1.0, 1.0, 2.0).unwrap(),
        Some(lat),
        geometry(),
        Scheme::TwoBeam,
        SignBranch::Minus,
        1,
    )
    .unwrap();
    let builder = NearFieldBuilder::new(&cfg).unwrap();
    let beams = builder.trajectory(0).unwrap();
    let grid = builder.grid();
    let fft = Fft2::new(grid.points);
    c.bench_function("oracle_slice_n3", |b| {
        let mut t = 0;
        b.iter(|| {
            t = (t + 1) % cfg.segment_len;
            let near = beams[0].slice(t);
            lens_transform_slice(&near, grid, &cfg.geometry, &fft)
        })
    });
}

criterion_group!(benches, lattice, envelopes, spectrum, oracle_slice);
criterion_main!(benches);
