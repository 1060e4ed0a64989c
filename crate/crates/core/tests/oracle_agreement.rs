//! End-to-end Monte-Carlo runs against the closed forms.

use std::f64::consts::PI;

use pmnoise_core::oracle::{run_oracle, SimulationConfig};
use pmnoise_core::{analytic_spectrum, OpticalGeometry, PixelLattice, Scheme, SignBranch, SourceParams, Vec2};

fn geometry() -> OpticalGeometry {
    OpticalGeometry::new(2.0 * PI, 1.0, 1.0).unwrap()
}

#[test]
fn spl_two_beam_plus_zero_at_origin() {
    let cfg = SimulationConfig::recommended(
        SourceParams::spl(1.0, 1.0).unwrap(),
        None,
        geometry(),
        Scheme::TwoBeam,
        SignBranch::Plus,
        2024,
    )
    .unwrap();
    let run = run_oracle(&cfg, &[Vec2::ZERO], &[0.0]).unwrap();
    let est = run.result.shot_normalized[[0, 0]];
    let se = run.result.stderr.as_ref().unwrap()[[0, 0]];
    assert!(est.abs() <= 3.0 * se + 1e-9, "{est} +- {se}");
}

#[test]
fn dopo_two_beam_minus_lattice_agrees() {
    let lat = PixelLattice::new(10.0, 3, 1.0).unwrap();
    let cfg = SimulationConfig::recommended(
        SourceParams::dopo(1.0, 1.0, 2.0).unwrap(),
        Some(lat),
        geometry(),
        Scheme::TwoBeam,
        SignBranch::Minus,
        2024,
    )
    .unwrap();
    let qs: Vec<Vec2> = [0.0, 0.5, 1.0, 5.0, 10.0].iter().map(|&x| Vec2::new(x, 0.0)).collect();
    let omegas = [0.0, 0.5, 1.0, 2.5];
    let run = run_oracle(&cfg, &qs, &omegas).unwrap();
    let analytic = analytic_spectrum(&run.result.query).unwrap();
    let se = run.result.stderr.as_ref().unwrap();
    let mut outside = 0;
    for ((idx, est), a) in run.result.shot_normalized.indexed_iter().zip(analytic.shot_normalized.iter()) {
        if (est - a).abs() > 3.0 * se[idx] + 1e-9 {
            outside += 1;
        }
    }
    assert!(outside <= 1, "{outside} of 20 outside 3 sigma");
}

#[test]
fn single_beam_matches_mirror_closed_form() {
    use pmnoise_core::reference::single_beam_mirror_spectrum;
    for branch in [SignBranch::Plus, SignBranch::Minus] {
        let source = SourceParams::spl(1.0, 1.0).unwrap();
        let cfg = SimulationConfig::recommended(source, None, geometry(), Scheme::SingleBeam, branch, 99).unwrap();
        let lat = cfg.effective_lattice();
        let qs: Vec<Vec2> = [0.0, 0.5, 1.0, 1.5, 2.5].iter().map(|&x| Vec2::new(x, 0.0)).collect();
        let run = run_oracle(&cfg, &qs, &[0.0, 0.5, 1.0, 2.5]).unwrap();
        let se = run.result.stderr.as_ref().unwrap();
        let mut outside = 0;
        for ((i, j), est) in run.result.shot_normalized.indexed_iter() {
            let q = run.result.query.q_grid[i];
            let w = run.result.query.omega_grid[j];
            let expect = single_beam_mirror_spectrum(&source, &lat, &cfg.geometry, branch, q, w);
            if (est - expect).abs() > 3.0 * se[[i, j]] + 1e-9 {
                outside += 1;
            }
        }
        assert!(outside <= 1, "{branch}: {outside} points outside 3 sigma");
    }
}

#[test]
fn brighter_source_scales_absolute_spectrum_only() {
    let run = |n: f64| {
        let source = SourceParams::spl(1.0, n).unwrap();
        let cfg = SimulationConfig::recommended(source, None, geometry(), Scheme::TwoBeam, SignBranch::Minus, 5).unwrap();
        run_oracle(&cfg, &[Vec2::ZERO, Vec2::new(1.0, 0.0)], &[0.0, 1.0]).unwrap().result
    };
    let (dim, bright) = (run(1.0), run(4.0));
    for (a, b) in dim.shot_normalized.iter().zip(bright.shot_normalized.iter()) {
        assert!((a - b).abs() <= 1e-9 * a.abs(), "{a} vs {b}");
    }
    for (a, b) in dim.values.iter().zip(bright.values.iter()) {
        assert!((4.0 * a - b).abs() <= 1e-9 * b.abs(), "{a} vs {b}");
    }
}
