use approx::assert_relative_eq;
use bec_focus::dynamics::{evolve_1d, EvolutionConfig};
use bec_focus::grid::GridSpec;
use bec_focus::groundstate::{solve_ground_1d, ItpConfig};
use bec_focus::metrics::{fidelity_to_rectangle, focusing_factor, rectangle_state, RectangleState};
use bec_focus::potentials::PotentialSpec;
use bec_focus::units::PhysicalParams;
use bec_focus::wigner::{marginal_position, wigner_transform};
use bec_focus::{wavefile, WaveFunction};

const SMALL: GridSpec = GridSpec { n_points: 4096, half_width: 16.0 };

fn quench_cfg() -> EvolutionConfig {
    EvolutionConfig { t_end: 0.12, ..EvolutionConfig::default() }
}

#[test]
fn ground_state_survives_a_file_round_trip_and_focuses() {
    let p = PhysicalParams::table1();
    let trap = PotentialSpec::lg_power_law_from_laser(&p, 10).unwrap();
    let grid = SMALL.build::<f64>().unwrap();
    let (phi, rep) = solve_ground_1d(&trap, 17129.69, &grid, &ItpConfig::default()).unwrap();
    assert!(rep.converged);
    assert!(fidelity_to_rectangle(&phi).unwrap() > 0.98);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.gpef");
    wavefile::write(&path, &phi.data).unwrap();
    let back = WaveFunction::from_data(grid, wavefile::read(&path).unwrap()).unwrap();
    assert_eq!(back.data, phi.data);

    let ev = evolve_1d(&back, 99.35, &PotentialSpec::Zero, &quench_cfg()).unwrap();
    let f = focusing_factor(&ev.trace).unwrap();
    assert_relative_eq!(f.f, 1.2506, max_relative = 2e-3);
    assert!(ev.norm_drift() < 1e-10);
}

#[test]
fn single_precision_tracks_double_precision() {
    let h = 1.0 / 2f64.sqrt();
    let run = |f64_grid: bool| {
        let cfg = EvolutionConfig { t_end: 0.3, boundary_threshold: None, ..EvolutionConfig::default() };
        if f64_grid {
            let phi = rectangle_state(h, &SMALL.build::<f64>().unwrap()).unwrap();
            focusing_factor(&evolve_1d(&phi, 0.0, &PotentialSpec::Zero, &cfg).unwrap().trace).unwrap()
        } else {
            let phi = rectangle_state(h, &SMALL.build::<f32>().unwrap()).unwrap();
            focusing_factor(&evolve_1d(&phi, 0.0, &PotentialSpec::Zero, &cfg).unwrap().trace).unwrap()
        }
    };
    let (d, s) = (run(true), run(false));
    assert_relative_eq!(d.f, s.f, max_relative = 1e-3);
    assert_relative_eq!(d.t_f, s.t_f, max_relative = 1e-2);
    assert_relative_eq!(RectangleState::new(h).unwrap().halfwidth, 1.0, max_relative = 1e-12);
}

#[test]
fn wigner_position_marginal_is_the_density() {
    let grid = GridSpec { n_points: 256, half_width: 8.0 }.build::<f64>().unwrap();
    let data = grid.positions().iter().map(|&z| num_complex::Complex::new((-z * z).exp(), 0.0)).collect();
    let phi = WaveFunction::from_data(grid, data).unwrap().normalized().unwrap();
    let w = wigner_transform(&phi);
    let m = marginal_position(&w);
    for (a, b) in m.iter().zip(phi.density()) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}
