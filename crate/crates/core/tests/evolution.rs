use std::f64::consts::PI;

use kp_core::evolution::{
    conserved_diagnostics, evolve, linear_propagate, picard_solve, step, SolverConfig,
};
use kp_core::presets::InitialData;
use kp_core::{DispersionParams, Grid2D, KpError};

fn gaussian(amplitude: f64) -> InitialData {
    InitialData::Gaussian {
        amplitude,
        sigma_x: 1.0,
        sigma_y: 1.0,
    }
}

#[test]
fn picard_agrees_with_rk4_beyond_the_linear_regime() {
    let p = DispersionParams::kp1();
    let g = Grid2D::new(4.0 * PI, 4.0 * PI, 32, 32).unwrap();
    let u0 = gaussian(0.05).build(&g).unwrap();
    let cfg = SolverConfig {
        picard_smallness: 1.0,
        ..SolverConfig::picard()
    };
    let out = picard_solve(&u0, &cfg, &p).unwrap();
    assert!(out.converged);
    let fixed = out.at(0.25).unwrap();
    let rk4 = evolve(&u0, &SolverConfig::rk4(1e-3, 0.25), &p, usize::MAX).unwrap().final_field;
    let nonlinear = rk4.sub(&linear_propagate(&u0, 0.25, &p)).unwrap().l2_norm();
    let err = fixed.sub(&rk4).unwrap().l2_norm();
    assert!(nonlinear > 1e-3 * rk4.l2_norm(), "nonlinear part {nonlinear:e}");
    assert!(err < 0.01 * nonlinear, "error {err:e} vs nonlinear part {nonlinear:e}");
}

#[test]
fn picard_refuses_large_data() {
    let g = Grid2D::new(4.0 * PI, 4.0 * PI, 32, 32).unwrap();
    let u0 = gaussian(1.0).build(&g).unwrap();
    let r = picard_solve(&u0, &SolverConfig::picard(), &DispersionParams::kp1());
    assert!(matches!(r, Err(KpError::DataTooLarge { .. })), "{r:?}");
}

#[test]
fn kp2_conserves_mass_and_hamiltonian() {
    let p = DispersionParams::kp2();
    let g = Grid2D::new(8.0 * PI, 8.0 * PI, 128, 128).unwrap();
    let u0 = gaussian(0.3).build(&g).unwrap();
    let tr = evolve(&u0, &SolverConfig::rk4(2e-3, 0.5), &p, 50).unwrap();
    let first = tr.diagnostics.first().unwrap();
    let last = tr.diagnostics.last().unwrap();
    assert_eq!(first.t, 0.0);
    assert!((last.t - 0.5).abs() < 1e-12);
    assert!((last.l2 - first.l2).abs() <= 1e-10 * first.l2);
    let drift = (last.hamiltonian - first.hamiltonian).abs() / first.hamiltonian.abs();
    assert!(drift <= 1e-6, "drift {drift:e}, H0 {}", first.hamiltonian);
}

#[test]
fn single_steps_compose_to_evolve() {
    let p = DispersionParams::kp1();
    let g = Grid2D::new(4.0 * PI, 4.0 * PI, 32, 32).unwrap();
    let u0 = gaussian(0.2).build(&g).unwrap();
    let cfg = SolverConfig::rk4(1e-2, 0.05);
    let mut u = u0.clone();
    for _ in 0..5 {
        u = step(&u, &cfg, &p).unwrap();
    }
    let v = evolve(&u0, &cfg, &p, 1).unwrap().final_field;
    assert!(u.sub(&v).unwrap().l2_norm() <= 1e-14 * v.l2_norm());
    let d = conserved_diagnostics(&v, &p);
    assert!(d.energy_norm.is_finite() && d.energy_norm > 0.0);
}
