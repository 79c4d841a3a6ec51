mod common;

use common::*;
use fracgibc::fem::flux_load;
use fracgibc::freq::FrequencyOperator;
use fracgibc::laplace::{
    caputo_symbol, invert, invert_adaptive, truncation_decay_study, ContourSpec, TemporalSignal, Trajectory,
    TrajectorySource,
};
use fracgibc::time::{refine_until, solve_time_domain, FemSystem, ScalarSystem};
use fracgibc::trig::BoundaryFunction;
use num_complex::Complex64;

#[test]
fn scalar_relaxation_matches_l1_oracle() {
    // y' ^(α) + y = t, U(s) = G(s) / (s^α + 1) with G = 1/s².
    let alpha = 0.5;
    let ramp = TemporalSignal::monomial_exp(1, 0.0).unwrap();
    let times = [0.5, 1.0, 2.0];
    let eval = |z: Complex64| Ok(vec![ramp.transform(z) / (caputo_symbol(z, alpha)? + 1.0)]);
    let (contour, report) = invert_adaptive(alpha, &eval, &times, 1e-10, 64, 1024).unwrap();
    assert!(report.windows.iter().all(|w| w.agreement < 1e-10));
    let l1 = refine_until(&ScalarSystem::new(1.0), alpha, &ramp, &times, 0.01, 2e-5).unwrap();
    for (a, b) in contour.values.iter().zip(&l1.trajectory.values) {
        assert!((a[0] - b[0]).abs() < 1e-4, "{} vs {}", a[0], b[0]);
    }
}

#[test]
fn pde_contour_matches_l1_on_radial_geometry() {
    let mesh = concentric_mesh(0.1);
    let forms = constant_forms(&mesh, 1.0, 1.0);
    let load = flux_load(&mesh, &BoundaryFunction::constant(2.0 * std::f64::consts::PI, 1.0).unwrap());
    let alpha = 0.5;
    let signal = TemporalSignal::monomial_exp(1, 1.0).unwrap();
    let eval = |z: Complex64| {
        let op = FrequencyOperator::new(&forms, z, alpha)?;
        Ok(op.solve_load(&load, signal.transform(z), "1")?.u)
    };
    let (contour, _) = invert_adaptive(alpha, &eval, &[1.0], 1e-6, 64, 1024).unwrap();
    let l1 = refine_until(&FemSystem::new(&forms, load.clone()), alpha, &signal, &[1.0], 0.01, 1e-3).unwrap();
    let err = relative_l2(&forms, &l1.trajectory.values[0], &contour.values[0]);
    assert!(err < 1e-2, "relative L2 difference {err}");
}

#[test]
fn fixed_contour_agrees_with_adaptive_result() {
    let alpha = 0.75;
    let g = TemporalSignal::monomial_exp(2, 1.0).unwrap();
    let eval = |z: Complex64| Ok(vec![g.transform(z) / (caputo_symbol(z, alpha)? + 2.0)]);
    let times = [1.0, 2.0, 4.0];
    let spec = ContourSpec::for_window(alpha, 4.0, 128).unwrap();
    let fixed = invert(&spec, alpha, &eval, &times).unwrap();
    let (adaptive, _) = invert_adaptive(alpha, &eval, &times, 1e-9, 64, 2048).unwrap();
    for (a, b) in fixed.values.iter().zip(&adaptive.values) {
        assert!((a[0] - b[0]).abs() < 1e-8);
    }
}

#[test]
fn truncation_error_is_linear_in_the_data() {
    let alpha = 0.5;
    let signal = TemporalSignal::monomial_exp(1, 0.0).unwrap();
    let traj = solve_time_domain(&ScalarSystem::new(1.0), alpha, &signal, 1.0 / 128.0, 8 * 128).unwrap();
    let s = Complex64::new(1.0, 0.0);
    let exact = vec![signal.transform(s) / (caputo_symbol(s, alpha).unwrap() + 1.0)];
    let horizons = [1.0, 2.0, 4.0, 8.0];
    let base = truncation_decay_study(&traj, &exact, &[1.0], s, &horizons, alpha, 2.0).unwrap();
    let doubled = Trajectory {
        times: traj.times.clone(),
        values: traj.values.iter().map(|v| vec![2.0 * v[0]]).collect(),
        source: TrajectorySource::L1Oracle,
    };
    let twice = truncation_decay_study(&doubled, &[exact[0] * 2.0], &[1.0], s, &horizons, alpha, 2.0).unwrap();
    for (a, b) in base.errors.iter().zip(&twice.errors) {
        assert!((b - 2.0 * a).abs() < 1e-12 * b);
    }
    assert!(base.monotone());
}
