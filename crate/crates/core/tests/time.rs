mod common;

use common::*;
use fracgibc::fem::flux_load;
use fracgibc::laplace::TemporalSignal;
use fracgibc::time::{l1_weights, refine_until, solve_time_domain, FemSystem, ScalarSystem};
use fracgibc::trig::BoundaryFunction;
use proptest::prelude::*;

#[test]
fn scalar_refinement_from_coarse_step() {
    let signal = TemporalSignal::monomial_exp(1, 1.0).unwrap();
    let r = refine_until(&ScalarSystem::new(1.0), 0.5, &signal, &[0.5, 1.0], 0.01, 1e-3).unwrap();
    assert!(r.differences.len() <= 3, "{:?}", r.differences);
    assert!(r.differences.windows(2).all(|w| w[1] < w[0]));
    assert!(*r.differences.last().unwrap() < 1e-3);
}

#[test]
fn fem_trajectory_differences_shrink_under_halving() {
    let mesh = concentric_mesh(0.2);
    let forms = constant_forms(&mesh, 1.0, 1.0);
    let load = flux_load(&mesh, &BoundaryFunction::constant(2.0 * std::f64::consts::PI, 1.0).unwrap());
    let signal = TemporalSignal::monomial_exp(1, 1.0).unwrap();
    let system = FemSystem::new(&forms, load);
    let r = refine_until(&system, 0.5, &signal, &[0.5, 1.0], 0.02, 1e-5).unwrap();
    assert!(r.differences.len() >= 2, "{:?}", r.differences);
    assert!(r.differences.windows(2).all(|w| w[1] < w[0]), "{:?}", r.differences);
    // the radial solution stays positive for a positive flux and forcing
    assert!(r.trajectory.values.iter().all(|u| u.iter().all(|&x| x > 0.0)));
}

#[test]
fn zero_load_gives_zero_state() {
    let mesh = concentric_mesh(0.2);
    let forms = constant_forms(&mesh, 1.0, 1.0);
    let system = FemSystem::new(&forms, vec![0.0; mesh.num_vertices()]);
    let signal = TemporalSignal::monomial_exp(1, 1.0).unwrap();
    let traj = solve_time_domain(&system, 0.3, &signal, 0.05, 20).unwrap();
    assert!(traj.values.iter().flatten().all(|&x| x == 0.0));
}

proptest! {
    #[test]
    fn weights_telescope(alpha in 0.01f64..0.99, n in 1usize..200) {
        let w = l1_weights(alpha, n).unwrap();
        prop_assert_eq!(w[0], 1.0);
        prop_assert!(w.windows(2).all(|p| p[1] < p[0] && p[1] > 0.0));
        let sum: f64 = w.iter().sum();
        prop_assert!((sum - (n as f64).powf(1.0 - alpha)).abs() < 1e-12 * sum);
    }
}
