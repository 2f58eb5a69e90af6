use std::sync::Arc;

use proptest::prelude::*;
use richards_core::assembly::lumped_mass;
use richards_core::lsolver::{lscheme_solve, mass_norm, LschemeConfig};
use richards_core::verify::{check_bounds, lscheme_rate, mass_balance, reference_solver, seminorm_summability};
use richards_core::*;

fn soil() -> Arc<SoilModel> {
    Arc::new(SoilModel::new(SoilParams::default(), 2048).unwrap())
}

fn infiltration(model: Arc<SoilModel>, final_time: f64, steps: usize) -> Scenario {
    let us = model.u_star();
    let mesh = Arc::new(Mesh::uniform_interval(100, 0.0, 1.0).unwrap());
    Scenario::new(model, mesh, final_time, steps).with_boundary(BoundaryTag::Top, Field::constant(us))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_is_monotone_and_k_even(a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let m = soil();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(m.theta(lo) <= m.theta(hi));
        prop_assert_eq!(m.conductivity(a), m.conductivity(-a));
        prop_assert!(m.conductivity(a) >= 0.0 && m.conductivity(a) <= m.params().k_saturated() * (1.0 + 1e-12));
    }

    #[test]
    fn lumped_mass_sums_to_domain_measure(nx in 1usize..8, ny in 1usize..8, w in 0.1f64..3.0, h in 0.1f64..3.0) {
        let mesh = Mesh::structured_triangles(nx, ny, Rect { x0: 0.0, x1: w, z0: 0.0, z1: h }).unwrap();
        let m = lumped_mass(&mesh);
        prop_assert!(m.iter().all(|&v| v > 0.0));
        prop_assert!((m.iter().sum::<f64>() - w * h).abs() <= 1e-12 * w * h);
    }
}

#[test]
fn infiltration_respects_bounds_and_balance() {
    let model = soil();
    let us = model.u_star();
    let s = infiltration(model, 0.4, 50);
    let traj = run(&s).unwrap();
    assert!(traj.all_converged());
    let report = check_bounds(&traj, 0.0, us, 1e-8);
    assert!(report.passed, "{report:?}");
    // front moves down monotonically
    let front: Vec<usize> = traj.states.iter().map(|u| u.iter().position(|&v| v > 0.5 * us).unwrap_or(101)).collect();
    assert!(front.windows(2).all(|w| w[1] <= w[0]));
    assert!(front[50] < 70);
    // residual from the outer stopping rule: (L + L_θ)·‖M‖^{1/2}·(atol + rtol·‖u‖)
    let bound = 2.0 * (s.solver.atol + s.solver.rtol * us);
    for r in mass_balance(&traj) {
        assert!(r <= bound, "{r} > {bound}");
    }
}

#[test]
fn lscheme_contracts_on_developed_front() {
    let model = soil();
    let s = infiltration(model.clone(), 0.4, 50);
    let traj = run(&s).unwrap();
    let k = 30;
    let frozen = s.freeze(&traj.states[k - 1], k).unwrap();
    let reference = lscheme_solve(&*model, &frozen, &traj.states[k - 1], &reference_solver(&s).solver).unwrap();
    assert!(reference.history.converged);
    let mut means = vec![];
    for l in [1.0, 4.0] {
        let cfg = LschemeConfig { l, record_iterates: true, ..s.solver.clone() };
        let out = lscheme_solve(&*model, &frozen, &traj.states[k - 1], &cfg).unwrap();
        // over-stabilized L contracts slowly and may exhaust the budget
        assert!(out.history.converged || l > 1.0);
        let rate = lscheme_rate(&out.history, &reference.u, &frozen.mass, 1e-11).unwrap();
        assert!(rate.non_increasing(1e-12), "{:?}", rate.errors);
        assert!(rate.max_ratio <= 1.0 + 1e-8);
        let (lhs, rhs) = seminorm_summability(&out.history, &reference.u, &frozen.mass, &frozen.stiffness, frozen.tau, l).unwrap();
        assert!(lhs <= 1.1 * rhs, "{lhs} > {rhs}");
        means.push(rate.geometric_mean_ratio);
    }
    assert!(means[1] > means[0], "{means:?}");
    assert!(mass_norm(&frozen.mass, &reference.u) > 0.0);
}

#[test]
fn eps_zero_and_default_share_the_loop() {
    let model = soil();
    let s = infiltration(model, 0.1, 5);
    let a = run(&s).unwrap();
    let b = run(&Scenario { epsilon: 0.0, ..s.clone() }).unwrap();
    assert_eq!(a.states, b.states);
}
