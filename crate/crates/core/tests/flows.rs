//! Scenario tests: whole flows checked against closed forms and against
//! qualitative properties.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use csf_core::curve::{
    flow_curve, graph_polyline, hausdorff_distance, local_gcsf_solve, min_distance, CurveFlowOptions, LocalFlowOptions,
};
use csf_core::exact::{angenent_oval_polyline, shrinking_circle, AngenentOvalParams};
use csf_core::graphical::{rescale, rescale_field, solve, BoundaryCondition, SolverOptions};
use csf_core::measures::{
    check_dominated, flow_from_measure, initial_trace, strong_convergence_check, weak_gap, MeasureFlowSetup,
    RadonMeasureSpec, SingularCdf, TestFunction, TestFunctionBattery,
};
use csf_core::profile::unit_bump;
use csf_core::{Grid1D, Interval, ScalarField};

#[test]
fn hat_on_wide_domain_decays() {
    let g = Grid1D::new(-8.0, 8.0, 1601).unwrap();
    let u0 = ScalarField::from_fn(g, |x| (1.0 - x.abs()).max(0.0)).unwrap();
    let snaps: Vec<f64> = (1..=30).map(|k| 0.1 * k as f64).collect();
    let traj = solve(&u0, 3.0, &SolverOptions::new(1e-3, BoundaryCondition::Zero).with_snapshots(snaps)).unwrap();
    let l1: Vec<f64> = traj.states().iter().map(|u| u.l1_norm(g.span()).unwrap()).collect();
    assert!(l1.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    let centre: Vec<(f64, f64)> = traj.iter().map(|(t, u)| (t, u.sample_linear(0.0).unwrap())).collect();
    for w in centre.windows(2).filter(|w| w[0].0 >= 0.5) {
        assert!(w[1].1 < w[0].1, "u(0, t) rose between t = {} and {}", w[0].0, w[1].0);
    }
}

#[test]
fn rescaled_hat_mass_identity() {
    let g = Grid1D::new(-2.0, 2.0, 4001).unwrap();
    let u0 = ScalarField::from_fn(g, |x| (1.0 - x.abs()).max(0.0)).unwrap();
    let rho = 0.5;
    let v = rescale_field(&u0, rho).unwrap();
    let lhs = v.l1_norm(Interval::new(-1.0, 1.0).unwrap()).unwrap();
    let rhs = u0.l1_norm(Interval::new(-rho, rho).unwrap()).unwrap() / (rho * rho);
    assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-6);
    assert_abs_diff_eq!(lhs, 3.0, epsilon = 1e-6);
}

#[test]
fn solve_and_rescale_commute() {
    let g = Grid1D::new(-4.0, 4.0, 1601).unwrap();
    let u0 = ScalarField::from_fn(g, unit_bump).unwrap();
    let rho = 0.5;
    let t = 0.05;
    let a = solve(&u0, t, &SolverOptions::new(5e-5, BoundaryCondition::Zero)).unwrap();
    let a = rescale(&a, rho).unwrap();
    let v0 = rescale_field(&u0, rho).unwrap();
    let b = solve(&v0, t / (rho * rho), &SolverOptions::new(2e-4, BoundaryCondition::Zero)).unwrap();
    let (ta, ua) = a.last().unwrap();
    let (tb, ub) = b.last().unwrap();
    assert_abs_diff_eq!(ta, tb, epsilon = 1e-12);
    // Compare where the rescaled field is sampled from inside the original grid.
    let inner = Interval::new(-3.0, 3.0).unwrap();
    let d = ua.restricted(inner).zip(ub.restricted(inner)).map(|(p, q)| (p.1 - q.1).abs()).fold(0.0, f64::max);
    assert!(d <= 5.0 * g.dx().powi(2) * 10.0, "discrepancy {d}");
}

#[test]
fn local_flow_from_zero_lifts_off_at_the_edges_only() {
    let g = Grid1D::new(-1.0, 1.0, 501).unwrap();
    let opts = LocalFlowOptions { snapshot_times: vec![0.0025, 0.005, 0.0075], ..LocalFlowOptions::default() };
    let run = local_gcsf_solve(&ScalarField::zeros(g), 0.01, &opts).unwrap();
    for (t, u) in run.fields.iter().filter(|(t, _)| *t > 0.0) {
        assert!(u.sample_linear(0.0).unwrap().abs() <= 1e-3, "u(0, {t}) too large");
        let v = u.values();
        assert!(v[0] > 0.0 && v[v.len() - 1] > 0.0, "no lift-off at t = {t}");
    }
}

#[test]
fn local_flow_is_insensitive_to_cap_height() {
    let g = Grid1D::new(-1.0, 1.0, 501).unwrap();
    let u0 = ScalarField::from_fn(g, |x| 1.0 - x * x).unwrap();
    let base = LocalFlowOptions { chord: 0.01, ..LocalFlowOptions::default() };
    let a = local_gcsf_solve(&u0, 0.2, &base).unwrap();
    let raised = LocalFlowOptions { y_cap: Some(a.y_cap + 2.0), ..base };
    let b = local_gcsf_solve(&u0, 0.2, &raised).unwrap();
    let (_, ua) = a.fields.last().unwrap();
    let (_, ub) = b.fields.last().unwrap();
    let d = (0..=180)
        .map(|k| -0.9 + 0.01 * k as f64)
        .map(|x| (ua.sample_linear(x).unwrap() - ub.sample_linear(x).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(d < 2e-3, "cap sensitivity {d}");
}

#[test]
fn local_flows_keep_their_order() {
    let g = Grid1D::new(-1.0, 1.0, 501).unwrap();
    let lo = ScalarField::from_fn(g, |x| 0.5 * (1.0 - x * x)).unwrap();
    let hi = ScalarField::from_fn(g, |x| 1.0 - x * x).unwrap();
    let opts = LocalFlowOptions {
        chord: 0.01,
        snapshot_times: vec![0.05, 0.1, 0.15],
        ..LocalFlowOptions::default()
    };
    let a = local_gcsf_solve(&lo, 0.2, &opts).unwrap();
    let b = local_gcsf_solve(&hi, 0.2, &opts).unwrap();
    for (ua, ub) in a.fields.states().iter().zip(b.fields.states()) {
        for k in 0..=160 {
            let x = -0.8 + 0.01 * k as f64;
            assert!(ua.sample_linear(x).unwrap() <= ub.sample_linear(x).unwrap() + 1e-3);
        }
    }
}

#[test]
fn oval_flows_to_later_oval_with_shrinking_length() {
    let p0 = angenent_oval_polyline(AngenentOvalParams::new(-1.0, 0.0).unwrap(), 400).unwrap();
    let snaps: Vec<f64> = (1..=10).map(|k| 0.05 * k as f64).collect();
    let run = flow_curve(&p0, 0.5, &snaps, &CurveFlowOptions::default()).unwrap();
    let (_, p) = run.curves.last().unwrap();
    let exact = angenent_oval_polyline(AngenentOvalParams::new(-0.5, 0.0).unwrap(), 400).unwrap();
    let h = hausdorff_distance(p, &exact);
    assert!(h < 2e-3, "oval distance {h}");
    let lengths: Vec<f64> = run.curves.states().iter().map(|c| c.length()).collect();
    assert!(lengths.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn circle_above_graph_stays_clear() {
    let circle = shrinking_circle([0.0, 1.0], 0.5, 0.0, 256).unwrap().unwrap();
    let graph = graph_polyline(|x| 0.3 * (PI * x).cos(), -2.0, 2.0, 401).unwrap();
    let snaps: Vec<f64> = (1..=24).map(|k| 0.005 * k as f64).collect();
    let opts = CurveFlowOptions::default();
    let a = flow_curve(&circle, 0.12, &snaps, &opts).unwrap();
    let b = flow_curve(&graph, 0.12, &snaps, &opts).unwrap();
    for (p, q) in a.curves.states().iter().zip(b.curves.states()) {
        assert!(min_distance(p, q) > 0.0);
    }
}

fn bump_density() -> RadonMeasureSpec {
    let g = Grid1D::new(-1.0, 1.0, 2001).unwrap();
    RadonMeasureSpec::from_density(ScalarField::from_fn(g, unit_bump).unwrap())
}

#[test]
fn density_paired_with_itself_has_no_gap() {
    let nu = bump_density();
    let battery = TestFunctionBattery::default_for(Interval::new(-1.0, 1.0).unwrap());
    let g = Grid1D::new(-3.0, 3.0, 6001).unwrap();
    let u = ScalarField::from_fn(g, unit_bump).unwrap();
    assert!(weak_gap(&nu, &u, &battery).unwrap() < 1e-6);
}

#[test]
fn mollified_smooth_flow_matches_direct_solve() {
    let nu = bump_density();
    let setup = MeasureFlowSetup::for_measure(&nu, 0.1, 0.025).unwrap();
    let flow = flow_from_measure(&nu, 0.1, &[0.05, 0.025], &setup).unwrap();
    let u0 = ScalarField::from_fn(setup.grid, |x| if x.abs() < 1.0 { unit_bump(x) } else { 0.0 }).unwrap();
    let direct = solve(&u0, 0.1, &SolverOptions::new(setup.dt_max, BoundaryCondition::Zero)).unwrap();
    let (_, ud) = direct.last().unwrap();
    for run in &flow.runs {
        let (_, u) = run.u.last().unwrap();
        let d = u.sub(ud).unwrap().sup_abs();
        assert!(d < 0.5 * run.epsilon * run.epsilon + 1e-4, "eps {} distance {d}", run.epsilon);
    }
}

#[test]
fn strong_convergence_away_from_the_singular_part() {
    let g = Grid1D::new(-3.0, 3.0, 1201).unwrap();
    let nu = RadonMeasureSpec::new(
        Some(ScalarField::from_fn(g, |x| (-(x * x)).exp() * (1.0 - (x / 3.0).powi(2))).unwrap()),
        vec![SingularCdf::cantor(10, Interval::new(0.0, 1.0).unwrap(), 1.0, 1.0)],
        Vec::new(),
    );
    let setup = MeasureFlowSetup::for_measure(&nu, 0.05, 0.025).unwrap();
    let flow = flow_from_measure(&nu, 0.05, &[0.025], &setup).unwrap();
    let u = &flow.finest().u;
    let rep = strong_convergence_check(&nu, u, Interval::new(-2.5, -1.0).unwrap(), 1.0, 1e-3).unwrap();
    assert!(rep.passed, "{rep:?}");
    assert!(strong_convergence_check(&nu, u, Interval::new(-0.5, 0.5).unwrap(), 1.0, 1e-3).is_err());
}

#[test]
fn swapped_pair_is_not_dominated() {
    let g = Grid1D::new(-1.0, 1.0, 401).unwrap();
    let nu = RadonMeasureSpec::from_density(ScalarField::from_fn(g, |x| (PI * x).sin() * (1.0 - x * x)).unwrap());
    let setup = MeasureFlowSetup::for_measure(&nu, 0.05, 0.05).unwrap();
    let flow = flow_from_measure(&nu, 0.05, &[0.05], &setup).unwrap();
    let run = flow.finest();
    assert!(check_dominated(&run.u, &run.dominating, 1e-9).unwrap().passed);
    assert!(!check_dominated(&run.dominating, &run.u, 1e-9).unwrap().passed);
    let same = check_dominated(&run.dominating, &run.dominating, 0.0).unwrap();
    assert!(same.passed && same.margin == 0.0);
}

#[test]
fn trace_of_far_test_function_vanishes() {
    let nu = bump_density();
    let setup = MeasureFlowSetup::for_measure(&nu, 0.05, 0.05).unwrap();
    let flow = flow_from_measure(&nu, 0.05, &[0.05], &setup).unwrap();
    let battery = TestFunctionBattery { functions: vec![TestFunction::hat(6.0, 1.0, 1.0).unwrap()] };
    let tr = initial_trace(&flow.finest().u, &battery).unwrap();
    assert!(tr[0].limit.abs() < 1e-12);
}

#[test]
fn measure_file_with_density_csv() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid1D::new(-1.0, 1.0, 201).unwrap();
    ScalarField::from_fn(g, |x| 1.0 - x * x).unwrap().save_csv(&dir.path().join("dens.csv")).unwrap();
    let json = r#"{"density": {"csv": "dens.csv"},
        "singular": [{"kind": "cantor", "depth": 8, "support": [2, 3], "mass": 0.5, "sign": -1}],
        "atoms": []}"#;
    let path = dir.path().join("nu.json");
    std::fs::write(&path, json).unwrap();
    let nu = RadonMeasureSpec::load_json(&path).unwrap();
    nu.validate().unwrap();
    assert_abs_diff_eq!(nu.total_mass(), 4.0 / 3.0 - 0.5, epsilon = 1e-4);
    let s = nu.support().unwrap();
    assert!(s.a <= -0.99 && s.b == 3.0);
}
