//! Randomized invariants of the solvers and the measure plumbing.

use std::f64::consts::PI;

use csf_core::graphical::{solve, step, BoundaryCondition, SolverOptions};
use csf_core::measures::{cantor_function, mollify, mollify_dominating, RadonMeasureSpec, SingularCdf};
use csf_core::tridiag::solve_tridiagonal;
use csf_core::{Grid1D, Interval, ScalarField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cantor function from the ternary expansion: binary digits `d/2` up to the
/// first ternary 1, which contributes a final binary 1.
fn cantor_by_digits(y: f64) -> f64 {
    if y >= 1.0 {
        return 1.0;
    }
    let mut y = y;
    let mut out = 0.0;
    let mut w = 0.5;
    for _ in 0..60 {
        y *= 3.0;
        let d = y.floor();
        y -= d;
        if d == 1.0 {
            return out + w;
        }
        if d == 2.0 {
            out += w;
        }
        w *= 0.5;
    }
    out
}

#[test]
fn cantor_matches_ternary_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for &depth in &[4u32, 10, 16] {
        let bound = 0.5f64.powi(depth as i32);
        for _ in 0..10_000 {
            let y: f64 = rng.gen();
            let e = (cantor_function(depth, y) - cantor_by_digits(y)).abs();
            assert!(e <= bound + 1e-15, "depth {depth} y {y} error {e}");
        }
    }
}

fn smooth_profile(coef: &[f64]) -> impl Fn(f64) -> f64 + '_ {
    move |x: f64| {
        coef.iter()
            .enumerate()
            .map(|(k, c)| c * ((k as f64 + 1.0) * PI * x / 2.0 + k as f64).sin())
            .sum()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tridiagonal_residual_is_small(n in 3usize..60, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lower: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
        let upper: Vec<f64> = (0..n).map(|i| if i == n - 1 { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
        let diag: Vec<f64> = (0..n).map(|i| lower[i].abs() + upper[i].abs() + rng.gen_range(0.1..2.0)).collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for i in 0..n {
            let mut r = diag[i] * x[i] - rhs[i];
            if i > 0 { r += lower[i] * x[i - 1]; }
            if i + 1 < n { r += upper[i] * x[i + 1]; }
            prop_assert!(r.abs() < 1e-12 * (1.0 + rhs[i].abs()));
        }
    }

    #[test]
    fn ordered_data_stay_ordered(
        coef in prop::collection::vec(-1.5f64..1.5, 1..4),
        lift in 0.0f64..0.5,
        bump_h in 0.0f64..2.0,
        center in -0.6f64..0.6,
    ) {
        let g = Grid1D::new(-1.0, 1.0, 101).unwrap();
        let f = smooth_profile(&coef);
        let u0 = ScalarField::from_fn(g, &f).unwrap();
        let w0 = ScalarField::from_fn(g, |x| {
            f(x) + lift + bump_h * (1.0 - ((x - center) / 0.3).powi(2)).max(0.0).powi(2)
        }).unwrap();
        let mut opts = SolverOptions::new(0.02, BoundaryCondition::DirichletFixed)
            .with_snapshots((1..=10).map(|k| 0.01 * k as f64));
        opts.comparison_cap = true;
        let a = solve(&u0, 0.1, &opts).unwrap();
        let b = solve(&w0, 0.1, &opts).unwrap();
        for (u, w) in a.states().iter().zip(b.states()) {
            for (x, y) in u.values().iter().zip(w.values()) {
                prop_assert!(*x <= *y + 1e-12);
            }
        }
    }

    #[test]
    fn per_step_mass_change_is_flux_bounded(
        coef in prop::collection::vec(-3.0f64..3.0, 1..4),
        dt in 1e-5f64..2e-2,
        i0 in 1usize..40,
        len in 2usize..50,
    ) {
        let g = Grid1D::new(-1.0, 1.0, 101).unwrap();
        let u = ScalarField::from_fn(g, smooth_profile(&coef)).unwrap();
        let v = step(&u, 0.0, dt, 1.0, &BoundaryCondition::DirichletFixed).unwrap();
        let i1 = (i0 + len).min(99);
        let mass = |f: &ScalarField| f.values()[i0..=i1].iter().sum::<f64>() * g.dx();
        prop_assert!((mass(&v) - mass(&u)).abs() <= PI * dt * (1.0 + 1e-9));
    }

    #[test]
    fn mollification_keeps_mass_and_domination(
        a in -1.0f64..0.5,
        width in 0.2f64..1.5,
        mass in 0.1f64..3.0,
        negative in any::<bool>(),
        amp in -2.0f64..2.0,
        eps in 0.02f64..0.2,
    ) {
        let g = Grid1D::new(-4.0, 4.0, 1601).unwrap();
        let dens_grid = Grid1D::new(-1.5, 1.5, 301).unwrap();
        let dens = ScalarField::from_fn(dens_grid, |x| amp * (2.0 * x).sin() * (1.0 - (x / 1.5).powi(2))).unwrap();
        let sign = if negative { -1.0 } else { 1.0 };
        let nu = RadonMeasureSpec::new(
            Some(dens),
            vec![SingularCdf::cantor(9, Interval::new(a, a + width).unwrap(), mass, sign)],
            Vec::new(),
        );
        let u = mollify(&nu, eps, 3.0, g).unwrap();
        let big = mollify_dominating(&nu, eps, 3.0, g).unwrap();
        prop_assert!((u.total_integral() - nu.total_mass()).abs() < 1e-8);
        for (x, y) in u.values().iter().zip(big.values()) {
            prop_assert!(*y >= x.abs() - 1e-12);
        }
    }
}
