//! Area, angle and Harnack quantity of local flows, and checks built on them.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::curve::LocalGcsfRun;
use crate::error::Result;
use crate::estimates::delayed_constant;
use crate::exact::domination_envelope;
use crate::grid::ScalarField;
use crate::report::{EstimateReport, Witness, WorstMargin};

/// Area, angle and Harnack quantity at one time.
#[derive(Clone, Debug)]
pub struct HarnackState {
    pub t: f64,
    pub area: ScalarField,
    pub angle: ScalarField,
    pub harnack: ScalarField,
}

/// Cumulative trapezoid integral of `u` from the left edge of its grid.
pub fn area_function(u: &ScalarField) -> ScalarField {
    let g = *u.grid();
    let dx = g.dx();
    let v = u.values();
    let mut a = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    a.push(0.0);
    for i in 1..v.len() {
        acc += 0.5 * dx * (v[i - 1] + v[i]);
        a.push(acc);
    }
    ScalarField::new(g, a).expect("finite input gives finite area")
}

/// Node slopes: central differences inside, one-sided at the edges.
pub fn slopes(u: &ScalarField) -> Vec<f64> {
    let dx = u.grid().dx();
    let v = u.values();
    let n = v.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (v[1] - v[0]) / dx
            } else if i == n - 1 {
                (v[n - 1] - v[n - 2]) / dx
            } else {
                (v[i + 1] - v[i - 1]) / (2.0 * dx)
            }
        })
        .collect()
}

/// `arctan(u_x) + pi/2`, in `(0, pi)`.
pub fn angle_function(u: &ScalarField) -> ScalarField {
    let phi = slopes(u).into_iter().map(|s| s.atan() + FRAC_PI_2).collect();
    ScalarField::new(*u.grid(), phi).expect("arctan is finite")
}

/// `A - 2 t phi` nodewise.
pub fn harnack_quantity(u: &ScalarField, t: f64) -> ScalarField {
    harnack_state(u, t).harnack
}

pub fn harnack_state(u: &ScalarField, t: f64) -> HarnackState {
    let area = area_function(u);
    let angle = angle_function(u);
    let h = area
        .values()
        .iter()
        .zip(angle.values())
        .map(|(a, p)| a - 2.0 * t * p)
        .collect();
    let harnack = ScalarField::new(*u.grid(), h).expect("finite");
    HarnackState { t, area, angle, harnack }
}

/// Default tolerance `10 (dx + dt)(1 + t_end)`.
pub fn harnack_tolerance(run: &LocalGcsfRun) -> f64 {
    10.0 * (run.dx() + run.dt) * (1.0 + run.t_end())
}

/// Minimum of `H + pi t` over all snapshots and nodes. The area is integrated
/// from the inner left edge, which under-counts the true area by the
/// (nonnegative) left sliver, so the check is conservative.
pub fn check_harnack(run: &LocalGcsfRun, tol: f64) -> EstimateReport {
    let mut worst = WorstMargin::default();
    for (t, u) in run.fields.iter() {
        let st = harnack_state(u, t);
        let g = u.grid();
        for (i, h) in st.harnack.values().iter().enumerate() {
            worst.update(h + PI * t, g.node(i), t);
        }
    }
    worst.report("harnack-lower-bound", tol).with_detail("eps_margin", run.eps_margin)
}

/// The three boundary/initial identities of the Harnack quantity:
/// `H(left) ~ 0`, `H(right) ~ A_bar - pi t`, and `d/dt A(y) = phi(y) - phi(left)`.
pub fn check_boundary_identities(run: &LocalGcsfRun, tol: f64) -> Vec<EstimateReport> {
    let times = run.fields.times();
    let states = run.fields.states();
    if times.len() < 3 {
        let r = EstimateReport::inconclusive("boundary-identities", "needs at least 3 snapshots");
        return vec![r.clone(), r.clone(), r];
    }
    let mut left = WorstMargin::default();
    let mut right = WorstMargin::default();
    let mut worst_left_tol: f64 = 0.0;
    let mut worst_right_tol: f64 = 0.0;
    for (t, u) in run.fields.iter() {
        if t == 0.0 {
            continue;
        }
        let st = harnack_state(u, t);
        let h = st.harnack.values();
        let g = u.grid();
        let sliver = run.sliver_bound(t);
        let tl = tol + sliver;
        let tr = tol + 2.0 * sliver;
        worst_left_tol = worst_left_tol.max(tl);
        worst_right_tol = worst_right_tol.max(tr);
        // Scale each margin by its own tolerance so one report can cover all times.
        left.update((tl - h[0].abs()) / tl * tol, g.left(), t);
        let expected = run.initial_mass - PI * t;
        right.update((tr - (h[h.len() - 1] - expected).abs()) / tr * tol, g.right(), t);
    }

    // Area rate against the angle difference, centered in time.
    let mut rate = WorstMargin::default();
    let mut rate_tol: f64 = 0.0;
    let areas: Vec<ScalarField> = states.iter().map(area_function).collect();
    for k in 1..times.len() - 1 {
        let (hm, hp) = (times[k] - times[k - 1], times[k + 1] - times[k]);
        let (cm, c0, cp) = (-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp)));
        let phi = angle_function(&states[k]);
        let p = phi.values();
        let step_tol = 5.0 * (hm.max(hp) + run.dx().powi(2)) + tol;
        rate_tol = rate_tol.max(step_tol);
        let (am, a0, ap) = (areas[k - 1].values(), areas[k].values(), areas[k + 1].values());
        let g = states[k].grid();
        for i in 0..p.len() {
            let dadt = cm * am[i] + c0 * a0[i] + cp * ap[i];
            let mismatch = (dadt - (p[i] - p[0])).abs();
            rate.update((step_tol - mismatch) / step_tol * tol, g.node(i), times[k]);
        }
    }
    vec![
        left.report("harnack-left-edge", tol).with_tolerance("edge_tol", worst_left_tol),
        right.report("harnack-right-edge", tol).with_tolerance("edge_tol", worst_right_tol),
        rate.report("area-rate-equals-angle", tol).with_tolerance("rate_tol", rate_tol),
    ]
}

/// `H` at the right inner edge at the snapshot closest to `t`, with the
/// analytic value `A_bar - pi t`.
pub fn right_edge_harnack(run: &LocalGcsfRun, t: f64) -> (f64, f64, f64) {
    let k = run.fields.nearest_index(t);
    let tk = run.fields.times()[k];
    let h = harnack_quantity(&run.fields.states()[k], tk);
    (tk, h.values()[h.values().len() - 1], run.initial_mass - PI * tk)
}

/// Gradient bound `arctan(u_x) <= A / (2t)` at every node and positive time.
pub fn check_gradient_bound(run: &LocalGcsfRun, tol: f64) -> EstimateReport {
    let mut worst = WorstMargin::default();
    for (t, u) in run.fields.iter() {
        if t <= 0.0 {
            continue;
        }
        let a = area_function(u);
        let s = slopes(u);
        let g = u.grid();
        for i in 0..s.len() {
            worst.update(a.values()[i] / (2.0 * t) - s[i].atan(), g.node(i), t);
        }
    }
    worst.report("arctan-gradient-bound", tol)
}

/// Slope bound `u_x <= 2 C(delta)` on `y <= 0` for `t >= (1 + delta) t_star`.
pub fn check_delayed_slope(run: &LocalGcsfRun, delta: f64, tol: f64) -> Result<EstimateReport> {
    let c = delayed_constant(delta)?.value;
    let t_min = (1.0 + delta) * run.initial_mass / PI;
    let mut worst = WorstMargin::default();
    let mut any = false;
    for (t, u) in run.fields.iter() {
        if t < t_min * (1.0 - 1e-12) || t <= 0.0 {
            continue;
        }
        any = true;
        let s = slopes(u);
        let g = u.grid();
        for (i, si) in s.iter().enumerate() {
            if g.node(i) <= 0.0 {
                worst.update(2.0 * c - si, g.node(i), t);
            }
        }
    }
    if !any {
        return Ok(EstimateReport::inconclusive("delayed-slope-bound", "no snapshot after the delay"));
    }
    Ok(worst.report("delayed-slope-bound", tol))
}

/// Domination by the Grim Reaper envelope `L + pi t/2 - (2/pi) ln cos(pi x/2)`.
pub fn check_envelope(run: &LocalGcsfRun, tol: f64) -> EstimateReport {
    let mut worst = WorstMargin::default();
    for (t, u) in run.fields.iter() {
        let g = u.grid();
        for (i, &v) in u.values().iter().enumerate() {
            let x = g.node(i);
            let bound = domination_envelope(x, run.initial_height, t).unwrap_or(f64::INFINITY);
            worst.update(bound - v, x, t);
        }
    }
    worst.report("grim-reaper-domination", tol)
}

/// Bound `|arctan v + v / (1 + v^2)| <= pi/2`, returned as the worst margin
/// over `samples` points spread logarithmically over `[-v_max, v_max]`.
pub fn arctan_identity_margin(v_max: f64, samples: usize) -> (f64, f64) {
    let mut worst = (f64::INFINITY, 0.0);
    let check = |v: f64, worst: &mut (f64, f64)| {
        let m = FRAC_PI_2 - (v.atan() + v / (1.0 + v * v)).abs();
        if m < worst.0 {
            *worst = (m, v);
        }
    };
    check(0.0, &mut worst);
    let lmin = -8.0_f64;
    let lmax = v_max.log10();
    for j in 0..samples {
        let v = 10f64.powf(lmin + (lmax - lmin) * j as f64 / (samples - 1) as f64);
        check(v, &mut worst);
        check(-v, &mut worst);
    }
    worst
}

/// Witness helper for callers reporting single values.
pub fn witness(x: f64, t: f64) -> Witness {
    Witness { x, t }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::grim_reaper;
    use crate::grid::Grid1D;

    #[test]
    fn area_examples() {
        let g = Grid1D::new(-1.0, 1.0, 201).unwrap();
        assert_eq!(area_function(&ScalarField::zeros(g)).sup_abs(), 0.0);
        let one = ScalarField::from_fn(g, |_| 1.0).unwrap();
        let a = area_function(&one);
        for i in 0..g.n() {
            assert!((a.values()[i] - (g.node(i) + 1.0)).abs() < 1e-12);
        }
        let hat = ScalarField::from_fn(g, |x| 1.0 - x.abs()).unwrap();
        assert!((area_function(&hat).values()[200] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn angle_examples() {
        let g = Grid1D::new(-1.0, 1.0, 101).unwrap();
        let c = angle_function(&ScalarField::from_fn(g, |_| 3.0).unwrap());
        assert!(c.values().iter().all(|p| (p - FRAC_PI_2).abs() < 1e-15));
        let l = angle_function(&ScalarField::from_fn(g, |x| x).unwrap());
        assert!(l.values().iter().all(|p| (p - 0.75 * PI).abs() < 1e-12));
        let gg = Grid1D::new(-0.9, 0.9, 1801).unwrap();
        let gr = ScalarField::from_fn(gg, |x| grim_reaper(x, 0.3, 0.0).unwrap()).unwrap();
        let phi = angle_function(&gr);
        for i in (1..gg.n() - 1).step_by(50) {
            let y = gg.node(i);
            assert!((phi.values()[i] - (FRAC_PI_2 + FRAC_PI_2 * y)).abs() < 1e-4);
        }
    }

    #[test]
    fn harnack_examples() {
        let g = Grid1D::new(-1.0, 1.0, 101).unwrap();
        let z = ScalarField::zeros(g);
        let h = harnack_quantity(&z, 0.2);
        assert!(h.values().iter().all(|v| (v + PI * 0.2).abs() < 1e-14));
        let hat = ScalarField::from_fn(g, |x| 1.0 - x.abs()).unwrap();
        let h0 = harnack_quantity(&hat, 0.0);
        assert!(h0.min() >= 0.0);
    }

    #[test]
    fn grim_reaper_harnack_bound() {
        // Area by the trapezoid rule on a fine grid; H should sit above -pi t.
        let g = Grid1D::new(-0.99, 0.99, 4001).unwrap();
        for &t in &[0.1, 0.5] {
            let gr = ScalarField::from_fn(g, |x| grim_reaper(x, t, 0.0).unwrap()).unwrap();
            let h = harnack_quantity(&gr, t);
            assert!(h.min() + PI * t > 0.0);
        }
    }

    #[test]
    fn arctan_identity() {
        let (m, _) = arctan_identity_margin(1e6, 200_000);
        assert!(m >= -1e-15, "{m}");
    }
}
