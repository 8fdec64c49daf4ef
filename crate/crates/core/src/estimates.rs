//! Explicit height, gradient and mass bounds as checkable predicates, and the
//! spike-family sharpness experiment.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::graphical::{solve, BoundaryCondition, SolverOptions};
use crate::grid::{Grid1D, Interval, ScalarField};
use crate::profile::spike_field;
use crate::report::{scheme_tolerance, EstimateReport, Witness, WorstMargin};
use crate::trajectory::FieldTrajectory;

/// `A_bar / pi`: the time after which interior height bounds can hold.
pub fn magic_time(a_bar: f64) -> Result<f64> {
    if !(a_bar >= 0.0) {
        return domain(format!("initial area must be nonnegative, got {a_bar}"));
    }
    Ok(a_bar / PI)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayedConstant {
    /// `tan(pi/(4(1+delta)) + pi/4) / 2`.
    pub value: f64,
    /// `(1 + delta) / delta`, never below `value`.
    pub over_bound: f64,
}

pub fn delayed_constant(delta: f64) -> Result<DelayedConstant> {
    if !(delta > 0.0) {
        return domain(format!("delta must be positive, got {delta}"));
    }
    let value = if delta.is_infinite() {
        0.5
    } else {
        0.5 * (PI / (4.0 * (1.0 + delta)) + FRAC_PI_4).tan()
    };
    let over_bound = if delta.is_infinite() { 1.0 } else { (1.0 + delta) / delta };
    debug_assert!(value <= over_bound);
    Ok(DelayedConstant { value, over_bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayedBoundParams {
    pub delta: f64,
    pub a_bar: f64,
}

impl DelayedBoundParams {
    pub fn new(delta: f64, a_bar: f64) -> Result<Self> {
        if !(delta > 0.0) || !(a_bar >= 0.0) {
            return domain("delta must be positive and A_bar nonnegative");
        }
        Ok(Self { delta, a_bar })
    }

    /// First time at which the bound applies, `(1 + delta) t_star`.
    pub fn onset(&self) -> f64 {
        (1.0 + self.delta) * self.a_bar / PI
    }

    /// `C(delta) + A_bar/2 + pi t/2`.
    pub fn bound(&self, t: f64) -> f64 {
        delayed_constant(self.delta).map(|c| c.value).unwrap_or(f64::NAN) + 0.5 * self.a_bar + 0.5 * PI * t
    }
}

/// Tolerance for checks on a graphical trajectory: the scheme tolerance with
/// the run's `dx`, nominal `dt` and sup-norm.
pub fn trajectory_tolerance(traj: &FieldTrajectory) -> f64 {
    let dx = traj.meta_f64("dx").or_else(|| traj.grid().map(|g| g.dx())).unwrap_or(0.0);
    let dt = traj.meta_f64("dt_nominal").or_else(|| traj.meta_f64("dt")).unwrap_or(0.0);
    let sup = traj.states().iter().map(|s| s.sup_abs()).fold(0.0, f64::max);
    scheme_tolerance(dx, dt, sup)
}

/// `|u(0,t)| <= C(delta) + A_bar/2 + pi t/2` at every snapshot with
/// `t >= (1 + delta) t_star`.
pub fn check_delayed_height(traj: &FieldTrajectory, params: DelayedBoundParams, tol: f64) -> Result<EstimateReport> {
    let onset = params.onset();
    let mut worst = WorstMargin::default();
    let mut any = false;
    for (t, u) in traj.iter() {
        if t < onset * (1.0 - 1e-12) || t <= 0.0 {
            continue;
        }
        any = true;
        let h = u.sample_linear(0.0)?.abs();
        worst.update(params.bound(t) - h, 0.0, t);
    }
    if !any {
        return Ok(EstimateReport::inconclusive("delayed-height", "no snapshot after (1+delta) t_star"));
    }
    Ok(worst
        .report("delayed-height", tol)
        .with_detail("delta", params.delta)
        .with_detail("a_bar", params.a_bar)
        .with_detail("onset", onset))
}

/// `sqrt(t) sqrt(2 A / (t - t_star))`, infinite for `t <= t_star`.
pub fn global_height_bound(mass: f64, t: f64) -> f64 {
    let ts = mass / PI;
    if t <= ts {
        f64::INFINITY
    } else {
        t.sqrt() * (2.0 * mass / (t - ts)).sqrt()
    }
}

/// `u <= sqrt(t) sqrt(2 A / (t - t_star))` at all nodes and times after `t_star`.
pub fn check_global_height(traj: &FieldTrajectory, mass: f64, tol: f64) -> Result<EstimateReport> {
    if !(mass >= 0.0) {
        return domain("mass must be nonnegative");
    }
    let mut worst = WorstMargin::default();
    let mut any = false;
    for (t, u) in traj.iter() {
        let b = global_height_bound(mass, t);
        if !b.is_finite() {
            continue;
        }
        any = true;
        let g = u.grid();
        let (i, m) = u
            .values()
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        worst.update(b - m, g.node(i), t);
    }
    if !any {
        return Ok(EstimateReport::inconclusive("global-height", "no snapshot after t_star"));
    }
    Ok(worst.report("global-height", tol).with_detail("mass", mass))
}

/// Explicit `L^p` height bound with `1 + delta' = pi`. With `a_bar` known the
/// branch is chosen by `t >= a_bar`; without it both branches are evaluated
/// and the larger value is returned.
pub fn lp_height_bound(p: f64, norm_p: f64, t: f64, a_bar: Option<f64>) -> Result<f64> {
    if !(p > 1.0) {
        return domain(format!("p must exceed 1, got {p}"));
    }
    if !(t > 0.0) || !(norm_p >= 0.0) {
        return domain("t must be positive and the norm nonnegative");
    }
    let c = delayed_constant(PI - 1.0)?.value;
    let k = truncation_bound(p, norm_p, t);
    let small = k + c + 0.5 * t + 0.5 * PI * t;
    match a_bar {
        Some(a) if t >= a => Ok(c + 0.5 * a + 0.5 * PI * t),
        Some(_) => Ok(small),
        None => {
            // The large-time branch needs a = A_bar; bound it by t itself,
            // which is where that branch is entered.
            let large = c + 0.5 * t + 0.5 * PI * t;
            Ok(small.max(large))
        }
    }
}

/// `||u0||_p^{p/(p-1)} / t^{1/(p-1)}`, the upper bound for the truncation level.
pub fn truncation_bound(p: f64, norm_p: f64, t: f64) -> f64 {
    norm_p.powf(p / (p - 1.0)) / t.powf(1.0 / (p - 1.0))
}

/// Exact integral of `(|u0| - k)^+` for the piecewise-linear interpolant of `|u0|`.
pub fn excess_mass(u0: &ScalarField, k: f64) -> f64 {
    let dx = u0.grid().dx();
    u0.values()
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].abs() - k, w[1].abs() - k);
            if a >= 0.0 && b >= 0.0 {
                0.5 * dx * (a + b)
            } else if a <= 0.0 && b <= 0.0 {
                0.0
            } else {
                let pos = a.max(b);
                0.5 * dx * pos * pos / (a.abs() + b.abs())
            }
        })
        .sum()
}

/// The level `k` with `int (|u0| - k)^+ = t`, by bisection to `1e-10` in the integral.
pub fn truncation_level(u0: &ScalarField, t: f64) -> Result<f64> {
    let total = excess_mass(u0, 0.0);
    if !(t > 0.0) {
        return domain("t must be positive");
    }
    if t >= total {
        return domain(format!("t = {t} is not below ||u0||_1 = {total}; use k = 0"));
    }
    let (mut lo, mut hi) = (0.0, u0.sup_abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = excess_mass(u0, mid);
        if (g - t).abs() <= 1e-10 {
            return Ok(mid);
        }
        if g > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Checks `|u(0,t)|` against [`lp_height_bound`] and reports the implied
/// universal constant `max |u(0,t)| / (1 + ||u0||_p^{p/(p-1)} / t^{1/(p-1)} + t)`.
pub fn check_lp_height(traj: &FieldTrajectory, p: f64, tol: f64) -> Result<EstimateReport> {
    let (_, u0) = traj.iter().next().ok_or_else(|| crate::Error::Domain("empty trajectory".into()))?;
    let j1 = Interval::new(-1.0, 1.0)?;
    let norm_p = u0.lp_norm(p, j1)?;
    let a_bar = u0.l1_norm(j1)?;
    let mut worst = WorstMargin::default();
    let mut implied: f64 = 0.0;
    for (t, u) in traj.iter() {
        if t <= 0.0 {
            continue;
        }
        let h = u.sample_linear(0.0)?.abs();
        let b = lp_height_bound(p, norm_p, t, Some(a_bar))?;
        worst.update(b - h, 0.0, t);
        implied = implied.max(h / (1.0 + truncation_bound(p, norm_p, t) + t));
    }
    Ok(worst
        .report(format!("lp-height-p{p}"), tol)
        .with_detail("implied_constant", implied)
        .with_detail("norm_p", norm_p))
}

/// `(pi/2) int |phi'|`, exact for the piecewise-linear interpolant of `phi`.
pub fn drift_constant(phi: &ScalarField) -> f64 {
    0.5 * PI * phi.values().windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
}

/// `|int phi u(t) - int phi u(s)| <= C(phi) (t - s)` over all snapshot pairs.
pub fn check_mass_drift(traj: &FieldTrajectory, phi: &ScalarField, tol: f64) -> Result<EstimateReport> {
    let grid = traj.grid().ok_or_else(|| crate::Error::Domain("empty trajectory".into()))?;
    if phi.grid() != grid {
        return domain("test function must live on the trajectory grid");
    }
    let n = phi.values().len();
    if phi.values()[0] != 0.0 || phi.values()[n - 1] != 0.0 {
        return domain("test function must vanish at the grid ends");
    }
    let c = drift_constant(phi);
    let integrals: Vec<f64> = traj.states().iter().map(|u| weighted_integral(u, phi)).collect();
    let times = traj.times();
    let mut worst = WorstMargin::default();
    for j in 1..times.len() {
        for i in 0..j {
            let m = c * (times[j] - times[i]) - (integrals[j] - integrals[i]).abs();
            worst.update(m, f64::NAN, times[j]);
        }
    }
    Ok(worst.report("mass-drift", tol).with_detail("drift_constant", c))
}

/// Trapezoid `int phi u` over the shared grid.
pub fn weighted_integral(u: &ScalarField, phi: &ScalarField) -> f64 {
    let dx = u.grid().dx();
    let (a, b) = (u.values(), phi.values());
    let n = a.len();
    let s: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dx * (s - 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]))
}

/// Hat with peak 1 at `center`, zero outside `center +- half_width`.
pub fn hat_on_grid(grid: Grid1D, center: f64, half_width: f64) -> Result<ScalarField> {
    ScalarField::from_fn(grid, |x| (1.0 - (x - center).abs() / half_width).max(0.0))
}

/// Piecewise-linear cutoff: 1 on `(-r, r)`, 0 outside `(-R, R)`.
pub fn cutoff(x: f64, r: f64, big_r: f64) -> f64 {
    let a = x.abs();
    if a <= r {
        1.0
    } else if a >= big_r {
        0.0
    } else {
        (big_r - a) / (big_r - r)
    }
}

/// Cut-off `L^p` separation growth
/// `||(u1-u2) chi||_p(t) <= ||(u1-u2) chi||_p(s) + 2 pi (1+delta) p (t-s) / (R-r)^{1-1/p}`.
/// For `p = 1` the full-grid form with rate `2 pi` is also checked.
pub fn check_l1_separation(
    traj1: &FieldTrajectory,
    traj2: &FieldTrajectory,
    r: f64,
    big_r: f64,
    p: f64,
    delta: f64,
    tol: f64,
) -> Result<Vec<EstimateReport>> {
    let g1 = traj1.grid().ok_or_else(|| crate::Error::Domain("empty trajectory".into()))?;
    if Some(g1) != traj2.grid() || traj1.times() != traj2.times() {
        return domain("trajectories must share grid and times");
    }
    if !(0.0 < r && r < big_r) || !g1.span().contains_interval(&Interval::new(-big_r, big_r)?) {
        return domain("need 0 < r < R with (-R, R) inside the grid");
    }
    if !(p >= 1.0) || !(delta > 0.0) {
        return domain("need p >= 1 and delta > 0");
    }
    let rate = 2.0 * PI * (1.0 + delta) * p / (big_r - r).powf(1.0 - 1.0 / p);
    let span = Interval::new(-big_r, big_r)?;
    let norms: Vec<f64> = traj1
        .states()
        .iter()
        .zip(traj2.states())
        .map(|(a, b)| {
            let d = a.sub(b)?;
            d.integrate_with(span, |x, v| (v * cutoff(x, r, big_r)).abs().powf(p))
                .map(|s| s.powf(1.0 / p))
        })
        .collect::<Result<_>>()?;
    let times = traj1.times();
    let mut worst = WorstMargin::default();
    for j in 1..times.len() {
        for i in 0..j {
            worst.update(norms[i] + rate * (times[j] - times[i]) - norms[j], f64::NAN, times[j]);
        }
    }
    let mut out = vec![worst.report(format!("lp-separation-p{p}"), tol).with_detail("rate", rate)];
    if p == 1.0 {
        let full: Vec<f64> = traj1
            .states()
            .iter()
            .zip(traj2.states())
            .map(|(a, b)| a.sub(b).and_then(|d| d.l1_norm(g1.span())))
            .collect::<Result<_>>()?;
        let mut w = WorstMargin::default();
        for j in 1..times.len() {
            for i in 0..j {
                w.update(full[i] + 2.0 * PI * (times[j] - times[i]) - full[j], f64::NAN, times[j]);
            }
        }
        out.push(w.report("l1-separation-full", tol));
    }
    Ok(out)
}

/// Least-squares slope of `||u1 - u2||_{L^1}` against time over the snapshots
/// with `t >= t_from`.
pub fn separation_growth_rate(traj1: &FieldTrajectory, traj2: &FieldTrajectory, t_from: f64) -> Result<f64> {
    let mut pts = Vec::new();
    for ((t, a), b) in traj1.iter().zip(traj2.states()) {
        if t >= t_from {
            let d = a.sub(b)?;
            pts.push((t, d.l1_norm(d.grid().span())?));
        }
    }
    if pts.len() < 2 {
        return domain("need at least two snapshots for a rate");
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mv)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Ok(num / den)
}

/// Family of unit-mass spikes `n psi(n x)` and the times at which they are probed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeFamilySpec {
    pub n_values: Vec<u32>,
    pub probe_times: Vec<f64>,
    pub mass: f64,
    /// Delay parameter used for the applicable bound column.
    pub delta: f64,
}

impl SpikeFamilySpec {
    /// The probe ladder `{0.5, 0.8, 1.2, 2, 4} t_star` for unit mass.
    pub fn probe_ladder(mass: f64) -> Vec<f64> {
        let ts = mass / PI;
        [0.5, 0.8, 1.2, 2.0, 4.0].iter().map(|f| f * ts).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return domain("spike family needs positive n values");
        }
        if !(self.mass > 0.0) || !(self.delta > 0.0) {
            return domain("mass and delta must be positive");
        }
        if self.probe_times.iter().any(|&t| !(t > 0.0)) {
            return domain("probe times must be positive");
        }
        Ok(())
    }
}

/// Discretization for spike-family runs: zero boundary values on `(-half_width, half_width)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeGrid {
    pub half_width: f64,
    pub nodes: usize,
    pub dt_max: f64,
}

impl Default for SpikeGrid {
    fn default() -> Self {
        Self { half_width: 8.0, nodes: 16001, dt_max: 2e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub n: u32,
    pub t: f64,
    pub height: f64,
    /// Delayed bound, `NaN` before `(1 + delta) t_star`.
    pub bound: f64,
    pub passed_when_applicable: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct SharpnessTable {
    pub rows: Vec<SharpnessRow>,
    pub trajectories: Vec<(u32, FieldTrajectory)>,
}

impl SharpnessTable {
    pub fn height(&self, n: u32, t: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n && (r.t - t).abs() < 1e-12).map(|r| r.height)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "t", "height", "bound", "passed_when_applicable"])?;
        for r in &self.rows {
            let passed = match r.passed_when_applicable {
                Some(true) => "true",
                Some(false) => "false",
                None => "",
            };
            wr.write_record([
                r.n.to_string(),
                crate::grid::fmt17(r.t),
                crate::grid::fmt17(r.height),
                crate::grid::fmt17(r.bound),
                passed.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Solves one spike of the family.
pub fn spike_run(n: u32, mass: f64, grid: SpikeGrid, snapshots: &[f64]) -> Result<FieldTrajectory> {
    let g = Grid1D::new(-grid.half_width, grid.half_width, grid.nodes)?;
    let u0 = spike_field(g, n as f64, mass, 0.0)?;
    let t_end = snapshots.iter().copied().fold(0.0, f64::max);
    let opts = SolverOptions::new(grid.dt_max, BoundaryCondition::Zero).with_snapshots(snapshots.iter().copied());
    let mut traj = solve(&u0, t_end, &opts)?;
    traj.set_meta("spike_n", n);
    Ok(traj)
}

/// Runs every spike of the family and tabulates `v_n(0, t)` at the probe times
/// alongside the delayed bound where it applies.
pub fn sharpness_experiment(spec: &SpikeFamilySpec, grid: SpikeGrid) -> Result<SharpnessTable> {
    use rayon::prelude::*;
    spec.validate()?;
    let params = DelayedBoundParams::new(spec.delta, spec.mass)?;
    let mut probes = spec.probe_times.clone();
    probes.sort_by(f64::total_cmp);
    probes.dedup();
    let runs: Vec<(u32, FieldTrajectory)> = spec
        .n_values
        .par_iter()
        .map(|&n| spike_run(n, spec.mass, grid, &probes).map(|tr| (n, tr)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (n, traj) in &runs {
        let tol = trajectory_tolerance(traj);
        rows.push(SharpnessRow {
            n: *n,
            t: 0.0,
            height: traj.states()[0].sample_linear(0.0)?,
            bound: f64::NAN,
            passed_when_applicable: None,
        });
        for &t in &probes {
            let u = traj
                .at(t, 1e-12)
                .ok_or_else(|| crate::Error::Internal(format!("missing snapshot at t = {t}")))?;
            let height = u.sample_linear(0.0)?.abs();
            let applicable = t >= params.onset() * (1.0 - 1e-12);
            let bound = if applicable { params.bound(t) } else { f64::NAN };
            rows.push(SharpnessRow {
                n: *n,
                t,
                height,
                bound,
                passed_when_applicable: applicable.then(|| height <= bound + tol),
            });
        }
    }
    Ok(SharpnessTable { rows, trajectories: runs })
}

/// Witness at the origin.
pub fn origin(t: f64) -> Witness {
    Witness { x: 0.0, t }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magic_time_values() {
        assert_eq!(magic_time(0.0).unwrap(), 0.0);
        assert!((magic_time(1.0).unwrap() - 0.31831).abs() < 1e-5);
        assert!((magic_time(PI).unwrap() - 1.0).abs() < 1e-15);
        assert!(magic_time(-1.0).is_err());
    }

    #[test]
    fn delayed_constant_values() {
        let c = delayed_constant(1.0).unwrap();
        assert!((c.value - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((c.value - 1.20711).abs() < 1e-5);
        assert_eq!(c.over_bound, 2.0);
        assert!((delayed_constant(1e12).unwrap().value - 0.5).abs() < 1e-9);
        assert_eq!(delayed_constant(f64::INFINITY).unwrap().value, 0.5);
        for &d in &[0.1, 0.5, 1.0, 2.0, 10.0] {
            let c = delayed_constant(d).unwrap();
            assert!(c.value <= c.over_bound);
        }
        assert!(delayed_constant(0.0).is_err());
    }

    #[test]
    fn delayed_constant_time_form() {
        // C(delta_t) <= t / (t - t_star) with delta_t = (t - t_star)/t_star.
        let ts = 0.7;
        for k in 1..400 {
            let t = ts * (1.0 + k as f64 * 0.05);
            let d = (t - ts) / ts;
            assert!(delayed_constant(d).unwrap().value <= t / (t - ts) + 1e-14);
        }
    }

    #[test]
    fn lp_bound_branches() {
        let c = delayed_constant(PI - 1.0).unwrap().value;
        // tan(1/4 + pi/4) / 2
        assert!((c - 0.5 * (0.25 + FRAC_PI_4).tan()).abs() < 1e-15);
        let b = lp_height_bound(2.0, 1.0, 2.0, Some(1.0)).unwrap();
        assert!((b - (c + 0.5 + PI)).abs() < 1e-14);
        assert!((truncation_bound(2.0, 1.0, 1.0) - 1.0).abs() < 1e-15);
        let small = lp_height_bound(2.0, 1.0, 1.0, Some(3.0)).unwrap();
        assert!((small - (1.0 + c + 0.5 + 0.5 * PI)).abs() < 1e-14);
        assert!(lp_height_bound(1.0, 1.0, 1.0, None).is_err());
        let mut prev = f64::INFINITY;
        for k in 1..50 {
            let v = truncation_bound(3.0, 2.0, k as f64 * 0.1);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn truncation_examples() {
        let g = Grid1D::new(-1.0, 1.0, 801).unwrap();
        let one = ScalarField::from_fn(g, |_| 1.0).unwrap();
        assert!((truncation_level(&one, 1.0).unwrap() - 0.5).abs() < 1e-9);
        let hat = ScalarField::from_fn(g, |x| 1.0 - x.abs()).unwrap();
        let k = truncation_level(&hat, 0.25).unwrap();
        assert!((k - 0.5).abs() < 1e-8);
        let n2 = hat.lp_norm(2.0, g.span()).unwrap();
        assert!(k <= truncation_bound(2.0, n2, 0.25));
        assert!(truncation_level(&hat, 1.5).is_err());
    }

    #[test]
    fn hat_drift_constant() {
        let g = Grid1D::new(-2.0, 2.0, 401).unwrap();
        let phi = hat_on_grid(g, 0.0, 1.0).unwrap();
        assert!((drift_constant(&phi) - PI).abs() < 1e-12);
    }

    #[test]
    fn global_bound_example() {
        // sqrt(2/pi) * sqrt(2 / (1/pi)) = 2
        let b = global_height_bound(1.0, 2.0 / PI);
        assert!((b - 2.0).abs() < 1e-12);
        assert!(global_height_bound(1.0, 1.0 / PI).is_infinite());
    }

    #[test]
    fn delayed_bound_for_parabola() {
        let p = DelayedBoundParams::new(1.0, 4.0 / 3.0).unwrap();
        assert!((p.onset() - 8.0 / (3.0 * PI)).abs() < 1e-15);
        assert!((p.onset() - 0.8488).abs() < 1e-4);
        let t = p.onset();
        assert!((p.bound(t) - (1.20711 + 2.0 / 3.0 + PI * t / 2.0)).abs() < 1e-5);
    }
}
