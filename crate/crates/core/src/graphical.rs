//! Finite-difference solver for the graphical flow `u_t = (arctan u_x)_x`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::grid::{Grid1D, ScalarField};
use crate::trajectory::{FieldTrajectory, RunMeta};
use crate::tridiag::solve_tridiagonal;

/// Endpoint values as a function of `(x, t)`.
pub type BoundaryFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum BoundaryCondition {
    /// Endpoint values stay at their initial values.
    DirichletFixed,
    /// Endpoint values come from a callback, typically an exact solution.
    DirichletOracle(BoundaryFn),
    /// Endpoints pinned to zero.
    Zero,
}

impl BoundaryCondition {
    pub fn oracle(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::DirichletOracle(Arc::new(f))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::DirichletFixed => "dirichlet-fixed",
            Self::DirichletOracle(_) => "dirichlet-oracle",
            Self::Zero => "zero",
        }
    }

    fn endpoints(&self, u: &ScalarField, t_new: f64) -> (f64, f64) {
        let g = u.grid();
        let v = u.values();
        match self {
            Self::DirichletFixed => (v[0], v[v.len() - 1]),
            Self::DirichletOracle(f) => (f(g.left(), t_new), f(g.right(), t_new)),
            Self::Zero => (0.0, 0.0),
        }
    }
}

impl fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind())
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub dt_max: f64,
    /// Implicitness weight in `[1/2, 1]`; 1 is backward Euler.
    pub theta: f64,
    pub bc: BoundaryCondition,
    pub snapshot_times: Vec<f64>,
    /// Number of steps over which dt grows geometrically from `dx^2`.
    pub ramp_steps: usize,
    /// Cap dt so the explicit part of the step stays monotone.
    pub comparison_cap: bool,
}

impl SolverOptions {
    pub fn new(dt_max: f64, bc: BoundaryCondition) -> Self {
        Self {
            dt_max,
            theta: 1.0,
            bc,
            snapshot_times: Vec::new(),
            ramp_steps: 50,
            comparison_cap: false,
        }
    }

    pub fn with_snapshots(mut self, times: impl IntoIterator<Item = f64>) -> Self {
        self.snapshot_times = times.into_iter().collect();
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_max > 0.0) || !self.dt_max.is_finite() {
            return domain(format!("dt_max must be positive, got {}", self.dt_max));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return domain(format!("theta must lie in [1/2, 1], got {}", self.theta));
        }
        Ok(())
    }

    /// Largest dt for which the explicit part of the step is monotone;
    /// unbounded for backward Euler.
    pub fn comparison_dt(&self, dx: f64) -> f64 {
        let g = 1.0 - self.theta;
        if g <= 0.0 {
            f64::INFINITY
        } else {
            dx * dx / (2.0 * g)
        }
    }
}

/// One linearized theta step of size `dt` from time `t`.
///
/// The implicit part of the face flux is `b(w) v_new` with the coefficient
/// `b(w) = arctan(w)/w` frozen at the old face slope `w`, the explicit part is
/// `(1 - theta) arctan(w)`. Conservative, one tridiagonal solve, and an M-matrix
/// for every dt, so steep spikes do not ring.
pub fn step(u: &ScalarField, t: f64, dt: f64, theta: f64, bc: &BoundaryCondition) -> Result<ScalarField> {
    if !(dt > 0.0) {
        return domain(format!("dt must be positive, got {dt}"));
    }
    let grid = *u.grid();
    let n = grid.n();
    let dx = grid.dx();
    let r = dt / (dx * dx);
    let old = u.values();
    let (left, right) = bc.endpoints(u, t + dt);

    // Face quantities: slope, frozen coefficient, explicit flux part.
    let mut coef = Vec::with_capacity(n - 1);
    let mut expl = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let w = (old[i + 1] - old[i]) / dx;
        let b = if w.abs() < 1e-8 { 1.0 } else { w.atan() / w };
        coef.push(theta * r * b);
        expl.push((1.0 - theta) * w.atan());
    }

    let m = n - 2;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let q = dt / dx;
    for k in 0..m {
        let i = k + 1;
        let lm = coef[i - 1];
        let lp = coef[i];
        lower[k] = -lm;
        upper[k] = -lp;
        diag[k] = 1.0 + lm + lp;
        rhs[k] = old[i] + q * (expl[i] - expl[i - 1]);
    }
    rhs[0] += coef[0] * left;
    rhs[m - 1] += coef[n - 2] * right;
    let interior = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;

    let mut values = Vec::with_capacity(n);
    values.push(left);
    values.extend_from_slice(&interior);
    values.push(right);
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Divergence { t: t + dt, reason: format!("non-finite value at node {i}") });
    }
    ScalarField::new(grid, values)
}

/// Integrates from `t = 0` to `t_end`. Snapshots are taken at `t = 0`, at every
/// requested time and at `t_end`; steps are shortened to land on them exactly.
pub fn solve(u0: &ScalarField, t_end: f64, opts: &SolverOptions) -> Result<FieldTrajectory> {
    opts.validate()?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return domain(format!("t_end must be positive, got {t_end}"));
    }
    if let Some(&bad) = opts.snapshot_times.iter().find(|&&s| !(0.0..=t_end).contains(&s)) {
        return domain(format!("snapshot time {bad} outside [0, {t_end}]"));
    }
    let dx = u0.grid().dx();
    let mut dt_nominal = opts.dt_max.min(dx);
    if opts.comparison_cap {
        dt_nominal = dt_nominal.min(opts.comparison_dt(dx));
    }
    let dt_start = (dx * dx).min(dt_nominal);
    let growth = if opts.ramp_steps > 0 && dt_nominal > dt_start {
        (dt_nominal / dt_start).powf(1.0 / opts.ramp_steps as f64)
    } else {
        1.0
    };

    let mut targets: Vec<f64> = opts.snapshot_times.iter().copied().filter(|&s| s > 0.0).collect();
    targets.push(t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * t_end.max(1.0));

    let mut traj = FieldTrajectory::empty();
    traj.push(0.0, u0.clone())?;
    let mut u = u0.clone();
    let mut t = 0.0_f64;
    let mut dt_plan = dt_start;
    let mut steps = 0usize;
    let mut dt_min_used = f64::INFINITY;
    for &target in &targets {
        while t < target {
            let remaining = target - t;
            let mut dt = dt_plan.min(remaining);
            let landing = dt >= remaining * (1.0 - 1e-12) || remaining - dt < 1e-3 * dt;
            if landing {
                dt = remaining;
            }
            u = step(&u, t, dt, opts.theta, &opts.bc).map_err(|e| match e {
                Error::Divergence { reason, .. } => Error::Divergence { t: t + dt, reason },
                other => other,
            })?;
            t = if landing { target } else { t + dt };
            steps += 1;
            dt_min_used = dt_min_used.min(dt);
            if dt_plan < dt_nominal {
                dt_plan = (dt_plan * growth).min(dt_nominal);
            }
        }
        traj.push(t, u.clone())?;
    }

    let mut meta = RunMeta::new();
    meta.insert("solver".into(), json!("graphical-theta"));
    meta.insert("theta".into(), json!(opts.theta));
    meta.insert("dx".into(), json!(dx));
    meta.insert("dt_nominal".into(), json!(dt_nominal));
    meta.insert("dt_min".into(), json!(dt_min_used));
    meta.insert("steps".into(), json!(steps));
    meta.insert("bc".into(), json!(opts.bc.kind()));
    meta.insert("t_end".into(), json!(t_end));
    traj.meta = meta;
    Ok(traj)
}

/// Parabolic rescaling `u^rho(x, t) = u(rho x, rho^2 t) / rho`, resampled on
/// the trajectory's own grid (which must contain 0); times are divided by `rho^2`.
pub fn rescale(traj: &FieldTrajectory, rho: f64) -> Result<FieldTrajectory> {
    if !(rho > 0.0 && rho <= 1.0) {
        return domain(format!("rho must lie in (0, 1], got {rho}"));
    }
    let grid = *traj.grid().ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    if !(grid.left() <= 0.0 && grid.right() >= 0.0) {
        return domain("rescaling needs a grid containing 0");
    }
    let mut out = FieldTrajectory::empty();
    for (t, u) in traj.iter() {
        let v = rescale_field(u, rho)?;
        out.push(t / (rho * rho), v)?;
    }
    out.meta = traj.meta.clone();
    out.meta.insert("rescale_rho".into(), json!(rho));
    Ok(out)
}

/// `x -> u(rho x) / rho` on the field's own grid.
pub fn rescale_field(u: &ScalarField, rho: f64) -> Result<ScalarField> {
    let g = *u.grid();
    ScalarField::from_fn(g, |x| u.sample_linear(rho * x).unwrap_or(f64::NAN) / rho)
}

/// Maximum over interior nodes and interior snapshots of
/// `|D_t u - D_xx u / (1 + (D_x u)^2)|` with centered differences.
pub fn pde_residual(traj: &FieldTrajectory) -> Result<f64> {
    residual_field_max(traj, None)
}

/// As [`pde_residual`] but restricted to nodes with `|x| <= x_max`.
pub fn pde_residual_within(traj: &FieldTrajectory, x_max: f64) -> Result<f64> {
    residual_field_max(traj, Some(x_max))
}

fn residual_field_max(traj: &FieldTrajectory, x_max: Option<f64>) -> Result<f64> {
    if traj.len() < 3 {
        return domain("pde residual needs at least 3 snapshots");
    }
    let grid: Grid1D = *traj.grid().unwrap();
    let dx = grid.dx();
    let times = traj.times();
    let states = traj.states();
    let mut worst = 0.0_f64;
    for k in 1..traj.len() - 1 {
        let hm = times[k] - times[k - 1];
        let hp = times[k + 1] - times[k];
        let (cm, c0, cp) = (-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp)));
        let (um, u0, up) = (states[k - 1].values(), states[k].values(), states[k + 1].values());
        for i in 1..grid.n() - 1 {
            if let Some(xm) = x_max {
                if grid.node(i).abs() > xm {
                    continue;
                }
            }
            let ut = cm * um[i] + c0 * u0[i] + cp * up[i];
            let ux = (u0[i + 1] - u0[i - 1]) / (2.0 * dx);
            let uxx = (u0[i + 1] - 2.0 * u0[i] + u0[i - 1]) / (dx * dx);
            worst = worst.max((ut - uxx / (1.0 + ux * ux)).abs());
        }
    }
    Ok(worst)
}

/// Upper bound `pi/2` on the magnitude of the flux `arctan(u_x)`.
pub const FLUX_BOUND: f64 = FRAC_PI_2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::grim_reaper;

    fn grim_field(grid: Grid1D, t: f64) -> ScalarField {
        ScalarField::from_fn(grid, |x| grim_reaper(x, t, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn constant_is_steady() {
        let g = Grid1D::new(-1.0, 1.0, 51).unwrap();
        let u = ScalarField::from_fn(g, |_| 0.0).unwrap();
        let v = step(&u, 0.0, 0.01, 1.0, &BoundaryCondition::Zero).unwrap();
        assert!(v.sup_abs() == 0.0);
        let c = ScalarField::from_fn(g, |_| 2.5).unwrap();
        let v = step(&c, 0.0, 0.01, 1.0, &BoundaryCondition::DirichletFixed).unwrap();
        assert!(v.values().iter().all(|&x| (x - 2.5).abs() < 1e-14));
    }

    #[test]
    fn line_is_static() {
        let g = Grid1D::new(-1.0, 2.0, 61).unwrap();
        let u = ScalarField::from_fn(g, |x| 3.0 * x - 0.5).unwrap();
        let v = step(&u, 0.0, 0.05, 0.7, &BoundaryCondition::DirichletFixed).unwrap();
        for (a, b) in u.values().iter().zip(v.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn one_grim_reaper_step() {
        let g = Grid1D::new(-0.9, 0.9, 801).unwrap();
        let u = grim_field(g, 0.1);
        let bc = BoundaryCondition::oracle(|x, t| grim_reaper(x, t, 0.0).unwrap());
        let v = step(&u, 0.1, 1e-4, 1.0, &bc).unwrap();
        let exact = grim_field(g, 0.1001);
        let err = v.sub(&exact).unwrap().sup_abs();
        assert!(err <= 1e-6, "error {err}");
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid1D::new(-1.0, 1.0, 101).unwrap();
        let opts = SolverOptions::new(0.01, BoundaryCondition::Zero).with_snapshots([0.1, 0.2]);
        let tr = solve(&ScalarField::zeros(g), 0.3, &opts).unwrap();
        assert_eq!(tr.times(), &[0.0, 0.1, 0.2, 0.3]);
        assert!(tr.states().iter().all(|s| s.sup_abs() == 0.0));
    }

    #[test]
    fn rejects_bad_options() {
        let g = Grid1D::new(-1.0, 1.0, 11).unwrap();
        let u = ScalarField::zeros(g);
        let mut o = SolverOptions::new(0.01, BoundaryCondition::Zero);
        o.theta = 0.3;
        assert!(solve(&u, 1.0, &o).is_err());
        let o = SolverOptions::new(0.01, BoundaryCondition::Zero).with_snapshots([2.0]);
        assert!(solve(&u, 1.0, &o).is_err());
        assert!(step(&u, 0.0, 0.0, 1.0, &BoundaryCondition::Zero).is_err());
    }

    #[test]
    fn rescale_identity() {
        let g = Grid1D::new(-1.0, 1.0, 41).unwrap();
        let u = ScalarField::from_fn(g, |x| (1.0 - x * x).powi(2)).unwrap();
        let tr = FieldTrajectory::new(vec![0.0, 0.5], vec![u.clone(), u], RunMeta::new()).unwrap();
        let r = rescale(&tr, 1.0).unwrap();
        assert_eq!(r.times(), tr.times());
        assert_eq!(r.states()[1].values(), tr.states()[1].values());
        assert!(rescale(&tr, 0.0).is_err());
        assert!(rescale(&tr, 1.5).is_err());
    }

    #[test]
    fn static_line_residual_is_zero() {
        let g = Grid1D::new(-1.0, 1.0, 41).unwrap();
        let u = ScalarField::from_fn(g, |x| 2.0 * x + 1.0).unwrap();
        let tr = FieldTrajectory::new(vec![0.0, 0.1, 0.3], vec![u.clone(), u.clone(), u], RunMeta::new()).unwrap();
        assert!(pde_residual(&tr).unwrap() < 1e-10);
    }

    #[test]
    fn exact_grim_reaper_residual() {
        let g = Grid1D::new(-0.9, 0.9, 801).unwrap();
        let times: Vec<f64> = (0..5).map(|k| 0.2 + k as f64 * 1e-3).collect();
        let states = times.iter().map(|&t| grim_field(g, t)).collect();
        let tr = FieldTrajectory::new(times, states, RunMeta::new()).unwrap();
        let r = pde_residual(&tr).unwrap();
        assert!(r <= 1e-3, "residual {r}");
    }
}
