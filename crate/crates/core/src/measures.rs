//! Non-atomic signed measures on the line, their mollification, and flows
//! started from them.
//!
//! A measure is a density field plus singular parts carried as continuous
//! CDFs. Everything is evaluated through two cumulative functions: the signed
//! CDF `x -> nu((-inf, x])` and the variation CDF `x -> |nu|((-inf, x])`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::graphical::{solve, BoundaryCondition, SolverOptions};
use crate::grid::{Grid1D, Interval, ScalarField};
use crate::profile::bump;
use crate::report::{EstimateReport, Witness, WorstMargin};
use crate::trajectory::FieldTrajectory;

/// Level-`depth` Cantor function on `[0, 1]`: the CDF of the uniform measure
/// on the `2^depth` intervals of the `depth`-th Cantor stage. Within
/// `2^-depth` of the Cantor function.
pub fn cantor_function(depth: u32, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let mut y = y;
    let mut scale = 1.0;
    let mut acc = 0.0;
    for _ in 0..depth {
        if y <= 1.0 / 3.0 {
            y *= 3.0;
        } else if y >= 2.0 / 3.0 {
            acc += 0.5 * scale;
            y = 3.0 * y - 2.0;
        } else {
            return acc + 0.5 * scale;
        }
        scale *= 0.5;
    }
    acc + scale * y
}

/// `int_0^y` of [`cantor_function`], exact.
pub fn cantor_function_integral(depth: u32, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 0.5 + (y - 1.0);
    }
    // G_d(y) = G_{d-1}(3y)/6 on [0,1/3], 1/12 + (y-1/3)/2 on the gap,
    // 1/4 + (y-2/3)/2 + G_{d-1}(3y-2)/6 on [2/3,1]; G_0(y) = y^2/2.
    let mut y = y;
    let mut weight = 1.0;
    let mut acc = 0.0;
    for _ in 0..depth {
        if y <= 1.0 / 3.0 {
            y *= 3.0;
        } else if y >= 2.0 / 3.0 {
            acc += weight * (0.25 + 0.5 * (y - 2.0 / 3.0));
            y = 3.0 * y - 2.0;
        } else {
            return acc + weight * (1.0 / 12.0 + 0.5 * (y - 1.0 / 3.0));
        }
        weight /= 6.0;
    }
    acc + weight * 0.5 * y * y
}

/// Continuous CDF of a singular (or at least non-atomic) signed part.
#[derive(Clone, Debug, PartialEq)]
pub enum SingularCdf {
    /// `sign * mass` times the level-`depth` Cantor function on `support`.
    Cantor { depth: u32, support: Interval, mass: f64, sign: f64 },
    /// Piecewise-linear CDF through `(x, F)` breakpoints; `F` is 0 before the
    /// first breakpoint and constant after the last.
    Staircase { breakpoints: Vec<(f64, f64)> },
}

impl SingularCdf {
    pub fn cantor(depth: u32, support: Interval, mass: f64, sign: f64) -> Self {
        Self::Cantor { depth, support, mass, sign }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Cantor { depth, mass, sign, .. } => {
                if *depth > 40 {
                    return domain("cantor depth above 40");
                }
                if !(mass.is_finite() && *mass >= 0.0) {
                    return domain("cantor mass must be finite and non-negative");
                }
                if *sign != 1.0 && *sign != -1.0 {
                    return domain("cantor sign must be +1 or -1");
                }
            }
            Self::Staircase { breakpoints } => {
                if breakpoints.len() < 2 {
                    return domain("staircase needs at least two breakpoints");
                }
                if breakpoints.iter().any(|(x, f)| !x.is_finite() || !f.is_finite()) {
                    return domain("staircase breakpoints must be finite");
                }
                if breakpoints[0].1 != 0.0 {
                    return domain("staircase must start at 0 (a jump would be an atom)");
                }
                if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return domain("staircase abscissae must be strictly increasing");
                }
                let up = breakpoints.windows(2).all(|w| w[1].1 >= w[0].1);
                let down = breakpoints.windows(2).all(|w| w[1].1 <= w[0].1);
                if !(up || down) {
                    return domain("staircase must be monotone");
                }
            }
        }
        Ok(())
    }

    /// Smallest interval outside which the part carries no mass.
    pub fn support(&self) -> Interval {
        match self {
            Self::Cantor { support, .. } => *support,
            Self::Staircase { breakpoints } => Interval {
                a: breakpoints[0].0,
                b: breakpoints[breakpoints.len() - 1].0,
            },
        }
    }

    /// `F(x)`, the signed mass of `(-inf, x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Cantor { depth, support, mass, sign } => {
                sign * mass * cantor_function(*depth, (x - support.a) / support.len())
            }
            Self::Staircase { breakpoints } => staircase_eval(breakpoints, x),
        }
    }

    /// `int_{-inf}^x F`.
    pub fn cdf_integral(&self, x: f64) -> f64 {
        match self {
            Self::Cantor { depth, support, mass, sign } => {
                let l = support.len();
                sign * mass * l * cantor_function_integral(*depth, (x - support.a) / l)
            }
            Self::Staircase { breakpoints } => {
                let mut acc = 0.0;
                for w in breakpoints.windows(2) {
                    let ((x0, f0), (x1, f1)) = (w[0], w[1]);
                    if x <= x0 {
                        return acc;
                    }
                    if x < x1 {
                        let fx = f0 + (f1 - f0) * (x - x0) / (x1 - x0);
                        return acc + 0.5 * (x - x0) * (f0 + fx);
                    }
                    acc += 0.5 * (x1 - x0) * (f0 + f1);
                }
                let (xl, fl) = breakpoints[breakpoints.len() - 1];
                acc + (x - xl) * fl
            }
        }
    }

    /// Total signed mass.
    pub fn mass(&self) -> f64 {
        match self {
            Self::Cantor { mass, sign, .. } => sign * mass,
            Self::Staircase { breakpoints } => breakpoints[breakpoints.len() - 1].1,
        }
    }
}

fn staircase_eval(bp: &[(f64, f64)], x: f64) -> f64 {
    if x <= bp[0].0 {
        return 0.0;
    }
    for w in bp.windows(2) {
        let ((x0, f0), (x1, f1)) = (w[0], w[1]);
        if x < x1 {
            return f0 + (f1 - f0) * (x - x0) / (x1 - x0);
        }
    }
    bp[bp.len() - 1].1
}

/// Exact `int |v|` for `v` linear on an interval of length `len` with end
/// values `a`, `b`.
fn linear_abs_integral(len: f64, a: f64, b: f64) -> f64 {
    if a * b >= 0.0 {
        0.5 * len * (a.abs() + b.abs())
    } else {
        let s = len * a / (a - b);
        0.5 * (s * a.abs() + (len - s) * b.abs())
    }
}

/// Cumulative integrals of the piecewise-linear interpolant of a density.
#[derive(Clone, Debug)]
struct DensityCdf {
    field: ScalarField,
    signed: Vec<f64>,
    absolute: Vec<f64>,
}

impl DensityCdf {
    fn new(field: ScalarField) -> Self {
        let dx = field.grid().dx();
        let v = field.values();
        let mut signed = vec![0.0; v.len()];
        let mut absolute = vec![0.0; v.len()];
        for i in 1..v.len() {
            signed[i] = signed[i - 1] + 0.5 * dx * (v[i - 1] + v[i]);
            absolute[i] = absolute[i - 1] + linear_abs_integral(dx, v[i - 1], v[i]);
        }
        Self { field, signed, absolute }
    }

    /// `(int_{left}^x u, int_{left}^x |u|)`, clamped to the grid.
    fn eval(&self, x: f64) -> (f64, f64) {
        let g = self.field.grid();
        let n = g.n();
        if x <= g.left() {
            return (0.0, 0.0);
        }
        if x >= g.right() {
            return (self.signed[n - 1], self.absolute[n - 1]);
        }
        let k = g.cell_of(x);
        let v = self.field.values();
        let h = x - g.node(k);
        let vx = v[k] + (v[k + 1] - v[k]) * h / g.dx();
        (
            self.signed[k] + 0.5 * h * (v[k] + vx),
            self.absolute[k] + linear_abs_integral(h, v[k], vx),
        )
    }
}

/// Non-atomic real-valued Radon measure: density part plus continuous
/// singular parts. Atoms are representable only so that validation can reject
/// them.
#[derive(Clone, Debug)]
pub struct RadonMeasureSpec {
    density: Option<DensityCdf>,
    pub singular: Vec<SingularCdf>,
    pub atoms: Vec<(f64, f64)>,
}

impl RadonMeasureSpec {
    pub fn zero() -> Self {
        Self { density: None, singular: Vec::new(), atoms: Vec::new() }
    }

    pub fn new(density: Option<ScalarField>, singular: Vec<SingularCdf>, atoms: Vec<(f64, f64)>) -> Self {
        Self { density: density.map(DensityCdf::new), singular, atoms }
    }

    pub fn from_density(density: ScalarField) -> Self {
        Self::new(Some(density), Vec::new(), Vec::new())
    }

    pub fn from_singular(part: SingularCdf) -> Self {
        Self::new(None, vec![part], Vec::new())
    }

    pub fn density(&self) -> Option<&ScalarField> {
        self.density.as_ref().map(|d| &d.field)
    }

    /// Rejects atoms and malformed singular parts.
    pub fn validate(&self) -> Result<()> {
        if let Some(&(x, m)) = self.atoms.first() {
            return Err(Error::Validation(format!(
                "measure has an atom of mass {m} at {x}; only non-atomic measures are admissible"
            )));
        }
        for s in &self.singular {
            s.validate().map_err(|e| Error::Validation(e.to_string()))?;
        }
        Ok(())
    }

    /// `nu((-inf, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let d = self.density.as_ref().map_or(0.0, |d| d.eval(x).0);
        d + self.singular.iter().map(|s| s.cdf(x)).sum::<f64>()
    }

    /// Variation CDF: `|u_0|` integrated plus the monotone variation of each
    /// singular part. This is `|nu|((-inf, x])` whenever the singular parts do
    /// not cancel each other.
    pub fn variation_cdf(&self, x: f64) -> f64 {
        let d = self.density.as_ref().map_or(0.0, |d| d.eval(x).1);
        d + self.singular.iter().map(|s| s.cdf(x).abs()).sum::<f64>()
    }

    /// Hull of the places where the measure may carry mass.
    pub fn support(&self) -> Option<Interval> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let Some(d) = &self.density {
            let g = d.field.grid();
            let v = d.field.values();
            if let Some(i) = v.iter().position(|&u| u != 0.0) {
                let j = v.iter().rposition(|&u| u != 0.0).unwrap();
                lo = lo.min(g.node(i.saturating_sub(1)));
                hi = hi.max(g.node((j + 1).min(g.n() - 1)));
            }
        }
        for s in &self.singular {
            let iv = s.support();
            lo = lo.min(iv.a);
            hi = hi.max(iv.b);
        }
        Interval::new(lo, hi).ok()
    }

    /// Total signed mass.
    pub fn total_mass(&self) -> f64 {
        let d = self.density.as_ref().map_or(0.0, |d| *d.signed.last().unwrap());
        d + self.singular.iter().map(SingularCdf::mass).sum::<f64>()
    }

    /// `int phi dnu` for a hat, by parts against the CDF (exact for the
    /// singular parts and the interpolated density).
    pub fn integrate(&self, phi: &TestFunction) -> f64 {
        // int phi dnu = -int phi' F, with phi' = +-h/w on the two halves.
        let (c, w, h) = (phi.center, phi.half_width, phi.height);
        let int_f = |a: f64, b: f64| self.cdf_integral(b) - self.cdf_integral(a);
        -(h / w) * (int_f(c - w, c) - int_f(c, c + w))
    }

    fn cdf_integral(&self, x: f64) -> f64 {
        let mut acc: f64 = self.singular.iter().map(|s| s.cdf_integral(x)).sum();
        if let Some(d) = &self.density {
            let g = d.field.grid();
            let v = d.field.values();
            let dx = g.dx();
            let xe = x.min(g.right());
            if xe > g.left() {
                let k = g.cell_of(xe);
                // The cumulative integral is quadratic on each cell.
                for i in 0..k {
                    acc += dx * d.signed[i] + dx * dx * (v[i] / 3.0 + v[i + 1] / 6.0);
                }
                let h = xe - g.node(k);
                let slope = (v[k + 1] - v[k]) / dx;
                acc += h * d.signed[k] + h * h * v[k] / 2.0 + slope * h * h * h / 6.0;
            }
            if x > g.right() {
                acc += (x - g.right()) * d.signed[g.n() - 1];
            }
        }
        acc
    }

    /// Reads the JSON form
    /// `{density: {csv: path} | null, singular: [...], atoms: [[x, m], ...]}`;
    /// relative CSV paths resolve against `base_dir`. Does not validate.
    pub fn from_json_str(s: &str, base_dir: &Path) -> Result<Self> {
        let file: MeasureFile = serde_json::from_str(s)?;
        let density = match file.density {
            Some(d) => {
                let p = if d.csv.is_absolute() { d.csv } else { base_dir.join(d.csv) };
                Some(ScalarField::load_csv(&p)?)
            }
            None => None,
        };
        let singular = file
            .singular
            .into_iter()
            .map(|e| match e {
                SingularEntry::Cantor { depth, support, mass, sign } => {
                    Ok(SingularCdf::cantor(depth, Interval::new(support[0], support[1])?, mass, sign))
                }
                SingularEntry::Staircase { breakpoints } => {
                    Ok(SingularCdf::Staircase { breakpoints: breakpoints.into_iter().map(|p| (p[0], p[1])).collect() })
                }
            })
            .collect::<Result<_>>()?;
        let atoms = file.atoms.into_iter().map(|a| (a[0], a[1])).collect();
        Ok(Self::new(density, singular, atoms))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&s, path.parent().unwrap_or(Path::new(".")))
    }
}

#[derive(Deserialize, Serialize)]
struct MeasureFile {
    #[serde(default)]
    density: Option<DensityRef>,
    #[serde(default)]
    singular: Vec<SingularEntry>,
    #[serde(default)]
    atoms: Vec<[f64; 2]>,
}

#[derive(Deserialize, Serialize)]
struct DensityRef {
    csv: PathBuf,
}

#[derive(Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SingularEntry {
    Cantor { depth: u32, support: [f64; 2], mass: f64, sign: f64 },
    Staircase { breakpoints: Vec<[f64; 2]> },
}

/// `nu((a, b])`.
pub fn measure_of_interval(nu: &RadonMeasureSpec, a: f64, b: f64) -> Result<f64> {
    nu.validate()?;
    if !(a < b) {
        return domain(format!("need a < b, got [{a}, {b}]"));
    }
    Ok(nu.cdf(b) - nu.cdf(a))
}

/// `|nu|((a, b])`.
pub fn total_variation_of_interval(nu: &RadonMeasureSpec, a: f64, b: f64) -> Result<f64> {
    nu.validate()?;
    if !(a < b) {
        return domain(format!("need a < b, got [{a}, {b}]"));
    }
    Ok(nu.variation_cdf(b) - nu.variation_cdf(a))
}

/// Restricts `nu` to `[-cutoff_radius, cutoff_radius]`, deposits it on the
/// dual cells of `grid` by CDF differencing and convolves with the unit-mass
/// bump of half-width `epsilon`.
pub fn mollify(nu: &RadonMeasureSpec, epsilon: f64, cutoff_radius: f64, grid: Grid1D) -> Result<ScalarField> {
    mollify_with(|x| nu.cdf(x), epsilon, cutoff_radius, grid)
}

/// Same kernel applied to `|nu|`; dominates [`mollify`] nodewise.
pub fn mollify_dominating(nu: &RadonMeasureSpec, epsilon: f64, cutoff_radius: f64, grid: Grid1D) -> Result<ScalarField> {
    mollify_with(|x| nu.variation_cdf(x), epsilon, cutoff_radius, grid)
}

fn mollify_with(cdf: impl Fn(f64) -> f64, epsilon: f64, cutoff_radius: f64, grid: Grid1D) -> Result<ScalarField> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return domain(format!("epsilon must be positive, got {epsilon}"));
    }
    if !(cutoff_radius > 0.0) {
        return domain("cutoff radius must be positive");
    }
    let dx = grid.dx();
    if epsilon < 2.0 * dx {
        return domain(format!("epsilon {epsilon} is below two grid spacings ({dx})"));
    }
    let n = grid.n();
    let clamp = |x: f64| x.clamp(-cutoff_radius, cutoff_radius);
    let edge = |i: usize| -> f64 {
        if i == 0 {
            grid.left()
        } else if i == n {
            grid.right()
        } else {
            grid.node(i) - 0.5 * dx
        }
    };
    let cuts: Vec<f64> = (0..=n).map(|i| cdf(clamp(edge(i)))).collect();
    let cell: Vec<f64> = cuts.windows(2).map(|w| w[1] - w[0]).collect();

    let half = (epsilon / dx).ceil() as usize;
    let mut kernel: Vec<f64> = (0..=2 * half).map(|l| bump((l as f64 - half as f64) * dx / epsilon)).collect();
    let norm: f64 = kernel.iter().sum::<f64>() * dx;
    kernel.iter_mut().for_each(|k| *k /= norm);

    let mut out = vec![0.0; n];
    for (j, &m) in cell.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let lo = j.saturating_sub(half);
        let hi = (j + half).min(n - 1);
        for i in lo..=hi {
            out[i] += m * kernel[i + half - j];
        }
    }
    ScalarField::new(grid, out)
}

/// Hat `height * max(0, 1 - |x - center| / half_width)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: f64,
    pub half_width: f64,
    pub height: f64,
}

impl TestFunction {
    pub fn hat(center: f64, half_width: f64, height: f64) -> Result<Self> {
        if !(half_width > 0.0) || !center.is_finite() || !height.is_finite() {
            return domain("hat needs finite center and height and positive half-width");
        }
        Ok(Self { center, half_width, height })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.height * (1.0 - (x - self.center).abs() / self.half_width).max(0.0)
    }

    pub fn support(&self) -> Interval {
        Interval { a: self.center - self.half_width, b: self.center + self.half_width }
    }

    /// `(pi/2) int |phi'| = pi |height|`.
    pub fn drift_constant(&self) -> f64 {
        PI * self.height.abs()
    }

    /// `int phi u` over the hat's support.
    pub fn pair(&self, u: &ScalarField) -> Result<f64> {
        let s = self.support();
        // Split at the apex so the trapezoid rule sees the kink.
        let l = u.integrate_with(Interval { a: s.a, b: self.center }, |x, v| v * self.eval(x))?;
        let r = u.integrate_with(Interval { a: self.center, b: s.b }, |x, v| v * self.eval(x))?;
        Ok(l + r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionBattery {
    pub functions: Vec<TestFunction>,
}

impl TestFunctionBattery {
    /// Seven unit hats at three scales over `support = [a, b]` of width `L`:
    /// one of half-width `L` at the middle, two of half-width `L/2` at
    /// `mid +- L/4`, four of half-width `L/4` at `a + (2k+1) L/8`.
    pub fn default_for(support: Interval) -> Self {
        let (a, l, c) = (support.a, support.len(), support.mid());
        let mut f = vec![TestFunction { center: c, half_width: l, height: 1.0 }];
        for s in [-1.0, 1.0] {
            f.push(TestFunction { center: c + s * 0.25 * l, half_width: 0.5 * l, height: 1.0 });
        }
        for k in 0..4 {
            f.push(TestFunction { center: a + (2 * k + 1) as f64 * l / 8.0, half_width: 0.25 * l, height: 1.0 });
        }
        Self { functions: f }
    }

    pub fn max_drift_constant(&self) -> f64 {
        self.functions.iter().map(TestFunction::drift_constant).fold(0.0, f64::max)
    }

    pub fn hull(&self) -> Option<Interval> {
        let a = self.functions.iter().map(|f| f.support().a).fold(f64::INFINITY, f64::min);
        let b = self.functions.iter().map(|f| f.support().b).fold(f64::NEG_INFINITY, f64::max);
        Interval::new(a, b).ok()
    }
}

/// `|int phi u - int phi dnu|` for each battery function.
pub fn weak_gaps(nu: &RadonMeasureSpec, u: &ScalarField, battery: &TestFunctionBattery) -> Result<Vec<f64>> {
    battery.functions.iter().map(|phi| Ok((phi.pair(u)? - nu.integrate(phi)).abs())).collect()
}

/// Largest of [`weak_gaps`].
pub fn weak_gap(nu: &RadonMeasureSpec, u: &ScalarField, battery: &TestFunctionBattery) -> Result<f64> {
    Ok(weak_gaps(nu, u, battery)?.into_iter().fold(0.0, f64::max))
}

/// `gap_phi(t) <= C(phi) t + gap_phi(0) + tol` along a flow from mollified
/// data, where `gap_phi(0)` is the mollification error of the initial snapshot.
pub fn check_weak_convergence(
    nu: &RadonMeasureSpec,
    traj: &FieldTrajectory,
    battery: &TestFunctionBattery,
    tol: f64,
) -> Result<EstimateReport> {
    let (t0, u0) = traj.iter().next().ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    if t0 != 0.0 {
        return domain("trajectory must start at t = 0");
    }
    let initial = weak_gaps(nu, u0, battery)?;
    let mut worst = WorstMargin::default();
    for (t, u) in traj.iter() {
        let gaps = weak_gaps(nu, u, battery)?;
        for ((phi, g), g0) in battery.functions.iter().zip(&gaps).zip(&initial) {
            worst.update(phi.drift_constant() * t + g0 - g, phi.center, t);
        }
    }
    Ok(worst
        .report("weak-gap", tol)
        .with_detail("initial_gap", initial.iter().copied().fold(0.0, f64::max)))
}

/// Grid, cutoff and snapshot plan for flows from measure data.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureFlowSetup {
    pub grid: Grid1D,
    pub cutoff_radius: f64,
    pub dt_max: f64,
    pub snapshot_times: Vec<f64>,
    /// Compact set on which successive flows are compared.
    pub probe: Interval,
    /// Earliest snapshot time entering the comparison.
    pub probe_from: f64,
}

impl MeasureFlowSetup {
    /// Domain padded by four support widths on each side, `dx` a fifth of the
    /// finest epsilon, `dt_max = dx / 5`, snapshots at `t_end 2^-k` for `k = 10..1` and at twenty
    /// uniform times.
    pub fn for_measure(nu: &RadonMeasureSpec, t_end: f64, finest_epsilon: f64) -> Result<Self> {
        let s = nu.support().ok_or_else(|| Error::Domain("measure has empty support".into()))?;
        let l = s.len();
        let span = Interval::new(s.a - 4.0 * l, s.b + 4.0 * l)?;
        let dx = (finest_epsilon / 5.0).min(l / 200.0);
        let grid = Grid1D::with_spacing(span, dx)?;
        let mut snaps: Vec<f64> = (1..=10).rev().map(|k| t_end * 0.5f64.powi(k)).collect();
        snaps.extend((1..=20).map(|k| t_end * k as f64 / 20.0));
        snaps.sort_by(f64::total_cmp);
        snaps.dedup();
        Ok(Self {
            grid,
            cutoff_radius: s.a.abs().max(s.b.abs()) + l,
            dt_max: 0.2 * dx,
            snapshot_times: snaps,
            probe: Interval::new(s.a - 0.5 * l, s.b + 0.5 * l)?,
            probe_from: 0.25 * t_end,
        })
    }
}

/// Signed flow and dominating flow for one mollification width.
#[derive(Clone, Debug)]
pub struct EpsilonRun {
    pub epsilon: f64,
    pub u: FieldTrajectory,
    pub dominating: FieldTrajectory,
}

/// Successive-flow distances `d_k = sup |u_{eps_k} - u_{eps_{k+1}}|` on the
/// probe compact; accepted when each halving at least halves the distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub epsilons: Vec<f64>,
    pub distances: Vec<f64>,
    pub ratios: Vec<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct MeasureFlow {
    pub runs: Vec<EpsilonRun>,
    pub cauchy: CauchyReport,
}

impl MeasureFlow {
    /// The finest-epsilon run.
    pub fn finest(&self) -> &EpsilonRun {
        self.runs.last().unwrap()
    }
}

/// Mollifies `nu` at each width, solves the signed and dominating flows on
/// the setup's grid with zero boundary values, and compares successive flows.
pub fn flow_from_measure(
    nu: &RadonMeasureSpec,
    t_end: f64,
    epsilons: &[f64],
    setup: &MeasureFlowSetup,
) -> Result<MeasureFlow> {
    nu.validate()?;
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return domain("need at least one positive epsilon");
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return domain("epsilons must be strictly decreasing");
    }
    let opts = SolverOptions::new(setup.dt_max, BoundaryCondition::Zero).with_snapshots(
        setup.snapshot_times.iter().copied().filter(|&s| s > 0.0 && s < t_end),
    );
    let runs: Vec<EpsilonRun> = epsilons
        .par_iter()
        .map(|&eps| {
            let u0 = mollify(nu, eps, setup.cutoff_radius, setup.grid)?;
            let big0 = mollify_dominating(nu, eps, setup.cutoff_radius, setup.grid)?;
            let mut u = solve(&u0, t_end, &opts)?;
            let mut dominating = solve(&big0, t_end, &opts)?;
            u.set_meta("epsilon", eps);
            dominating.set_meta("epsilon", eps);
            Ok(EpsilonRun { epsilon: eps, u, dominating })
        })
        .collect::<Result<_>>()?;

    let grid = setup.grid;
    let probe: Vec<usize> = (0..grid.n()).filter(|&i| setup.probe.contains(grid.node(i))).collect();
    let mut distances = Vec::new();
    for w in runs.windows(2) {
        let mut d = 0.0_f64;
        for ((t, a), b) in w[0].u.iter().zip(w[1].u.states()) {
            if t >= setup.probe_from {
                d = probe.iter().fold(d, |d, &i| d.max((a.values()[i] - b.values()[i]).abs()));
            }
        }
        distances.push(d);
    }
    let ratios: Vec<f64> = distances.windows(2).map(|w| w[0] / w[1]).collect();
    let passed = ratios.iter().all(|&r| r >= 2.0);
    Ok(MeasureFlow {
        runs,
        cauchy: CauchyReport { epsilons: epsilons.to_vec(), distances, ratios, passed },
    })
}

/// `||u(t) - u_0||_{L^p(region)}` along the snapshots, `u_0` the density of
/// `nu`. Passes when the gap shrinks (within `tol`) as `t -> 0` and ends
/// below `tol` at the earliest snapshot. `region` must avoid the singular
/// supports.
pub fn strong_convergence_check(
    nu: &RadonMeasureSpec,
    traj: &FieldTrajectory,
    region: Interval,
    p: f64,
    tol: f64,
) -> Result<EstimateReport> {
    for s in &nu.singular {
        let iv = s.support();
        if region.a <= iv.b && iv.a <= region.b {
            return domain(format!("region [{}, {}] meets the singular support [{}, {}]", region.a, region.b, iv.a, iv.b));
        }
    }
    let grid = *traj.grid().ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    let u0 = ScalarField::from_fn(grid, |x| match nu.density() {
        Some(d) if d.grid().contains(x) => d.sample_linear(x).unwrap_or(0.0),
        _ => 0.0,
    })?;
    let gaps: Vec<(f64, f64)> = traj
        .iter()
        .map(|(t, u)| Ok((t, u.sub(&u0)?.lp_norm(p, region)?)))
        .collect::<Result<_>>()?;
    let (t_first, g_first) = gaps[0];
    let mut worst = WorstMargin::default();
    worst.update(tol - g_first, f64::NAN, t_first);
    for w in gaps.windows(2) {
        worst.update(w[1].1 - w[0].1 + tol, f64::NAN, w[1].0);
    }
    Ok(EstimateReport::from_margin(format!("strong-convergence-p{p}"), worst.margin, worst.witness, 0.0)
        .with_tolerance("tol", tol)
        .with_detail("earliest_gap", g_first))
}

/// One test function's extrapolated initial value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub phi: TestFunction,
    pub limit: f64,
    /// `C(phi) t_min`.
    pub error_bar: f64,
    /// Slope of the linear fit of `int phi u(t)` near `t = 0`.
    pub drift: f64,
}

/// Extrapolates `int phi u(t)` to `t = 0` by a linear fit over the first four
/// positive snapshots, clipped to the interval allowed by the Lipschitz bound
/// `|int phi u(t) - int phi u(s)| <= C(phi) |t - s|` around the earliest value.
pub fn initial_trace(traj: &FieldTrajectory, battery: &TestFunctionBattery) -> Result<Vec<TraceEstimate>> {
    let early: Vec<(f64, &ScalarField)> = traj.iter().filter(|(t, _)| *t > 0.0).take(4).collect();
    if early.len() < 2 {
        return domain("initial trace needs at least two positive snapshots");
    }
    let t_min = early[0].0;
    battery
        .functions
        .iter()
        .map(|phi| {
            let pts: Vec<(f64, f64)> = early.iter().map(|(t, u)| Ok((*t, phi.pair(u)?))).collect::<Result<_>>()?;
            let n = pts.len() as f64;
            let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mv)).sum();
            let den: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
            let slope = num / den;
            let bar = phi.drift_constant() * t_min;
            let limit = (mv - slope * mt).clamp(pts[0].1 - bar, pts[0].1 + bar);
            Ok(TraceEstimate { phi: *phi, limit, error_bar: bar, drift: slope })
        })
        .collect()
}

/// `|L phi - int phi dnu| <= C(phi) t_min + tol` for each battery function.
pub fn check_initial_trace(nu: &RadonMeasureSpec, traces: &[TraceEstimate], tol: f64) -> EstimateReport {
    let mut worst = WorstMargin::default();
    for tr in traces {
        let m = tr.error_bar - (tr.limit - nu.integrate(&tr.phi)).abs();
        worst.update(m, tr.phi.center, 0.0);
    }
    worst.report("initial-trace", tol)
}

/// Nodewise `U - |u| >= -tol` over shared grid and times.
pub fn check_dominated(traj_u: &FieldTrajectory, traj_big: &FieldTrajectory, tol: f64) -> Result<EstimateReport> {
    if traj_u.grid() != traj_big.grid() || traj_u.times() != traj_big.times() {
        return domain("dominated check needs a shared grid and times");
    }
    let mut worst = WorstMargin::default();
    for ((t, u), big) in traj_u.iter().zip(traj_big.states()) {
        let g = u.grid();
        for (i, (a, b)) in u.values().iter().zip(big.values()).enumerate() {
            worst.update(b - a.abs(), g.node(i), t);
        }
    }
    Ok(worst.report("dominated", tol))
}

/// `||U(t)||_{L^1(J)} <= |nu|(J) + pi t` for each interval `J`.
pub fn check_mass_growth(
    nu: &RadonMeasureSpec,
    traj_big: &FieldTrajectory,
    intervals: &[Interval],
    tol: f64,
) -> Result<EstimateReport> {
    let mut worst = WorstMargin::default();
    for j in intervals {
        let budget = total_variation_of_interval(nu, j.a, j.b)?;
        for (t, big) in traj_big.iter() {
            worst.update(budget + PI * t - big.l1_norm(*j)?, j.mid(), t);
        }
    }
    Ok(worst.report("dominating-mass-growth", tol))
}

/// Witness helper for reports without a spatial location.
pub fn at_time(t: f64) -> Witness {
    Witness { x: f64::NAN, t }
}
