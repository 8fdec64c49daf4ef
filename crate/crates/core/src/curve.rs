//! Polyline curve shortening flow, graph extraction and intersection counting.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::exact::domination_envelope;
use crate::grid::{Grid1D, Interval, ScalarField};
use crate::polyline::{dist, point_segment_distance, Point, Polyline};
use crate::trajectory::{CurveTrajectory, FieldTrajectory, RunMeta};

#[derive(Clone, Debug, PartialEq)]
pub struct CurveFlowOptions {
    /// Time step as a fraction of the squared minimum chord, in `(0, 0.5]`.
    pub dt_safety: f64,
    pub redistribute_every: usize,
    /// Height of the pinned ends of a U-shaped curve.
    pub y_cap: f64,
    pub pin_ends: bool,
}

impl Default for CurveFlowOptions {
    fn default() -> Self {
        Self { dt_safety: 0.4, redistribute_every: 5, y_cap: f64::INFINITY, pin_ends: true }
    }
}

impl CurveFlowOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_safety > 0.0 && self.dt_safety <= 0.5) {
            return domain(format!("dt_safety must lie in (0, 0.5], got {}", self.dt_safety));
        }
        if self.redistribute_every == 0 {
            return domain("redistribute_every must be at least 1");
        }
        Ok(())
    }
}

/// Discrete curvature vectors `2 (T_out - T_in) / (|e_in| + |e_out|)`, exact
/// (`1/r`, pointing inward) on regular polygons. Open endpoints get zero.
pub fn curvature_vectors(p: &Polyline) -> Result<Vec<Point>> {
    if p.len() < 3 {
        return domain("curvature needs at least 3 vertices");
    }
    let mut edges = Vec::new();
    let mut out = vec![[0.0; 2]; p.len()];
    curvature_into(p.vertices(), p.is_closed(), &mut edges, &mut out)?;
    Ok(out)
}

/// Fills `out` with curvature vectors; `edges` is scratch space.
fn curvature_into(v: &[Point], closed: bool, edges: &mut Vec<[f64; 3]>, out: &mut [Point]) -> Result<()> {
    let n = v.len();
    let ne = if closed { n } else { n - 1 };
    edges.clear();
    for k in 0..ne {
        let a = v[k];
        let b = v[(k + 1) % n];
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let l = (ex * ex + ey * ey).sqrt();
        if !(l > 0.0) {
            return Err(Error::Degenerate(format!("zero-length edge at vertex {k}")));
        }
        edges.push([ex / l, ey / l, l]);
    }
    let interior = |ein: &[f64; 3], eout: &[f64; 3]| -> Point {
        let s = 2.0 / (ein[2] + eout[2]);
        [s * (eout[0] - ein[0]), s * (eout[1] - ein[1])]
    };
    if closed {
        for i in 0..n {
            let ein = &edges[(i + n - 1) % n];
            let eout = &edges[i];
            out[i] = interior(ein, eout);
        }
    } else {
        out[0] = [0.0, 0.0];
        out[n - 1] = [0.0, 0.0];
        for i in 1..n - 1 {
            out[i] = interior(&edges[i - 1], &edges[i]);
        }
    }
    Ok(())
}

/// One forward Euler step `x += dt * kappa`. Pinned open ends stay put; free
/// open ends copy the velocity of their neighbour.
pub fn csf_step(p: &Polyline, dt: f64, opts: &CurveFlowOptions) -> Result<Polyline> {
    opts.validate()?;
    let limit = opts.dt_safety * p.min_chord().powi(2);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return domain(format!("dt = {dt} outside (0, {limit}]"));
    }
    let mut v = p.vertices().to_vec();
    let mut edges = Vec::new();
    let mut vel = vec![[0.0; 2]; v.len()];
    euler_update(&mut v, p.is_closed(), opts.pin_ends, dt, &mut edges, &mut vel)?;
    Polyline::new(v, p.is_closed())
}

fn euler_update(
    v: &mut [Point],
    closed: bool,
    pin_ends: bool,
    dt: f64,
    edges: &mut Vec<[f64; 3]>,
    vel: &mut [Point],
) -> Result<()> {
    curvature_into(v, closed, edges, vel)?;
    let n = v.len();
    if !closed && !pin_ends {
        vel[0] = vel[1];
        vel[n - 1] = vel[n - 2];
    }
    for (p, k) in v.iter_mut().zip(vel.iter()) {
        p[0] += dt * k[0];
        p[1] += dt * k[1];
    }
    Ok(())
}

/// Centripetal Catmull-Rom point between `p1` and `p2` at fraction `u`.
fn catmull_rom(p0: Point, p1: Point, p2: Point, p3: Point, u: f64) -> Point {
    let knot = |a: Point, b: Point| dist(a, b).sqrt().max(1e-300);
    let t0 = 0.0;
    let t1 = t0 + knot(p0, p1);
    let t2 = t1 + knot(p1, p2);
    let t3 = t2 + knot(p2, p3);
    let t = t1 + u * (t2 - t1);
    let lerp = |a: Point, b: Point, ta: f64, tb: f64| -> Point {
        let w = (t - ta) / (tb - ta);
        [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
    };
    let a1 = lerp(p0, p1, t0, t1);
    let a2 = lerp(p1, p2, t1, t2);
    let a3 = lerp(p2, p3, t2, t3);
    let b1 = lerp(a1, a2, t0, t2);
    let b2 = lerp(a2, a3, t1, t3);
    lerp(b1, b2, t1, t2)
}

/// Resamples to the same vertex count, equally spaced in chord-arclength,
/// along a centripetal Catmull-Rom spline through the current vertices.
/// Open curves keep their endpoints.
pub fn redistribute(p: &Polyline) -> Result<Polyline> {
    let v = resample_spline(p.vertices(), p.is_closed(), p.len());
    Polyline::new(v, p.is_closed())
}

fn resample_spline(v: &[Point], closed: bool, m: usize) -> Vec<Point> {
    let n = v.len();
    let ne = if closed { n } else { n - 1 };
    let mut cum = Vec::with_capacity(ne + 1);
    cum.push(0.0);
    for k in 0..ne {
        cum.push(cum[k] + dist(v[k], v[(k + 1) % n]));
    }
    let total = cum[ne];
    let at = |i: isize| -> Point {
        if closed {
            v[i.rem_euclid(n as isize) as usize]
        } else if i < 0 {
            // Reflected phantom points keep the end tangent.
            [2.0 * v[0][0] - v[1][0], 2.0 * v[0][1] - v[1][1]]
        } else if i as usize >= n {
            [2.0 * v[n - 1][0] - v[n - 2][0], 2.0 * v[n - 1][1] - v[n - 2][1]]
        } else {
            v[i as usize]
        }
    };
    let mut out = Vec::with_capacity(m);
    let count = if closed { m } else { m - 1 };
    let mut seg = 0usize;
    for j in 0..m {
        if !closed && j == m - 1 {
            out.push(v[n - 1]);
            break;
        }
        if !closed && j == 0 {
            out.push(v[0]);
            continue;
        }
        let target = total * j as f64 / count as f64;
        while seg + 1 < ne && cum[seg + 1] <= target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let u = ((target - cum[seg]) / len).clamp(0.0, 1.0);
        let k = seg as isize;
        out.push(catmull_rom(at(k - 1), at(k), at(k + 1), at(k + 2), u));
    }
    out
}

/// Resamples an open polyline to `m` vertices equally spaced in arclength
/// along its piecewise-linear interpolant (corners are kept exactly only if
/// they fall on a sample).
pub fn resample_open_linear(v: &[Point], m: usize) -> Vec<Point> {
    let n = v.len();
    let mut cum = Vec::with_capacity(n);
    cum.push(0.0);
    for k in 0..n - 1 {
        cum.push(cum[k] + dist(v[k], v[k + 1]));
    }
    let total = cum[n - 1];
    let mut out = Vec::with_capacity(m);
    let mut seg = 0usize;
    for j in 0..m {
        if j == m - 1 {
            out.push(v[n - 1]);
            break;
        }
        let target = total * j as f64 / (m - 1) as f64;
        while seg + 2 < n && cum[seg + 1] <= target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let u = if len > 0.0 { ((target - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (v[seg], v[seg + 1]);
        out.push([a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]);
    }
    out
}

/// Result of [`flow_curve`]: snapshots plus step statistics.
#[derive(Clone, Debug)]
pub struct CurveFlowRun {
    pub curves: CurveTrajectory,
    pub steps: usize,
    pub dt_last: f64,
    pub dt_min: f64,
}

/// Flows `p0` by forward Euler with `dt = dt_safety * min_chord^2`,
/// redistributing every `redistribute_every` steps and landing exactly on each
/// snapshot time. Snapshots at `t = 0`, the requested times and `t_end`.
pub fn flow_curve(p0: &Polyline, t_end: f64, snapshots: &[f64], opts: &CurveFlowOptions) -> Result<CurveFlowRun> {
    opts.validate()?;
    if !(t_end > 0.0) {
        return domain("t_end must be positive");
    }
    let closed = p0.is_closed();
    let mut targets: Vec<f64> = snapshots.iter().copied().filter(|&s| s > 0.0 && s < t_end).collect();
    targets.push(t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);

    let mut traj = CurveTrajectory::empty();
    traj.push(0.0, p0.clone())?;
    let mut v = p0.vertices().to_vec();
    let mut edges = Vec::with_capacity(v.len());
    let mut vel = vec![[0.0; 2]; v.len()];
    let mut t = 0.0_f64;
    let mut steps = 0usize;
    let mut dt_last = 0.0;
    let mut dt_min = f64::INFINITY;
    let mut flagged = Vec::new();
    for &target in &targets {
        while t < target {
            let min_chord = min_chord_of(&v, closed);
            if !(min_chord > 1e-12) {
                return Err(Error::Degenerate(format!("chords collapsed at t = {t}")));
            }
            let mut dt = opts.dt_safety * min_chord * min_chord;
            let remaining = target - t;
            let landing = dt >= remaining;
            if landing {
                dt = remaining;
            }
            euler_update(&mut v, closed, opts.pin_ends, dt, &mut edges, &mut vel)?;
            t = if landing { target } else { t + dt };
            steps += 1;
            dt_last = dt;
            dt_min = dt_min.min(dt);
            if steps % opts.redistribute_every == 0 {
                v = resample_spline(&v, closed, v.len());
            }
            if v.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
                return Err(Error::Divergence { t, reason: "non-finite vertex".into() });
            }
        }
        let poly = Polyline::new(v.clone(), closed)?;
        if self_intersects(&poly) {
            flagged.push(t);
        }
        traj.push(t, poly)?;
    }
    let mut meta = RunMeta::new();
    meta.insert("solver".into(), json!("polyline-csf"));
    meta.insert("vertices".into(), json!(p0.len()));
    meta.insert("dt_safety".into(), json!(opts.dt_safety));
    meta.insert("redistribute_every".into(), json!(opts.redistribute_every));
    meta.insert("steps".into(), json!(steps));
    meta.insert("self_intersection_times".into(), json!(flagged));
    traj.meta = meta;
    Ok(CurveFlowRun { curves: traj, steps, dt_last, dt_min })
}

fn min_chord_of(v: &[Point], closed: bool) -> f64 {
    let n = v.len();
    let ne = if closed { n } else { n - 1 };
    let mut m = f64::INFINITY;
    for k in 0..ne {
        let a = v[k];
        let b = v[(k + 1) % n];
        let d2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
        m = m.min(d2);
    }
    m.sqrt()
}

/// U-shaped polyline: the graph of `u0` over `[-1, 1]` joined to vertical
/// segments from the graph's ends up to `y_cap`.
pub fn build_local_initial_curve(u0: &ScalarField, y_cap: f64) -> Result<Polyline> {
    let g = u0.grid();
    if g.left() != -1.0 || g.right() != 1.0 {
        return domain("initial data must live on a grid over [-1, 1]");
    }
    if !(y_cap > u0.max() + 1.0) {
        return domain(format!("y_cap = {y_cap} must exceed max u0 + 1 = {}", u0.max() + 1.0));
    }
    let mut v = Vec::with_capacity(g.n() + 2);
    v.push([-1.0, y_cap]);
    for i in 0..g.n() {
        v.push([g.node(i), u0.values()[i]]);
    }
    v.push([1.0, y_cap]);
    Polyline::new(v, false)
}

/// Heights of `p` over each node of `grid`: exactly one crossing with the
/// vertical line through the node must lie below `y_cap - 1`.
pub fn graph_extract(p: &Polyline, grid: &Grid1D, y_cap: f64) -> Result<ScalarField> {
    let n = grid.n();
    let dx = grid.dx();
    let limit = y_cap - 1.0;
    let mut hits: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (a, b) in p.segments() {
        if a[0] == b[0] {
            continue;
        }
        let (lo, hi) = if a[0] < b[0] { (a, b) } else { (b, a) };
        // Nodes with lo.x <= x < hi.x (half-open so shared vertices count once).
        let first = ((lo[0] - grid.left()) / dx).ceil().max(0.0) as usize;
        let mut i = first.saturating_sub(1);
        while i < n {
            let x = grid.node(i);
            if x >= hi[0] {
                break;
            }
            if x >= lo[0] {
                let s = (x - lo[0]) / (hi[0] - lo[0]);
                let y = lo[1] + s * (hi[1] - lo[1]);
                if y < limit {
                    hits[i].push(y);
                }
            }
            i += 1;
        }
    }
    let bad: Vec<usize> = (0..n).filter(|&i| hits[i].len() != 1).collect();
    if let Some(&first) = bad.first() {
        return Err(Error::Multivalued { first_x: grid.node(first), nodes: bad });
    }
    ScalarField::new(*grid, hits.into_iter().map(|h| h[0]).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalFlowOptions {
    /// Target chord length of the U-curve.
    pub chord: f64,
    pub dt_safety: f64,
    pub redistribute_every: usize,
    /// Cap height; derived from the data when `None`.
    pub y_cap: Option<f64>,
    /// Smallest edge margin tried for graph extraction.
    pub eps_min: f64,
    pub snapshot_times: Vec<f64>,
}

impl Default for LocalFlowOptions {
    fn default() -> Self {
        Self {
            chord: 0.004,
            dt_safety: 0.4,
            redistribute_every: 5,
            y_cap: None,
            eps_min: 1e-3,
            snapshot_times: Vec::new(),
        }
    }
}

/// A local flow from data on `[-1, 1]`, sampled on an inner grid.
#[derive(Clone, Debug)]
pub struct LocalGcsfRun {
    /// Graphs over `[-1 + eps_margin, 1 - eps_margin]`.
    pub fields: FieldTrajectory,
    pub curves: CurveTrajectory,
    pub eps_margin: f64,
    pub y_cap: f64,
    /// `||u0||_{L^1(-1, 1)}`.
    pub initial_mass: f64,
    /// `max u0`.
    pub initial_height: f64,
    /// Mean curve time step.
    pub dt: f64,
}

impl LocalGcsfRun {
    pub fn dx(&self) -> f64 {
        self.fields.grid().map(|g| g.dx()).unwrap_or(0.0)
    }

    pub fn t_end(&self) -> f64 {
        *self.fields.times().last().unwrap()
    }

    /// Upper bound on `int u` over one edge sliver of width `eps_margin` at time `t`,
    /// from the Grim Reaper envelope.
    pub fn sliver_bound(&self, t: f64) -> f64 {
        sliver_envelope_integral(self.eps_margin, self.initial_height, t)
    }
}

/// `int_{1-eps}^{1}` of the envelope `L + pi t/2 - (2/pi) ln cos(pi x/2)`.
pub fn sliver_envelope_integral(eps: f64, height: f64, t: f64) -> f64 {
    // -(2/pi) ln sin(pi z/2) over z in (0, eps): substitute the exact
    // integral of -(2/pi) ln(pi z/2) plus a smooth midpoint remainder.
    let c = FRAC_PI_2;
    let log_part = -(2.0 / std::f64::consts::PI) * (eps * ((c * eps).ln() - 1.0));
    let k = 64;
    let mut rem = 0.0;
    for j in 0..k {
        let z = eps * (j as f64 + 0.5) / k as f64;
        rem += -(2.0 / std::f64::consts::PI) * ((c * z).sin() / (c * z)).ln();
    }
    (height + c * t) * eps + log_part + rem * eps / k as f64
}

/// Default cap height: the envelope at the smallest edge margin plus a
/// margin of 2, so crossings at the inner grid stay well below the cap.
pub fn default_y_cap(height: f64, t_end: f64, eps_min: f64) -> f64 {
    let edge = domination_envelope(1.0 - eps_min, height, t_end).unwrap_or(height + 10.0);
    edge + 2.0
}

/// Flows the U-curve built from `u0 >= 0` on `[-1, 1]` with pinned capped ends
/// and extracts graphs over the largest inner grid that is single-valued at
/// every snapshot.
pub fn local_gcsf_solve(u0: &ScalarField, t_end: f64, opts: &LocalFlowOptions) -> Result<LocalGcsfRun> {
    if u0.min() < 0.0 {
        return domain("local flow needs nonnegative initial data");
    }
    if !(opts.chord > 0.0) || !(opts.eps_min > 0.0 && opts.eps_min < 0.5) {
        return domain("chord and eps_min must be positive (eps_min < 1/2)");
    }
    let height = u0.max();
    let y_cap = opts.y_cap.unwrap_or_else(|| default_y_cap(height, t_end, opts.eps_min));
    let initial = build_local_initial_curve(u0, y_cap)?;
    let m = (initial.length() / opts.chord).ceil() as usize + 1;
    let start = Polyline::new(resample_open_linear(initial.vertices(), m), false)?;
    let copts = CurveFlowOptions {
        dt_safety: opts.dt_safety,
        redistribute_every: opts.redistribute_every,
        y_cap,
        pin_ends: true,
    };
    let run = flow_curve(&start, t_end, &opts.snapshot_times, &copts)?;

    let mut eps = opts.eps_min;
    let mut last_err = None;
    while eps < 0.25 {
        let n_inner = ((2.0 * (1.0 - eps)) / opts.chord).ceil() as usize + 1;
        let grid = Grid1D::new(-1.0 + eps, 1.0 - eps, n_inner.max(3))?;
        let mut fields = FieldTrajectory::empty();
        let mut ok = true;
        for (t, p) in run.curves.iter() {
            match graph_extract(p, &grid, y_cap) {
                Ok(f) => fields.push(t, f)?,
                Err(e) => {
                    last_err = Some(e);
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let initial_mass = u0.l1_norm(Interval::new(-1.0, 1.0)?)?;
            let mut meta = run.curves.meta.clone();
            meta.insert("eps_margin".into(), json!(eps));
            meta.insert("y_cap".into(), json!(y_cap));
            meta.insert("initial_mass".into(), json!(initial_mass));
            meta.insert("initial_height".into(), json!(height));
            meta.insert("dt".into(), json!(t_end / run.steps as f64));
            meta.insert("inner_dx".into(), json!(grid.dx()));
            fields.meta = meta;
            return Ok(LocalGcsfRun {
                fields,
                curves: run.curves,
                eps_margin: eps,
                y_cap,
                initial_mass,
                initial_height: height,
                dt: t_end / run.steps as f64,
            });
        }
        eps *= 1.25;
    }
    Err(Error::Internal(format!(
        "graph extraction failed for every edge margin: {}",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Half-open sign: zero counts as positive, so a vertex lying exactly on the
/// other curve is counted once.
fn side(v: f64) -> bool {
    v >= 0.0
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    side(orient(a, b, c)) != side(orient(a, b, d)) && side(orient(c, d, a)) != side(orient(c, d, b))
}

/// Number of crossings between two polylines, found by sign changes of the
/// orientation of each segment's ends relative to the other segment.
pub fn count_intersections(p1: &Polyline, p2: &Polyline) -> usize {
    let bbox = |a: Point, b: Point| (a[0].min(b[0]), a[0].max(b[0]), a[1].min(b[1]), a[1].max(b[1]));
    let segs2: Vec<(Point, Point, (f64, f64, f64, f64))> =
        p2.segments().map(|(c, d)| (c, d, bbox(c, d))).collect();
    let mut count = 0;
    for (a, b) in p1.segments() {
        let (x0, x1, y0, y1) = bbox(a, b);
        for &(c, d, (u0, u1, v0, v1)) in &segs2 {
            if u0 > x1 || u1 < x0 || v0 > y1 || v1 < y0 {
                continue;
            }
            if segments_cross(a, b, c, d) {
                count += 1;
            }
        }
    }
    count
}

/// Minimum distance between two polylines (zero if they cross).
pub fn min_distance(p1: &Polyline, p2: &Polyline) -> f64 {
    let mut best = f64::INFINITY;
    for (a, b) in p1.segments() {
        for (c, d) in p2.segments() {
            if segments_cross(a, b, c, d) {
                return 0.0;
            }
            let m = point_segment_distance(a, c, d)
                .min(point_segment_distance(b, c, d))
                .min(point_segment_distance(c, a, b))
                .min(point_segment_distance(d, a, b));
            best = best.min(m);
        }
    }
    best
}

/// Symmetric Hausdorff distance between the vertex sets, measured against
/// the other polyline's segments.
pub fn hausdorff_distance(p1: &Polyline, p2: &Polyline) -> f64 {
    let one_way = |p: &Polyline, q: &Polyline| {
        p.vertices()
            .iter()
            .map(|&v| q.segments().map(|(a, b)| point_segment_distance(v, a, b)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(p1, p2).max(one_way(p2, p1))
}

/// Whether any two non-adjacent segments cross. Uses a uniform bucket grid
/// with cells of the maximum chord length.
pub fn self_intersects(p: &Polyline) -> bool {
    let cell = p.max_chord();
    if !(cell > 0.0) {
        return false;
    }
    let ns = p.segment_count();
    let key = |x: f64, y: f64| ((x / cell).floor() as i64, (y / cell).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for k in 0..ns {
        let (a, b) = p.segment(k);
        let (i0, j0) = key(a[0].min(b[0]), a[1].min(b[1]));
        let (i1, j1) = key(a[0].max(b[0]), a[1].max(b[1]));
        for i in i0..=i1 {
            for j in j0..=j1 {
                buckets.entry((i, j)).or_default().push(k);
            }
        }
    }
    let adjacent = |k: usize, l: usize| {
        let d = k.abs_diff(l);
        d <= 1 || (p.is_closed() && d == ns - 1)
    };
    for segs in buckets.values() {
        for (ia, &k) in segs.iter().enumerate() {
            for &l in &segs[ia + 1..] {
                if adjacent(k, l) {
                    continue;
                }
                let (a, b) = p.segment(k);
                let (c, d) = p.segment(l);
                let strict = orient(a, b, c) * orient(a, b, d) < 0.0 && orient(c, d, a) * orient(c, d, b) < 0.0;
                if strict {
                    return true;
                }
            }
        }
    }
    false
}

/// Polyline through the graph of `f` sampled at `m` equally spaced abscissae.
pub fn graph_polyline(f: impl Fn(f64) -> f64, left: f64, right: f64, m: usize) -> Result<Polyline> {
    let g = Grid1D::new(left, right, m)?;
    Polyline::new((0..m).map(|i| [g.node(i), f(g.node(i))]).collect(), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{grim_reaper, shrinking_circle};
    use std::f64::consts::PI;

    #[test]
    fn straight_line_has_zero_curvature() {
        let p = graph_polyline(|x| 2.0 * x + 1.0, -1.0, 1.0, 11).unwrap();
        for k in curvature_vectors(&p).unwrap() {
            assert!(k[0].abs() < 1e-12 && k[1].abs() < 1e-12);
        }
    }

    #[test]
    fn circle_curvature() {
        let c = shrinking_circle([0.0, 0.0], 1.0, 0.0, 256).unwrap().unwrap();
        for (k, v) in curvature_vectors(&c).unwrap().iter().zip(c.vertices()) {
            assert!((k[0].hypot(k[1]) - 1.0).abs() < 1e-3);
            // points inward
            assert!(k[0] * v[0] + k[1] * v[1] < 0.0);
        }
    }

    #[test]
    fn grim_reaper_tip_curvature() {
        let p = graph_polyline(|x| grim_reaper(x, 0.0, 0.0).unwrap(), -0.5, 0.5, 1001).unwrap();
        let k = curvature_vectors(&p).unwrap();
        let mid = k[500];
        assert!((mid[1] - PI / 2.0).abs() < 1e-2, "{mid:?}");
    }

    #[test]
    fn pinned_segment_unchanged() {
        let p = graph_polyline(|x| 0.5 * x, 0.0, 1.0, 21).unwrap();
        let o = CurveFlowOptions::default();
        let dt = 0.4 * p.min_chord().powi(2);
        let q = csf_step(&p, dt, &o).unwrap();
        for (a, b) in p.vertices().iter().zip(q.vertices()) {
            assert!(dist(*a, *b) < 1e-14);
        }
        assert!(csf_step(&p, 10.0, &o).is_err());
    }

    #[test]
    fn redistribute_keeps_regular_polygon() {
        let c = shrinking_circle([0.0, 0.0], 1.0, 0.0, 64).unwrap().unwrap();
        let r = redistribute(&c).unwrap();
        for (a, b) in c.vertices().iter().zip(r.vertices()) {
            assert!(dist(*a, *b) < 1e-12);
        }
    }

    #[test]
    fn u_shape_construction() {
        let g = Grid1D::new(-1.0, 1.0, 201).unwrap();
        let u0 = ScalarField::zeros(g);
        let p = build_local_initial_curve(&u0, 3.0).unwrap();
        assert_eq!(p.vertices()[0], [-1.0, 3.0]);
        assert_eq!(p.vertices()[1], [-1.0, 0.0]);
        assert_eq!(*p.vertices().last().unwrap(), [1.0, 3.0]);
        assert!((p.length() - 8.0).abs() < 1e-12);
        assert!(build_local_initial_curve(&u0, 0.5).is_err());
    }

    #[test]
    fn extraction_recovers_graph() {
        let p = graph_polyline(|x| x.sin(), -1.0, 1.0, 401).unwrap();
        let g = Grid1D::new(-0.9, 0.9, 57).unwrap();
        let f = graph_extract(&p, &g, 10.0).unwrap();
        for i in 0..g.n() {
            assert!((f.values()[i] - g.node(i).sin()).abs() < 1e-5);
        }
    }

    #[test]
    fn circle_is_not_a_graph() {
        let c = shrinking_circle([0.0, 0.0], 1.0, 0.0, 128).unwrap().unwrap();
        let g = Grid1D::new(-0.9, 0.9, 11).unwrap();
        match graph_extract(&c, &g, 10.0) {
            Err(Error::Multivalued { nodes, .. }) => assert_eq!(nodes.len(), 11),
            other => panic!("expected multivalued failure, got {other:?}"),
        }
    }

    #[test]
    fn intersection_counts() {
        let l1 = graph_polyline(|_| 0.0, -2.0, 2.0, 5).unwrap();
        let l2 = graph_polyline(|_| 1.0, -2.0, 2.0, 7).unwrap();
        assert_eq!(count_intersections(&l1, &l2), 0);
        let c = shrinking_circle([0.0, 0.0], 1.0, 0.0, 100).unwrap().unwrap();
        let through = graph_polyline(|x| 0.3 * x, -2.0, 2.0, 9).unwrap();
        assert_eq!(count_intersections(&through, &c), 2);
        let s = graph_polyline(f64::sin, -PI - 0.3, PI + 0.3, 400).unwrap();
        let axis = graph_polyline(|_| 0.0, -5.0, 5.0, 3).unwrap();
        assert_eq!(count_intersections(&s, &axis), 3);
    }

    #[test]
    fn distances() {
        let l1 = graph_polyline(|_| 0.0, -2.0, 2.0, 5).unwrap();
        let l2 = graph_polyline(|_| 1.5, -2.0, 2.0, 7).unwrap();
        assert!((min_distance(&l1, &l2) - 1.5).abs() < 1e-14);
        assert!((hausdorff_distance(&l1, &l2) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn figure_eight_self_intersects() {
        let m = 200;
        let v: Vec<Point> = (0..m)
            .map(|j| {
                let s = 2.0 * PI * j as f64 / m as f64;
                [s.sin(), (2.0 * s).sin()]
            })
            .collect();
        assert!(self_intersects(&Polyline::new(v, true).unwrap()));
        let c = shrinking_circle([0.0, 0.0], 1.0, 0.0, 200).unwrap().unwrap();
        assert!(!self_intersects(&c));
    }

    #[test]
    fn sliver_integral_matches_quadrature() {
        let eps = 0.01;
        let n = 400_000;
        let mut acc = 0.0;
        for j in 0..n {
            let x = 1.0 - eps + eps * (j as f64 + 0.5) / n as f64;
            acc += domination_envelope(x, 0.7, 0.3).unwrap() * eps / n as f64;
        }
        let v = sliver_envelope_integral(eps, 0.7, 0.3);
        assert!((v - acc).abs() < 1e-6, "{v} vs {acc}");
    }
}
