//! Closed-form solutions: Grim Reaper, Angenent ovals and shrinking circles.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::polyline::{Point, Polyline};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GrimReaperParams {
    pub vertical_shift: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngenentOvalParams {
    /// Ancient time parameter, strictly negative.
    pub time_offset: f64,
    pub vertical_shift: f64,
}

impl AngenentOvalParams {
    pub fn new(time_offset: f64, vertical_shift: f64) -> Result<Self> {
        if !(time_offset < 0.0) {
            return domain(format!("oval time offset must be negative, got {time_offset}"));
        }
        Ok(Self { time_offset, vertical_shift })
    }
}

fn check_strip(x: f64) -> Result<()> {
    if !(x.abs() < 1.0) {
        return domain(format!("|x| < 1 required, got x = {x}"));
    }
    Ok(())
}

/// Translating graph `y = L + pi t / 2 - (2/pi) ln cos(pi x / 2)` on `(-1, 1)`.
pub fn grim_reaper(x: f64, t: f64, shift: f64) -> Result<f64> {
    check_strip(x)?;
    Ok(shift + FRAC_PI_2 * t - 2.0 / PI * (FRAC_PI_2 * x).cos().ln())
}

/// Slope `tan(pi x / 2)` of the Grim Reaper.
pub fn grim_reaper_dx(x: f64) -> Result<f64> {
    check_strip(x)?;
    Ok((FRAC_PI_2 * x).tan())
}

/// Second derivative `(pi/2) sec^2(pi x / 2)`.
pub fn grim_reaper_dxx(x: f64) -> Result<f64> {
    check_strip(x)?;
    let c = (FRAC_PI_2 * x).cos();
    Ok(FRAC_PI_2 / (c * c))
}

/// Upper envelope `L + pi T / 2 - (2/pi) ln cos(pi x / 2)` dominating a local
/// solution with initial height at most `L` up to time `T`.
pub fn domination_envelope(x: f64, height: f64, t_final: f64) -> Result<f64> {
    grim_reaper(x, t_final, height)
}

/// `arccosh(z)` as `ln(z + sqrt(z^2 - 1))`, with `z` within 1e-12 below 1
/// treated as 1.
pub fn arccosh_guarded(z: f64) -> Option<f64> {
    if z < 1.0 - 1e-12 || !z.is_finite() {
        return None;
    }
    let z = z.max(1.0);
    Some((z + (z * z - 1.0).sqrt()).ln())
}

/// Upper branch of the oval `cosh(pi y / 2) = exp(-pi^2 s / 4) cos(pi x / 2)`;
/// `None` outside the oval's width.
pub fn angenent_oval_upper(x: f64, s: f64) -> Result<Option<f64>> {
    if !(s < 0.0) {
        return domain(format!("oval time offset must be negative, got {s}"));
    }
    if x.abs() >= 1.0 {
        return Ok(None);
    }
    let z = (-PI * PI * s / 4.0).exp() * (FRAC_PI_2 * x).cos();
    Ok(arccosh_guarded(z).map(|a| 2.0 / PI * a))
}

/// Half-width of the oval at time offset `s`.
pub fn angenent_oval_half_width(s: f64) -> Result<f64> {
    if !(s < 0.0) {
        return domain(format!("oval time offset must be negative, got {s}"));
    }
    Ok(2.0 / PI * (PI * PI * s / 4.0).exp().acos())
}

/// Closed counter-clockwise polyline of `m` vertices, equally spaced in arclength,
/// on the oval with the given parameters.
pub fn angenent_oval_polyline(params: AngenentOvalParams, m: usize) -> Result<Polyline> {
    let s = params.time_offset;
    if !(s < 0.0) {
        return domain("oval time offset must be negative");
    }
    if m < 8 {
        return domain("oval polyline needs at least 8 vertices");
    }
    let k = (-PI * PI * s / 4.0).exp();
    // Level function; the oval is the convex set where it is <= 0.
    let level = |x: f64, y: f64| (FRAC_PI_2 * y).cosh() - k * (FRAC_PI_2 * x).cos();
    // Radius along direction (dx, dy) found by bisection; the oval is star-shaped about the origin.
    let radius = |dx: f64, dy: f64| {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while level(hi * dx, hi * dy) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if level(mid * dx, mid * dy) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let dense = 16 * m;
    let mut pts: Vec<Point> = Vec::with_capacity(dense);
    for j in 0..dense {
        let ang = 2.0 * PI * j as f64 / dense as f64;
        let (dy, dx) = ang.sin_cos();
        let r = radius(dx, dy);
        pts.push([r * dx, r * dy]);
    }
    let shifted = resample_closed_linear(&pts, m)
        .into_iter()
        .map(|p| {
            let norm = p[0].hypot(p[1]);
            let r = radius(p[0] / norm, p[1] / norm);
            [r * p[0] / norm, r * p[1] / norm + params.vertical_shift]
        })
        .collect();
    Polyline::new(shifted, true)
}

/// Resamples a closed point loop to `m` vertices equally spaced in arclength
/// along its piecewise-linear interpolant, starting at the first point.
pub(crate) fn resample_closed_linear(pts: &[Point], m: usize) -> Vec<Point> {
    let n = pts.len();
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        cum.push(cum[i] + (b[0] - a[0]).hypot(b[1] - a[1]));
    }
    let total = cum[n];
    let mut out = Vec::with_capacity(m);
    let mut seg = 0;
    for j in 0..m {
        let target = total * j as f64 / m as f64;
        while seg + 1 < n && cum[seg + 1] <= target {
            seg += 1;
        }
        let a = pts[seg];
        let b = pts[(seg + 1) % n];
        let len = cum[seg + 1] - cum[seg];
        let u = if len > 0.0 { (target - cum[seg]) / len } else { 0.0 };
        out.push([a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]);
    }
    out
}

/// Radius of the shrinking circle at time `t`, `None` at or after extinction.
pub fn shrinking_circle_radius(r0: f64, t: f64) -> Result<Option<f64>> {
    if !(r0 > 0.0) {
        return domain(format!("circle radius must be positive, got {r0}"));
    }
    let r2 = r0 * r0 - 2.0 * t;
    Ok(if r2 > 0.0 { Some(r2.sqrt()) } else { None })
}

/// Regular `m`-gon inscribed in the circle of radius `sqrt(r0^2 - 2t)`.
pub fn shrinking_circle(center: Point, r0: f64, t: f64, m: usize) -> Result<Option<Polyline>> {
    if m < 3 {
        return domain("circle needs at least 3 vertices");
    }
    let Some(r) = shrinking_circle_radius(r0, t)? else {
        return Ok(None);
    };
    let v = (0..m)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / m as f64;
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        })
        .collect();
    Polyline::new(v, true).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grim_reaper_values() {
        assert_eq!(grim_reaper(0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!((grim_reaper(0.0, 2.0, 0.0).unwrap() - PI).abs() < 1e-15);
        let v = grim_reaper(0.5, 0.0, 0.0).unwrap();
        // -(2/pi) ln(1/sqrt 2) = (1/pi) ln 2
        assert!((v - 2.0_f64.ln() / PI).abs() < 1e-15);
        assert!((v - 0.22064).abs() < 1e-5);
        assert!(grim_reaper(1.0, 0.0, 0.0).is_err());
        assert!(grim_reaper(-1.2, 0.0, 0.0).is_err());
    }

    #[test]
    fn grim_reaper_solves_equation() {
        for k in -18..=18 {
            let x = k as f64 * 0.05;
            let ux = grim_reaper_dx(x).unwrap();
            let uxx = grim_reaper_dxx(x).unwrap();
            let res = FRAC_PI_2 - uxx / (1.0 + ux * ux);
            assert!(res.abs() <= 1e-10, "x = {x}: {res}");
        }
    }

    #[test]
    fn oval_values() {
        let s = -4.0 * 2.0_f64.ln() / (PI * PI);
        let y = angenent_oval_upper(0.0, s).unwrap().unwrap();
        assert!((y - 2.0 / PI * (2.0 + 3.0_f64.sqrt()).ln()).abs() < 1e-12);
        assert!((y - 0.83840).abs() < 1e-5);
        assert_eq!(angenent_oval_upper(0.99, -1e-3).unwrap(), None);
        assert!(angenent_oval_upper(0.0, 0.0).is_err());
        // At the waist the upper branch touches zero.
        let s = -0.7;
        let w = angenent_oval_half_width(s).unwrap();
        let y = angenent_oval_upper(w, s).unwrap().unwrap();
        assert!(y.abs() < 1e-5);
    }

    #[test]
    fn oval_lower_branch_approaches_grim_reaper() {
        let s = -20.0;
        let shift = FRAC_PI_2 * s - 2.0 / PI * 2.0_f64.ln();
        let mut gap = 0.0_f64;
        for k in -90..=90 {
            let x = k as f64 / 100.0;
            let lower = -angenent_oval_upper(x, s).unwrap().unwrap();
            gap = gap.max((lower - grim_reaper(x, 0.0, shift).unwrap()).abs());
        }
        assert!(gap < 1e-6, "gap {gap}");
    }

    #[test]
    fn circle_radius() {
        assert_eq!(shrinking_circle_radius(2.0, 0.0).unwrap(), Some(2.0));
        assert!((shrinking_circle_radius(1.0, 0.375).unwrap().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(shrinking_circle_radius(1.0, 0.5).unwrap(), None);
        assert!(shrinking_circle([0.0, 0.0], 1.0, 0.5, 64).unwrap().is_none());
        let c = shrinking_circle([1.0, 2.0], 1.0, 0.0, 64).unwrap().unwrap();
        assert!(c.vertices().iter().all(|p| ((p[0] - 1.0).hypot(p[1] - 2.0) - 1.0).abs() < 1e-14));
    }

    #[test]
    fn circle_area_decays_linearly() {
        let m = 4096;
        let poly_factor = (m as f64 / (2.0 * PI)) * (2.0 * PI / m as f64).sin();
        for &t in &[0.0, 0.1, 0.3, 0.45] {
            let c = shrinking_circle([0.0, 0.0], 1.0, t, m).unwrap().unwrap();
            let exact = PI * (1.0 - 2.0 * t) * poly_factor;
            assert!((c.signed_area().unwrap() - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_values() {
        assert_eq!(domination_envelope(0.0, 1.0, 0.0).unwrap(), 1.0);
        assert!((domination_envelope(0.0, 0.0, 2.0).unwrap() - PI).abs() < 1e-15);
        // Independent quadrature: substitute x = 1 - w^2 to tame the log
        // singularity at the ends, midpoint rule in w.
        let n = 200_000;
        let mut acc = 0.0;
        for i in 0..n {
            let w = (i as f64 + 0.5) / n as f64;
            let x = 1.0 - w * w;
            acc += domination_envelope(x, 0.0, 0.0).unwrap() * 2.0 * w / n as f64;
        }
        let total = 2.0 * acc;
        assert!((total - 4.0 / PI * 2.0_f64.ln()).abs() < 1e-6, "{total}");
        assert!((total - 0.88254).abs() < 1e-5);
    }

    #[test]
    fn oval_polyline_on_level_set() {
        let p = angenent_oval_polyline(AngenentOvalParams::new(-1.0, 0.5).unwrap(), 256).unwrap();
        let k = (PI * PI / 4.0).exp();
        for v in p.vertices() {
            let f = (FRAC_PI_2 * (v[1] - 0.5)).cosh() - k * (FRAC_PI_2 * v[0]).cos();
            assert!(f.abs() < 1e-9);
        }
        assert!(p.signed_area().unwrap() > 0.0);
        let chords = p.chord_lengths();
        let mean = p.length() / 256.0;
        assert!(chords.iter().all(|c| (c - mean).abs() < 1e-3 * mean));
    }
}
