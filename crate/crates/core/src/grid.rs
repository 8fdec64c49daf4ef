//! Uniform 1-D grids and nodal scalar fields.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Closed interval `[a, b]` with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return domain(format!("invalid interval [{a}, {b}]"));
        }
        Ok(Self { a, b })
    }

    /// Symmetric interval `[-r, r]`.
    pub fn symmetric(r: f64) -> Result<Self> {
        Self::new(-r, r)
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.a >= self.a && other.b <= self.b
    }
}

/// Uniform grid of `n >= 3` nodes on `[left, right]`, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    left: f64,
    right: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(left: f64, right: f64, n: usize) -> Result<Self> {
        if !(left.is_finite() && right.is_finite() && left < right) {
            return domain(format!("grid needs left < right, got [{left}, {right}]"));
        }
        if n < 3 {
            return domain(format!("grid needs at least 3 nodes, got {n}"));
        }
        Ok(Self { left, right, n })
    }

    /// Grid on `iv` whose spacing is as close as possible to `dx` (never coarser).
    pub fn with_spacing(iv: Interval, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return domain("grid spacing must be positive");
        }
        let cells = (iv.len() / dx).ceil().max(2.0) as usize;
        Self::new(iv.a, iv.b, cells + 1)
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        (self.right - self.left) / (self.n - 1) as f64
    }

    pub fn span(&self) -> Interval {
        Interval { a: self.left, b: self.right }
    }

    /// Coordinate of node `i`; the last node is exactly `right`.
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.right
        } else {
            self.left + i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Index of the cell `[x_i, x_{i+1}]` containing `x`, clamped to the grid.
    pub fn cell_of(&self, x: f64) -> usize {
        let s = ((x - self.left) / self.dx()).floor();
        if s <= 0.0 {
            0
        } else {
            (s as usize).min(self.n - 2)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.left && x <= self.right
    }
}

/// Nodal values on a [`Grid1D`]; every value is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return domain(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.n()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return domain(format!("non-finite value at node {i}"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n()).map(|i| f(grid.node(i))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![0.0; grid.n()] }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    /// Pointwise difference `self - other` on a shared grid.
    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        if self.grid != other.grid {
            return domain("fields live on different grids");
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self::new(self.grid, values)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Piecewise-linear interpolation; errors outside the grid.
    pub fn sample_linear(&self, x: f64) -> Result<f64> {
        if !self.grid.contains(x) {
            return domain(format!(
                "x = {x} outside grid [{}, {}]",
                self.grid.left(),
                self.grid.right()
            ));
        }
        Ok(self.interp(x))
    }

    fn interp(&self, x: f64) -> f64 {
        let i = self.grid.cell_of(x);
        let x0 = self.grid.node(i);
        let x1 = self.grid.node(i + 1);
        let s = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        self.values[i] + s * (self.values[i + 1] - self.values[i])
    }

    /// Composite trapezoid of `g(x, u(x))` over `sub`, using the interpolated
    /// values at the ends of `sub` and the grid nodes in between.
    pub fn integrate_with(&self, sub: Interval, g: impl Fn(f64, f64) -> f64) -> Result<f64> {
        if !self.grid.span().contains_interval(&sub) {
            return domain(format!(
                "interval [{}, {}] not inside grid [{}, {}]",
                sub.a,
                sub.b,
                self.grid.left(),
                self.grid.right()
            ));
        }
        let dx = self.grid.dx();
        let first = ((sub.a - self.grid.left()) / dx).floor() as usize + 1;
        let mut x_prev = sub.a;
        let mut g_prev = g(sub.a, self.interp(sub.a));
        let mut acc = 0.0;
        let mut i = first;
        while i < self.grid.n() {
            let x = self.grid.node(i);
            if x >= sub.b {
                break;
            }
            if x > x_prev {
                let gv = g(x, self.values[i]);
                acc += 0.5 * (x - x_prev) * (g_prev + gv);
                x_prev = x;
                g_prev = gv;
            }
            i += 1;
        }
        let gb = g(sub.b, self.interp(sub.b));
        acc += 0.5 * (sub.b - x_prev) * (g_prev + gb);
        Ok(acc)
    }

    /// Signed integral over `sub`.
    pub fn integral(&self, sub: Interval) -> Result<f64> {
        self.integrate_with(sub, |_, u| u)
    }

    /// Signed integral over the whole grid.
    pub fn total_integral(&self) -> f64 {
        let dx = self.grid.dx();
        let n = self.values.len();
        dx * (self.values.iter().sum::<f64>() - 0.5 * (self.values[0] + self.values[n - 1]))
    }

    pub fn l1_norm(&self, sub: Interval) -> Result<f64> {
        self.integrate_with(sub, |_, u| u.abs())
    }

    pub fn lp_norm(&self, p: f64, sub: Interval) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return domain(format!("L^p norm needs finite p >= 1, got {p}"));
        }
        let s = self.integrate_with(sub, |_, u| u.abs().powf(p))?;
        Ok(s.powf(1.0 / p))
    }

    /// Nodes as `(x, u)` pairs restricted to `sub`.
    pub fn restricted(&self, sub: Interval) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.grid.n())
            .map(move |i| (self.grid.node(i), self.values[i]))
            .filter(move |(x, _)| sub.contains(*x))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "u"])?;
        for i in 0..self.grid.n() {
            wr.write_record([fmt17(self.grid.node(i)), fmt17(self.values[i])])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads a CSV with header `x,u`; the nodes must be uniform.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        if header.len() != 2 || &header[0] != "x" || &header[1] != "u" {
            return Err(Error::Validation(format!("expected header x,u, got {header:?}")));
        }
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let x: f64 = parse_num(&rec[0])?;
            let u: f64 = parse_num(&rec[1])?;
            xs.push(x);
            us.push(u);
        }
        if xs.len() < 3 {
            return Err(Error::Validation("field CSV needs at least 3 rows".into()));
        }
        let grid = Grid1D::new(xs[0], xs[xs.len() - 1], xs.len())?;
        let tol = 1e-9 * grid.dx().max(1e-300) + 1e-12 * grid.span().len();
        for (i, &x) in xs.iter().enumerate() {
            if (x - grid.node(i)).abs() > tol.max(1e-6 * grid.dx()) {
                return Err(Error::Validation(format!("nodes are not uniform at row {i}")));
            }
        }
        Self::new(grid, us)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

pub(crate) fn parse_num(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Validation(format!("bad number {s:?}: {e}")))
}

/// Formats with 17 significant digits so values round-trip exactly.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid1D::new(1.0, 0.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
        assert!(Interval::new(0.0, 0.0).is_err());
    }

    #[test]
    fn last_node_is_exact() {
        let g = Grid1D::new(-0.9, 0.9, 801).unwrap();
        assert_eq!(g.node(800), 0.9);
        assert_eq!(g.node(0), -0.9);
    }

    #[test]
    fn hat_l1_norm() {
        let g = Grid1D::new(-1.0, 1.0, 801).unwrap();
        let f = ScalarField::from_fn(g, |x| 1.0 - x.abs()).unwrap();
        let n = f.l1_norm(g.span()).unwrap();
        assert!((n - 1.0).abs() < 1e-6);
    }

    #[test]
    fn odd_function_l1() {
        let g = Grid1D::new(-1.0, 1.0, 801).unwrap();
        let f = ScalarField::from_fn(g, |x| x).unwrap();
        assert!((f.l1_norm(g.span()).unwrap() - 1.0).abs() < 1e-6);
        assert!(f.integral(g.span()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn l1_on_subinterval_between_nodes() {
        let g = Grid1D::new(-1.0, 1.0, 201).unwrap();
        let f = ScalarField::from_fn(g, |_| 2.0).unwrap();
        let v = f.l1_norm(Interval::new(-0.3333, 0.51234).unwrap()).unwrap();
        assert!((v - 2.0 * (0.51234 + 0.3333)).abs() < 1e-12);
    }

    #[test]
    fn lp_with_p_one_matches_l1() {
        let g = Grid1D::new(-1.0, 1.0, 101).unwrap();
        let f = ScalarField::from_fn(g, |x| (3.0 * x).sin()).unwrap();
        let a = f.l1_norm(g.span()).unwrap();
        let b = f.lp_norm(1.0, g.span()).unwrap();
        assert_eq!(a, b);
        assert!(f.lp_norm(0.5, g.span()).is_err());
    }

    #[test]
    fn sample_linear_quadratic() {
        let g = Grid1D::new(-1.0, 1.0, 801).unwrap();
        let f = ScalarField::from_fn(g, |x| x * x).unwrap();
        let v = f.sample_linear(0.1234).unwrap();
        assert!((v - 0.1234 * 0.1234).abs() <= g.dx() * g.dx());
        assert!(f.sample_linear(1.5).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = Grid1D::new(-0.7, 1.3, 37).unwrap();
        let f = ScalarField::from_fn(g, |x| (x * 7.0).exp().sin() / 3.0).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,u\n"));
        let back = ScalarField::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn nonfinite_rejected() {
        let g = Grid1D::new(0.0, 1.0, 3).unwrap();
        assert!(ScalarField::new(g, vec![0.0, f64::NAN, 1.0]).is_err());
        assert!(ScalarField::new(g, vec![0.0, 1.0]).is_err());
    }
}
