//! Open or closed planar polylines.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{fmt17, parse_num};

pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point>,
    closed: bool,
}

impl Polyline {
    /// Builds a polyline; consecutive vertices must be distinct and a closed
    /// one must not repeat its first vertex at the end.
    pub fn new(vertices: Vec<Point>, closed: bool) -> Result<Self> {
        let min = if closed { 3 } else { 2 };
        if vertices.len() < min {
            return Err(Error::Degenerate(format!(
                "polyline needs at least {min} vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::Degenerate("non-finite vertex".into()));
        }
        let n = vertices.len();
        let last = if closed { n } else { n - 1 };
        for i in 0..last {
            let j = (i + 1) % n;
            if vertices[i] == vertices[j] {
                return Err(Error::Degenerate(format!("repeated vertex at index {i}")));
            }
        }
        Ok(Self { vertices, closed })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point> {
        self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    pub fn segment(&self, k: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[k], self.vertices[(k + 1) % n])
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..self.segment_count()).map(move |k| self.segment(k))
    }

    pub fn chord_lengths(&self) -> Vec<f64> {
        self.segments().map(|(a, b)| dist(a, b)).collect()
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| dist(a, b)).sum()
    }

    pub fn min_chord(&self) -> f64 {
        self.segments().map(|(a, b)| dist(a, b)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_chord(&self) -> f64 {
        self.segments().map(|(a, b)| dist(a, b)).fold(0.0, f64::max)
    }

    /// Signed shoelace area (positive for counter-clockwise); closed only.
    pub fn signed_area(&self) -> Result<f64> {
        if !self.closed {
            return Err(Error::Domain("area of an open polyline".into()));
        }
        let s: f64 = self.segments().map(|(a, b)| a[0] * b[1] - b[0] * a[1]).sum();
        Ok(0.5 * s)
    }

    pub fn centroid_of_vertices(&self) -> Point {
        let n = self.vertices.len() as f64;
        let (sx, sy) = self.vertices.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        [sx / n, sy / n]
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| [p[0] + dx, p[1] + dy]).collect(),
            closed: self.closed,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "y"])?;
        for p in &self.vertices {
            wr.write_record([fmt17(p[0]), fmt17(p[1])])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv<R: Read>(r: R, closed: bool) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        if header.len() != 2 || &header[0] != "x" || &header[1] != "y" {
            return Err(Error::Validation(format!("expected header x,y, got {header:?}")));
        }
        let mut v = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            v.push([parse_num(&rec[0])?, parse_num(&rec[1])?]);
        }
        Self::new(v, closed)
    }
}

pub fn dist(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let l2 = ex * ex + ey * ey;
    let s = if l2 > 0.0 {
        (((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(p, [a[0] + s * ex, a[1] + s * ey])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_area_and_length() {
        let sq = Polyline::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], true).unwrap();
        assert_eq!(sq.length(), 4.0);
        assert_eq!(sq.signed_area().unwrap(), 1.0);
        let open = Polyline::new(sq.vertices().to_vec(), false).unwrap();
        assert_eq!(open.length(), 3.0);
        assert!(open.signed_area().is_err());
    }

    #[test]
    fn repeated_vertices_rejected() {
        assert!(Polyline::new(vec![[0.0, 0.0], [0.0, 0.0]], false).is_err());
        assert!(Polyline::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]], true).is_err());
    }

    #[test]
    fn segment_distance() {
        assert_eq!(point_segment_distance([0.5, 2.0], [0.0, 0.0], [1.0, 0.0]), 2.0);
        assert_eq!(point_segment_distance([3.0, 4.0], [0.0, 0.0], [0.0, 0.0]), 5.0);
    }

    #[test]
    fn csv_round_trip() {
        let p = Polyline::new(vec![[0.1, 0.2], [0.3, -0.4], [1.0 / 3.0, 2.0]], false).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let q = Polyline::read_csv(buf.as_slice(), false).unwrap();
        assert_eq!(p, q);
    }
}
