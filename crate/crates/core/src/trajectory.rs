//! Time-indexed snapshot sequences.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{domain, Result};
use crate::grid::{Grid1D, ScalarField};
use crate::polyline::Polyline;

/// Free-form run metadata (solver parameters, flags, diagnostics).
pub type RunMeta = BTreeMap<String, Value>;

#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    times: Vec<f64>,
    states: Vec<S>,
    pub meta: RunMeta,
}

pub type FieldTrajectory = Trajectory<ScalarField>;
pub type CurveTrajectory = Trajectory<Polyline>;

impl<S> Trajectory<S> {
    pub fn new(times: Vec<f64>, states: Vec<S>, meta: RunMeta) -> Result<Self> {
        if times.len() != states.len() {
            return domain("times and states differ in length");
        }
        if times.is_empty() {
            return domain("trajectory needs at least one snapshot");
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("snapshot times must be strictly increasing");
        }
        Ok(Self { times, states, meta })
    }

    pub fn empty() -> Self {
        Self { times: Vec::new(), states: Vec::new(), meta: RunMeta::new() }
    }

    pub fn push(&mut self, t: f64, s: S) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return domain(format!("snapshot time {t} not after {last}"));
            }
        }
        self.times.push(t);
        self.states.push(s);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    pub fn last(&self) -> Option<(f64, &S)> {
        self.times.last().map(|&t| (t, self.states.last().unwrap()))
    }

    /// Snapshot whose time is within `tol` of `t`.
    pub fn at(&self, t: f64, tol: f64) -> Option<&S> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .map(|i| &self.states[i])
    }

    /// Index of the snapshot closest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, &s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        best
    }

    pub fn set_meta(&mut self, key: &str, v: impl Into<Value>) {
        self.meta.insert(key.to_string(), v.into());
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta.get(key).and_then(Value::as_f64)
    }
}

impl FieldTrajectory {
    pub fn grid(&self) -> Option<&Grid1D> {
        self.states.first().map(|s| s.grid())
    }

    /// Writes one `x,u` CSV per snapshot plus `<stem>.json` with
    /// `{times, files, meta}`.
    pub fn write_dir(&self, dir: &Path, stem: &str) -> Result<()> {
        write_index(dir, stem, &self.times, &self.meta, self.states.iter(), |s, p| s.save_csv(p))
    }
}

impl CurveTrajectory {
    pub fn write_dir(&self, dir: &Path, stem: &str) -> Result<()> {
        write_index(dir, stem, &self.times, &self.meta, self.states.iter(), |s, p| s.save_csv(p))
    }
}

fn write_index<'a, S: 'a>(
    dir: &Path,
    stem: &str,
    times: &[f64],
    meta: &RunMeta,
    states: impl Iterator<Item = &'a S>,
    save: impl Fn(&S, &Path) -> Result<()>,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for (k, s) in states.enumerate() {
        let name = format!("{stem}_{k:04}.csv");
        save(s, &dir.join(&name))?;
        files.push(name);
    }
    let index = json!({ "times": times, "files": files, "meta": meta });
    std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&index)?)?;
    Ok(())
}
