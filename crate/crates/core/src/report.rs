//! Pass/fail reports produced by every inequality check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The check could not be evaluated (e.g. no snapshot in the window).
    Inconclusive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub t: f64,
}

/// Outcome of a numerical inequality check. `margin` is `bound - observed`
/// at the worst point, so a negative margin is a violation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub passed: bool,
    pub status: CheckStatus,
    pub margin: f64,
    pub witness: Witness,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl EstimateReport {
    /// Passes when `margin >= -tol`.
    pub fn from_margin(name: impl Into<String>, margin: f64, witness: Witness, tol: f64) -> Self {
        let passed = margin.is_finite() && margin >= -tol;
        let mut tolerances = BTreeMap::new();
        tolerances.insert("tol".to_string(), tol);
        Self {
            name: name.into(),
            passed,
            status: if passed { CheckStatus::Pass } else { CheckStatus::Fail },
            margin,
            witness,
            tolerances,
            details: BTreeMap::new(),
            note: None,
        }
    }

    pub fn inconclusive(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: false,
            status: CheckStatus::Inconclusive,
            margin: f64::NAN,
            witness: Witness::default(),
            tolerances: BTreeMap::new(),
            details: BTreeMap::new(),
            note: Some(reason.into()),
        }
    }

    pub fn with_detail(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }

    pub fn with_tolerance(mut self, key: &str, v: f64) -> Self {
        self.tolerances.insert(key.to_string(), v);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn tol(&self) -> f64 {
        self.tolerances.get("tol").copied().unwrap_or(0.0)
    }
}

/// Tracks the worst margin seen over a sweep of points.
#[derive(Clone, Copy, Debug)]
pub struct WorstMargin {
    pub margin: f64,
    pub witness: Witness,
}

impl Default for WorstMargin {
    fn default() -> Self {
        Self { margin: f64::INFINITY, witness: Witness::default() }
    }
}

impl WorstMargin {
    pub fn update(&mut self, margin: f64, x: f64, t: f64) {
        if margin < self.margin || margin.is_nan() {
            self.margin = margin;
            self.witness = Witness { x, t };
        }
    }

    pub fn report(&self, name: impl Into<String>, tol: f64) -> EstimateReport {
        EstimateReport::from_margin(name, self.margin, self.witness, tol)
    }
}

/// Default tolerance for grid-based checks: `max(1e-6, 10 (dx + dt)(1 + sup|u|))`.
pub fn scheme_tolerance(dx: f64, dt: f64, sup_abs: f64) -> f64 {
    (10.0 * (dx + dt) * (1.0 + sup_abs)).max(1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_sign_decides() {
        assert!(EstimateReport::from_margin("a", -1e-9, Witness::default(), 1e-8).passed);
        assert!(!EstimateReport::from_margin("a", -1e-7, Witness::default(), 1e-8).passed);
        assert!(!EstimateReport::from_margin("a", f64::NAN, Witness::default(), 1.0).passed);
    }

    #[test]
    fn worst_margin_keeps_minimum() {
        let mut w = WorstMargin::default();
        w.update(0.3, 1.0, 0.1);
        w.update(-0.2, 2.0, 0.2);
        w.update(0.1, 3.0, 0.3);
        assert_eq!(w.margin, -0.2);
        assert_eq!(w.witness, Witness { x: 2.0, t: 0.2 });
    }

    #[test]
    fn json_shape() {
        let r = EstimateReport::from_margin("h", 0.5, Witness { x: 0.1, t: 0.2 }, 1e-6);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["name"], "h");
        assert_eq!(v["passed"], true);
        assert_eq!(v["witness"]["t"], 0.2);
        assert_eq!(v["tolerances"]["tol"], 1e-6);
    }

    #[test]
    fn tolerance_floor() {
        assert_eq!(scheme_tolerance(1e-12, 0.0, 0.0), 1e-6);
        assert!((scheme_tolerance(0.01, 0.01, 1.0) - 0.4).abs() < 1e-15);
    }
}
