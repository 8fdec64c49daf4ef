//! The smooth compactly supported bump `exp(-1/(1-x^2))` and fields built from it.

use std::sync::OnceLock;

use crate::error::{domain, Result};
use crate::grid::{Grid1D, ScalarField};

/// Unnormalized bump, zero outside `(-1, 1)`.
pub fn bump(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// `int_{-1}^{1} bump`, by the trapezoid rule on a fine grid (spectrally
/// accurate for this flat-ended integrand).
pub fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let n = 200_000;
        let h = 2.0 / n as f64;
        (1..n).map(|i| bump(-1.0 + i as f64 * h)).sum::<f64>() * h
    })
}

/// Unit-mass bump `psi` supported on `(-1, 1)`.
pub fn unit_bump(x: f64) -> f64 {
    bump(x) / bump_mass()
}

/// `mass * n * psi(n (x - center))` on `grid`, rescaled so its trapezoid
/// integral is exactly `mass`.
pub fn spike_field(grid: Grid1D, n: f64, mass: f64, center: f64) -> Result<ScalarField> {
    if !(n > 0.0) {
        return domain("spike scale must be positive");
    }
    let half = 1.0 / n;
    if center - half < grid.left() || center + half > grid.right() {
        return domain("spike support leaves the grid");
    }
    let raw = ScalarField::from_fn(grid, |x| n * unit_bump(n * (x - center)))?;
    let m = raw.total_integral();
    if !(m > 0.0) {
        return domain("spike is not resolved by the grid");
    }
    raw.scaled(mass / m)
}
