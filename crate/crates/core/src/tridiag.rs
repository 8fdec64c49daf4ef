//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n-1]` are ignored. Requires (weak) diagonal dominance,
/// which is checked up front; a vanishing pivot is reported as an internal error.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::Internal("tridiagonal bands differ in length".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    for i in 0..n {
        let off = if i > 0 { lower[i].abs() } else { 0.0 } + if i + 1 < n { upper[i].abs() } else { 0.0 };
        if !(diag[i].abs() >= off * (1.0 - 1e-14)) {
            return Err(Error::Internal(format!("tridiagonal system not diagonally dominant at row {i}")));
        }
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::Internal("zero pivot in tridiagonal solve".into()));
    }
    c[0] = if n > 1 { upper[0] / pivot } else { 0.0 };
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Internal(format!("zero pivot in tridiagonal solve at row {i}")));
        }
        c[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1 0 1] has x = [1 1 1]
        let x = solve_tridiagonal(&[0.0, -1.0, -1.0], &[2.0; 3], &[-1.0, -1.0, 0.0], &[1.0, 0.0, 1.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_dominant() {
        assert!(solve_tridiagonal(&[0.0, 3.0], &[1.0, 1.0], &[3.0, 0.0], &[1.0, 1.0]).is_err());
    }
}
