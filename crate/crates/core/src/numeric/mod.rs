//! Small numerical kernels shared by the rest of the crate.

pub mod fd;
pub mod quad;
pub mod roots;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solve `m x = rhs`, failing when `|det m|` does not exceed `det_tol`.
pub fn solve(m: &DMatrix<f64>, rhs: &[f64], det_tol: f64) -> Result<Vec<f64>> {
    let lu = m.clone().lu();
    let det = lu.determinant();
    if !det.is_finite() || det.abs() <= det_tol {
        return Err(Error::DegenerateMassMatrix { det: det.abs() });
    }
    let x = lu
        .solve(&DVector::from_column_slice(rhs))
        .ok_or(Error::DegenerateMassMatrix { det: det.abs() })?;
    Ok(x.iter().copied().collect())
}

/// Max-abs entry of a slice.
pub fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
