//! Residual reports and scalar-factor estimation shared by every checker.

use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;
use thiserror::Error;

use crate::tensor::{max_abs_diff, DenseTensor, TensorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalarError {
    #[error("right-hand side vanishes identically while the left-hand side does not")]
    ZeroRhs,
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Outcome of one equation check.
///
/// `relative` is `max_abs` divided by the largest modulus on the side that
/// carries no scalar factor (0/0 counts as 0). `pass` compares `relative`
/// against the tolerance the check was run with.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub equation: String,
    pub max_abs: f64,
    pub relative: f64,
    pub scalar_r: Option<Complex64>,
    pub scalar_rbar: Option<Complex64>,
    pub worst_index: Vec<usize>,
    pub tol: f64,
    pub pass: bool,
}

impl ResidualReport {
    /// Report for `lhs - scale * rhs`.
    pub fn from_sides(
        equation: &str,
        lhs: &DenseTensor,
        rhs: &DenseTensor,
        scale: Complex64,
        tol: f64,
    ) -> Result<Self, TensorError> {
        if lhs.extents() != rhs.extents() {
            return Err(TensorError::ExtentMismatch { left: lhs.extents().to_vec(), right: rhs.extents().to_vec() });
        }
        let mut max_abs = 0.0;
        let mut worst = 0;
        for (k, (a, b)) in lhs.data().iter().zip(rhs.data()).enumerate() {
            let d = (a - scale * b).norm();
            if d > max_abs || d.is_nan() {
                max_abs = d;
                worst = k;
            }
        }
        let (norm, _) = lhs.max_abs();
        Ok(Self::from_parts(equation, max_abs, norm, lhs.unravel(worst), tol))
    }

    /// Report from a precomputed absolute residual and normalising magnitude.
    pub fn from_parts(equation: &str, max_abs: f64, norm: f64, worst_index: Vec<usize>, tol: f64) -> Self {
        let relative = if max_abs == 0.0 { 0.0 } else { max_abs / norm };
        Self {
            equation: String::from(equation),
            max_abs,
            relative,
            scalar_r: None,
            scalar_rbar: None,
            worst_index,
            tol,
            // NaN never passes
            pass: relative <= tol,
        }
    }

    pub fn with_r(mut self, r: Complex64) -> Self {
        self.scalar_r = Some(r);
        self
    }

    pub fn with_rbar(mut self, r: Complex64) -> Self {
        self.scalar_rbar = Some(r);
        self
    }
}

/// Estimates `s` with `lhs ≈ s * rhs` from the largest-modulus entry of `rhs`
/// and returns `(s, max |lhs - s * rhs|)`. Two all-zero sides give `(1, 0)`.
pub fn estimate_scalar_factor(lhs: &DenseTensor, rhs: &DenseTensor) -> Result<(Complex64, f64), ScalarError> {
    if lhs.extents() != rhs.extents() {
        return Err(TensorError::ExtentMismatch { left: lhs.extents().to_vec(), right: rhs.extents().to_vec() }.into());
    }
    let (rmax, at) = rhs.max_abs();
    if rmax == 0.0 {
        let (lmax, _) = lhs.max_abs();
        if lmax == 0.0 {
            return Ok((Complex64::new(1.0, 0.0), 0.0));
        }
        return Err(ScalarError::ZeroRhs);
    }
    let s = lhs.get(&at) / rhs.get(&at);
    let residual = max_abs_diff(lhs, &rhs.scaled(s))?;
    Ok((s, residual))
}
