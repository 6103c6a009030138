//! Dense complex linear algebra on top of `nalgebra`.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::tensor::DenseTensor;

pub(crate) fn to_matrix(t: &DenseTensor) -> DMatrix<Complex64> {
    let e = t.extents();
    DMatrix::from_row_slice(e[0], e[1], t.data())
}

pub(crate) fn from_matrix(m: &DMatrix<Complex64>) -> DenseTensor {
    let mut data = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            data.push(m[(i, j)]);
        }
    }
    DenseTensor::new(alloc::vec![m.nrows(), m.ncols()], data).expect("shape from matrix")
}

/// Maximum absolute column sum.
pub(crate) fn norm1(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Inverse and 1-norm condition number, `None` when LU finds a zero pivot.
pub(crate) fn inverse_with_condition(m: &DMatrix<Complex64>) -> Option<(DMatrix<Complex64>, f64)> {
    let inv = m.clone().lu().try_inverse()?;
    if !inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return None;
    }
    let cond = norm1(m) * norm1(&inv);
    Some((inv, cond))
}

/// Solves `m x = b` for a single right-hand side.
pub(crate) fn solve(m: DMatrix<Complex64>, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let rhs = nalgebra::DVector::from_column_slice(b);
    let x = m.lu().solve(&rhs)?;
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}
