use super::{Matrix, Vector};
use crate::error::{Error, Result};

/// Pivots smaller than this fraction of the largest row sum are treated as zero.
const PIVOT_RATIO: f64 = 1e-14;

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn linear_solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "linear_solve needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, expected {}",
            b.len(),
            n
        )));
    }

    let row_norm = (0..n)
        .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let threshold = PIVOT_RATIO * row_norm;

    let mut m = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, m[(r, col)]))
            .max_by(|l, r| l.1.abs().total_cmp(&r.1.abs()))
            .expect("non-empty pivot range");
        if !(pivot.abs() > threshold) {
            return Err(Error::SingularMatrix {
                pivot: pivot.abs(),
                threshold,
            });
        }
        if pivot_row != col {
            m.swap_rows(pivot_row, col);
            x.swap_rows(pivot_row, col);
        }
        for r in col + 1..n {
            let factor = m[(r, col)] / m[(col, col)];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                m[(r, c)] -= factor * m[(col, c)];
            }
            x[r] -= factor * x[col];
        }
    }
    for row in (0..n).rev() {
        let mut acc = x[row];
        for c in row + 1..n {
            acc -= m[(row, c)] * x[c];
        }
        x[row] = acc / m[(row, row)];
    }
    Ok(x)
}

/// Central-difference Jacobian of `f` at `x`.
///
/// Entry `(i, j)` is `(f_i(x + eps e_j) - f_i(x - eps e_j)) / (2 eps)`.
pub fn fd_jacobian<F>(f: F, x: &Vector, eps: f64) -> Result<Matrix>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {eps}"
        )));
    }
    let n = x.len();
    let mut columns: Vec<Vector> = Vec::with_capacity(n);
    let mut probe = x.clone();
    for j in 0..n {
        probe[j] = x[j] + eps;
        let plus = f(&probe)?;
        probe[j] = x[j] - eps;
        let minus = f(&probe)?;
        probe[j] = x[j];
        if plus.len() != minus.len() {
            return Err(Error::DimensionMismatch(
                "function output length changed between evaluations".into(),
            ));
        }
        columns.push((plus - minus) / (2.0 * eps));
    }
    let rows = match columns.first() {
        Some(c) => c.len(),
        None => f(x)?.len(),
    };
    let mut jac = Matrix::zeros(rows, n);
    for (j, col) in columns.iter().enumerate() {
        if col.len() != rows {
            return Err(Error::DimensionMismatch(
                "function output length changed between evaluations".into(),
            ));
        }
        jac.set_column(j, col);
    }
    Ok(jac)
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Orthonormal basis (as columns) of the null space of `m`.
///
/// Singular values at or below `threshold` count as zero. A matrix with no
/// rows has the whole space as its kernel.
pub fn null_space(m: &Matrix, threshold: f64) -> Matrix {
    let n = m.ncols();
    if m.nrows() == 0 {
        return Matrix::identity(n, n);
    }
    // Pad to at least n rows so the SVD exposes all n right singular vectors.
    let padded = if m.nrows() < n {
        let mut p = Matrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let kernel: Vec<Vector> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= threshold)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    let mut basis = Matrix::zeros(n, kernel.len());
    for (j, v) in kernel.iter().enumerate() {
        basis.set_column(j, v);
    }
    basis
}
