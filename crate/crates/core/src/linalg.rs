//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Smallest admissible pivot (squared diagonal of the factor) in Cholesky.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Eigenvalue floor used when forming symmetric matrix powers.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Lower Cholesky factor of a symmetric matrix.
///
/// Fails with the offending `(index, pivot)` if any pivot drops below
/// [`PIVOT_FLOOR`].
pub fn cholesky_lower(m: &DMatrix<f64>) -> Result<DMatrix<f64>, (usize, f64)> {
    let n = m.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d >= PIVOT_FLOOR) {
            return Err((j, d));
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / djj;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the lower factor.
pub fn cholesky_solve(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut y = b.clone();
    for i in 0..n {
        let mut v = y[i];
        for k in 0..i {
            v -= l[(i, k)] * y[k];
        }
        y[i] = v / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in (i + 1)..n {
            v -= l[(k, i)] * y[k];
        }
        y[i] = v / l[(i, i)];
    }
    y
}

/// Inverse of an SPD matrix through its Cholesky factor.
pub fn cholesky_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut inv = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let col = cholesky_solve(l, &DVector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 }));
        inv.set_column(j, &col);
    }
    inv
}

/// `‖M‖_{∞,∞}`: the maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
}

/// Symmetric power `V diag(max(λ, floor)^e) Vᵀ`.
pub fn sym_power(m: &DMatrix<f64>, exponent: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.max(EIGEN_FLOOR).powf(exponent)),
    );
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&d) * v.transpose()
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn columns(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    m.select_columns(cols)
}

pub fn complement(p: usize, set: &[usize]) -> Vec<usize> {
    let mut mask = vec![false; p];
    for &j in set {
        mask[j] = true;
    }
    (0..p).filter(|&j| !mask[j]).collect()
}
