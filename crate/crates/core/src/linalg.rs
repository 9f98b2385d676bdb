//! Small dense helpers on top of nalgebra's SVD.

use nalgebra::DMatrix;

/// Largest singular value of a dense `rows x cols` row-major matrix.
pub fn spectral_norm(rows: usize, cols: usize, data: &[f64]) -> f64 {
    debug_assert_eq!(data.len(), rows * cols);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    if rows == 1 || cols == 1 {
        return euclidean(data);
    }
    let scale = max_abs(data);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let m = DMatrix::from_row_slice(rows, cols, data) / scale;
    scale * m.singular_values().iter().fold(0.0, |a: f64, &s| a.max(s))
}

/// Largest absolute entry.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// Euclidean norm, rescaled so tiny or huge entries neither underflow nor
/// overflow when squared.
pub fn euclidean(v: &[f64]) -> f64 {
    let scale = max_abs(v);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * v.iter().map(|x| (x / scale) * (x / scale)).sum::<f64>().sqrt()
}

/// Orthonormal basis of the numerical kernel of `a`, ordered by increasing
/// singular value.
///
/// A right singular vector is accepted when its singular value is at most
/// `rel_tol` times the largest one. The matrix is padded with zero rows to a
/// square so that the full set of right singular vectors is available even
/// when `a` is wide.
pub fn kernel_basis(a: &DMatrix<f64>, rel_tol: f64) -> Vec<Vec<f64>> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Vec::new();
    }
    let size = rows.max(cols);
    let mut padded = DMatrix::<f64>::zeros(size, cols);
    padded.view_mut((0, 0), (rows, cols)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let largest = sigma.iter().fold(0.0, |m: f64, &s| m.max(s));
    let threshold = rel_tol * largest.max(f64::MIN_POSITIVE);

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[i].total_cmp(&sigma[j]).then(i.cmp(&j)));
    order
        .into_iter()
        .filter(|&i| sigma[i] <= threshold)
        .map(|i| v_t.row(i).iter().copied().collect())
        .collect()
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn least_squares(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Some(vec![0.0; cols]);
    }
    let svd = a.clone().svd(true, true);
    let rhs = nalgebra::DVector::from_column_slice(b);
    let largest = svd.singular_values.iter().fold(0.0, |m: f64, &s| m.max(s));
    let eps = 1e-13 * largest.max(f64::MIN_POSITIVE);
    svd.solve(&rhs, eps).ok().map(|x| x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_identity_and_row() {
        assert!((spectral_norm(2, 2, &[1.0, 0.0, 0.0, 1.0]) - 1.0).abs() < 1e-14);
        assert!((spectral_norm(1, 4, &[0.0, 1.0, 1.0, 0.0]) - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(spectral_norm(2, 2, &[0.0; 4]), 0.0);
        // diag(3, -5)
        assert!((spectral_norm(2, 2, &[3.0, 0.0, 0.0, -5.0]) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 2.0, 3.0]);
        let kernel = kernel_basis(&a, 1e-10);
        assert_eq!(kernel.len(), 2);
        for v in &kernel {
            let image = &a * nalgebra::DVector::from_column_slice(v);
            assert!(image.amax() < 1e-12);
            assert!((euclidean(v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn least_squares_square_system() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let x = least_squares(&a, &[2.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 0.5).abs() < 1e-14);
    }
}
