//! Small shared linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns,
/// ordered to match the eigenvalues.
pub fn eigh(matrix: &DMatrix<Complex64>) -> (DVector<f64>, DMatrix<Complex64>) {
    let eig = matrix.clone().symmetric_eigen();
    sort_eigen(eig.eigenvalues, eig.eigenvectors)
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn eigh_real(matrix: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = matrix.clone().symmetric_eigen();
    sort_eigen(eig.eigenvalues, eig.eigenvectors)
}

fn sort_eigen<T: nalgebra::Scalar + Copy + num_traits::Zero>(
    values: DVector<f64>,
    vectors: DMatrix<T>,
) -> (DVector<f64>, DMatrix<T>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = DVector::from_fn(n, |i, _| values[order[i]]);
    let mut sorted_vectors = DMatrix::zeros_generic(
        nalgebra::Dyn(vectors.nrows()),
        nalgebra::Dyn(n),
    );
    for (dst, &src) in order.iter().enumerate() {
        sorted_vectors.set_column(dst, &vectors.column(src));
    }
    (sorted_values, sorted_vectors)
}

/// Compensated (Kahan) summation over an iterator of f64 terms.
///
/// Used wherever a reproducible, order-fixed reduction is required.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    // Neumaier variant: compensates even when a term exceeds the running sum.
    let mut sum = 0.0;
    let mut carry = 0.0;
    for t in terms {
        let v = sum + t;
        if sum.abs() >= t.abs() {
            carry += (sum - v) + t;
        } else {
            carry += (t - v) + sum;
        }
        sum = v;
    }
    sum + carry
}

/// Max absolute entry difference between two complex matrices.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
