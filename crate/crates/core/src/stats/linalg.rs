//! Small dense routines for symmetric positive-definite matrices.
//! Matrices are square, row-major `Vec<f64>` of length `n * n`.

/// Lower-triangular Cholesky factor, or `None` if the matrix is not
/// numerically positive definite.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let row_j = j * n;
        let mut d = a[row_j + j];
        for k in 0..j {
            d -= l[row_j + k] * l[row_j + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[row_j + j] = d;
        for i in j + 1..n {
            let row_i = i * n;
            let mut s = a[row_i + j];
            for k in 0..j {
                s -= l[row_i + k] * l[row_j + k];
            }
            l[row_i + j] = s / d;
        }
    }
    Some(l)
}

/// Solves `L x = b` in place for lower-triangular `L`.
pub fn forward_substitute(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        let s: f64 = row.iter().zip(&b[..i]).map(|(a, x)| a * x).sum();
        b[i] = (b[i] - s) / l[i * n + i];
    }
}

/// `ln det A` from its Cholesky factor.
pub fn log_det_from_cholesky(l: &[f64], n: usize) -> f64 {
    2.0 * (0..n).map(|i| l[i * n + i].ln()).sum::<f64>()
}

/// `tr(A^-1 B)` given Cholesky factors of `A` and `B`: `||L_A^-1 L_B||_F^2`.
pub fn trace_inv_product(l_a: &[f64], l_b: &[f64], n: usize) -> f64 {
    let mut total = 0.0;
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = l_b[i * n + j];
        }
        // Column j of L_B is zero above row j, so the solution is too.
        for v in col[..j].iter_mut() {
            *v = 0.0;
        }
        forward_substitute(l_a, n, &mut col);
        total += col[j..].iter().map(|v| v * v).sum::<f64>();
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reconstructs() {
        let a = [4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0];
        let l = cholesky(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i * 3 + k] * l[j * 3 + k]).sum();
                assert!((v - a[i * 3 + j]).abs() < 1e-12);
            }
        }
        let det = 4.0 * (5.0 * 3.0 - 1.0) - 2.0 * (2.0 * 3.0 - 0.4) + 0.4 * (2.0 - 5.0 * 0.4);
        assert!((log_det_from_cholesky(&l, 3) - f64::ln(det)).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite() {
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
        assert!(cholesky(&[0.0, 0.0, 0.0, 0.0], 2).is_none());
    }

    #[test]
    fn trace_of_identity_product() {
        let a = [2.0, 0.5, 0.5, 1.0];
        let l = cholesky(&a, 2).unwrap();
        assert!((trace_inv_product(&l, &l, 2) - 2.0).abs() < 1e-12);
    }
}
