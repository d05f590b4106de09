//! Symmetric tridiagonal LDL^T solver with positive-pivot tracking.

/// Solves A x = b for a symmetric tridiagonal A given by `diag` and the
/// subdiagonal `off` (off[i] couples unknowns i and i+1). Returns the
/// solution and the minimum pivot seen during elimination; a non-positive
/// minimum pivot means the matrix is not positive definite.
pub fn solve_symmetric(diag: &[f64], off: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let n = diag.len();
    debug_assert_eq!(off.len(), n.saturating_sub(1));
    debug_assert_eq!(b.len(), n);
    let mut d = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut min_pivot = f64::INFINITY;

    d[0] = diag[0];
    y[0] = b[0];
    min_pivot = min_pivot.min(d[0]);
    for i in 1..n {
        let l = off[i - 1] / d[i - 1];
        d[i] = diag[i] - l * off[i - 1];
        y[i] = b[i] - l * y[i - 1];
        min_pivot = min_pivot.min(d[i]);
        if d[i] == 0.0 {
            // keep going with a tiny pivot so the caller sees min_pivot <= 0
            d[i] = f64::MIN_POSITIVE;
        }
    }
    let mut x = vec![0.0; n];
    x[n - 1] = y[n - 1] / d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (y[i] - off[i] * x[i + 1]) / d[i];
    }
    (x, min_pivot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        // A = [[2,-1,0],[-1,2,-1],[0,-1,2]], b = [1,0,1] -> x = [1,1,1]
        let (x, p) = solve_symmetric(&[2.0, 2.0, 2.0], &[-1.0, -1.0], &[1.0, 0.0, 1.0]);
        assert!(p > 0.0);
        for xi in x {
            assert!((xi - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn flags_indefinite_matrix() {
        let (_, p) = solve_symmetric(&[1.0, -5.0], &[-1.0], &[1.0, 1.0]);
        assert!(p <= 0.0);
    }
}
