//! Thomas algorithm for real tridiagonal systems with complex right-hand sides.

use num_complex::Complex64;

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` in place
/// of `rhs`. `lower[0]` and `upper[n-1]` are ignored. Returns the index of a
/// vanishing pivot on breakdown.
pub(crate) fn solve_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [Complex64],
    work: &mut Vec<f64>,
) -> Result<(), usize> {
    let n = diag.len();
    work.clear();
    work.resize(n, 0.0);
    let mut pivot = diag[0];
    if pivot.abs() < f64::MIN_POSITIVE {
        return Err(0);
    }
    rhs[0] /= pivot;
    for i in 1..n {
        work[i] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i] * work[i];
        if pivot.abs() < f64::MIN_POSITIVE || !pivot.is_finite() {
            return Err(i);
        }
        let prev = rhs[i - 1];
        rhs[i] = (rhs[i] - prev * lower[i]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= next * work[i + 1];
    }
    Ok(())
}
