//! Small dense complex linear solves (coefficient extraction needs 1x1 to 3x3).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solve A x = b by Gaussian elimination with partial pivoting.
pub fn solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.len();
    if n == 0 || b.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::Solver("solve needs a square system".into()));
    }
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let (piv, piv_norm) = (col..n)
            .map(|r| (r, m[r][col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if piv_norm == 0.0 {
            return Err(Error::Solver(format!("singular system at column {col}")));
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            #[allow(clippy::needless_range_loop)]
            for cc in col..n {
                let upper = m[col][cc];
                m[r][cc] -= factor * upper;
            }
            let upper = rhs[col];
            rhs[r] -= factor * upper;
        }
    }
    let mut x = vec![Complex64::default(); n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for cc in r + 1..n {
            acc -= m[r][cc] * x[cc];
        }
        x[r] = acc / m[r][r];
    }
    Ok(x)
}

/// Infinity-norm condition estimate ||A|| * ||A^{-1}||, via explicit columns
/// of the inverse. Returns infinity for singular systems.
pub fn cond_inf(a: &[Vec<Complex64>]) -> f64 {
    let n = a.len();
    let norm_a = a
        .iter()
        .map(|row| row.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let mut inv_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![Complex64::default(); n];
        e[j] = Complex64::ONE;
        match solve(a, &e) {
            Ok(col) => inv_cols.push(col),
            Err(_) => return f64::INFINITY,
        }
    }
    let norm_inv = (0..n)
        .map(|r| (0..n).map(|j| inv_cols[j][r].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    norm_a * norm_inv
}
