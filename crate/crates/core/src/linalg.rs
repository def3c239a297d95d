//! Dense Gaussian elimination with partial pivoting, for the few-dozen-state
//! systems the Markov model produces.

use crate::error::{Error, Result};

/// Solves `a x = b` in place. `a` is row-major `n x n`.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n * n {
        return Err(Error::Numerical(format!(
            "matrix has {} entries, expected {}",
            a.len(),
            n * n
        )));
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .expect("non-empty range");
        if a[pivot * n + col].abs() <= scale * 1e-14 {
            return Err(Error::Numerical(format!("singular system at column {col}")));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let p = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for k in col + 1..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row * n + k] * b[k]).sum();
        b[row] = (b[row] - tail) / a[row * n + row];
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        // First pivot is zero; needs a row swap.
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let x_true = [1.0, -2.0, 3.0];
        let b: Vec<f64> = (0..3).map(|r| (0..3).map(|c| a[r * 3 + c] * x_true[c]).sum()).collect();
        let x = solve_dense(a, b).unwrap();
        for (got, want) in x.iter().zip(x_true) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(matches!(solve_dense(a, vec![1.0, 2.0]), Err(Error::Numerical(_))));
    }
}
