//! Dense square linear solves.

use crate::numeric::{Scalar, Tol};

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
///
/// With exact rationals the pivot choice does not affect the result; with
/// `f64` it picks the largest-magnitude entry in the column. Returns `None`
/// when the matrix is singular (a pivot column is zero within `tol`).
pub fn solve_square<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>, tol: &Tol<S>) -> Option<Vec<S>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].magnitude() > a[pivot][col].magnitude() {
                pivot = row;
            }
        }
        if tol.is_zero(&a[pivot][col]) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for row in col + 1..n {
            if a[row][col] == S::zero() {
                continue;
            }
            let factor = a[row][col].clone() / p.clone();
            for k in col..n {
                let delta = factor.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - delta;
            }
            b[row] = b[row].clone() - factor * b[col].clone();
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Some(x)
}
