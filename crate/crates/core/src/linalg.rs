//! Exact Gaussian elimination over rationals.

use num_traits::{One, Zero};

use crate::model::Rational;

/// Solves the square system `a · x = b`. Returns `None` when `a` is singular.
pub fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n), "system must be square");
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Rational::one() / &a[col][col];
        for k in col..n {
            a[col][k] *= &inv;
        }
        b[col] *= &inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for k in col..n {
                if !a[col][k].is_zero() {
                    let d = &f * &a[col][k];
                    a[r][k] -= d;
                }
            }
            let d = &f * &b[col];
            b[r] -= d;
        }
    }
    Some(b)
}
