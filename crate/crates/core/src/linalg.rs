//! Exact integer linear algebra on small square matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

/// Fraction-free (Bareiss) determinant.
pub fn determinant(matrix: &[Vec<BigInt>]) -> BigInt {
    let n = matrix.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: IntMatrix = matrix.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Inverse of a unimodular integer matrix using only unimodular row
/// operations. `None` when the determinant is not `±1`.
pub fn unimodular_inverse(matrix: &[Vec<BigInt>]) -> Option<IntMatrix> {
    let n = matrix.len();
    let mut a: IntMatrix = matrix.to_vec();
    let mut inv: IntMatrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();

    for col in 0..n {
        // Euclid down the column until a single nonzero entry remains.
        loop {
            let pivot = (col..n)
                .filter(|&r| !a[r][col].is_zero())
                .min_by(|&x, &y| a[x][col].abs().cmp(&a[y][col].abs()))?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let mut done = true;
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let q = a[r][col].div_floor(&a[col][col]);
                sub_scaled_row(&mut a, r, col, &q);
                sub_scaled_row(&mut inv, r, col, &q);
                if !a[r][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if !a[col][col].abs().is_one() {
            return None;
        }
        if a[col][col].is_negative() {
            negate_row(&mut a, col);
            negate_row(&mut inv, col);
        }
    }

    for col in (0..n).rev() {
        for r in 0..col {
            if a[r][col].is_zero() {
                continue;
            }
            let q = a[r][col].clone();
            sub_scaled_row(&mut a, r, col, &q);
            sub_scaled_row(&mut inv, r, col, &q);
        }
    }
    Some(inv)
}

fn sub_scaled_row(m: &mut IntMatrix, target: usize, source: usize, q: &BigInt) {
    let src = m[source].clone();
    for (t, s) in m[target].iter_mut().zip(src) {
        *t -= q * s;
    }
}

fn negate_row(m: &mut IntMatrix, row: usize) {
    for x in m[row].iter_mut() {
        *x = -std::mem::take(x);
    }
}

pub fn mat_vec(m: &[Vec<BigInt>], v: &[BigInt]) -> Vec<BigInt> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}
