//! Exact phase-one simplex over the rationals for systems `Ax = b, x ≥ 0`.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Outcome of a feasibility run.
#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    /// A nonnegative solution.
    Feasible(Vec<BigRational>),
    /// A Farkas vector `y` with `yᵀA ≤ 0` and `yᵀb > 0`.
    Infeasible(Vec<BigRational>),
}

fn q(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

/// Checks `Ax = b` and `x ≥ 0` exactly.
pub fn is_solution(a: &[Vec<i64>], b: &[i64], x: &[BigRational]) -> bool {
    x.iter().all(|v| !v.is_negative())
        && a.iter().zip(b).all(|(row, &bi)| {
            row.iter()
                .zip(x)
                .filter(|(c, _)| **c != 0)
                .fold(BigRational::zero(), |acc, (&c, v)| acc + q(c) * v)
                == q(bi)
        })
}

/// Checks `yᵀA ≤ 0` and `yᵀb > 0` exactly.
pub fn is_farkas(a: &[Vec<i64>], b: &[i64], y: &[BigRational]) -> bool {
    if a.len() != y.len() {
        return false;
    }
    let cols = a.first().map_or(0, Vec::len);
    let column_ok = (0..cols).all(|j| {
        let s = a
            .iter()
            .zip(y)
            .filter(|(row, _)| row[j] != 0)
            .fold(BigRational::zero(), |acc, (row, yi)| acc + q(row[j]) * yi);
        !s.is_positive()
    });
    let rhs = b
        .iter()
        .zip(y)
        .fold(BigRational::zero(), |acc, (&bi, yi)| acc + q(bi) * yi);
    column_ok && rhs.is_positive()
}

/// Decides feasibility of `Ax = b, x ≥ 0` with Bland's rule, so the run is
/// finite and deterministic. Every row of `a` must have the same length.
pub fn feasibility(a: &[Vec<i64>], b: &[i64]) -> Feasibility {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m + 1;
    let rhs = width - 1;
    let sign: Vec<i64> = b.iter().map(|&v| if v < 0 { -1 } else { 1 }).collect();
    let mut t: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut row = vec![BigRational::zero(); width];
            for j in 0..n {
                if a[i][j] != 0 {
                    row[j] = q(sign[i] * a[i][j]);
                }
            }
            row[n + i] = BigRational::one();
            row[rhs] = q(sign[i] * b[i]);
            row
        })
        .collect();
    // reduced costs of the phase-one objective, last entry is minus its value
    let mut z = vec![BigRational::zero(); width];
    for row in &t {
        for j in 0..n {
            if !row[j].is_zero() {
                z[j] -= &row[j];
            }
        }
        z[rhs] -= &row[rhs];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    while let Some(enter) = (0..n + m).find(|&j| z[j].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][rhs] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((k, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // the phase-one objective is bounded below by zero
        let (r, _) = leave.expect("phase one is bounded");
        let pivot = t[r][enter].clone();
        for v in t[r].iter_mut() {
            if !v.is_zero() {
                *v /= &pivot;
            }
        }
        let prow = t[r].clone();
        let nz: Vec<usize> = (0..width).filter(|&j| !prow[j].is_zero()).collect();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for &j in &nz {
                row[j] -= &f * &prow[j];
            }
        }
        if !z[enter].is_zero() {
            let f = z[enter].clone();
            for &j in &nz {
                z[j] -= &f * &prow[j];
            }
        }
        basis[r] = enter;
    }
    if z[rhs].is_zero() {
        let mut x = vec![BigRational::zero(); n];
        for (i, &bv) in basis.iter().enumerate() {
            if bv < n {
                x[bv] = t[i][rhs].clone();
            }
        }
        Feasibility::Feasible(x)
    } else {
        let y = (0..m)
            .map(|i| (BigRational::one() - &z[n + i]) * q(sign[i]))
            .collect();
        Feasibility::Infeasible(y)
    }
}
