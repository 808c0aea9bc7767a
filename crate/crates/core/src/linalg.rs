//! Small dense linear algebra on row-major `f64` slices.
//!
//! Everything here operates on matrices of at most a few dozen columns, so
//! the routines favour robustness (full pivoting, Jacobi rotations) over
//! asymptotic speed.

use alloc::vec;
use alloc::vec::Vec;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Scales `v` to unit length and flushes components below `1e-13` to zero.
/// Returns `false` (leaving `v` untouched) for a zero vector.
pub fn normalize(v: &mut [f64]) -> bool {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    for c in v.iter_mut() {
        *c /= n;
        if c.abs() < 1e-13 {
            *c = 0.0;
        }
    }
    let n = norm(v);
    for c in v.iter_mut() {
        *c /= n;
    }
    true
}

/// Eigenvalues of the symmetric `n x n` matrix `a` by cyclic Jacobi
/// rotations, in no particular order.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        let diag: f64 = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum();
        if off <= 1e-30 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

/// Solves `a x = b` for symmetric positive definite `a` by Cholesky.
/// Returns `None` if a pivot is not positive.
pub fn cholesky_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = libm::sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Some(x)
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. `None` when a pivot falls below `tol` times the largest entry.
pub fn solve(a: &[f64], n: usize, b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let (piv, best) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .fold((col, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best <= tol * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            rhs.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in (col + 1)..n {
            let f = m[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = rhs[i];
        for k in (i + 1)..n {
            sum -= m[i * n + k] * x[k];
        }
        x[i] = sum / m[i * n + i];
    }
    Some(x)
}

/// Row echelon reduction with full pivoting. Returns the rank and, for each
/// pivot step, the pivot column, with the reduced matrix left in `m`.
fn reduce(m: &mut [f64], rows: usize, cols: usize, tol: f64) -> (usize, Vec<usize>) {
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut col_order: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    if scale == 0.0 {
        return (0, col_order);
    }
    while rank < rows.min(cols) {
        let mut best = 0.0;
        let mut pr = rank;
        let mut pc = rank;
        for r in rank..rows {
            for c in rank..cols {
                let v = m[r * cols + col_order[c]].abs();
                if v > best {
                    best = v;
                    pr = r;
                    pc = c;
                }
            }
        }
        if best <= tol * scale {
            break;
        }
        if pr != rank {
            for k in 0..cols {
                m.swap(rank * cols + k, pr * cols + k);
            }
        }
        col_order.swap(rank, pc);
        let pcol = col_order[rank];
        let d = m[rank * cols + pcol];
        for r in 0..rows {
            if r == rank {
                continue;
            }
            let f = m[r * cols + pcol] / d;
            if f == 0.0 {
                continue;
            }
            for k in 0..cols {
                m[r * cols + k] -= f * m[rank * cols + k];
            }
        }
        rank += 1;
    }
    (rank, col_order)
}

/// Numerical rank of a `rows x cols` matrix, relative tolerance `tol`.
pub fn rank(m: &[f64], rows: usize, cols: usize, tol: f64) -> usize {
    let mut work = m.to_vec();
    reduce(&mut work, rows, cols, tol).0
}

/// Unit vector spanning the null space of a `rows x cols` matrix whose rank
/// is exactly `cols - 1`; `None` otherwise.
pub fn null_vector(m: &[f64], rows: usize, cols: usize, tol: f64) -> Option<Vec<f64>> {
    let mut work = m.to_vec();
    let (rank, order) = reduce(&mut work, rows, cols, tol);
    if rank + 1 != cols {
        return None;
    }
    // Reduced form: for each pivot row i, pivot column order[i]; free column order[rank].
    let free = order[rank];
    let mut v = vec![0.0; cols];
    v[free] = 1.0;
    for i in 0..rank {
        let pc = order[i];
        v[pc] = -work[i * cols + free] / work[i * cols + pc];
    }
    if normalize(&mut v) {
        Some(v)
    } else {
        None
    }
}

/// Greedily selects row indices forming a maximal linearly independent set,
/// scanning rows in order.
pub fn independent_rows(m: &[f64], rows: usize, cols: usize, tol: f64) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut basis: Vec<f64> = Vec::new();
    for r in 0..rows {
        let row = &m[r * cols..(r + 1) * cols];
        let mut trial = basis.clone();
        trial.extend_from_slice(row);
        if rank(&trial, chosen.len() + 1, cols, tol) == chosen.len() + 1 {
            chosen.push(r);
            basis = trial;
            if chosen.len() == cols {
                break;
            }
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_two_by_two() {
        let mut ev = symmetric_eigenvalues(&[3.0, 2.0, 2.0, 2.0], 2);
        ev.sort_by(f64::total_cmp);
        let disc = libm::sqrt(17.0);
        assert!((ev[0] - (5.0 - disc) / 2.0).abs() < 1e-12);
        assert!((ev[1] - (5.0 + disc) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_matches_hand_solution() {
        let x = cholesky_solve(&[3.0, 2.0, 2.0, 2.0], 2, &[1.0, 1.0]).unwrap();
        assert!((x[0] - 0.0).abs() < 1e-14);
        assert!((x[1] - 0.5).abs() < 1e-14);
        assert!(cholesky_solve(&[1.0, 1.0, 1.0, 1.0], 2, &[1.0, 0.0]).is_none());
    }

    #[test]
    fn null_vector_of_plane_pair() {
        // rows (1,0,0) and (1,0,1): null space spanned by (0,1,0)
        let v = null_vector(&[1.0, 0.0, 0.0, 1.0, 0.0, 1.0], 2, 3, 1e-10).unwrap();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1].abs(), 1.0);
        assert_eq!(v[2], 0.0);
        assert!(null_vector(&[1.0, 0.0, 0.0, 2.0, 0.0, 0.0], 2, 3, 1e-10).is_none());
    }

    #[test]
    fn rank_and_independent_rows() {
        let m = [1.0, 0.0, 2.0, 0.0, 0.0, 1.0];
        assert_eq!(rank(&m, 3, 2, 1e-10), 2);
        assert_eq!(independent_rows(&m, 3, 2, 1e-10), [0, 2]);
    }

    #[test]
    fn solve_permuted_system() {
        let x = solve(&[0.0, 1.0, 2.0, 0.0], 2, &[3.0, 4.0], 1e-12).unwrap();
        assert_eq!(x, [2.0, 3.0]);
    }
}
