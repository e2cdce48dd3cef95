//! Small dense matrix helpers.
//!
//! The laboratory works in dimensions a handful wide, so everything here is
//! a straightforward O(n^3) routine on row-major `Vec<Vec<f64>>` data:
//! rank by Gaussian elimination, inversion with partial pivoting, largest
//! singular value via the symmetric eigenproblem, and a cyclic Jacobi
//! eigensolver that also serves the classical-scaling start in the
//! embedding module.

/// Rank of a `rows x dim` matrix with a relative pivot tolerance.
pub fn rank(rows: &[Vec<f64>], dim: usize) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = 1e-10 * scale;
    let mut rank = 0;
    for col in 0..dim {
        // Find the largest pivot in this column at or below `rank`.
        let pivot = (rank..m.len())
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()));
        let Some(p) = pivot else { break };
        if m[p][col].abs() <= tol {
            continue;
        }
        m.swap(rank, p);
        for r in (rank + 1)..m.len() {
            let factor = m[r][col] / m[rank][col];
            for c in col..dim {
                m[r][c] -= factor * m[rank][c];
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Matrix-vector product for a row-major `out x in` matrix.
pub fn mat_vec(matrix: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    matrix
        .iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Determinant by LU decomposition with partial pivoting (square input).
pub fn det(matrix: &[Vec<f64>]) -> f64 {
    let n = matrix.len();
    let mut m: Vec<Vec<f64>> = matrix.to_vec();
    let mut sign = 1.0;
    let mut result = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("square matrix");
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            sign = -sign;
        }
        result *= m[col][col];
        for r in (col + 1)..n {
            let factor = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= factor * m[col][c];
            }
        }
    }
    sign * result
}

/// Inverse by Gauss–Jordan elimination; `None` for (numerically) singular
/// input.
pub fn invert(matrix: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = matrix.len();
    let mut m: Vec<Vec<f64>> = matrix.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale = matrix
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let tol = 1e-13 * scale;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("square matrix");
        if m[pivot][col].abs() <= tol {
            return None;
        }
        m.swap(pivot, col);
        inv.swap(pivot, col);
        let diag = m[col][col];
        for c in 0..n {
            m[col][c] /= diag;
            inv[col][c] /= diag;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r][col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..n {
                m[r][c] -= factor * m[col][c];
                inv[r][c] -= factor * inv[col][c];
            }
        }
    }
    Some(inv)
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by decreasing eigenvalue;
/// eigenvector `k` is column `k` of the returned matrix (stored row-major:
/// `vectors[i][k]` is component `i` of eigenvector `k`).
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(1e-300);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[i][j].abs());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a_idx, &b_idx| a[b_idx][b_idx].total_cmp(&a[a_idx][a_idx]));
    let values: Vec<f64> = order.iter().map(|&k| a[k][k]).collect();
    let vectors: Vec<Vec<f64>> = (0..n)
        .map(|i| order.iter().map(|&k| v[i][k]).collect())
        .collect();
    (values, vectors)
}

/// Largest singular value of a (rectangular) matrix, computed as the square
/// root of the top eigenvalue of the Gram matrix. Exact operator norm for
/// maps between Euclidean spaces; the net-based bracket is tested against it.
pub fn largest_singular_value(matrix: &[Vec<f64>]) -> f64 {
    let rows = matrix.len();
    if rows == 0 {
        return 0.0;
    }
    let cols = matrix[0].len();
    let mut gram = vec![vec![0.0f64; cols]; cols];
    for i in 0..cols {
        for j in 0..cols {
            gram[i][j] = (0..rows).map(|r| matrix[r][i] * matrix[r][j]).sum();
        }
    }
    let (values, _) = symmetric_eigen(&gram);
    values.first().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Transpose of a row-major matrix.
pub fn transpose(matrix: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let rows = matrix.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = matrix[0].len();
    (0..cols)
        .map(|c| (0..rows).map(|r| matrix[r][c]).collect())
        .collect()
}
