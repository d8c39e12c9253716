//! Tiny dense helpers over `f64` slices; just enough linear algebra for the
//! cone constructors. Inputs are small (ambient dimensions in the single
//! digits), so plain Gaussian elimination is all we need.

pub(crate) fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub(crate) fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub(crate) fn scale(x: &[f64], s: f64) -> Vec<f64> {
    x.iter().map(|a| a * s).collect()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub(crate) fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|a| a.is_finite())
}

pub(crate) fn mat_vec(rows: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| dot(r, x)).collect()
}

/// Numerical rank via Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub(crate) fn rank(rows: &[Vec<f64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let nrows = m.len();
    let ncols = m[0].len();
    let scale_ref = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale_ref == 0.0 {
        return 0;
    }
    let tol = scale_ref * 1e-12 * nrows.max(ncols) as f64;
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).max_by(|a, b| {
            m[*a][col]
                .abs()
                .partial_cmp(&m[*b][col].abs())
                .expect("finite entries")
        }) else {
            break;
        };
        if m[pivot][col].abs() <= tol {
            continue;
        }
        m.swap(rank, pivot);
        for r in rank + 1..nrows {
            let f = m[r][col] / m[rank][col];
            for c in col..ncols {
                m[r][c] -= f * m[rank][c];
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Solve a square system in place; `None` when (near-)singular.
#[allow(clippy::needless_range_loop)]
pub(crate) fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = a.len();
    if n == 0 || a.iter().any(|r| r.len() != n) || b.len() != n {
        return None;
    }
    for col in 0..n {
        let pivot =
            (col..n).max_by(|x, y| a[*x][col].abs().partial_cmp(&a[*y][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Least-squares solution of `rows * y ~ 1` through the normal equations.
pub(crate) fn least_squares_ones(rows: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = rows[0].len();
    let mut gram = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for r in rows {
        for i in 0..n {
            for j in 0..n {
                gram[i][j] += r[i] * r[j];
            }
            rhs[i] += r[i];
        }
    }
    solve_square(gram, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_identity_like() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]];
        assert_eq!(rank(&rows), 2);
    }

    #[test]
    fn rank_of_single_row() {
        let rows = vec![vec![1.0, 0.0]];
        assert_eq!(rank(&rows), 1);
    }

    #[test]
    fn rank_of_zero_matrix() {
        let rows = vec![vec![0.0, 0.0]];
        assert_eq!(rank(&rows), 0);
    }

    #[test]
    fn least_squares_recovers_interior_of_orthant() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let y = least_squares_ones(&rows).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-12 && (y[1] - 1.0).abs() < 1e-12);
    }
}
