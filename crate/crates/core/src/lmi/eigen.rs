//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use crate::error::{domain, Result};
use crate::Matrix;

/// Default convergence tolerance for [`sym_eigs`] callers inside the crate.
pub const DEFAULT_TOL: f64 = 1e-14;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) with matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let lambda = Matrix::from_diagonal(&nalgebra::DVector::from_vec(self.values.clone()));
        &self.vectors * lambda * self.vectors.transpose()
    }
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigs(m: &Matrix, tol: f64) -> Result<Vec<f64>> {
    Ok(sym_eigen(m, tol)?.values)
}

/// Full eigendecomposition by cyclic Jacobi sweeps.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops to `tol · ‖M‖_F`.
pub fn sym_eigen(m: &Matrix, tol: f64) -> Result<SymEigen> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(domain(format!("matrix is {}×{}, not square", n, m.ncols())));
    }
    if !(tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    let inf_norm = row_sum_norm(m);
    let asym = row_sum_norm(&(m - m.transpose()));
    if asym > tol * inf_norm {
        return Err(domain(format!(
            "matrix is not symmetric: ‖M−Mᵀ‖∞ = {asym:e} exceeds {tol:e}·‖M‖∞"
        )));
    }

    let mut a = (m + m.transpose()) * 0.5;
    let mut v = Matrix::identity(n, n);
    let target = tol * a.norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}

/// Applies `A ← JᵀAJ`, `V ← VJ` for the rotation in the (p, q) plane.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

fn row_sum_norm(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn lambda_min(m: &Matrix) -> Result<f64> {
    Ok(sym_eigs(m, DEFAULT_TOL)?[0])
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(m: &Matrix) -> Result<f64> {
    Ok(*sym_eigs(m, DEFAULT_TOL)?.last().unwrap())
}

/// `(M + Mᵀ)/2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::fixtures;
    use approx::assert_relative_eq;

    #[test]
    fn identity_and_diagonal() {
        assert_eq!(sym_eigs(&Matrix::identity(3, 3), 1e-14).unwrap(), vec![1.0; 3]);
        let d = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![5.0, -2.0, 0.0]));
        assert_eq!(sym_eigs(&d, 1e-14).unwrap(), vec![-2.0, 0.0, 5.0]);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(sym_eigs(&m, 1e-12).is_err());
    }

    /// Roots of det(P − λI) for the printed Example 1 matrix, found by bisection on the
    /// characteristic cubic independently of the Jacobi path.
    #[test]
    fn example_p_matches_characteristic_cubic() {
        let p = fixtures::example_p();
        let c2 = -p.trace();
        let minors = p[(0, 0)] * p[(1, 1)] - p[(0, 1)] * p[(1, 0)]
            + p[(0, 0)] * p[(2, 2)] - p[(0, 2)] * p[(2, 0)]
            + p[(1, 1)] * p[(2, 2)] - p[(1, 2)] * p[(2, 1)];
        let det = p.determinant();
        let cubic = |l: f64| l * l * l + c2 * l * l + minors * l - det;
        let root_in = |mut lo: f64, mut hi: f64| {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if cubic(lo).signum() == cubic(mid).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        // Brackets located by a coarse sign scan of the cubic.
        let mut brackets = Vec::new();
        let mut prev = 0.0;
        for k in 1..=2000 {
            let l = k as f64 * 0.01;
            if cubic(prev).signum() != cubic(l).signum() {
                brackets.push((prev, l));
            }
            prev = l;
        }
        assert_eq!(brackets.len(), 3);
        let eigs = sym_eigs(&p, 1e-14).unwrap();
        for ((lo, hi), got) in brackets.into_iter().zip(eigs) {
            assert!(got > 0.0);
            assert_relative_eq!(got, root_in(lo, hi), max_relative = 1e-12);
        }
    }

    #[test]
    fn vectors_reconstruct() {
        let p = fixtures::example_p();
        let e = sym_eigen(&p, 1e-14).unwrap();
        assert!((e.reconstruct() - &p).norm() <= 10.0 * 1e-14 * p.norm() + 1e-15);
        let qtq = e.vectors.transpose() * &e.vectors;
        assert!((qtq - Matrix::identity(3, 3)).norm() < 1e-13);
    }
}
