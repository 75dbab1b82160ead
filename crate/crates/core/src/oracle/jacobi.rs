use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};

/// Largest dimension the dense solver accepts.
pub const MAX_EIG_DIM: usize = 1 << 14;

const MAX_SWEEPS: usize = 100;

/// Symmetric eigendecomposition. `vectors` holds eigenvectors as columns, in the
/// same order as `values` (descending).
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    /// Off-diagonal Frobenius norm when the sweeps stopped.
    pub residual: f64,
    pub sweeps: usize,
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(domain!("matrix is {}x{}, not square", a.nrows(), a.ncols()));
    }
    if a.nrows() > MAX_EIG_DIM {
        return Err(Error::Resource(format!(
            "dimension {} exceeds the dense solver limit {MAX_EIG_DIM}",
            a.nrows()
        )));
    }
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let (x, y) = (a[(i, j)], a[(j, i)]);
            if !x.is_finite() || (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
                return Err(domain!("matrix is not symmetric at ({i}, {j}): {x} vs {y}"));
            }
        }
        if !a[(i, i)].is_finite() {
            return Err(domain!("non-finite diagonal entry at {i}"));
        }
    }
    Ok(())
}

fn off_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                acc += a[(i, j)] * a[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi: sweeps over all `(p, q)` in row order until the off-diagonal
/// Frobenius norm drops below `1e-13 · dim`.
pub fn eig_sym_vectors(matrix: &DMatrix<f64>) -> Result<SymEigen> {
    check_symmetric(matrix)?;
    let n = matrix.nrows();
    let mut a = matrix.clone();
    // symmetrize exactly so rounding in the input cannot bias the rotations
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut v = DMatrix::<f64>::identity(n, n);
    let target = 1e-13 * n.max(1) as f64;
    let mut residual = off_norm(&a);
    let mut sweeps = 0;
    while residual >= target && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        residual = off_norm(&a);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen {
        values,
        vectors,
        residual,
        sweeps,
    })
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub fn eig_sym(matrix: &DMatrix<f64>) -> Result<Vec<f64>> {
    eig_sym_vectors(matrix).map(|e| e.values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_swap() {
        assert_eq!(eig_sym(&DMatrix::identity(3, 3)).unwrap(), vec![1.0, 1.0, 1.0]);
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let vals = eig_sym(&swap).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-15 && (vals[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_asymmetric_and_nonsquare() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(eig_sym(&m), Err(Error::Domain(_))));
        assert!(eig_sym(&DMatrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn reconstructs_random_symmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_xorshift::XorShiftRng::seed_from_u64(7);
        for n in [1usize, 2, 5, 17, 40] {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let x: f64 = rng.random_range(-1.0..1.0);
                    m[(i, j)] = x;
                    m[(j, i)] = x;
                }
            }
            let e = eig_sym_vectors(&m).unwrap();
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone()));
            let back = &e.vectors * d * e.vectors.transpose();
            assert!((back - &m).amax() < 1e-12, "n={n}");
            let orth = e.vectors.transpose() * &e.vectors - DMatrix::identity(n, n);
            assert!(orth.amax() < 1e-12);
            assert!((e.values.iter().sum::<f64>() - m.trace()).abs() < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            // nalgebra's own solver as an independent check
            let mut other: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
            other.sort_by(|a, b| b.total_cmp(a));
            for (x, y) in e.values.iter().zip(&other) {
                assert!((x - y).abs() < 1e-11);
            }
        }
    }
}
