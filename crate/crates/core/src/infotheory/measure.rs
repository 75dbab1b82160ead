//! Discrimination measurements for equiprobable pure-state ensembles, in the
//! Gram picture: the states are realised as the columns of `G^{1/2}`.

use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};
use crate::oracle::{eig_sym_vectors, GramMatrix};

pub const MAX_PGM_DIM: usize = 1 << 12;
pub const MAX_OPT_DIM: usize = 1 << 10;
pub const DEFAULT_OPT_ITERS: usize = 10_000;
pub const DEFAULT_OPT_TOL: f64 = 1e-9;

const PSD_TOL: f64 = 1e-10;

/// `G^{1/2}` through the Jacobi eigensolver.
fn gram_sqrt(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = eig_sym_vectors(g)?;
    let top = eig.values.first().copied().unwrap_or(0.0).max(1.0);
    if let Some(bad) = eig.values.iter().find(|&&x| x < -PSD_TOL * top) {
        return Err(domain!("Gram matrix is not positive semidefinite: eigenvalue {bad}"));
    }
    let roots = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(clean_sqrt(&eig.values)));
    Ok(&eig.vectors * roots * eig.vectors.transpose())
}

/// Square roots of a PSD spectrum, with anything under the solver's noise
/// floor `dim · ε · λ_max` read as zero.
pub(crate) fn clean_sqrt(values: &[f64]) -> Vec<f64> {
    let top = values.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let floor = values.len() as f64 * f64::EPSILON * top;
    values
        .iter()
        .map(|&x| if x <= floor { 0.0 } else { x.sqrt() })
        .collect()
}

fn check_dim(gram: &GramMatrix, cap: usize, what: &str) -> Result<()> {
    if gram.dim() > cap {
        return Err(Error::Resource(format!(
            "{what} limited to dimension {cap}, got {}",
            gram.dim()
        )));
    }
    Ok(())
}

fn success_of(u: &DMatrix<f64>, psi: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let n = psi.ncols();
    let overlaps: Vec<f64> = (0..n).map(|i| u.column(i).dot(&psi.column(i))).collect();
    let total = overlaps.iter().map(|x| x * x).sum::<f64>() / n as f64;
    (total, overlaps)
}

/// Pretty good measurement: `(1/N) Σ_i ((G^{1/2})_{ii})^2`.
pub fn pgm_success(gram: &GramMatrix) -> Result<f64> {
    check_dim(gram, MAX_PGM_DIM, "pgm_success")?;
    let root = gram_sqrt(&gram.to_dense())?;
    let n = root.nrows() as f64;
    Ok(root.diagonal().iter().map(|x| x * x).sum::<f64>() / n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalMeasurement {
    pub value: f64,
    /// Success of the starting point, which is the PGM.
    pub initial: f64,
    pub iterations: usize,
    pub converged: bool,
    /// False if some iterate dropped by more than rounding noise.
    pub monotone: bool,
}

/// Best rank-one measurement found by the ascent `W <- polar([(w_i·φ_i) φ_i]_i)`.
///
/// The states `φ_i` are written in an orthonormal basis of their span (`r`
/// coordinates) and a measurement is an `r × N` matrix `W` with orthonormal
/// rows, whose columns give the POVM elements `w_i w_iᵀ`. The start `W = V_rᵀ`
/// is the PGM. Each step maximises the linearisation of the convex objective
/// `Σ (w_i·φ_i)^2`, so the iterates never decrease. Stops when an improvement
/// falls below `tol`; hitting `max_iters` is reported, not raised.
pub fn optimal_success_iterative(
    gram: &GramMatrix,
    max_iters: usize,
    tol: f64,
) -> Result<OptimalMeasurement> {
    check_dim(gram, MAX_OPT_DIM, "optimal_success_iterative")?;
    optimal_from_gram(&gram.to_dense(), max_iters, tol)
}

pub(crate) fn optimal_from_gram(g: &DMatrix<f64>, max_iters: usize, tol: f64) -> Result<OptimalMeasurement> {
    let eig = eig_sym_vectors(g)?;
    let top = eig.values.first().copied().unwrap_or(0.0).max(1.0);
    if let Some(bad) = eig.values.iter().find(|&&x| x < -PSD_TOL * top) {
        return Err(domain!("Gram matrix is not positive semidefinite: eigenvalue {bad}"));
    }
    let roots = clean_sqrt(&eig.values);
    let rank = roots.iter().filter(|&&x| x > 0.0).count().max(1);
    let basis = eig.vectors.columns(0, rank).transpose();
    let phi = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&roots[..rank])) * &basis;
    let mut w = basis;
    let (initial, mut overlaps) = success_of(&w, &phi);
    let mut value = initial;
    let mut monotone = true;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let mut m = phi.clone();
        for (i, mut col) in m.column_iter_mut().enumerate() {
            col *= overlaps[i];
        }
        w = polar_rows(&m)?;
        let (next, next_overlaps) = success_of(&w, &phi);
        if next < value - 1e-12 {
            monotone = false;
        }
        let gain = next - value;
        value = value.max(next);
        overlaps = next_overlaps;
        if gain < tol {
            converged = true;
            break;
        }
    }
    Ok(OptimalMeasurement {
        value,
        initial,
        iterations,
        converged,
        monotone,
    })
}

/// The `r × N` matrix with orthonormal rows maximising `tr(Wᵀ M)`, for `r <= N`.
fn polar_rows(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (r, n) = m.shape();
    let eig = eig_sym_vectors(&(m * m.transpose()))?;
    let sing = clean_sqrt(&eig.values);
    let mut b = DMatrix::<f64>::zeros(n, r);
    let mut filled = Vec::with_capacity(r);
    for (j, &s) in sing.iter().enumerate() {
        if s > 0.0 {
            let col = m.transpose() * eig.vectors.column(j) / s;
            b.set_column(j, &col);
            filled.push(j);
        }
    }
    // directions with no signal: complete the columns orthonormally
    let mut candidate = 0;
    for j in 0..r {
        if filled.contains(&j) {
            continue;
        }
        loop {
            if candidate >= n {
                return Err(Error::Contract("could not complete an orthonormal frame".into()));
            }
            let mut v = nalgebra::DVector::<f64>::zeros(n);
            v[candidate] = 1.0;
            candidate += 1;
            for &k in &filled {
                let c = b.column(k).dot(&v);
                v -= b.column(k) * c;
            }
            let norm = v.norm();
            if norm > 1e-8 {
                b.set_column(j, &(v / norm));
                filled.push(j);
                break;
            }
        }
    }
    Ok(&eig.vectors * b.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::ratio;
    use crate::infotheory::{hc_from_gram, helstrom_pair};
    use crate::oracle::{gram_coupon, gram_pac};
    use rand::{Rng, SeedableRng};
    use rand_xorshift::XorShiftRng;

    fn random_states(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = XorShiftRng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect()
    }

    fn gram_of(states: &[Vec<f64>]) -> DMatrix<f64> {
        let n = states.len();
        DMatrix::from_fn(n, n, |i, j| states[i].iter().zip(&states[j]).map(|(a, b)| a * b).sum())
    }

    fn hc_of(g: &DMatrix<f64>) -> f64 {
        let n = g.nrows() as f64;
        let eigs = g.clone().symmetric_eigenvalues();
        let floor = 1e-12 * eigs.max();
        eigs.iter().filter(|&&x| x > floor).map(|x| x.sqrt()).sum::<f64>() / n
    }

    /// Square-root measurement built explicitly in state space:
    /// `E_i = ρ^{-1/2} p ψ_i ψ_iᵀ ρ^{-1/2}` on the support of `ρ`.
    fn pgm_by_povm(states: &[Vec<f64>]) -> f64 {
        let dim = states[0].len();
        let p = 1.0 / states.len() as f64;
        let mut rho = DMatrix::<f64>::zeros(dim, dim);
        for s in states {
            let v = nalgebra::DVector::from_column_slice(s);
            rho += &v * v.transpose() * p;
        }
        let eig = rho.symmetric_eigen();
        let inv_sqrt = DMatrix::from_diagonal(
            &eig.eigenvalues.map(|x| if x > 1e-12 { 1.0 / x.sqrt() } else { 0.0 }),
        );
        let r = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
        let mut total = 0.0;
        for s in states {
            let v = nalgebra::DVector::from_column_slice(s);
            let e = &r * (&v * v.transpose() * p) * &r;
            total += p * (v.transpose() * e * &v)[(0, 0)];
        }
        total
    }

    /// `(1/√k) Σ_{i∈S} e_i` raised to the `t`-th tensor power.
    fn coupon_state(n: usize, mask: u64, k: usize, t: usize) -> Vec<f64> {
        let base: Vec<f64> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { 1.0 / (k as f64).sqrt() } else { 0.0 })
            .collect();
        let mut out = vec![1.0];
        for _ in 0..t {
            out = out.iter().flat_map(|a| base.iter().map(move |b| a * b)).collect();
        }
        out
    }

    #[test]
    fn orthogonal_ensemble() {
        let g = DMatrix::<f64>::identity(5, 5);
        let r = optimal_from_gram(&g, 100, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12 && r.converged);
    }

    #[test]
    fn coupon_321() {
        let gram = gram_coupon(3, 2, 1).unwrap();
        let pgm = pgm_success(&gram).unwrap();
        assert!((pgm - 8.0 / 9.0).abs() < 1e-9);
        let opt = optimal_success_iterative(&gram, DEFAULT_OPT_ITERS, DEFAULT_OPT_TOL).unwrap();
        assert!(opt.value >= 8.0 / 9.0 - 1e-6 && opt.value <= 0.94281 + 1e-6);
    }

    #[test]
    fn pgm_agrees_with_explicit_povm() {
        for (n, k, t) in [(3usize, 2usize, 1usize), (4, 2, 2), (4, 3, 3), (5, 4, 2), (8, 7, 1)] {
            let gram = gram_coupon(n, k, t).unwrap();
            if gram.dim() > 8 {
                continue;
            }
            let states: Vec<Vec<f64>> = gram.states().iter().map(|&s| coupon_state(n, s, k, t)).collect();
            let want = pgm_by_povm(&states);
            assert!((pgm_success(&gram).unwrap() - want).abs() < 1e-9, "({n},{k},{t})");
        }
        for seed in 0..20 {
            let states = random_states(4, 6, seed);
            let g = gram_of(&states);
            let root = gram_sqrt(&g).unwrap();
            let via_gram = root.diagonal().iter().map(|x| x * x).sum::<f64>() / 6.0;
            assert!((via_gram - pgm_by_povm(&states)).abs() < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn two_states_match_helstrom() {
        for &omega in &[0.0, 0.1, 0.5, 0.9, 0.999] {
            let g = DMatrix::from_row_slice(2, 2, &[1.0, omega, omega, 1.0]);
            let r = optimal_from_gram(&g, DEFAULT_OPT_ITERS, DEFAULT_OPT_TOL).unwrap();
            let want = helstrom_pair(omega, 1).unwrap();
            assert!((r.value - want).abs() < 1e-8, "omega {omega}: {} vs {want}", r.value);
        }
    }

    #[test]
    fn ascent_is_monotone_and_sandwiched() {
        let mut improved = 0;
        for seed in 0..30 {
            let states = random_states(3, 5, 100 + seed);
            let g = gram_of(&states);
            let r = optimal_from_gram(&g, DEFAULT_OPT_ITERS, DEFAULT_OPT_TOL).unwrap();
            let hc = hc_of(&g);
            assert!(r.monotone && r.converged, "seed {seed}: {r:?}");
            assert!(r.value >= r.initial - 1e-12);
            assert!(hc * hc - 1e-8 <= r.value && r.value <= hc + 1e-8, "seed {seed}");
            if r.value > r.initial + 1e-6 {
                improved += 1;
            }
        }
        // the PGM is not optimal for generic ensembles
        assert!(improved > 0);
    }

    #[test]
    fn rejects_indefinite_and_oversized() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(gram_sqrt(&g), Err(Error::Domain(_))));
        assert!(optimal_from_gram(&g, 10, 1e-9).is_err());
        let big = gram_pac(11, &ratio(1, 8), 1).unwrap();
        assert!(matches!(
            optimal_success_iterative(&big, 10, 1e-9),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn pac_sandwich() {
        let gram = gram_pac(3, &ratio(1, 5), 2).unwrap();
        let hc = hc_from_gram(&gram).unwrap();
        let pgm = pgm_success(&gram).unwrap();
        let opt = optimal_success_iterative(&gram, DEFAULT_OPT_ITERS, DEFAULT_OPT_TOL).unwrap();
        assert!(hc * hc - 1e-9 <= pgm && pgm <= opt.value + 1e-12 && opt.value <= hc + 1e-8);
    }
}
