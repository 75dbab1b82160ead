use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::{coupon_walk_spec, walk_dp};
use crate::error::{domain, Result};

/// Mean and hitting probability of `W̃_t(n')` next to their exponential bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct WtEstimates {
    pub mean_exact: f64,
    pub mean_lb: f64,
    pub mean_ub: f64,
    /// `Pr[W̃_t = m]` from the DP.
    pub hit_dp: f64,
    pub hit_lb: f64,
    pub hit_ub: f64,
}

impl WtEstimates {
    /// Smallest slack among the four inequalities.
    pub fn margin(&self) -> f64 {
        [
            self.mean_exact - self.mean_lb,
            self.mean_ub - self.mean_exact,
            self.hit_dp - self.hit_lb,
            self.hit_ub - self.hit_dp,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

/// `m (1 - (1 - 1/n')^t)` exactly.
pub fn wt_mean_exact(n_prime: usize, m: usize, t: usize) -> Result<BigRational> {
    if m < 1 || n_prime < m {
        return Err(domain!("needs n' >= m >= 1 (n'={n_prime}, m={m})"));
    }
    let keep = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(n_prime));
    Ok(BigRational::from_integer(m.into()) * (BigRational::one() - num_traits::pow::pow(keep, t)))
}

/// `exp(-t / x)` with `x = 0` read as the limit (`0` for `t > 0`, `1` for `t = 0`).
fn decay(t: usize, x: usize) -> f64 {
    if x == 0 {
        return if t == 0 { 1.0 } else { 0.0 };
    }
    (-(t as f64) / x as f64).exp()
}

pub fn wt_estimates(n_prime: usize, m: usize, t: usize) -> Result<WtEstimates> {
    if m < 1 || n_prime < m {
        return Err(domain!("needs n' >= m >= 1 (n'={n_prime}, m={m})"));
    }
    let mf = m as f64;
    let mean_exact = if t == 0 {
        0.0
    } else {
        -mf * (t as f64 * (-1.0 / n_prime as f64).ln_1p()).exp_m1()
    };
    let e_n = decay(t, n_prime);
    let e_n1 = decay(t, n_prime - 1);
    let spec = coupon_walk_spec(n_prime, m)?.to_f64();
    let hit_dp = walk_dp(&spec, t).pop().unwrap().prob(m as i64);
    Ok(WtEstimates {
        mean_exact,
        mean_lb: mf * (1.0 - e_n),
        mean_ub: mf * (1.0 - e_n1),
        hit_dp,
        hit_lb: 1.0 - mf * e_n,
        hit_ub: 1.0 - mf * e_n1 + 0.5 * mf * mf * e_n * e_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::ratio;

    #[test]
    fn small_examples() {
        let e = wt_estimates(7, 3, 0).unwrap();
        assert_eq!(e.mean_exact, 0.0);
        assert_eq!(e.hit_dp, 0.0);
        assert_eq!(wt_mean_exact(2, 1, 3).unwrap(), ratio(7, 8));
        let e = wt_estimates(2, 1, 3).unwrap();
        assert!((e.mean_exact - 0.875).abs() < 1e-15);
        let e = wt_estimates(10, 3, 30).unwrap();
        assert!(e.hit_lb <= e.hit_dp && e.hit_dp <= e.hit_ub, "{e:?}");
        assert!(e.margin() >= 0.0);
    }

    #[test]
    fn mean_matches_dp() {
        for &(np, m, t) in &[(5usize, 2usize, 9usize), (30, 4, 100), (1, 1, 4)] {
            let spec = coupon_walk_spec(np, m).unwrap();
            let dp_mean = walk_dp(&spec, t).pop().unwrap().mean();
            assert_eq!(dp_mean, wt_mean_exact(np, m, t).unwrap());
        }
    }

    #[test]
    fn bounds_hold_on_a_sweep() {
        for np in [1usize, 2, 3, 10, 50] {
            for m in 1..=np.min(6) {
                for t in [0usize, 1, 2, 5, 20, 100, 400] {
                    let e = wt_estimates(np, m, t).unwrap();
                    assert!(e.margin() >= -1e-12, "n'={np} m={m} t={t}: {e:?}");
                }
            }
        }
    }
}
