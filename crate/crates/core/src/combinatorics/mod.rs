//! Exact and log-domain combinatorial primitives.
//!
//! Exact quantities use [`ExactScalar`] (a reduced big rational); quantities that
//! outgrow `f64` use [`LogReal`]. Entropies are in bits throughout.

mod log_real;
mod parity;

pub use log_real::{log2_biguint, LogReal};
pub use parity::{parity_counts, ParityCountTable};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type ExactScalar = BigRational;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// `C(n, k)`, zero outside `0 ≤ k ≤ n`.
pub fn binom_exact(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `log2 C(n, k)` as a [`LogReal`] holding the binomial itself.
///
/// Small `min(k, n-k)` sums the product terms directly; larger ones use Stirling's
/// series with four correction terms, split so that no large logs cancel.
pub fn log2_binom(n: u64, k: u64) -> Result<LogReal> {
    if k > n {
        return Err(domain!("log2_binom requires k <= n (n={n}, k={k})"));
    }
    Ok(LogReal::from_log2(ln_binom(n, k) * LOG2_E))
}

fn ln_binom(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if k < 64 {
        let nf = n as f64;
        return (0..k)
            .map(|i| ((nf - i as f64) / (i as f64 + 1.0)).ln())
            .sum();
    }
    let (nf, kf) = (n as f64, k as f64);
    let rest = nf - kf;
    let main = kf * (nf / kf).ln() - rest * (-kf / nf).ln_1p();
    let half = 0.5 * ((nf / (kf * rest)).ln() - (2.0 * std::f64::consts::PI).ln());
    main + half + stirling_tail(nf) - stirling_tail(kf) - stirling_tail(rest)
}

fn stirling_tail(x: f64) -> f64 {
    let x2 = x * x;
    1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x * x2 * x2)
        - 1.0 / (1680.0 * x * x2 * x2 * x2)
}

/// Johnson-scheme multiplicity `l_s = C(n,s) - C(n,s-1)` with `l_0 = 1`.
pub fn johnson_multiplicity(n: u64, s: u64) -> Result<BigUint> {
    if 2 * s > n {
        return Err(domain!("johnson_multiplicity requires s <= n/2 (n={n}, s={s})"));
    }
    if s == 0 {
        return Ok(BigUint::one());
    }
    Ok(binom_exact(n, s as i64) - binom_exact(n, s as i64 - 1))
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(domain!("binary_entropy requires x in [0,1], got {x}"));
    }
    Ok(xlog2_inv(x) + xlog2_inv(1.0 - x))
}

/// `x log2(1/x)` with the continuous extension at 0.
pub(crate) fn xlog2_inv(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Which tail inequality to evaluate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TailBound {
    /// `Pr[X >= (1+delta) mu] <= exp(-delta^2 mu / (2+delta))`.
    ChernoffMult { delta: f64, mu: f64 },
    /// `2^-n Σ_{r<=k} C(n,r) <= 2^{-(1-h(k/n)) n}` for `k <= n/2`.
    BinomialHalf { n: u64, k: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailBoundValue {
    pub bound: f64,
    /// Exact tail probability, when the bound has a cheap exact counterpart.
    pub exact: Option<ExactScalar>,
    /// `exact <= bound` (true when there is no exact value).
    pub holds: bool,
}

pub fn tail_bounds(kind: &TailBound) -> Result<TailBoundValue> {
    match *kind {
        TailBound::ChernoffMult { delta, mu } => {
            if !(delta >= 0.0 && mu >= 0.0) {
                return Err(domain!("chernoff bound needs delta >= 0 and mu >= 0"));
            }
            Ok(TailBoundValue {
                bound: (-delta * delta * mu / (2.0 + delta)).exp(),
                exact: None,
                holds: true,
            })
        }
        TailBound::BinomialHalf { n, k } => {
            if 2 * k > n {
                return Err(domain!("binomial tail bound needs k <= n/2 (n={n}, k={k})"));
            }
            let mut sum = BigUint::zero();
            for r in 0..=k {
                sum += binom_exact(n, r as i64);
            }
            let exact = BigRational::new(BigInt::from(sum), BigInt::from(BigUint::one() << n));
            let h = binary_entropy(k as f64 / n as f64)?;
            let log2_bound = -(1.0 - h) * n as f64;
            let holds = LogReal::from_rational(&exact).log2_abs() <= log2_bound + 1e-12;
            Ok(TailBoundValue {
                bound: log2_bound.exp2(),
                exact: Some(exact),
                holds,
            })
        }
    }
}

/// Nearest `f64` to a rational, robust to huge numerators and denominators.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    LogReal::from_rational(x).to_f64()
}

/// Exact rational `p/q`.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Pascal's triangle, built independently of the multiplicative formula.
    fn pascal_row(n: usize) -> Vec<BigUint> {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = vec![BigUint::one(); row.len() + 1];
            for i in 1..row.len() {
                next[i] = &row[i - 1] + &row[i];
            }
            row = next;
        }
        row
    }

    #[test]
    fn binom_small_and_out_of_range() {
        assert_eq!(binom_exact(5, 2), BigUint::from(10u32));
        assert_eq!(binom_exact(7, -1), BigUint::zero());
        assert_eq!(binom_exact(7, 8), BigUint::zero());
        assert_eq!(binom_exact(0, 0), BigUint::one());
    }

    #[test]
    fn binom_matches_pascal() {
        let row = pascal_row(60);
        for (k, expected) in row.iter().enumerate() {
            assert_eq!(&binom_exact(60, k as i64), expected, "k={k}");
        }
        assert_eq!(binom_exact(60, 30), row[30]);
    }

    #[test]
    fn log2_binom_small_cases() {
        assert!((log2_binom(4, 2).unwrap().log2_abs() - 6f64.log2()).abs() < 1e-12);
        assert_eq!(log2_binom(17, 0).unwrap().log2_abs(), 0.0);
        assert!(log2_binom(3, 4).is_err());
    }

    #[test]
    fn log2_binom_matches_exact_big_integer() {
        for &(n, k) in &[
            (1000u64, 500u64),
            (1000, 64),
            (1000, 63),
            (5000, 1234),
            (20000, 10000),
            (200, 100),
            (129, 64),
        ] {
            let exact = log2_biguint(&binom_exact(n, k as i64));
            let approx = log2_binom(n, k).unwrap().log2_abs();
            assert!((exact - approx).abs() <= 1e-9, "n={n} k={k}: {exact} vs {approx}");
        }
    }

    #[test]
    fn johnson_multiplicities() {
        assert_eq!(johnson_multiplicity(5, 2).unwrap(), BigUint::from(5u32));
        assert_eq!(johnson_multiplicity(9, 0).unwrap(), BigUint::one());
        let total = johnson_multiplicity(3, 0).unwrap() + johnson_multiplicity(3, 1).unwrap();
        assert_eq!(total, binom_exact(3, 1));
        assert!(johnson_multiplicity(5, 3).is_err());
        for n in 2..30u64 {
            let mut acc = BigUint::zero();
            for s in 0..=n / 2 {
                let l = johnson_multiplicity(n, s).unwrap();
                assert!(l >= BigUint::one());
                acc += l;
                assert_eq!(acc, binom_exact(n, s as i64));
            }
        }
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.375).unwrap() - 0.954_434).abs() < 1e-6);
        assert!((binary_entropy(0.2).unwrap() - binary_entropy(0.8).unwrap()).abs() < 1e-15);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn tail_bound_examples() {
        let c = tail_bounds(&TailBound::ChernoffMult { delta: 0.0, mu: 10.0 }).unwrap();
        assert_eq!(c.bound, 1.0);

        let b = tail_bounds(&TailBound::BinomialHalf { n: 2, k: 1 }).unwrap();
        assert_eq!(b.exact, Some(ratio(3, 4)));
        assert_eq!(b.bound, 1.0);
        assert!(b.holds);

        let b = tail_bounds(&TailBound::BinomialHalf { n: 20, k: 5 }).unwrap();
        // 2^-20 (1 + 20 + 190 + 1140 + 4845 + 15504) by direct summation
        assert_eq!(b.exact, Some(ratio(21700, 1 << 20)));
        let h = binary_entropy(0.25).unwrap();
        assert!((b.bound - (-(1.0 - h) * 20.0).exp2()).abs() < 1e-15);
        assert!(b.holds);

        assert!(tail_bounds(&TailBound::BinomialHalf { n: 4, k: 3 }).is_err());
        assert!(tail_bounds(&TailBound::ChernoffMult { delta: -1.0, mu: 1.0 }).is_err());
    }
}
