//! Signed reals stored as a base-2 logarithm of the magnitude.
//!
//! Used wherever binomials or eigenvalues leave the range of `f64`
//! (for example `C(2000, 200)` or an eigenvalue near `2^-900`).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// `sign · 2^log2_magnitude`, with `sign == 0` exactly for the value zero.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LogReal {
    sign: i8,
    log2_magnitude: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        sign: 0,
        log2_magnitude: f64::NEG_INFINITY,
    };
    pub const ONE: LogReal = LogReal {
        sign: 1,
        log2_magnitude: 0.0,
    };

    /// Positive value `2^log2`.
    pub fn from_log2(log2: f64) -> Self {
        if log2 == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogReal {
            sign: 1,
            log2_magnitude: log2,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogReal {
                sign: if x > 0.0 { 1 } else { -1 },
                log2_magnitude: x.abs().log2(),
            }
        }
    }

    pub fn from_biguint(x: &BigUint) -> Self {
        if x.is_zero() {
            Self::ZERO
        } else {
            Self::from_log2(log2_biguint(x))
        }
    }

    pub fn from_bigint(x: &BigInt) -> Self {
        let mag = Self::from_biguint(x.magnitude());
        if x.sign() == Sign::Minus {
            -mag
        } else {
            mag
        }
    }

    pub fn from_rational(x: &BigRational) -> Self {
        if x.is_zero() {
            return Self::ZERO;
        }
        let log2 = log2_biguint(x.numer().magnitude()) - log2_biguint(x.denom().magnitude());
        LogReal {
            sign: if x.is_negative() { -1 } else { 1 },
            log2_magnitude: log2,
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Base-2 log of `|x|`; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        self.log2_magnitude
    }

    /// Converts to `f64`, underflowing to 0 or overflowing to ±inf as needed.
    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log2_magnitude.exp2()
        }
    }

    pub fn abs(&self) -> Self {
        LogReal {
            sign: self.sign.abs(),
            log2_magnitude: self.log2_magnitude,
        }
    }

    pub fn sqrt(&self) -> Self {
        assert!(self.sign >= 0, "sqrt of a negative LogReal");
        if self.sign == 0 {
            return Self::ZERO;
        }
        Self::from_log2(self.log2_magnitude / 2.0)
    }

    pub fn powi(&self, exp: u64) -> Self {
        if exp == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            return Self::ZERO;
        }
        let sign = if self.sign < 0 && exp % 2 == 1 { -1 } else { 1 };
        LogReal {
            sign,
            log2_magnitude: self.log2_magnitude * exp as f64,
        }
    }
}

/// `log2(x)` for a nonzero big integer, accurate to a few ulps.
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        // exact conversion for anything that fits in a u64
        let v = x.iter_u64_digits().next().unwrap_or(0);
        return (v as f64).log2();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    let top = top.iter_u64_digits().next().unwrap_or(0);
    (top as f64).log2() + shift as f64
}

impl PartialEq for LogReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_total(other) == Ordering::Equal
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_total(other))
    }
}

impl LogReal {
    fn cmp_total(&self, other: &Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match self.sign {
            0 => Ordering::Equal,
            1 => self.log2_magnitude.total_cmp(&other.log2_magnitude),
            _ => other.log2_magnitude.total_cmp(&self.log2_magnitude),
        }
    }
}

impl Neg for LogReal {
    type Output = LogReal;
    fn neg(self) -> LogReal {
        LogReal {
            sign: -self.sign,
            log2_magnitude: self.log2_magnitude,
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 || rhs.sign == 0 {
            return LogReal::ZERO;
        }
        LogReal {
            sign: self.sign * rhs.sign,
            log2_magnitude: self.log2_magnitude + rhs.log2_magnitude,
        }
    }
}

impl Div for LogReal {
    type Output = LogReal;
    fn div(self, rhs: LogReal) -> LogReal {
        assert!(rhs.sign != 0, "LogReal division by zero");
        if self.sign == 0 {
            return LogReal::ZERO;
        }
        LogReal {
            sign: self.sign * rhs.sign,
            log2_magnitude: self.log2_magnitude - rhs.log2_magnitude,
        }
    }
}

impl Add for LogReal {
    type Output = LogReal;
    fn add(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.log2_magnitude >= rhs.log2_magnitude {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let ratio = (small.log2_magnitude - big.log2_magnitude).exp2();
        if big.sign == small.sign {
            LogReal {
                sign: big.sign,
                log2_magnitude: big.log2_magnitude + ratio.ln_1p() / std::f64::consts::LN_2,
            }
        } else if ratio == 1.0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: big.sign,
                log2_magnitude: big.log2_magnitude + (-ratio).ln_1p() / std::f64::consts::LN_2,
            }
        }
    }
}

impl Sub for LogReal {
    type Output = LogReal;
    fn sub(self, rhs: LogReal) -> LogReal {
        self + (-rhs)
    }
}

impl std::iter::Sum for LogReal {
    fn sum<I: Iterator<Item = LogReal>>(iter: I) -> LogReal {
        iter.fold(LogReal::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(f, "{}2^{}", if s < 0 { "-" } else { "" }, self.log2_magnitude),
        }
    }
}
