//! Spectra of the average state `ρ^B` of `t` quantum samples, for the PAC,
//! agnostic and coupon-collector ensembles.
//!
//! PAC and agnostic eigenvalues come from the closed forms in parity counts.
//! The coupon spectrum is generated by the three-term eigenvalue recurrence on
//! the Johnson scheme, with multiplicities `l_s`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::combinatorics::{
    binom_exact, johnson_multiplicity, log2_biguint, log2_binom, parity_counts, rational_to_f64,
    ExactScalar, LogReal,
};
use crate::error::{domain, Error, Result};

/// Numeric tower an operation runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tower {
    Exact,
    Float,
}

impl FromStr for Tower {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Tower::Exact),
            "float" => Ok(Tower::Float),
            other => Err(Error::Usage(format!("unknown tower `{other}`"))),
        }
    }
}

impl fmt::Display for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tower::Exact => "exact",
            Tower::Float => "float",
        })
    }
}

/// Parameters of one of the three ensembles.
#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleParams {
    Pac { d: usize, eps: BigRational, t: usize },
    Agnostic { d: usize, eps: BigRational, t: usize },
    Coupon { n: usize, k: usize, m: usize, t: usize },
}

fn check_eps(eps: &BigRational) -> Result<()> {
    if !eps.is_positive() || eps >= &BigRational::new(1.into(), 4.into()) {
        return Err(domain!("eps must lie in (0, 1/4), got {eps}"));
    }
    Ok(())
}

impl EnsembleParams {
    pub fn pac(d: usize, eps: BigRational, t: usize) -> Result<Self> {
        if d == 0 || t == 0 {
            return Err(domain!("PAC ensemble needs d >= 1 and t >= 1"));
        }
        check_eps(&eps)?;
        Ok(EnsembleParams::Pac { d, eps, t })
    }

    pub fn agnostic(d: usize, eps: BigRational, t: usize) -> Result<Self> {
        if d == 0 || t == 0 {
            return Err(domain!("agnostic ensemble needs d >= 1 and t >= 1"));
        }
        check_eps(&eps)?;
        Ok(EnsembleParams::Agnostic { d, eps, t })
    }

    /// Coupon ensemble; `t = 0` is allowed and gives the initial point mass.
    pub fn coupon(n: usize, k: usize, t: usize) -> Result<Self> {
        if n < 3 || k <= 1 || k >= n {
            return Err(domain!("coupon ensemble needs n >= 3 and 1 < k < n (n={n}, k={k})"));
        }
        Ok(EnsembleParams::Coupon { n, k, m: n - k, t })
    }

    pub fn t(&self) -> usize {
        match *self {
            EnsembleParams::Pac { t, .. }
            | EnsembleParams::Agnostic { t, .. }
            | EnsembleParams::Coupon { t, .. } => t,
        }
    }

    /// Number of states in the (equiprobable) ensemble.
    pub fn ensemble_size(&self) -> BigUint {
        match *self {
            EnsembleParams::Pac { d, .. } | EnsembleParams::Agnostic { d, .. } => {
                BigUint::one() << d
            }
            EnsembleParams::Coupon { n, k, .. } => binom_exact(n as u64, k as i64),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            EnsembleParams::Pac { .. } => "pac",
            EnsembleParams::Agnostic { .. } => "agnostic",
            EnsembleParams::Coupon { .. } => "coupon",
        }
    }
}

impl fmt::Display for EnsembleParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleParams::Pac { d, eps, t } => write!(f, "pac(d={d}, eps={eps}, t={t})"),
            EnsembleParams::Agnostic { d, eps, t } => {
                write!(f, "agnostic(d={d}, eps={eps}, t={t})")
            }
            EnsembleParams::Coupon { n, k, t, .. } => write!(f, "coupon(n={n}, k={k}, t={t})"),
        }
    }
}

/// An eigenvalue, exact or held as a log-domain real.
#[derive(Clone, Debug, PartialEq)]
pub enum Eigenvalue {
    Exact(ExactScalar),
    Float(LogReal),
}

impl Eigenvalue {
    pub fn to_f64(&self) -> f64 {
        match self {
            Eigenvalue::Exact(q) => rational_to_f64(q),
            Eigenvalue::Float(x) => x.to_f64(),
        }
    }

    pub fn to_log_real(&self) -> LogReal {
        match self {
            Eigenvalue::Exact(q) => LogReal::from_rational(q),
            Eigenvalue::Float(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Eigenvalue::Exact(q) => q.is_zero(),
            Eigenvalue::Float(x) => x.is_zero(),
        }
    }

    pub fn as_exact(&self) -> Option<&ExactScalar> {
        match self {
            Eigenvalue::Exact(q) => Some(q),
            Eigenvalue::Float(_) => None,
        }
    }
}

/// One distinct eigenvalue with its multiplicity. `index` is `h` (PAC/agnostic)
/// or `s` (coupon).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub index: usize,
    pub eigenvalue: Eigenvalue,
    pub multiplicity: BigUint,
}

impl SpectrumEntry {
    /// `multiplicity · eigenvalue`, the probability weight of this eigenspace.
    pub fn mass(&self) -> LogReal {
        LogReal::from_biguint(&self.multiplicity) * self.eigenvalue.to_log_real()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub params: EnsembleParams,
    pub entries: Vec<SpectrumEntry>,
    pub tower: Tower,
}

impl Spectrum {
    /// `Σ multiplicity · eigenvalue` in the exact tower.
    pub fn trace_exact(&self) -> Option<ExactScalar> {
        let mut acc = BigRational::zero();
        for e in &self.entries {
            let q = e.eigenvalue.as_exact()?;
            acc += q * BigRational::from_integer(BigInt::from(e.multiplicity.clone()));
        }
        Some(acc)
    }

    pub fn trace_f64(&self) -> f64 {
        self.entries.iter().map(|e| e.mass().to_f64()).sum()
    }

    /// Number of distinct nonzero eigenvalues among the entries.
    pub fn nonzero_distinct(&self) -> usize {
        let mut vals: Vec<f64> = self
            .entries
            .iter()
            .filter(|e| !e.eigenvalue.is_zero())
            .map(|e| e.eigenvalue.to_log_real().log2_abs())
            .collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        vals.len()
    }

    /// Total multiplicity of nonzero eigenvalues, i.e. the rank.
    pub fn rank(&self) -> BigUint {
        self.entries
            .iter()
            .filter(|e| !e.eigenvalue.is_zero())
            .map(|e| e.multiplicity.clone())
            .sum()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mass().to_f64()).collect()
    }
}

fn pow_rational(base: &BigRational, exp: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(exp + 1);
    out.push(BigRational::one());
    for i in 0..exp {
        out.push(&out[i] * base);
    }
    out
}

/// PAC spectrum: `λ_h = Σ_l C(t,l) (2ε/d)^l (1-2ε)^{t-l} n[l][h]` with
/// multiplicity `C(d,h)`, for `h = 0..min(d,t)`.
pub fn pac_spectrum(d: usize, eps: &BigRational, t: usize, tower: Tower) -> Result<Spectrum> {
    let params = EnsembleParams::pac(d, eps.clone(), t)?;
    let table = parity_counts(d, t)?;
    let hmax = d.min(t);
    let two_eps = eps * BigInt::from(2);
    let entries = match tower {
        Tower::Exact => {
            let step = &two_eps / BigInt::from(d);
            let stay = BigRational::one() - &two_eps;
            let step_pow = pow_rational(&step, t);
            let stay_pow = pow_rational(&stay, t);
            (0..=hmax)
                .map(|h| {
                    let mut lambda = BigRational::zero();
                    for l in h..=t {
                        let count = table.get(l, h);
                        if count.is_zero() {
                            continue;
                        }
                        let c = BigInt::from(binom_exact(t as u64, l as i64) * count);
                        lambda += &step_pow[l] * &stay_pow[t - l] * c;
                    }
                    SpectrumEntry {
                        index: h,
                        eigenvalue: Eigenvalue::Exact(lambda),
                        multiplicity: binom_exact(d as u64, h as i64),
                    }
                })
                .collect()
        }
        Tower::Float => {
            let two_eps = rational_to_f64(&two_eps);
            let log2_step = (two_eps / d as f64).log2();
            let log2_stay = (1.0 - two_eps).log2();
            (0..=hmax)
                .map(|h| {
                    let lambda: LogReal = (h..=t)
                        .filter(|&l| !table.get(l, h).is_zero())
                        .map(|l| {
                            let log2 = log2_binom(t as u64, l as u64).unwrap().log2_abs()
                                + l as f64 * log2_step
                                + (t - l) as f64 * log2_stay
                                + log2_biguint(table.get(l, h));
                            LogReal::from_log2(log2)
                        })
                        .sum();
                    SpectrumEntry {
                        index: h,
                        eigenvalue: Eigenvalue::Float(lambda),
                        multiplicity: binom_exact(d as u64, h as i64),
                    }
                })
                .collect()
        }
    };
    Ok(Spectrum {
        params,
        entries,
        tower,
    })
}

/// `α = (1 - sqrt(1 - 16ε²)) / 2`, evaluated without cancellation.
pub fn agnostic_alpha(eps: f64) -> f64 {
    let e2 = eps * eps;
    8.0 * e2 / (1.0 + (1.0 - 16.0 * e2).sqrt())
}

/// Agnostic spectrum: `λ_h = Σ_r C(t,r) (n[r][h] / d^r) α^r (1-α)^{t-r}`.
/// Always in the float tower since `α` is irrational in general.
pub fn agnostic_spectrum(d: usize, eps: &BigRational, t: usize) -> Result<Spectrum> {
    let params = EnsembleParams::agnostic(d, eps.clone(), t)?;
    let table = parity_counts(d, t)?;
    let alpha = agnostic_alpha(rational_to_f64(eps));
    let log2_alpha = alpha.log2();
    let log2_rest = (-alpha).ln_1p() / std::f64::consts::LN_2;
    let log2_d = (d as f64).log2();
    let entries = (0..=d.min(t))
        .map(|h| {
            let lambda: LogReal = (h..=t)
                .filter(|&r| !table.get(r, h).is_zero())
                .map(|r| {
                    let log2 = log2_binom(t as u64, r as u64).unwrap().log2_abs()
                        + log2_biguint(table.get(r, h))
                        - r as f64 * log2_d
                        + r as f64 * log2_alpha
                        + (t - r) as f64 * log2_rest;
                    LogReal::from_log2(log2)
                })
                .sum();
            SpectrumEntry {
                index: h,
                eigenvalue: Eigenvalue::Float(lambda),
                multiplicity: binom_exact(d as u64, h as i64),
            }
        })
        .collect();
    Ok(Spectrum {
        params,
        entries,
        tower: Tower::Float,
    })
}

/// Transition weights `p_{j,-1}, p_{j,0}, p_{j,+1}` of the coupon recurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouponStepProbs {
    pub j: usize,
    pub p_minus: ExactScalar,
    pub p_zero: ExactScalar,
    pub p_plus: ExactScalar,
}

/// `Π num / Π den`, zero whenever a numerator factor is zero (this resolves the
/// `0/0` boundary terms at `k = m`).
fn product_ratio(num: &[i64], den: &[i64]) -> Result<BigRational> {
    if num.contains(&0) {
        return Ok(BigRational::zero());
    }
    if den.contains(&0) {
        return Err(domain!("zero denominator with nonzero numerator"));
    }
    let n: BigInt = num.iter().map(|&x| BigInt::from(x)).product();
    let d: BigInt = den.iter().map(|&x| BigInt::from(x)).product();
    Ok(BigRational::new(n, d))
}

fn check_coupon_regime(n: usize, k: usize) -> Result<usize> {
    if n < 3 || k <= 1 || k >= n {
        return Err(domain!("coupon parameters need n >= 3 and 1 < k < n (n={n}, k={k})"));
    }
    let m = n - k;
    if k < m {
        return Err(Error::Unsupported(format!(
            "coupon recurrence is only established for k >= m (n={n}, k={k}, m={m})"
        )));
    }
    Ok(m)
}

pub fn coupon_step_probs(n: usize, k: usize, j: usize) -> Result<CouponStepProbs> {
    let m = check_coupon_regime(n, k)?;
    if j > m {
        return Err(domain!("step index j={j} outside [0, m={m}]"));
    }
    let (n, k, m, j) = (n as i64, k as i64, m as i64, j as i64);
    let p_minus = product_ratio(
        &[j, k - j + 1, m - j + 1],
        &[n - 2 * j + 1, n - 2 * j + 2, k],
    )?;
    let p_zero = BigRational::new(k.into(), n.into())
        + product_ratio(
            &[j, n - j + 1, k - m, k - m],
            &[n, k, n - 2 * j, n - 2 * j + 2],
        )?;
    let p_plus = product_ratio(&[k - j, n - j + 1, m - j], &[n - 2 * j, n - 2 * j + 1, k])?;
    debug_assert!(!p_minus.is_negative() && !p_zero.is_negative() && !p_plus.is_negative());
    debug_assert_eq!(&p_minus + &p_zero + &p_plus, BigRational::one());
    Ok(CouponStepProbs {
        j: j as usize,
        p_minus,
        p_zero,
        p_plus,
    })
}

/// Exact eigenvalue recurrence `λ_{s,t} = p_{s,0} λ_{s,t-1} + p_{s,-1} λ_{s-1,t-1}
/// + p_{s,+1} λ_{s+1,t-1}`, stepped one `t` at a time.
///
/// All values share the denominator `L^t`, where `L` is the lcm of the
/// coefficient denominators, so a step is pure integer arithmetic.
#[derive(Clone, Debug)]
pub struct CouponRecurrence {
    n: usize,
    k: usize,
    t: usize,
    coeff_zero: Vec<BigInt>,
    coeff_minus: Vec<BigInt>,
    coeff_plus: Vec<BigInt>,
    lcm: BigInt,
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl CouponRecurrence {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let m = check_coupon_regime(n, k)?;
        let probs = (0..=m)
            .map(|j| coupon_step_probs(n, k, j))
            .collect::<Result<Vec<_>>>()?;
        let lcm = probs.iter().fold(BigInt::one(), |acc, p| {
            acc.lcm(p.p_minus.denom())
                .lcm(p.p_zero.denom())
                .lcm(p.p_plus.denom())
        });
        let scale = |q: &BigRational| q.numer() * (&lcm / q.denom());
        let mut numerators = vec![BigInt::zero(); m + 1];
        numerators[0] = BigInt::one();
        Ok(CouponRecurrence {
            n,
            k,
            t: 0,
            coeff_zero: probs.iter().map(|p| scale(&p.p_zero)).collect(),
            coeff_minus: probs.iter().map(|p| scale(&p.p_minus)).collect(),
            coeff_plus: probs.iter().map(|p| scale(&p.p_plus)).collect(),
            lcm,
            numerators,
            denominator: BigInt::one(),
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> usize {
        self.n - self.k
    }

    /// Unreduced numerators of `λ_{s,t}` over [`Self::denominator`].
    pub fn numerators(&self) -> &[BigInt] {
        &self.numerators
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn step(&mut self) {
        let prev = &self.numerators;
        let m = prev.len() - 1;
        let next = (0..=m)
            .map(|s| {
                let mut acc = &self.coeff_zero[s] * &prev[s];
                if s >= 1 {
                    acc += &self.coeff_minus[s] * &prev[s - 1];
                }
                if s < m {
                    acc += &self.coeff_plus[s] * &prev[s + 1];
                }
                acc
            })
            .collect();
        self.numerators = next;
        self.denominator *= &self.lcm;
        self.t += 1;
    }

    pub fn eigenvalues(&self) -> Vec<BigRational> {
        self.numerators
            .iter()
            .map(|num| BigRational::new(num.clone(), self.denominator.clone()))
            .collect()
    }
}

/// Coupon spectrum `(λ_{s,t}, l_s)` for `s = 0..m`, zeros kept explicitly.
///
/// The exact tower runs the eigenvalue recurrence; the float tower runs the
/// equivalent recurrence for the weights `l_s λ_{s,t}` (which stay in `[0,1]`)
/// and divides by `l_s` in the log domain.
pub fn coupon_spectrum(n: usize, k: usize, t: usize, tower: Tower) -> Result<Spectrum> {
    let params = EnsembleParams::coupon(n, k, t)?;
    let m = check_coupon_regime(n, k)?;
    let mults = (0..=m)
        .map(|s| johnson_multiplicity(n as u64, s as u64))
        .collect::<Result<Vec<_>>>()?;
    let eigenvalues: Vec<Eigenvalue> = match tower {
        Tower::Exact => {
            let mut rec = CouponRecurrence::new(n, k)?;
            for _ in 0..t {
                rec.step();
            }
            rec.eigenvalues().into_iter().map(Eigenvalue::Exact).collect()
        }
        Tower::Float => {
            let weights = coupon_weights_f64(n, k, t)?;
            weights
                .iter()
                .zip(&mults)
                .map(|(&w, l)| {
                    Eigenvalue::Float(LogReal::from_f64(w) / LogReal::from_biguint(l))
                })
                .collect()
        }
    };
    let entries = eigenvalues
        .into_iter()
        .zip(mults)
        .enumerate()
        .map(|(s, (eigenvalue, multiplicity))| SpectrumEntry {
            index: s,
            eigenvalue,
            multiplicity,
        })
        .collect();
    Ok(Spectrum {
        params,
        entries,
        tower,
    })
}

/// `l_s λ_{s,t}` in double precision via
/// `w_{s,t} = p_{s,0} w_{s,t-1} + p_{s-1,+1} w_{s-1,t-1} + p_{s+1,-1} w_{s+1,t-1}`.
pub fn coupon_weights_f64(n: usize, k: usize, t: usize) -> Result<Vec<f64>> {
    let m = check_coupon_regime(n, k)?;
    let probs: Vec<[f64; 3]> = (0..=m)
        .map(|j| {
            coupon_step_probs(n, k, j).map(|p| {
                [
                    rational_to_f64(&p.p_minus),
                    rational_to_f64(&p.p_zero),
                    rational_to_f64(&p.p_plus),
                ]
            })
        })
        .collect::<Result<_>>()?;
    let mut w = vec![0.0; m + 1];
    w[0] = 1.0;
    let mut next = vec![0.0; m + 1];
    for _ in 0..t {
        for s in 0..=m {
            let mut acc = probs[s][1] * w[s];
            if s >= 1 {
                acc += probs[s - 1][2] * w[s - 1];
            }
            if s < m {
                acc += probs[s + 1][0] * w[s + 1];
            }
            next[s] = acc;
        }
        std::mem::swap(&mut w, &mut next);
    }
    Ok(w)
}
