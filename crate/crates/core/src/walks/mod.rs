//! Birth-death walks on integer intervals: the coupon walk `W`, the
//! coupon-marking walk `W̃(n')`, and the difference `W'' - V''`.
//!
//! Distributions are computed by forward dynamic programming, either exactly
//! (`BigRational`) or in double precision. Homogeneous exact walks can also be
//! stepped over a shared denominator with [`ExactWalkStepper`].

mod domination;
mod estimates;
mod mc;

pub use domination::{dominates_cdf, domination_sufficient, CdfDomination, SufficientCheck};
pub use estimates::{wt_estimates, wt_mean_exact, WtEstimates};
pub use mc::{coupled_mc, trial_seed, walk_mc, CoupledReport};

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::combinatorics::rational_to_f64;
use crate::error::{domain, Error, Result};
use crate::spectra::coupon_step_probs;

/// Probability scalar: exact rationals or doubles.
pub trait Prob:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
{
    fn from_rational(q: &BigRational) -> Self;
    fn from_i64(x: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Tolerance used when checking that step probabilities sum to one.
    fn sum_tolerance() -> f64;
}

impl Prob for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn from_i64(x: i64) -> Self {
        BigRational::from_integer(x.into())
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn sum_tolerance() -> f64 {
        0.0
    }
}

impl Prob for f64 {
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sum_tolerance() -> f64 {
        1e-12
    }
}

/// Probabilities of stepping by -1, 0, +1.
#[derive(Clone, Debug, PartialEq)]
pub struct Step<P> {
    pub minus: P,
    pub zero: P,
    pub plus: P,
}

impl<P: Prob> Step<P> {
    pub fn stay() -> Self {
        Step {
            minus: P::zero(),
            zero: P::one(),
            plus: P::zero(),
        }
    }

    fn map<Q>(&self, f: impl Fn(&P) -> Q) -> Step<Q> {
        Step {
            minus: f(&self.minus),
            zero: f(&self.zero),
            plus: f(&self.plus),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepTable<P> {
    /// `steps[s - lo]`
    Homogeneous(Vec<Step<P>>),
    /// `steps[t][s - lo]` is the transition from time `t` to `t + 1`.
    TimeDependent(Vec<Vec<Step<P>>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkSpec<P> {
    pub label: String,
    pub lo: i64,
    pub hi: i64,
    pub start: i64,
    pub table: StepTable<P>,
}

fn validate_step<P: Prob>(step: &Step<P>, s: i64, lo: i64, hi: i64) -> Result<()> {
    let zero = P::zero();
    if step.minus < zero || step.zero < zero || step.plus < zero {
        return Err(domain!("negative step probability at state {s}"));
    }
    let total = step.minus.clone() + step.zero.clone() + step.plus.clone();
    if (total.to_f64() - 1.0).abs() > P::sum_tolerance() || (P::sum_tolerance() == 0.0 && total != P::one()) {
        return Err(domain!("step probabilities at state {s} sum to {:?}", total));
    }
    if s == lo && step.minus != zero {
        return Err(domain!("left step out of the interval at state {s}"));
    }
    if s == hi && step.plus != zero {
        return Err(domain!("right step out of the interval at state {s}"));
    }
    Ok(())
}

impl<P: Prob> WalkSpec<P> {
    pub fn homogeneous(label: &str, lo: i64, hi: i64, start: i64, steps: Vec<Step<P>>) -> Result<Self> {
        if hi < lo || !(lo..=hi).contains(&start) {
            return Err(domain!("bad interval [{lo}, {hi}] with start {start}"));
        }
        if steps.len() as i64 != hi - lo + 1 {
            return Err(Error::Contract(format!(
                "{} steps for an interval of width {}",
                steps.len(),
                hi - lo + 1
            )));
        }
        for (i, st) in steps.iter().enumerate() {
            validate_step(st, lo + i as i64, lo, hi)?;
        }
        Ok(WalkSpec {
            label: label.to_string(),
            lo,
            hi,
            start,
            table: StepTable::Homogeneous(steps),
        })
    }

    pub fn time_dependent(
        label: &str,
        lo: i64,
        hi: i64,
        start: i64,
        steps: Vec<Vec<Step<P>>>,
    ) -> Result<Self> {
        if hi < lo || !(lo..=hi).contains(&start) {
            return Err(domain!("bad interval [{lo}, {hi}] with start {start}"));
        }
        for row in &steps {
            if row.len() as i64 != hi - lo + 1 {
                return Err(Error::Contract("time slice has the wrong width".into()));
            }
            for (i, st) in row.iter().enumerate() {
                validate_step(st, lo + i as i64, lo, hi)?;
            }
        }
        Ok(WalkSpec {
            label: label.to_string(),
            lo,
            hi,
            start,
            table: StepTable::TimeDependent(steps),
        })
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self.table, StepTable::TimeDependent(_))
    }

    pub fn width(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    /// Transition out of state `s` between times `t` and `t + 1`. States outside
    /// the interval, or times past a time-dependent table, hold still.
    pub fn step(&self, t: usize, s: i64) -> Step<P> {
        if s < self.lo || s > self.hi {
            return Step::stay();
        }
        let i = (s - self.lo) as usize;
        match &self.table {
            StepTable::Homogeneous(steps) => steps[i].clone(),
            StepTable::TimeDependent(rows) => rows.get(t).map_or_else(Step::stay, |r| r[i].clone()),
        }
    }

    fn step_ref(&self, t: usize, i: usize) -> Option<&Step<P>> {
        match &self.table {
            StepTable::Homogeneous(steps) => Some(&steps[i]),
            StepTable::TimeDependent(rows) => rows.get(t).map(|r| &r[i]),
        }
    }

    /// Same walk on `[lo, hi]` for a smaller `lo`; the new states hold still.
    pub fn extended_down(&self, lo: i64) -> Result<Self> {
        if lo > self.lo {
            return Err(domain!("extended_down needs lo <= {} (got {lo})", self.lo));
        }
        let pad = (self.lo - lo) as usize;
        let widen = |row: &[Step<P>]| {
            let mut out = vec![Step::stay(); pad];
            out.extend_from_slice(row);
            out
        };
        let table = match &self.table {
            StepTable::Homogeneous(steps) => StepTable::Homogeneous(widen(steps)),
            StepTable::TimeDependent(rows) => StepTable::TimeDependent(rows.iter().map(|r| widen(r)).collect()),
        };
        Ok(WalkSpec {
            label: self.label.clone(),
            lo,
            hi: self.hi,
            start: self.start,
            table,
        })
    }

    pub fn with_step(mut self, t: usize, s: i64, step: Step<P>) -> Result<Self> {
        validate_step(&step, s, self.lo, self.hi)?;
        let i = (s - self.lo) as usize;
        match &mut self.table {
            StepTable::Homogeneous(steps) => steps[i] = step,
            StepTable::TimeDependent(rows) => {
                let row = rows
                    .get_mut(t)
                    .ok_or_else(|| domain!("time {t} outside the table"))?;
                row[i] = step;
            }
        }
        Ok(self)
    }
}

impl WalkSpec<BigRational> {
    pub fn to_f64(&self) -> WalkSpec<f64> {
        let conv = |st: &Step<BigRational>| st.map(rational_to_f64);
        WalkSpec {
            label: self.label.clone(),
            lo: self.lo,
            hi: self.hi,
            start: self.start,
            table: match &self.table {
                StepTable::Homogeneous(s) => StepTable::Homogeneous(s.iter().map(conv).collect()),
                StepTable::TimeDependent(rows) => StepTable::TimeDependent(
                    rows.iter().map(|r| r.iter().map(conv).collect()).collect(),
                ),
            },
        }
    }
}

/// Distribution on the integers `offset, offset + 1, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<P> {
    pub offset: i64,
    pub probs: Vec<P>,
}

impl<P: Prob> Distribution<P> {
    pub fn point(at: i64) -> Self {
        Distribution {
            offset: at,
            probs: vec![P::one()],
        }
    }

    pub fn prob(&self, s: i64) -> P {
        if s < self.offset {
            return P::zero();
        }
        self.probs
            .get((s - self.offset) as usize)
            .cloned()
            .unwrap_or_else(P::zero)
    }

    pub fn max_state(&self) -> i64 {
        self.offset + self.probs.len() as i64 - 1
    }

    pub fn total(&self) -> P {
        self.probs.iter().cloned().fold(P::zero(), |a, b| a + b)
    }

    pub fn mean(&self) -> P {
        self.probs
            .iter()
            .enumerate()
            .fold(P::zero(), |acc, (i, p)| {
                acc + P::from_i64(self.offset + i as i64) * p.clone()
            })
    }

    /// `Pr[X >= i]`.
    pub fn upper_tail(&self, i: i64) -> P {
        let from = (i - self.offset).max(0) as usize;
        self.probs
            .iter()
            .skip(from)
            .cloned()
            .fold(P::zero(), |a, b| a + b)
    }

    /// Smallest and largest states with nonzero mass.
    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.probs.iter().position(|p| !p.is_zero())?;
        let last = self.probs.iter().rposition(|p| !p.is_zero())?;
        Some((self.offset + first as i64, self.offset + last as i64))
    }

    pub fn to_f64(&self) -> Distribution<f64> {
        Distribution {
            offset: self.offset,
            probs: self.probs.iter().map(P::to_f64).collect(),
        }
    }

    pub fn tv_distance(&self, other: &Distribution<P>) -> f64 {
        let lo = self.offset.min(other.offset);
        let hi = self.max_state().max(other.max_state());
        0.5 * (lo..=hi)
            .map(|s| (self.prob(s).to_f64() - other.prob(s).to_f64()).abs())
            .sum::<f64>()
    }
}

/// Forward DP; element `t` of the result is the law of the walk at time `t`.
pub fn walk_dp<P: Prob>(spec: &WalkSpec<P>, t: usize) -> Vec<Distribution<P>> {
    let width = spec.width();
    let mut cur = vec![P::zero(); width];
    cur[(spec.start - spec.lo) as usize] = P::one();
    let mut out = Vec::with_capacity(t + 1);
    out.push(Distribution {
        offset: spec.lo,
        probs: cur.clone(),
    });
    for time in 0..t {
        let mut next = vec![P::zero(); width];
        for (i, p) in cur.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            match spec.step_ref(time, i) {
                Some(st) => {
                    if !st.zero.is_zero() {
                        next[i] = next[i].clone() + p.clone() * st.zero.clone();
                    }
                    if !st.minus.is_zero() {
                        next[i - 1] = next[i - 1].clone() + p.clone() * st.minus.clone();
                    }
                    if !st.plus.is_zero() {
                        next[i + 1] = next[i + 1].clone() + p.clone() * st.plus.clone();
                    }
                }
                None => next[i] = next[i].clone() + p.clone(),
            }
        }
        cur = next;
        out.push(Distribution {
            offset: spec.lo,
            probs: cur.clone(),
        });
    }
    out
}

/// `W̃(n')`: birth-only walk on `[0, m]`, moving up from `s` with probability
/// `(m - s)/n'`.
pub fn coupon_walk_spec(n_prime: usize, m: usize) -> Result<WalkSpec<BigRational>> {
    if m < 1 || n_prime < m {
        return Err(domain!("coupon walk needs n' >= m >= 1 (n'={n_prime}, m={m})"));
    }
    let steps = (0..=m)
        .map(|s| {
            let up = BigRational::new(BigInt::from(m - s), BigInt::from(n_prime));
            Step {
                minus: BigRational::zero(),
                zero: BigRational::one() - &up,
                plus: up,
            }
        })
        .collect();
    WalkSpec::homogeneous(&format!("approx({n_prime},{m})"), 0, m as i64, 0, steps)
}

/// The walk `W` on `[0, m]` driven by the coupon step probabilities.
pub fn w_walk_spec(n: usize, k: usize) -> Result<WalkSpec<BigRational>> {
    if k >= n {
        return Err(domain!("w walk needs k < n"));
    }
    let m = n - k;
    let steps = (0..=m)
        .map(|j| {
            coupon_step_probs(n, k, j).map(|p| Step {
                minus: p.p_minus,
                zero: p.p_zero,
                plus: p.p_plus,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    WalkSpec::homogeneous(&format!("w({n},{k})"), 0, m as i64, 0, steps)
}

/// Exact DP for a homogeneous rational walk with every value kept over the
/// shared denominator `L^t` (`L` the lcm of the step denominators).
#[derive(Clone, Debug)]
pub struct ExactWalkStepper {
    lo: i64,
    t: usize,
    minus: Vec<BigInt>,
    zero: Vec<BigInt>,
    plus: Vec<BigInt>,
    lcm: BigInt,
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl ExactWalkStepper {
    pub fn new(spec: &WalkSpec<BigRational>) -> Result<Self> {
        let StepTable::Homogeneous(steps) = &spec.table else {
            return Err(Error::Unsupported("exact stepping needs a homogeneous walk".into()));
        };
        let lcm = steps.iter().fold(BigInt::one(), |acc, st| {
            acc.lcm(st.minus.denom()).lcm(st.zero.denom()).lcm(st.plus.denom())
        });
        let scale = |q: &BigRational| q.numer() * (&lcm / q.denom());
        let mut numerators = vec![BigInt::zero(); steps.len()];
        numerators[(spec.start - spec.lo) as usize] = BigInt::one();
        Ok(ExactWalkStepper {
            lo: spec.lo,
            t: 0,
            minus: steps.iter().map(|s| scale(&s.minus)).collect(),
            zero: steps.iter().map(|s| scale(&s.zero)).collect(),
            plus: steps.iter().map(|s| scale(&s.plus)).collect(),
            lcm,
            numerators,
            denominator: BigInt::one(),
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.numerators
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn step(&mut self) {
        let w = self.numerators.len();
        let prev = &self.numerators;
        let next = (0..w)
            .map(|i| {
                let mut acc = &self.zero[i] * &prev[i];
                if i >= 1 && !self.plus[i - 1].is_zero() {
                    acc += &self.plus[i - 1] * &prev[i - 1];
                }
                if i + 1 < w && !self.minus[i + 1].is_zero() {
                    acc += &self.minus[i + 1] * &prev[i + 1];
                }
                acc
            })
            .collect();
        self.numerators = next;
        self.denominator *= &self.lcm;
        self.t += 1;
    }

    pub fn distribution(&self) -> Distribution<BigRational> {
        Distribution {
            offset: self.lo,
            probs: self
                .numerators
                .iter()
                .map(|n| BigRational::new(n.clone(), self.denominator.clone()))
                .collect(),
        }
    }
}

fn approx_walk_series<P: Prob>(n: usize, m: usize, horizon: usize) -> Result<Vec<Distribution<P>>> {
    let spec = coupon_walk_spec(n, m)?;
    let steps: Vec<Step<P>> = match &spec.table {
        StepTable::Homogeneous(s) => s.iter().map(|st| st.map(P::from_rational)).collect(),
        StepTable::TimeDependent(_) => unreachable!(),
    };
    let spec = WalkSpec {
        label: spec.label,
        lo: spec.lo,
        hi: spec.hi,
        start: spec.start,
        table: StepTable::Homogeneous(steps),
    };
    Ok(walk_dp(&spec, horizon))
}

/// Laws of `V''_t` for `t = 0..=horizon`: a counter incremented with
/// probability `m²/n²` each step (support truncated at `t`).
fn v_series<P: Prob>(n: usize, m: usize, horizon: usize) -> Vec<Vec<P>> {
    let q = P::from_rational(&BigRational::new(
        BigInt::from(m * m),
        BigInt::from(n * n),
    ));
    let stay = P::one() - q.clone();
    let mut out = Vec::with_capacity(horizon + 1);
    let mut cur = vec![P::one()];
    out.push(cur.clone());
    for _ in 0..horizon {
        let mut next = vec![P::zero(); cur.len() + 1];
        for (r, p) in cur.iter().enumerate() {
            next[r] = next[r].clone() + p.clone() * stay.clone();
            next[r + 1] = next[r + 1].clone() + p.clone() * q.clone();
        }
        cur = next;
        out.push(cur.clone());
    }
    out
}

fn check_diff_params(n: usize, m: usize) -> Result<()> {
    if m < 1 || n <= m {
        return Err(domain!("difference walk needs m >= 1 and n > m (n={n}, m={m})"));
    }
    Ok(())
}

/// Laws of `W''_t - V''_t` for `t = 0..=horizon`, where `W'' = W̃(n)` and
/// `V''` are independent; each law lives on `[-t, m]`.
pub fn diff_walk_series<P: Prob>(n: usize, m: usize, horizon: usize) -> Result<Vec<Distribution<P>>> {
    check_diff_params(n, m)?;
    let w = approx_walk_series::<P>(n, m, horizon)?;
    let v = v_series::<P>(n, m, horizon);
    Ok(w.iter()
        .zip(&v)
        .enumerate()
        .map(|(t, (wd, vd))| {
            let offset = -(t as i64);
            let mut probs = vec![P::zero(); t + m + 1];
            for (s, ps) in wd.probs.iter().enumerate() {
                if ps.is_zero() {
                    continue;
                }
                for (r, pr) in vd.iter().enumerate() {
                    let x = s as i64 - r as i64;
                    let i = (x - offset) as usize;
                    probs[i] = probs[i].clone() + ps.clone() * pr.clone();
                }
            }
            Distribution { offset, probs }
        })
        .collect())
}

/// Law of `W''_t - V''_t` at a single time.
pub fn diff_walk_dp<P: Prob>(n: usize, m: usize, t: usize) -> Result<Distribution<P>> {
    Ok(diff_walk_series::<P>(n, m, t)?.pop().unwrap())
}

/// A time-dependent chain on `[-horizon, m]` whose one-time marginals equal
/// those of `W'' - V''`: from difference `x` at time `t` it steps with the
/// transition of the pair `(s, r)`, averaged over the conditional law of `r`
/// given `s - r = x`.
pub fn diff_mixture_spec<P: Prob>(n: usize, m: usize, horizon: usize) -> Result<WalkSpec<P>> {
    check_diff_params(n, m)?;
    let w = approx_walk_series::<P>(n, m, horizon)?;
    let v = v_series::<P>(n, m, horizon);
    let q = P::from_rational(&BigRational::new(
        BigInt::from(m * m),
        BigInt::from(n * n),
    ));
    let lo = -(horizon as i64);
    let width = horizon + m + 1;
    let inv_n = P::from_rational(&BigRational::new(BigInt::one(), BigInt::from(n)));
    let mut rows = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let mut mass = vec![P::zero(); width];
        let mut down = vec![P::zero(); width];
        let mut up = vec![P::zero(); width];
        for (s, ps) in w[t].probs.iter().enumerate() {
            if ps.is_zero() {
                continue;
            }
            let birth = P::from_i64((m - s) as i64) * inv_n.clone();
            let p_down = (P::one() - birth.clone()) * q.clone();
            let p_up = birth * (P::one() - q.clone());
            for (r, pr) in v[t].iter().enumerate() {
                let weight = ps.clone() * pr.clone();
                if weight.is_zero() {
                    continue;
                }
                let i = (s as i64 - r as i64 - lo) as usize;
                mass[i] = mass[i].clone() + weight.clone();
                down[i] = down[i].clone() + weight.clone() * p_down.clone();
                up[i] = up[i].clone() + weight * p_up.clone();
            }
        }
        let row = (0..width)
            .map(|i| {
                if mass[i].is_zero() {
                    return Step::stay();
                }
                let minus = div_prob(&down[i], &mass[i]);
                let plus = div_prob(&up[i], &mass[i]);
                let zero = P::one() - minus.clone() - plus.clone();
                Step { minus, zero, plus }
            })
            .collect();
        rows.push(row);
    }
    let mut spec = WalkSpec {
        label: format!("diff({n},{m})"),
        lo,
        hi: m as i64,
        start: 0,
        table: StepTable::TimeDependent(rows),
    };
    // rounding can leave a tiny negative stay probability in the float tower
    if let StepTable::TimeDependent(rows) = &mut spec.table {
        for row in rows.iter_mut() {
            for st in row.iter_mut() {
                if st.zero < P::zero() {
                    st.zero = P::zero();
                }
            }
        }
    }
    Ok(spec)
}

fn div_prob<P: Prob>(num: &P, den: &P) -> P {
    let r = num.clone() / den.clone();
    if r < P::zero() {
        P::zero()
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{johnson_multiplicity, ratio};
    use crate::spectra::{coupon_spectrum, Tower};

    #[test]
    fn approx_walk_examples() {
        let spec = coupon_walk_spec(2, 1).unwrap();
        assert_eq!(spec.step(0, 0).plus, ratio(1, 2));
        assert_eq!(spec.step(0, 1), Step::stay());
        let d = walk_dp(&coupon_walk_spec(5, 2).unwrap(), 1);
        assert_eq!(d[1].prob(1), ratio(2, 5));
        assert_eq!(d[1].prob(0), ratio(3, 5));
        assert_eq!(d[0], Distribution { offset: 0, probs: vec![ratio(1, 1), ratio(0, 1), ratio(0, 1)] });
        assert!(coupon_walk_spec(1, 2).is_err());
    }

    #[test]
    fn w_walk_examples() {
        let spec = w_walk_spec(3, 2).unwrap();
        let s0 = spec.step(0, 0);
        assert_eq!((s0.minus, s0.zero, s0.plus), (ratio(0, 1), ratio(2, 3), ratio(1, 3)));
        let d = walk_dp(&spec, 1);
        assert_eq!(d[0].prob(0), ratio(1, 1));
        assert_eq!(d[1].probs, vec![ratio(2, 3), ratio(1, 3)]);
        let spec = coupon_spectrum(3, 2, 1, Tower::Exact).unwrap();
        let l1 = BigRational::from_integer(johnson_multiplicity(3, 1).unwrap().into());
        assert_eq!(d[1].prob(1), l1 * spec.entries[1].eigenvalue.as_exact().unwrap());
    }

    #[test]
    fn stepper_matches_plain_dp() {
        let spec = w_walk_spec(11, 7).unwrap();
        let plain = walk_dp(&spec, 25);
        let mut st = ExactWalkStepper::new(&spec).unwrap();
        for d in plain.iter().skip(1) {
            st.step();
            assert_eq!(&st.distribution(), d);
            assert_eq!(d.total(), BigRational::one());
        }
    }

    #[test]
    fn walk_mass_matches_eigenvalues_small() {
        for n in 3..=12usize {
            for k in (n + 1) / 2..n {
                let m = n - k;
                let dists = walk_dp(&w_walk_spec(n, k).unwrap(), 12);
                for (t, d) in dists.iter().enumerate() {
                    let spec = coupon_spectrum(n, k, t, Tower::Exact).unwrap();
                    for s in 0..=m {
                        let l = BigRational::from_integer(johnson_multiplicity(n as u64, s as u64).unwrap().into());
                        let lam = spec.entries[s].eigenvalue.as_exact().unwrap();
                        assert_eq!(d.prob(s as i64), l * lam, "n={n} k={k} t={t} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn w_mean_nondecreasing() {
        for &(n, k) in &[(20usize, 15usize), (40, 30), (12, 6)] {
            let dists = walk_dp(&w_walk_spec(n, k).unwrap().to_f64(), 200);
            for w in dists.windows(2) {
                assert!(w[1].mean() >= w[0].mean() - 1e-12);
            }
        }
    }

    #[test]
    fn diff_walk_properties() {
        let d0 = diff_walk_dp::<BigRational>(10, 2, 0).unwrap();
        assert_eq!(d0.support(), Some((0, 0)));
        assert_eq!(d0.total(), BigRational::one());
        let (n, m, t) = (10usize, 3usize, 7usize);
        let d = diff_walk_dp::<BigRational>(n, m, t).unwrap();
        assert_eq!(d.total(), BigRational::one());
        assert_eq!(d.offset, -(t as i64));
        assert_eq!(d.max_state(), m as i64);
        // mean by linearity of the two closed forms
        let one_minus = BigRational::one() - ratio(1, n as i64);
        let expected = BigRational::from_integer(m.into())
            * (BigRational::one() - num_traits::pow::pow(one_minus, t))
            - ratio((t * m * m) as i64, (n * n) as i64);
        assert_eq!(d.mean(), expected);
        // top state needs V'' = 0 and W'' = m
        let w = walk_dp(&coupon_walk_spec(n, m).unwrap(), t);
        let v0 = num_traits::pow::pow(BigRational::one() - ratio((m * m) as i64, (n * n) as i64), t);
        assert_eq!(d.prob(m as i64), v0 * w[t].prob(m as i64));
    }

    #[test]
    fn mixture_spec_reproduces_marginals() {
        let (n, m, horizon) = (12usize, 2usize, 15usize);
        let spec = diff_mixture_spec::<BigRational>(n, m, horizon).unwrap();
        let via_chain = walk_dp(&spec, horizon);
        let direct = diff_walk_series::<BigRational>(n, m, horizon).unwrap();
        for (a, b) in via_chain.iter().zip(&direct) {
            for x in -(horizon as i64)..=m as i64 {
                assert_eq!(a.prob(x), b.prob(x));
            }
        }
        let fspec = diff_mixture_spec::<f64>(n, m, horizon).unwrap();
        let fchain = walk_dp(&fspec, horizon);
        for (a, b) in fchain.iter().zip(&direct) {
            assert!(a.tv_distance(&b.to_f64()) < 1e-13);
        }
    }

    #[test]
    fn spec_validation() {
        let bad = vec![Step { minus: 0.5, zero: 0.5, plus: 0.0 }];
        assert!(WalkSpec::homogeneous("x", 0, 0, 0, bad).is_err());
        let unnormalized = vec![Step { minus: 0.0, zero: 0.7, plus: 0.0 }];
        assert!(WalkSpec::homogeneous("x", 0, 0, 0, unnormalized).is_err());
        assert!(WalkSpec::<f64>::homogeneous("x", 0, 1, 0, vec![]).is_err());
    }
}
