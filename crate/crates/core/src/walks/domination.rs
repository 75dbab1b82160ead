use num_rational::BigRational;

use super::{walk_dp, Distribution, Prob, WalkSpec};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CdfDomination {
    pub dominates: bool,
    /// Minimum of `Pr[A_t >= i] - Pr[B_t >= i]` over all `(t, i)`.
    pub worst_margin: f64,
    /// `(t, i)` where the minimum is attained.
    pub witness: (usize, i64),
    /// `E[A_t] >= E[B_t]` for every `t` (within the same tolerance).
    pub means_ordered: bool,
}

fn threshold<P: Prob>(tol: f64) -> P {
    P::from_rational(&BigRational::from_float(-tol.abs()).unwrap_or_default())
}

/// Checks `Pr[A_t >= i] >= Pr[B_t >= i]` for every time and state, allowing a
/// slack of `tol` (use 0 in the exact tower).
pub fn dominates_cdf<P: Prob>(
    a: &[Distribution<P>],
    b: &[Distribution<P>],
    tol: f64,
) -> Result<CdfDomination> {
    if a.len() != b.len() {
        return Err(Error::Contract(format!(
            "time horizons differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let floor = threshold::<P>(tol);
    let mut dominates = true;
    let mut means_ordered = true;
    let mut worst = f64::INFINITY;
    let mut witness = (0, 0);
    for (t, (da, db)) in a.iter().zip(b).enumerate() {
        let lo = da.offset.min(db.offset);
        let hi = da.max_state().max(db.max_state());
        let (mut tail_a, mut tail_b) = (P::zero(), P::zero());
        for i in (lo..=hi).rev() {
            tail_a = tail_a + da.prob(i);
            tail_b = tail_b + db.prob(i);
            let diff = tail_a.clone() - tail_b.clone();
            if diff < floor {
                dominates = false;
            }
            let v = diff.to_f64();
            if v < worst {
                worst = v;
                witness = (t, i);
            }
        }
        if da.mean() - db.mean() < floor {
            means_ordered = false;
        }
    }
    Ok(CdfDomination {
        dominates,
        worst_margin: worst,
        witness,
        means_ordered,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SufficientCheck {
    pub holds: bool,
    /// `(t, i, condition)` of the first failure; conditions are numbered
    /// 1: `q(i,i+1) >= q'(i,i+1)`, 2: `q(i,i-1) <= q'(i,i-1)`,
    /// 3: `q(i,i+1) + q(i,i) >= q'(i-1,i)`, 0: start states out of order.
    pub witness: Option<(usize, i64, u8)>,
    pub pairs_checked: usize,
}

/// Checks the three transition conditions under which the threshold coupling
/// keeps `A_t >= B_t`, at every state pair reachable before `horizon`.
pub fn domination_sufficient<P: Prob>(
    a: &WalkSpec<P>,
    b: &WalkSpec<P>,
    horizon: usize,
    tol: f64,
) -> SufficientCheck {
    if a.start < b.start {
        return SufficientCheck {
            holds: false,
            witness: Some((0, a.start, 0)),
            pairs_checked: 0,
        };
    }
    let floor = threshold::<P>(tol);
    let da = walk_dp(a, horizon.saturating_sub(1));
    let db = walk_dp(b, horizon.saturating_sub(1));
    let mut pairs_checked = 0;
    for t in 0..horizon {
        let (pa, pb) = (&da[t], &db[t]);
        let Some((alo, ahi)) = pa.support() else { continue };
        for i in alo..=ahi {
            if pa.prob(i).is_zero() {
                continue;
            }
            let qa = a.step(t, i);
            if !pb.prob(i).is_zero() {
                pairs_checked += 1;
                let qb = b.step(t, i);
                if qa.plus.clone() - qb.plus.clone() < floor {
                    return failure(t, i, 1, pairs_checked);
                }
                if qb.minus.clone() - qa.minus.clone() < floor {
                    return failure(t, i, 2, pairs_checked);
                }
            }
            if !pb.prob(i - 1).is_zero() {
                pairs_checked += 1;
                let qb = b.step(t, i - 1);
                if qa.plus.clone() + qa.zero.clone() - qb.plus.clone() < floor {
                    return failure(t, i, 3, pairs_checked);
                }
            }
        }
    }
    SufficientCheck {
        holds: true,
        witness: None,
        pairs_checked,
    }
}

fn failure(t: usize, i: i64, condition: u8, pairs_checked: usize) -> SufficientCheck {
    SufficientCheck {
        holds: false,
        witness: Some((t, i, condition)),
        pairs_checked,
    }
}
