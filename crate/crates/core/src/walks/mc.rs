//! Monte Carlo for walks, and the threshold coupling of two walks.
//!
//! Trial `i` of a run with seed `s` uses its own `XorShiftRng` (Marsaglia's
//! xorshift128, shifts 11/8/19) seeded from `trial_seed(s, i)`, a SplitMix64
//! mix. Results are therefore independent of the thread schedule.

use rand::{Rng, SeedableRng};
use rand_xorshift::XorShiftRng;
use rayon::prelude::*;

use super::{Distribution, Step, WalkSpec};
use crate::error::{domain, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output for counter `trial + 1` of stream `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, trial: u64) -> XorShiftRng {
    XorShiftRng::seed_from_u64(trial_seed(seed, trial))
}

/// One move driven by the uniform `h`: left if `h <= q(-1)`, right if
/// `h > 1 - q(+1)`, otherwise stay.
fn threshold_move(step: &Step<f64>, s: i64, h: f64) -> i64 {
    if h <= step.minus {
        s - 1
    } else if h > 1.0 - step.plus {
        s + 1
    } else {
        s
    }
}

/// Empirical law of the walk at time `t`.
pub fn walk_mc(spec: &WalkSpec<f64>, t: usize, trials: usize, seed: u64) -> Result<Distribution<f64>> {
    if trials == 0 {
        return Err(domain!("walk_mc needs at least one trial"));
    }
    let finals: Vec<i64> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_for(seed, trial);
            let mut s = spec.start;
            for time in 0..t {
                let h: f64 = rng.random();
                s = threshold_move(&spec.step(time, s), s, h);
            }
            s
        })
        .collect();
    let mut probs = vec![0.0; spec.width()];
    for s in finals {
        probs[(s - spec.lo) as usize] += 1.0;
    }
    for p in &mut probs {
        *p /= trials as f64;
    }
    Ok(Distribution {
        offset: spec.lo,
        probs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoupledReport {
    pub trials: usize,
    /// Trials in which `A_s >= B_s` held at every time `s <= t`.
    pub ordered: usize,
    /// First trial and time at which the order broke.
    pub first_inversion: Option<(usize, usize)>,
}

impl CoupledReport {
    pub fn ordered_fraction(&self) -> f64 {
        self.ordered as f64 / self.trials as f64
    }

    pub fn inversion_fraction(&self) -> f64 {
        1.0 - self.ordered_fraction()
    }
}

/// Drives both walks with one shared uniform per step.
pub fn coupled_mc(
    a: &WalkSpec<f64>,
    b: &WalkSpec<f64>,
    t: usize,
    trials: usize,
    seed: u64,
) -> Result<CoupledReport> {
    if trials == 0 {
        return Err(domain!("coupled_mc needs at least one trial"));
    }
    let results: Vec<Option<usize>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_for(seed, trial);
            let (mut x, mut y) = (a.start, b.start);
            if x < y {
                return Some(0);
            }
            for time in 0..t {
                let h: f64 = rng.random();
                x = threshold_move(&a.step(time, x), x, h);
                y = threshold_move(&b.step(time, y), y, h);
                if x < y {
                    return Some(time + 1);
                }
            }
            None
        })
        .collect();
    let first_inversion = results
        .iter()
        .enumerate()
        .find_map(|(i, r)| r.map(|time| (i, time)));
    Ok(CoupledReport {
        trials,
        ordered: results.iter().filter(|r| r.is_none()).count(),
        first_inversion,
    })
}
