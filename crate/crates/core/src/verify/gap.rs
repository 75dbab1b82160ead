//! Entropy of the coupon samples against the ceiling the learner's register
//! can carry, at `m = ⌊√n⌋` and `t = κ n`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::combinatorics::log2_binom;
use crate::error::{domain, Error, Result};
use crate::infotheory::{bound_value, spectrum_entropy, BoundKind};
use crate::spectra::{coupon_spectrum, Tower};

pub const DEFAULT_GAP_NS: [usize; 10] = [16, 25, 36, 49, 64, 100, 144, 225, 400, 900];
pub const DEFAULT_GAP_KAPPAS: [f64; 8] = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0];

/// Largest `n` whose entropy is computed in the exact tower.
const EXACT_UP_TO: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: usize,
    pub m: usize,
    pub kappa: f64,
    pub t: usize,
    /// `S(B)` in bits.
    pub entropy: f64,
    /// `log2 C(n, m)`.
    pub log2_binom: f64,
    /// `S(B) / log2 C(n, m)`.
    pub gamma: f64,
    /// Information floor, where its hypotheses `2 <= m <= n/10`, `κ < n/m` hold.
    pub floor: Option<f64>,
    /// `(1 - δ/2) log2 C(n, m)`.
    pub ceiling: f64,
    /// `S(B) - ceiling`.
    pub margin: f64,
    pub tower: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub delta: f64,
    /// `1 - δ/2`, i.e. 7/8 at `δ = 1/4`.
    pub ceiling_fraction: f64,
    pub rows: Vec<GapRow>,
    /// Smallest `n`, then smallest `κ`, with `γ` above the ceiling fraction.
    pub first: Option<GapRow>,
    /// Direction of `γ` in `n` at each `κ`: `nondecreasing`, `nonincreasing`,
    /// `constant` or `non-monotone`.
    pub gamma_trend_in_n: Vec<(f64, String)>,
    /// No `κ` has a non-monotone trend.
    pub monotone_in_n: bool,
    /// `S(B)` nondecreasing in `κ` at every `n`.
    pub monotone_in_kappa: bool,
    /// Whether every computed floor lies below the entropy.
    pub floors_hold: bool,
}

impl GapReport {
    pub fn passed(&self) -> bool {
        self.first.is_some() && self.monotone_in_n && self.monotone_in_kappa && self.floors_hold
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Contract(format!("json: {e}")))
    }
}

pub fn demo_standard_argument_gap(delta: f64, n_list: &[usize], kappas: &[f64]) -> Result<GapReport> {
    if !(delta > 0.0 && delta <= 0.25) {
        return Err(domain!("gap demo needs 0 < delta <= 1/4, got {delta}"));
    }
    if kappas.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(domain!("kappa values must be positive"));
    }
    let fraction = 1.0 - delta / 2.0;
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut ks = kappas.to_vec();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let mut rows = Vec::new();
    for &n in &ns {
        let m = n.isqrt();
        if m < 2 || 2 * m > n {
            return Err(domain!("gap demo needs floor(sqrt(n)) >= 2, got n = {n}"));
        }
        let h = log2_binom(n as u64, m as u64)?.log2_abs();
        let tower = if n <= EXACT_UP_TO { Tower::Exact } else { Tower::Float };
        for &kappa in &ks {
            let t = (kappa * n as f64).round() as usize;
            let entropy = spectrum_entropy(&coupon_spectrum(n, n - m, t, tower)?);
            let kappa_eff = t as f64 / n as f64;
            let floor = if 10 * m <= n && kappa_eff > 0.0 && kappa_eff < n as f64 / m as f64 {
                let p: BTreeMap<String, f64> =
                    [("n", n as f64), ("m", m as f64), ("kappa", kappa_eff)]
                        .into_iter()
                        .map(|(k, v)| (k.to_string(), v))
                        .collect();
                Some(bound_value(BoundKind::MiabLb, &p)?.value)
            } else {
                None
            };
            let ceiling = fraction * h;
            rows.push(GapRow {
                n,
                m,
                kappa,
                t,
                entropy,
                log2_binom: h,
                gamma: entropy / h,
                floor,
                ceiling,
                margin: entropy - ceiling,
                tower: tower.to_string(),
            });
        }
    }
    let first = rows.iter().find(|r| r.gamma > fraction).cloned();
    let tol = 1e-9;
    let cell = |n: usize, kappa: f64| rows.iter().find(|r| r.n == n && r.kappa == kappa);
    let gamma_trend_in_n: Vec<(f64, String)> = ks
        .iter()
        .map(|&kappa| {
            let g: Vec<f64> = ns.iter().map(|&n| cell(n, kappa).unwrap().gamma).collect();
            let up = g.windows(2).all(|w| w[1] >= w[0] - tol);
            let down = g.windows(2).all(|w| w[1] <= w[0] + tol);
            let trend = match (up, down) {
                (true, true) => "constant",
                (true, false) => "nondecreasing",
                (false, true) => "nonincreasing",
                (false, false) => "non-monotone",
            };
            (kappa, trend.to_string())
        })
        .collect();
    let monotone_in_n = gamma_trend_in_n.iter().all(|(_, t)| t != "non-monotone");
    let monotone_in_kappa = ns.iter().all(|&n| {
        ks.windows(2)
            .all(|w| cell(n, w[1]).unwrap().entropy >= cell(n, w[0]).unwrap().entropy - tol)
    });
    let floors_hold = rows
        .iter()
        .all(|r| r.floor.is_none_or(|f| r.entropy >= f - tol));
    Ok(GapReport {
        delta,
        ceiling_fraction: fraction,
        rows,
        first,
        gamma_trend_in_n,
        monotone_in_n,
        monotone_in_kappa,
        floors_hold,
    })
}
