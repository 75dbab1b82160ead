//! Closed-form bound expressions, looked up by name.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, LOG2_E};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binary_entropy, log2_binom};
use crate::error::{domain, Error, Result};
use crate::spectra::agnostic_alpha;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `(1 - h(3/8)) d`. Params: `d`.
    PacMiLb,
    /// `d h(6ν) + d exp(-2νd)`, `0 < ν <= 1/12`. Params: `d`, `nu`.
    PacEntropyUb,
    /// `log2(d+1) + d h(3ν/4) + d exp(-αt/10)` with `ν = 2αt/d < 1/2`.
    /// Params: `d`, `eps`, `t`.
    AgnEntropyUb,
    /// `(1 - δ(1 - e^{-2c})) log2 C(n,k)`. Params: `n`, `k`, `c`, `delta`.
    MiUb,
    /// `(1 - d/k)^{2ck}`, chance a wrong guess survives the check.
    /// Params: `d`, `k`, `c`.
    VerifyAccept,
    /// `exp(-2cd)`. Params: `d`, `c`.
    VerifyAcceptUb,
    /// `(1 - e^{-κ} - κm/n) log2 C(n,m) - 1`, for `2 <= m <= n/10`,
    /// `0 < κ < n/m`. Params: `n`, `m`, `kappa`.
    MiabLb,
    /// `log2 C(n,m) - (log2 n - log2 m - (2m/n) log2 e) min{e^{-2c}, e^{-c/3}}
    /// + log2(m+1)`, for `1 <= m <= n/40`, `m ln m <= |c| n/10`.
    /// Params: `n`, `m`, `c`.
    MiabUb,
    /// `log2 C(n,m) - Δ(log2 k + log2 m) - log2(m+1)`.
    /// Params: `n`, `m`, `k`, `delta_mm`.
    MismatchMiFloor,
    /// Left side minus right side of the approximation inequality
    /// `-((1-α) log2 n - 2 n^{α-1} log2 e) min{e^{-2c}, e^{-c/3}}
    /// + 2α log2 n + 2 + αΔ log2 n >= -Δ log2 n`.
    /// Params: `n`, `alpha`, `c`, `delta_mm`.
    MmBds,
    /// `½ ln((1-δ)/(32δ))` in nats, `0 < δ <= 1/40`. Params: `delta`.
    QccC0,
    /// `√(v(1-w)) + √(w(1-v))`. Params: `v`, `w`.
    QccVw,
    /// `min{c₀/20, δ ln 2} - (ln k)/k`; nonnegative when the general
    /// coupon lower bound applies. Params: `k`, `delta`.
    CorThreshold,
}

pub const ALL_KINDS: [BoundKind; 13] = [
    BoundKind::PacMiLb,
    BoundKind::PacEntropyUb,
    BoundKind::AgnEntropyUb,
    BoundKind::MiUb,
    BoundKind::VerifyAccept,
    BoundKind::VerifyAcceptUb,
    BoundKind::MiabLb,
    BoundKind::MiabUb,
    BoundKind::MismatchMiFloor,
    BoundKind::MmBds,
    BoundKind::QccC0,
    BoundKind::QccVw,
    BoundKind::CorThreshold,
];

impl BoundKind {
    pub fn all() -> &'static [BoundKind] {
        &ALL_KINDS
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::PacMiLb => "pac_mi_lb",
            BoundKind::PacEntropyUb => "pac_entropy_ub",
            BoundKind::AgnEntropyUb => "agn_entropy_ub",
            BoundKind::MiUb => "mi_ub",
            BoundKind::VerifyAccept => "verify_accept",
            BoundKind::VerifyAcceptUb => "verify_accept_ub",
            BoundKind::MiabLb => "miab_lb",
            BoundKind::MiabUb => "miab_ub",
            BoundKind::MismatchMiFloor => "mismatch_mi_floor",
            BoundKind::MmBds => "mm_bds",
            BoundKind::QccC0 => "qcc_c0",
            BoundKind::QccVw => "qcc_vw",
            BoundKind::CorThreshold => "cor_threshold",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            BoundKind::PacMiLb => &["d"],
            BoundKind::PacEntropyUb => &["d", "nu"],
            BoundKind::AgnEntropyUb => &["d", "eps", "t"],
            BoundKind::MiUb => &["n", "k", "c", "delta"],
            BoundKind::VerifyAccept => &["d", "k", "c"],
            BoundKind::VerifyAcceptUb => &["d", "c"],
            BoundKind::MiabLb => &["n", "m", "kappa"],
            BoundKind::MiabUb => &["n", "m", "c"],
            BoundKind::MismatchMiFloor => &["n", "m", "k", "delta_mm"],
            BoundKind::MmBds => &["n", "alpha", "c", "delta_mm"],
            BoundKind::QccC0 => &["delta"],
            BoundKind::QccVw => &["v", "w"],
            BoundKind::CorThreshold => &["k", "delta"],
        }
    }

    pub fn unit(self) -> Unit {
        match self {
            BoundKind::QccC0 | BoundKind::CorThreshold => Unit::Nats,
            BoundKind::VerifyAccept | BoundKind::VerifyAcceptUb | BoundKind::QccVw => Unit::Probability,
            _ => Unit::Bits,
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ALL_KINDS
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown bound kind `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Bits,
    Nats,
    Probability,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub unit: Unit,
}

struct Args<'a> {
    kind: BoundKind,
    map: &'a BTreeMap<String, f64>,
}

impl Args<'_> {
    fn real(&self, name: &str) -> Result<f64> {
        match self.map.get(name) {
            Some(v) if v.is_finite() => Ok(*v),
            Some(v) => Err(domain!("{}: parameter `{name}` is not finite ({v})", self.kind)),
            None => Err(domain!("{}: missing parameter `{name}`", self.kind)),
        }
    }

    fn int(&self, name: &str) -> Result<u64> {
        let v = self.real(name)?;
        if v < 0.0 || v.fract() != 0.0 || v > 9.0e15 {
            return Err(domain!("{}: `{name}` must be a nonnegative integer, got {v}", self.kind));
        }
        Ok(v as u64)
    }

    fn require(&self, ok: bool, what: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(domain!("{}: requires {what}", self.kind))
        }
    }
}

fn lb2(n: u64, k: u64) -> Result<f64> {
    Ok(log2_binom(n, k)?.log2_abs())
}

fn decay_min(c: f64) -> f64 {
    (-2.0 * c).exp().min((-c / 3.0).exp())
}

/// `½ ln((1-δ)/(32δ))`.
pub(crate) fn qcc_c0(delta: f64) -> f64 {
    0.5 * ((1.0 - delta) / (32.0 * delta)).ln()
}

/// Evaluates one registered bound; unknown or out-of-range parameters are
/// domain errors.
pub fn bound_value(kind: BoundKind, params: &BTreeMap<String, f64>) -> Result<BoundValue> {
    let a = Args { kind, map: params };
    for key in params.keys() {
        if !kind.param_names().contains(&key.as_str()) {
            return Err(domain!("{kind}: unexpected parameter `{key}`"));
        }
    }
    let value = match kind {
        BoundKind::PacMiLb => {
            let d = a.int("d")?;
            a.require(d >= 1, "d >= 1")?;
            (1.0 - binary_entropy(0.375)?) * d as f64
        }
        BoundKind::PacEntropyUb => {
            let d = a.int("d")? as f64;
            let nu = a.real("nu")?;
            a.require(d >= 1.0 && nu > 0.0 && nu <= 1.0 / 12.0, "d >= 1 and 0 < nu <= 1/12")?;
            d * binary_entropy(6.0 * nu)? + d * (-2.0 * nu * d).exp()
        }
        BoundKind::AgnEntropyUb => {
            let d = a.int("d")?;
            let eps = a.real("eps")?;
            let t = a.int("t")? as f64;
            a.require(d >= 1 && eps > 0.0 && eps < 0.25, "d >= 1 and 0 < eps < 1/4")?;
            let alpha = agnostic_alpha(eps);
            let df = d as f64;
            let nu = 2.0 * alpha * t / df;
            a.require(nu < 0.5, "nu = 2 alpha t / d < 1/2")?;
            ((d + 1) as f64).log2() + df * binary_entropy(0.75 * nu)? + df * (-alpha * t / 10.0).exp()
        }
        BoundKind::MiUb => {
            let n = a.int("n")?;
            let k = a.int("k")?;
            let c = a.real("c")?;
            let delta = a.real("delta")?;
            a.require(1 < k && k < n, "1 < k < n")?;
            a.require(c > 0.0 && delta > 0.0 && delta <= 0.25, "c > 0 and 0 < delta <= 1/4")?;
            (1.0 - delta * (1.0 - (-2.0 * c).exp())) * lb2(n, k)?
        }
        BoundKind::VerifyAccept => {
            let d = a.int("d")? as f64;
            let k = a.int("k")? as f64;
            let c = a.real("c")?;
            a.require(k >= 1.0 && d <= k && c > 0.0, "0 <= d <= k, k >= 1 and c > 0")?;
            (1.0 - d / k).powf(2.0 * c * k)
        }
        BoundKind::VerifyAcceptUb => {
            let d = a.int("d")? as f64;
            let c = a.real("c")?;
            a.require(c > 0.0, "c > 0")?;
            (-2.0 * c * d).exp()
        }
        BoundKind::MiabLb => {
            let n = a.int("n")?;
            let m = a.int("m")?;
            let kappa = a.real("kappa")?;
            a.require(m >= 2 && 10 * m <= n, "2 <= m <= n/10")?;
            a.require(kappa > 0.0 && kappa < n as f64 / m as f64, "0 < kappa < n/m")?;
            let (nf, mf) = (n as f64, m as f64);
            (1.0 - (-kappa).exp() - kappa * mf / nf) * lb2(n, m)? - 1.0
        }
        BoundKind::MiabUb => {
            let n = a.int("n")?;
            let m = a.int("m")?;
            let c = a.real("c")?;
            let (nf, mf) = (n as f64, m as f64);
            a.require(m >= 1 && 40 * m <= n, "1 <= m <= n/40")?;
            a.require(mf * mf.ln() <= c.abs() * nf / 10.0, "m ln m <= |c| n/10")?;
            let gap = nf.log2() - mf.log2() - 2.0 * mf / nf * LOG2_E;
            lb2(n, m)? - gap * decay_min(c) + (mf + 1.0).log2()
        }
        BoundKind::MismatchMiFloor => {
            let n = a.int("n")?;
            let m = a.int("m")?;
            let k = a.int("k")?;
            let delta = a.real("delta_mm")?;
            a.require(m >= 1 && k >= 1 && m + k == n, "m, k >= 1 and m + k = n")?;
            a.require(delta >= 0.0, "delta_mm >= 0")?;
            lb2(n, m)? - delta * ((k as f64).log2() + (m as f64).log2()) - ((m + 1) as f64).log2()
        }
        BoundKind::MmBds => {
            let n = a.int("n")? as f64;
            let alpha = a.real("alpha")?;
            let c = a.real("c")?;
            let delta = a.real("delta_mm")?;
            a.require(n >= 2.0 && alpha > 0.0 && alpha < 1.0, "n >= 2 and 0 < alpha < 1")?;
            a.require(delta >= 0.0, "delta_mm >= 0")?;
            let ln = n.log2();
            -((1.0 - alpha) * ln - 2.0 * n.powf(alpha - 1.0) * LOG2_E) * decay_min(c)
                + 2.0 * alpha * ln
                + 2.0
                + alpha * delta * ln
                + delta * ln
        }
        BoundKind::QccC0 => {
            let delta = a.real("delta")?;
            a.require(delta > 0.0 && delta <= 1.0 / 40.0, "0 < delta <= 1/40")?;
            qcc_c0(delta)
        }
        BoundKind::QccVw => {
            let v = a.real("v")?;
            let w = a.real("w")?;
            a.require((0.0..=1.0).contains(&v) && (0.0..=1.0).contains(&w), "v, w in [0,1]")?;
            (v * (1.0 - w)).sqrt() + (w * (1.0 - v)).sqrt()
        }
        BoundKind::CorThreshold => {
            let k = a.int("k")?;
            let delta = a.real("delta")?;
            a.require(k >= 2, "k >= 2")?;
            a.require(delta > 0.0 && delta <= 1.0 / 40.0, "0 < delta <= 1/40")?;
            let kf = k as f64;
            (qcc_c0(delta) / 20.0).min(delta * LN_2) - kf.ln() / kf
        }
    };
    if !value.is_finite() {
        return Err(domain!("{kind}: value is not finite"));
    }
    Ok(BoundValue {
        kind,
        params: params.clone(),
        value,
        unit: kind.unit(),
    })
}

/// Smallest `d0 <= d_max` such that for every `d` in `[d0, d_max]` the PAC
/// entropy ceiling `log2(d+1) + d h(6ν) + d e^{-2νd}` falls below the
/// information floor `(1 - h(3/8)) d`.
pub fn pac_contradiction_threshold(nu: f64, d_max: u64) -> Result<Option<u64>> {
    if !(nu > 0.0 && nu <= 1.0 / 12.0) {
        return Err(domain!("pac_contradiction_threshold needs 0 < nu <= 1/12"));
    }
    let floor_rate = 1.0 - binary_entropy(0.375)?;
    let h = binary_entropy(6.0 * nu)?;
    let mut first = None;
    for d in 1..=d_max {
        let df = d as f64;
        let ceiling = (df + 1.0).log2() + df * h + df * (-2.0 * nu * df).exp();
        if ceiling < floor_rate * df {
            first.get_or_insert(d);
        } else {
            first = None;
        }
    }
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn eval(kind: &str, pairs: &[(&str, f64)]) -> Result<f64> {
        Ok(bound_value(kind.parse()?, &params(pairs))?.value)
    }

    #[test]
    fn registry_examples() {
        let h38 = -(0.375f64 * 0.375f64.log2() + 0.625 * 0.625f64.log2());
        let v = eval("pac_mi_lb", &[("d", 100.0)]).unwrap();
        assert!((v - (1.0 - h38) * 100.0).abs() < 1e-12);
        assert!((v - 4.5566).abs() < 1e-4);

        let v = eval("qcc_c0", &[("delta", 0.025)]).unwrap();
        assert!((v - 0.5 * (39.0f64 / 32.0).ln()).abs() < 1e-15);
        assert!((v - 0.09891).abs() < 1e-5);
        assert_eq!(BoundKind::QccC0.unit(), Unit::Nats);

        let v = eval(
            "mismatch_mi_floor",
            &[("n", 10.0), ("m", 2.0), ("k", 8.0), ("delta_mm", 0.0)],
        )
        .unwrap();
        assert!((v - (45f64.log2() - 3f64.log2())).abs() < 1e-12);
        assert!((v - 3.9069).abs() < 1e-4);
    }

    #[test]
    fn verify_accept_below_exponential() {
        for k in [2u32, 5, 40] {
            for d in 0..=k {
                for c in [0.1, 1.0, 3.0] {
                    let p = eval("verify_accept", &[("d", d as f64), ("k", k as f64), ("c", c)]).unwrap();
                    let ub = eval("verify_accept_ub", &[("d", d as f64), ("c", c)]).unwrap();
                    assert!(p <= ub + 1e-15);
                }
            }
        }
    }

    #[test]
    fn mi_ub_seven_eighths() {
        // δ = 1/4 and c with 1 - e^{-2c} > 1/2 put the ceiling under 7/8 of H(A)
        let h = lb2(100, 10).unwrap();
        let v = eval("mi_ub", &[("n", 100.0), ("k", 90.0), ("c", 0.5), ("delta", 0.25)]).unwrap();
        assert!(v < 0.875 * h);
    }

    #[test]
    fn domain_errors() {
        assert!(eval("pac_mi_lb", &[]).is_err());
        assert!(eval("pac_mi_lb", &[("d", 2.5)]).is_err());
        assert!(eval("pac_mi_lb", &[("d", 3.0), ("x", 1.0)]).is_err());
        assert!(eval("qcc_c0", &[("delta", 0.1)]).is_err());
        assert!(eval("miab_lb", &[("n", 10.0), ("m", 2.0), ("kappa", 1.0)]).is_err());
        assert!(eval("miab_ub", &[("n", 400.0), ("m", 5.0), ("c", 0.01)]).is_err());
        assert!(eval("pac_entropy_ub", &[("d", 10.0), ("nu", 0.2)]).is_err());
        assert!(matches!("nope".parse::<BoundKind>(), Err(Error::Usage(_))));
    }

    #[test]
    fn names_round_trip() {
        for &k in BoundKind::all() {
            assert_eq!(k.name().parse::<BoundKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
    }

    #[test]
    fn mm_bds_relaxes_the_exact_form() {
        // with m <= n^α and k < n, the relaxed slack dominates the exact one
        for n in [64u64, 1024, 1 << 16] {
            for alpha in [0.25, 0.5] {
                let m = (n as f64).powf(alpha).floor() as u64;
                let k = n - m;
                for c in [-2.0, 0.0, 0.7] {
                    for delta in [0.0, 0.5, 2.0] {
                        let (nf, mf) = (n as f64, m as f64);
                        let exact = -(nf.log2() - mf.log2() - 2.0 * mf / nf * LOG2_E) * decay_min(c)
                            + 2.0 * (mf + 1.0).log2()
                            + delta * mf.log2()
                            + delta * (k as f64).log2();
                        let relaxed = eval(
                            "mm_bds",
                            &[("n", nf), ("alpha", alpha), ("c", c), ("delta_mm", delta)],
                        )
                        .unwrap();
                        assert!(relaxed >= exact - 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn cor_threshold_sign() {
        assert!(eval("cor_threshold", &[("k", 10.0), ("delta", 0.025)]).unwrap() < 0.0);
        assert!(eval("cor_threshold", &[("k", 1_000_000.0), ("delta", 0.025)]).unwrap() > 0.0);
    }

    #[test]
    fn pac_threshold() {
        let d0 = pac_contradiction_threshold(0.0005, 100_000).unwrap();
        let d0 = d0.expect("contradiction should appear for small nu");
        let at = |d: u64| {
            let df = d as f64;
            let ceil = (df + 1.0).log2()
                + eval("pac_entropy_ub", &[("d", df), ("nu", 0.0005)]).unwrap();
            ceil < eval("pac_mi_lb", &[("d", df)]).unwrap()
        };
        assert!(at(d0) && !at(d0 - 1));
        assert_eq!(pac_contradiction_threshold(1.0 / 12.0, 1000).unwrap(), None);
    }
}
