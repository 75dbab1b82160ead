use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_xorshift::XorShiftRng;

use super::grid::{GridSpec, GridValue, Point};
use super::{Checker, Outcome};
use crate::combinatorics::{johnson_multiplicity, rational_to_f64};
use crate::error::{Error, Result};
use crate::infotheory::{
    bound_value, entropy_decomposition_pac, hc_from_gram, hc_quantity, optimal_success_iterative,
    pgm_success, spectrum_entropy, BoundKind, DEFAULT_OPT_ITERS, DEFAULT_OPT_TOL,
};
use crate::oracle::{gram_agnostic, gram_coupon, gram_pac, oracle_eigenvalues, scaled_trace_exact, spectrum_match};
use crate::spectra::{
    agnostic_alpha, agnostic_spectrum, coupon_spectrum, coupon_weights_f64, pac_spectrum, CouponRecurrence,
    Tower,
};
use crate::walks::{
    coupled_mc, coupon_walk_spec, diff_mixture_spec, diff_walk_series, dominates_cdf, domination_sufficient,
    trial_seed, walk_dp, w_walk_spec, wt_estimates,
};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

macro_rules! require {
    ($cond:expr, $why:expr) => {
        if !$cond {
            return Ok(Outcome::Skipped($why.to_string()));
        }
    };
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn bound(kind: BoundKind, pairs: &[(&str, f64)]) -> Result<f64> {
    Ok(bound_value(kind, &params(pairs))?.value)
}

/// Negative margin for a failed exact comparison, never rounding to zero.
fn exact_miss(diff: &BigRational) -> f64 {
    -rational_to_f64(&diff.abs()).max(f64::MIN_POSITIVE)
}

fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, |a, x| if x.is_nan() || a.is_nan() { f64::NAN } else { a.min(x) })
}

/// Adds `k` for every `1 < k < n` with `k >= n - k` to points lacking it.
fn with_upper_k(points: Vec<Point>) -> Result<Vec<Point>> {
    with_k(points, |n, k| 2 * k >= n)
}

fn with_k(points: Vec<Point>, keep: fn(usize, usize) -> bool) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for p in points {
        if p.has("k") {
            out.push(p);
            continue;
        }
        let n = p.uint("n")?;
        for k in 2..n {
            if keep(n, k) {
                out.push(p.with_int("k", k as i64));
            }
        }
    }
    Ok(out)
}

/// `k ln m + c n` rounded to the nearest step, with `c` recomputed from it.
fn coupon_time(n: usize, m: usize, c: f64) -> Option<(usize, f64)> {
    let k = (n - m) as f64;
    let base = k * (m as f64).ln();
    let t = (base + c * n as f64).round();
    (t >= 0.0).then(|| (t as usize, (t - base) / n as f64))
}

fn mean_of(weights: &[f64]) -> f64 {
    weights.iter().enumerate().map(|(s, w)| s as f64 * w).sum()
}

fn tower_for(p: &Point, exact_up_to: usize, size: usize) -> Result<Tower> {
    match p.symbol_or("tower", "auto")? {
        "auto" => Ok(if size <= exact_up_to { Tower::Exact } else { Tower::Float }),
        other => other.parse(),
    }
}

// spectra_vs_oracle

fn expand_spectra(g: &GridSpec) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    let families = g.get("family").map(|v| v.to_vec()).unwrap_or_default();
    for fam in families {
        match &fam {
            GridValue::Sym(s) if s == "pac" || s == "agnostic" => {
                for p in g.product(&["d", "eps", "t"])? {
                    out.push(p.with("family", fam.clone()));
                }
            }
            GridValue::Sym(s) if s == "coupon" => {
                let base = with_upper_k(g.product(&["n", "k"])?)?;
                let times = g.get("coupon_t").unwrap_or(&[]);
                for p in base {
                    for t in times {
                        out.push(p.with("family", fam.clone()).with("t", t.clone()));
                    }
                }
            }
            other => return Err(Error::Usage(format!("unknown family `{other}`"))),
        }
    }
    Ok(out)
}

fn eval_spectra(p: &Point) -> Result<Outcome> {
    let t = p.uint("t")?;
    let one = BigRational::one();
    match p.symbol("family")? {
        "pac" => {
            let (d, eps) = (p.uint("d")?, p.rational("eps")?);
            let spec = pac_spectrum(d, &eps, t, Tower::Exact)?;
            let gram = gram_pac(d, &eps, t)?;
            let rep = spectrum_match(&spec, &oracle_eigenvalues(&gram)?, 1e-9)?;
            let trace = spec.trace_exact().unwrap_or_default();
            let oracle_trace = scaled_trace_exact(&gram).unwrap_or_default();
            let distinct_ok = spec.nonzero_distinct() == (d + 1).min(t + 1);
            Ok(Outcome::margin(min_of(&[
                1e-9 - rep.max_scaled_deviation,
                if trace == one { 0.0 } else { exact_miss(&(trace - &one)) },
                if oracle_trace == one { 0.0 } else { exact_miss(&(oracle_trace - &one)) },
                if distinct_ok { 0.0 } else { -1.0 },
            ])))
        }
        "agnostic" => {
            let (d, eps) = (p.uint("d")?, p.rational("eps")?);
            let spec = agnostic_spectrum(d, &eps, t)?;
            let rep = spectrum_match(&spec, &oracle_eigenvalues(&gram_agnostic(d, &eps, t)?)?, 1e-9)?;
            Ok(Outcome::margin(min_of(&[
                1e-9 - rep.max_scaled_deviation,
                1e-10 - (spec.trace_f64() - 1.0).abs(),
            ])))
        }
        "coupon" => {
            let (n, k) = (p.uint("n")?, p.uint("k")?);
            require!(1 < k && k < n, "needs 1 < k < n");
            require!(2 * k >= n, "k < m");
            let spec = coupon_spectrum(n, k, t, Tower::Exact)?;
            let gram = gram_coupon(n, k, t)?;
            let rep = spectrum_match(&spec, &oracle_eigenvalues(&gram)?, 1e-10)?;
            let trace = spec.trace_exact().unwrap_or_default();
            Ok(Outcome::margin(min_of(&[
                1e-10 - rep.max_scaled_deviation,
                if trace == one { 0.0 } else { exact_miss(&(trace - &one)) },
            ])))
        }
        other => Err(Error::Usage(format!("unknown family `{other}`"))),
    }
}

// walk_identity

fn expand_walk_identity(g: &GridSpec) -> Result<Vec<Point>> {
    with_upper_k(g.product(&["n", "k", "t"])?)
}

/// Steps the eigenvalue recurrence and the exact walk DP side by side and
/// compares `l_s · λ_{s,t}` with `Pr[W_t = s]` at every step, plus the trace.
fn eval_walk_identity(p: &Point) -> Result<Outcome> {
    let (n, k, horizon) = (p.uint("n")?, p.uint("k")?, p.uint("t")?);
    require!(1 < k && k < n && n >= 3, "needs n >= 3 and 1 < k < n");
    require!(2 * k >= n, "k < m");
    let m = n - k;
    let mut rec = CouponRecurrence::new(n, k)?;
    let mut walk = crate::walks::ExactWalkStepper::new(&w_walk_spec(n, k)?)?;
    let mults: Vec<BigInt> = (0..=m)
        .map(|s| johnson_multiplicity(n as u64, s as u64).map(BigInt::from))
        .collect::<Result<_>>()?;
    let mut margin: f64 = 0.0;
    for _ in 0..horizon {
        rec.step();
        walk.step();
        let (dl, dw) = (rec.denominator(), walk.denominator());
        for s in 0..=m {
            let lhs = &mults[s] * &rec.numerators()[s] * dw;
            let rhs = &walk.numerators()[s] * dl;
            if lhs != rhs {
                margin = margin.min(exact_miss(&BigRational::new(lhs - rhs, dl * dw)));
            }
        }
        let total: BigInt = walk.numerators().iter().sum();
        if &total != dw {
            margin = margin.min(exact_miss(&BigRational::new(total - dw, dw.clone())));
        }
    }
    Ok(Outcome::margin(margin))
}

// dom1, dom2

const CDF_TOL: f64 = 1e-12;

fn expand_dom(g: &GridSpec) -> Result<Vec<Point>> {
    g.product(&["n", "m", "t", "trials", "seed"])
}

fn eval_dom1(p: &Point) -> Result<Outcome> {
    let (n, m) = (p.uint("n")?, p.uint("m")?);
    require!(m >= 1 && 40 * m <= n, "needs 1 <= m <= n/40");
    let t = p.uint_or("t", 5 * n)?;
    let a = coupon_walk_spec(n - 5 * m, m)?.to_f64();
    let b = w_walk_spec(n, n - m)?.to_f64();
    let cdf = dominates_cdf(&walk_dp(&a, t), &walk_dp(&b, t), CDF_TOL)?;
    let suff = domination_sufficient(&a, &b, t, CDF_TOL);
    let mc = coupled_mc(&a, &b, t, p.uint_or("trials", 10_000)?, p.uint_or("seed", 1)? as u64)?;
    dom_outcome(&cdf, suff.holds, mc.inversion_fraction())
}

fn eval_dom2(p: &Point) -> Result<Outcome> {
    let (n, m) = (p.uint("n")?, p.uint("m")?);
    require!(m >= 2 && 10 * m <= n, "needs 2 <= m <= n/10");
    let t = p.uint_or("t", 5 * n)?;
    let w = w_walk_spec(n, n - m)?.to_f64();
    let diff = diff_walk_series::<f64>(n, m, t)?;
    let cdf = dominates_cdf(&walk_dp(&w, t), &diff, CDF_TOL)?;
    let mix = diff_mixture_spec::<f64>(n, m, t)?;
    let w_wide = w.extended_down(mix.lo)?;
    let suff = domination_sufficient(&w_wide, &mix, t, CDF_TOL);
    let mc = coupled_mc(&w_wide, &mix, t, p.uint_or("trials", 10_000)?, p.uint_or("seed", 1)? as u64)?;
    dom_outcome(&cdf, suff.holds, mc.inversion_fraction())
}

fn dom_outcome(cdf: &crate::walks::CdfDomination, sufficient: bool, inversions: f64) -> Result<Outcome> {
    let margin = min_of(&[
        cdf.worst_margin + CDF_TOL,
        if cdf.means_ordered { 0.0 } else { -1.0 },
        // the sufficient conditions must never hold where domination fails
        if sufficient && !cdf.dominates { -1.0 } else { 0.0 },
        -inversions,
    ]);
    let tag = if sufficient { "sufficient conditions hold" } else { "sufficient conditions fail" };
    Ok(Outcome::tagged(margin, tag))
}

// expct_ub, expct_lb, lmlst, frac

fn expand_nmc(g: &GridSpec) -> Result<Vec<Point>> {
    g.product(&["n", "m", "c"])
}

fn eval_expct_ub(p: &Point) -> Result<Outcome> {
    let (n, m) = (p.uint("n")?, p.uint("m")?);
    require!(m >= 1 && 40 * m <= n, "needs 1 <= m <= n/40");
    let Some((t, c)) = coupon_time(n, m, p.real("c")?) else {
        return Ok(Outcome::Skipped("t < 0".into()));
    };
    let mf = m as f64;
    require!(mf * mf.ln() <= c.abs() * n as f64 / 10.0, "m ln m > |c| n/10");
    let mean = mean_of(&coupon_weights_f64(n, n - m, t)?);
    let bound = mf - (-2.0 * c).exp().min((-c / 3.0).exp());
    Ok(Outcome::margin(bound - mean + 1e-12 * mf))
}

fn eval_expct_lb(p: &Point) -> Result<Outcome> {
    let (n, m) = (p.uint("n")?, p.uint("m")?);
    require!(m >= 2 && 10 * m <= n, "needs 2 <= m <= n/10");
    let c0 = p.real("c")?;
    require!(c0 >= 0.0, "c < 0");
    let t = (c0 * n as f64).round() as usize;
    let c = t as f64 / n as f64;
    let mf = m as f64;
    let mean = mean_of(&coupon_weights_f64(n, n - m, t)?);
    let bound = mf * (1.0 - (-c).exp() - c * mf / n as f64);
    Ok(Outcome::margin(mean - bound + 1e-12 * mf))
}

fn eval_lmlst(p: &Point) -> Result<Outcome> {
    let (n, m) = (p.uint("n")?, p.uint("m")?);
    require!(m >= 1 && 40 * m <= n, "needs 1 <= m <= n/40");
    let Some((t, c)) = coupon_time(n, m, p.real("c")?) else {
        return Ok(Outcome::Skipped("t < 0".into()));
    };
    require!(c >= 0.0, "c < 0");
    let (nf, mf) = (n as f64, m as f64);
    require!(mf * mf.ln() <= c * nf / 10.0, "m ln m > c n/10");
    let v = coupon_weights_f64(n, n - m, t)?[m];
    let upper = 1.0 - (-2.0 * c).exp() / 2.0 - v;
    if m >= 2 {
        let lower = v - (1.0 - t as f64 * mf * mf / (nf * nf)) * (1.0 - (-0.9 * c).exp());
        Ok(Outcome::tagged(min_of(&[upper, lower]) + 1e-12, "both bounds"))
    } else {
        Ok(Outcome::tagged(upper + 1e-12, "upper bound only (m = 1)"))
    }
}

fn eval_frac(p: &Point) -> Result<Outcome> {
    let (n, m) = (p.uint("n")?, p.uint("m")?);
    require!(m >= 1 && 40 * m <= n, "needs 1 <= m <= n/40");
    let c = p.real("c")?;
    let (nf, mf) = (n as f64, m as f64);
    require!(mf * mf.ln() <= c.abs() * nf / 10.0, "m ln m > |c| n/10");
    let t = (nf - mf) * mf.ln() + c * nf;
    let lhs = t / (nf - 5.0 * mf - 1.0);
    let rhs = mf.ln() + (2.0 * c).max(c / 3.0);
    Ok(Outcome::margin(rhs - lhs + 1e-12 * (1.0 + rhs.abs())))
}

// wt_est

fn expand_wt(g: &GridSpec) -> Result<Vec<Point>> {
    g.product(&["n_prime", "m", "t"])
}

fn eval_wt(p: &Point) -> Result<Outcome> {
    let (np, m, t) = (p.uint("n_prime")?, p.uint("m")?, p.uint("t")?);
    require!(m >= 1 && np >= m, "needs n' >= m >= 1");
    let est = wt_estimates(np, m, t)?;
    let dp_mean = walk_dp(&coupon_walk_spec(np, m)?.to_f64(), t).pop().map_or(0.0, |d| d.mean());
    let mean_agree = 1e-9 * m as f64 - (dp_mean - est.mean_exact).abs();
    Ok(Outcome::margin(min_of(&[est.margin() + 1e-12, mean_agree])))
}

// entropy_pac, entropy_agn

fn expand_cube(g: &GridSpec) -> Result<Vec<Point>> {
    g.product(&["d", "eps", "t", "tower"])
}

fn eval_entropy_pac(p: &Point) -> Result<Outcome> {
    let (d, eps, t) = (p.uint("d")?, p.rational("eps")?, p.uint("t")?);
    require!(d >= 1 && t >= 1, "needs d, t >= 1");
    require!(eps.is_positive() && eps < BigRational::new(1.into(), 4.into()), "needs 0 < eps < 1/4");
    let tower = tower_for(p, 14, d)?;
    let dec = entropy_decomposition_pac(d, &eps, t, tower)?;
    let chain = ((d + 1) as f64).log2() + dec.s_td - dec.entropy + 1e-12 * (1.0 + dec.entropy);
    let mut margins = vec![chain];
    if let Some(mu) = &dec.mu_exact {
        let total: BigRational = mu.iter().sum();
        margins.push(if total.is_one() { 0.0 } else { exact_miss(&(total - BigRational::one())) });
    }
    let nu = rational_to_f64(&eps) * t as f64 / d as f64;
    let tag = if nu <= 1.0 / 12.0 {
        let ub = bound(BoundKind::PacEntropyUb, &[("d", d as f64), ("nu", nu)])?;
        margins.push(ub - dec.s_td + 1e-12 * (1.0 + dec.s_td));
        "chain and entropy bound"
    } else {
        "chain only (nu > 1/12)"
    };
    Ok(Outcome::tagged(min_of(&margins), tag))
}

fn eval_entropy_agn(p: &Point) -> Result<Outcome> {
    let (d, eps, t) = (p.uint("d")?, p.rational("eps")?, p.uint("t")?);
    require!(d >= 1 && t >= 1, "needs d, t >= 1");
    let e = rational_to_f64(&eps);
    require!(e > 0.0 && e < 0.25, "needs 0 < eps < 1/4");
    let nu = 2.0 * agnostic_alpha(e) * t as f64 / d as f64;
    require!(nu < 0.5, "nu >= 1/2");
    let s = spectrum_entropy(&agnostic_spectrum(d, &eps, t)?);
    let ub = bound(BoundKind::AgnEntropyUb, &[("d", d as f64), ("eps", e), ("t", t as f64)])?;
    Ok(Outcome::margin(ub - s + 1e-12 * (1.0 + s)))
}

// mi_lb, mi_ub

fn expand_mi_lb(g: &GridSpec) -> Result<Vec<Point>> {
    g.product(&["n", "m", "kappa", "tower"])
}

fn expand_mi_ub(g: &GridSpec) -> Result<Vec<Point>> {
    g.product(&["n", "m", "c", "tower"])
}

fn coupon_entropy(n: usize, m: usize, t: usize, tower: Tower) -> Result<f64> {
    Ok(spectrum_entropy(&coupon_spectrum(n, n - m, t, tower)?))
}

fn eval_mi_lb(p: &Point) -> Result<Outcome> {
    let (n, m) = (p.uint("n")?, p.uint("m")?);
    require!(m >= 2 && 10 * m <= n, "needs 2 <= m <= n/10");
    let t = (p.real("kappa")? * n as f64).round();
    require!(t > 0.0, "t = 0");
    let kappa = t / n as f64;
    require!(kappa < n as f64 / m as f64, "kappa >= n/m");
    let s = coupon_entropy(n, m, t as usize, tower_for(p, 60, n)?)?;
    let floor = bound(BoundKind::MiabLb, &[("n", n as f64), ("m", m as f64), ("kappa", kappa)])?;
    Ok(Outcome::margin(s - floor + 1e-12 * (1.0 + s)))
}

fn eval_mi_ub(p: &Point) -> Result<Outcome> {
    let (n, m) = (p.uint("n")?, p.uint("m")?);
    require!(m >= 1 && 40 * m <= n, "needs 1 <= m <= n/40");
    let Some((t, c)) = coupon_time(n, m, p.real("c")?) else {
        return Ok(Outcome::Skipped("t < 0".into()));
    };
    let mf = m as f64;
    require!(mf * mf.ln() <= c.abs() * n as f64 / 10.0, "m ln m > |c| n/10");
    let s = coupon_entropy(n, m, t, tower_for(p, 60, n)?)?;
    let ceiling = bound(BoundKind::MiabUb, &[("n", n as f64), ("m", mf), ("c", c)])?;
    Ok(Outcome::margin(ceiling - s + 1e-12 * (1.0 + s)))
}

// hc_sandwich

const HC_CAP: u64 = 64;

fn expand_hc(g: &GridSpec) -> Result<Vec<Point>> {
    with_k(g.product(&["n", "k", "t"])?, |_, _| true)
}

fn eval_hc(p: &Point) -> Result<Outcome> {
    let (n, k, t) = (p.uint("n")?, p.uint("k")?, p.uint("t")?);
    require!(n >= 3 && 1 < k && k < n, "needs n >= 3 and 1 < k < n");
    let size = crate::combinatorics::binom_exact(n as u64, k as i64);
    require!(size <= HC_CAP.into(), "C(n,k) > 64");
    let gram = gram_coupon(n, k, t)?;
    let hc_gram = hc_from_gram(&gram)?;
    let mut margins = Vec::new();
    let hc = if 2 * k >= n {
        let hc = hc_quantity(&coupon_spectrum(n, k, t, Tower::Exact)?, &size);
        margins.push(1e-9 - (hc - hc_gram).abs());
        hc
    } else {
        hc_gram
    };
    let pgm = pgm_success(&gram)?;
    let opt = optimal_success_iterative(&gram, DEFAULT_OPT_ITERS, DEFAULT_OPT_TOL)?;
    margins.extend([
        opt.value - (hc * hc - 1e-8),
        hc + 1e-8 - opt.value,
        hc + 1e-9 - pgm,
        opt.value + DEFAULT_OPT_TOL - pgm,
        if opt.monotone { 0.0 } else { -1.0 },
    ]);
    let tag = if !opt.converged {
        "ascent hit the iteration cap"
    } else if opt.value > pgm + 1e-9 {
        "ascent improved on the pgm"
    } else {
        "pgm already optimal"
    };
    Ok(Outcome::tagged(min_of(&margins), tag))
}

// qcc_chain

fn expand_qcc(g: &GridSpec) -> Result<Vec<Point>> {
    g.product(&["delta", "n", "m", "c_frac"])
}

fn eval_qcc(p: &Point) -> Result<Outcome> {
    let delta = p.real("delta")?;
    require!(delta > 0.0 && delta <= 1.0 / 40.0, "needs 0 < delta <= 1/40");
    let (n, m) = (p.uint("n")?, p.uint("m")?);
    let (nf, mf) = (n as f64, m as f64);
    require!(m >= 1 && mf <= delta * nf, "needs 1 <= m <= delta n");
    let c0 = bound(BoundKind::QccC0, &[("delta", delta)])?;
    require!(mf * mf.ln() <= c0 * nf / 20.0, "m ln m > c0 n/20");
    let base = (nf - mf) * mf.ln();
    let t = (base + p.real("c_frac")? * c0 * nf).floor();
    let c = (t - base) / nf;
    require!(c >= c0 / 2.0 && c <= c0, "c outside [c0/2, c0]");
    let (k, t) = (n - m, t as usize);
    let spec = coupon_spectrum(n, k, t, Tower::Float)?;
    let hc = hc_quantity(&spec, &crate::combinatorics::binom_exact(n as u64, k as i64));
    let v = coupon_weights_f64(n, k, t)?[m];
    let w = mf / (nf - mf + 1.0);
    let vw = bound(BoundKind::QccVw, &[("v", v), ("w", w)])?;
    Ok(Outcome::margin(min_of(&[
        vw - hc + 1e-12,
        1.0 - (-2.0 * c).exp() / 8.0 - vw + 1e-12,
        1.0 - delta - hc,
    ])))
}

// ratio

fn expand_ratio(g: &GridSpec) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for base in g.product(&["max_len", "seed"])? {
        let count = match g.get("count") {
            Some([GridValue::Num(q)]) if q.is_integer() && !q.is_negative() => {
                Point::default().with("count", GridValue::Num(q.clone())).uint("count")?
            }
            Some(_) => return Err(Error::Usage("ratio: `count` must be one nonnegative integer".into())),
            None => 10_000,
        };
        for i in 0..count {
            out.push(base.with_int("sequence", i as i64));
        }
    }
    Ok(out)
}

/// Checks `j2 · S_{j1} >= j1 · S_{j2}` in integers for all `j1 <= j2` on one
/// random nonincreasing positive sequence.
fn eval_ratio(p: &Point) -> Result<Outcome> {
    let max_len = p.uint("max_len")?;
    require!(max_len >= 1, "max_len = 0");
    let seed = p.uint("seed")? as u64;
    let mut rng = XorShiftRng::seed_from_u64(trial_seed(seed, p.uint("sequence")? as u64));
    let len = rng.random_range(1..=max_len);
    // small ranges force ties
    let top = [3u64, 1_000, 1_000_000][rng.random_range(0..3)];
    let mut a: Vec<u64> = (0..len).map(|_| rng.random_range(1..=top)).collect();
    a.sort_unstable_by(|x, y| y.cmp(x));
    let prefix: Vec<i128> = std::iter::once(0)
        .chain(a.iter().scan(0i128, |acc, &x| {
            *acc += x as i128;
            Some(*acc)
        }))
        .collect();
    let mut margin = f64::INFINITY;
    for j2 in 1..=len {
        for j1 in 1..=j2 {
            let (s1, s2) = (prefix[j1], prefix[j2]);
            let gap = j2 as i128 * s1 - j1 as i128 * s2;
            let value = if gap < 0 {
                -(((-gap) as f64) / (j2 as f64 * s2 as f64)).max(f64::MIN_POSITIVE)
            } else {
                gap as f64 / (j2 as f64 * s2 as f64)
            };
            margin = margin.min(value);
        }
    }
    Ok(Outcome::margin(margin))
}

// mm_bds

fn expand_mm(g: &GridSpec) -> Result<Vec<Point>> {
    g.product(&["n", "alpha", "c", "delta_mm"])
}

/// The pre-relaxation form, as a slack `LHS + Δ log2 k`.
fn mm_exact_slack(n: f64, m: f64, k: f64, c: f64, delta: f64) -> f64 {
    let min = (-2.0 * c).exp().min((-c / 3.0).exp());
    -(n.log2() - m.log2() - 2.0 * m / n * LOG2_E) * min + 2.0 * (m + 1.0).log2() + delta * m.log2() + delta * k.log2()
}

fn eval_mm(p: &Point) -> Result<Outcome> {
    let n = p.uint("n")?;
    let (alpha, c, delta) = (p.real("alpha")?, p.real("c")?, p.real("delta_mm")?);
    require!(n >= 2 && alpha > 0.0 && alpha < 1.0, "needs n >= 2 and 0 < alpha < 1");
    require!(delta >= 0.0, "delta_mm < 0");
    let nf = n as f64;
    let mut m = nf.powf(alpha).floor();
    while m > 1.0 && m > nf.powf(alpha) {
        m -= 1.0;
    }
    require!(m >= 1.0 && m < nf, "needs 1 <= m < n");
    let exact = mm_exact_slack(nf, m, nf - m, c, delta);
    let relaxed = bound(BoundKind::MmBds, &[("n", nf), ("alpha", alpha), ("c", c), ("delta_mm", delta)])?;
    let min = (-2.0 * c).exp().min((-c / 3.0).exp());
    let limit = -(1.0 - alpha) * min + 2.0 * alpha + alpha * delta + delta;
    let tag = if limit > 0.0 {
        "relaxed slack / log2 n tends to a positive limit"
    } else {
        "relaxed slack / log2 n tends to a nonpositive limit"
    };
    Ok(Outcome::tagged(relaxed - exact + 1e-9 * (1.0 + exact.abs()), tag))
}

pub(super) static REGISTRY: &[Checker] = &[
    Checker {
        id: "spectra_vs_oracle",
        summary: "closed-form spectra equal the Gram eigendecomposition; traces are 1",
        unit: "scaled eigenvalue deviation",
        axes: &["family", "d", "eps", "t", "n", "k", "coupon_t"],
        default_grid: "family = [pac, agnostic, coupon]\nd = 1..3\neps = [1/8, 1/5]\nt = 1..3\nn = 3..8\ncoupon_t = 1..10\n",
        expand: expand_spectra,
        eval: eval_spectra,
    },
    Checker {
        id: "walk_identity",
        summary: "l_s lambda_{s,t} = Pr[W_t = s] exactly, with exact trace 1",
        unit: "probability",
        axes: &["n", "k", "t"],
        default_grid: "n = 3..12\nt = 50\n",
        expand: expand_walk_identity,
        eval: eval_walk_identity,
    },
    Checker {
        id: "dom1",
        summary: "the approximating walk on n - 5m dominates W",
        unit: "probability",
        axes: &["n", "m", "t", "trials", "seed"],
        default_grid: "n = [40, 100, 200, 400]\nm = [1, 2, 3, 5, 10]\ntrials = 10000\nseed = 1\n",
        expand: expand_dom,
        eval: eval_dom1,
    },
    Checker {
        id: "dom2",
        summary: "W dominates the difference walk W'' - V''",
        unit: "probability",
        axes: &["n", "m", "t", "trials", "seed"],
        default_grid: "n = [20, 40, 100, 200]\nm = [2, 3, 4, 5, 10, 20]\ntrials = 10000\nseed = 1\n",
        expand: expand_dom,
        eval: eval_dom2,
    },
    Checker {
        id: "expct_ub",
        summary: "E[W_t] <= m - min(e^{-2c}, e^{-c/3}) at t = k ln m + cn",
        unit: "states",
        axes: &["n", "m", "c"],
        default_grid: "n = [40, 100, 400, 1000, 2000]\nm = [1, 2, 3, 5, 10, 25, 50]\nc = [-3, -1, -1/2, 1/4, 1/2, 1, 2, 3]\n",
        expand: expand_nmc,
        eval: eval_expct_ub,
    },
    Checker {
        id: "expct_lb",
        summary: "E[W_t] >= m (1 - e^{-c} - cm/n) at t = cn",
        unit: "states",
        axes: &["n", "m", "c"],
        default_grid: "n = [40, 100, 400, 1000, 2000]\nm = [2, 3, 5, 10, 25, 50, 100, 200]\nc = [0, 1/4, 1/2, 1, 2, 3]\n",
        expand: expand_nmc,
        eval: eval_expct_lb,
    },
    Checker {
        id: "lmlst",
        summary: "(1 - tm^2/n^2)(1 - e^{-9c/10}) <= l_m lambda_{m,t} <= 1 - e^{-2c}/2",
        unit: "probability",
        axes: &["n", "m", "c"],
        default_grid: "n = [40, 100, 400, 1000, 2000]\nm = [1, 2, 3, 5, 10, 25, 50]\nc = [1/4, 1/2, 1, 2, 3]\n",
        expand: expand_nmc,
        eval: eval_lmlst,
    },
    Checker {
        id: "entropy_pac",
        summary: "S(B) <= log2(d+1) + S_{t,d} and S_{t,d} <= d h(6 nu) + d e^{-2 nu d}",
        unit: "bits",
        axes: &["d", "eps", "t", "tower"],
        default_grid: "d = [1, 2, 3, 5, 8, 10, 14, 20, 50, 100, 200]\neps = [1/100, 1/50, 1/8, 1/5]\nt = [1, 2, 3, 5, 10, 20, 50]\n",
        expand: expand_cube,
        eval: eval_entropy_pac,
    },
    Checker {
        id: "entropy_agn",
        summary: "agnostic S(B) <= log2(d+1) + d h(3 nu/4) + d e^{-alpha t/10}",
        unit: "bits",
        axes: &["d", "eps", "t", "tower"],
        default_grid: "d = [1, 2, 3, 5, 10, 20, 50, 100]\neps = [1/20, 1/8, 1/5]\nt = [1, 2, 3, 5, 10, 20, 50]\n",
        expand: expand_cube,
        eval: eval_entropy_agn,
    },
    Checker {
        id: "mi_lb",
        summary: "coupon S(B) >= (1 - e^{-kappa} - kappa m/n) log2 C(n,m) - 1 at t = kappa n",
        unit: "bits",
        axes: &["n", "m", "kappa", "tower"],
        default_grid: "n = [20, 40, 60, 100, 200, 400, 1000]\nm = [2, 3, 5, 10, 20, 40, 100]\nkappa = [1/4, 1/2, 1, 2, 4]\n",
        expand: expand_mi_lb,
        eval: eval_mi_lb,
    },
    Checker {
        id: "mi_ub",
        summary: "coupon S(B) below the ceiling built from the expectation upper bound",
        unit: "bits",
        axes: &["n", "m", "c", "tower"],
        default_grid: "n = [40, 100, 400, 1000, 2000]\nm = [1, 2, 3, 5, 10, 25, 50]\nc = [-1, -1/2, 1/4, 1/2, 1, 2, 3]\n",
        expand: expand_mi_ub,
        eval: eval_mi_ub,
    },
    Checker {
        id: "hc_sandwich",
        summary: "HC^2 <= optimal success <= HC and PGM <= HC on small coupon ensembles",
        unit: "probability",
        axes: &["n", "k", "t"],
        default_grid: "n = 3..11\nt = 1..6\n",
        expand: expand_hc,
        eval: eval_hc,
    },
    Checker {
        id: "qcc_chain",
        summary: "HC <= sqrt(v(1-w)) + sqrt(w(1-v)) <= 1 - e^{-2c}/8 and HC < 1 - delta for c in [c0/2, c0]",
        unit: "probability",
        axes: &["delta", "n", "m", "c_frac"],
        default_grid: "delta = [1/40, 1/100, 1/1000]\nn = [100, 400, 1000, 2000]\nm = [1, 2, 3]\nc_frac = [11/20, 3/4, 1]\n",
        expand: expand_qcc,
        eval: eval_qcc,
    },
    Checker {
        id: "ratio",
        summary: "prefix-sum ratios of nonincreasing positive sequences dominate j1/j2",
        unit: "ratio",
        axes: &["count", "max_len", "seed"],
        default_grid: "count = 10000\nmax_len = 50\nseed = 1\n",
        expand: expand_ratio,
        eval: eval_ratio,
    },
    Checker {
        id: "frac",
        summary: "t/(n - 5m - 1) <= ln m + max(2c, c/3) for real t = k ln m + cn",
        unit: "nats",
        axes: &["n", "m", "c"],
        default_grid: "n = [40, 100, 400, 1000, 2000, 10000, 100000]\nm = [1, 2, 3, 5, 10, 25, 50, 100, 1000]\nc = [-3, -1, -1/2, -1/10, 1/10, 1/4, 1/2, 1, 2, 3]\n",
        expand: expand_nmc,
        eval: eval_frac,
    },
    Checker {
        id: "wt_est",
        summary: "mean and hitting probability of the approximating walk inside their exponential bounds",
        unit: "probability",
        axes: &["n_prime", "m", "t"],
        default_grid: "n_prime = [1, 2, 5, 10, 35, 100, 400]\nm = [1, 2, 3, 5, 10]\nt = [0, 1, 5, 10, 30, 100, 300, 1000]\n",
        expand: expand_wt,
        eval: eval_wt,
    },
    Checker {
        id: "mm_bds",
        summary: "the relaxed mismatch inequality dominates its exact finite-n form",
        unit: "bits",
        axes: &["n", "alpha", "c", "delta_mm"],
        default_grid: "n = [100, 1000, 10000, 1000000, 1000000000]\nalpha = [1/4, 1/2, 3/4]\nc = [-2, -1, 0, 1, 2]\ndelta_mm = [0, 1/2, 1, 2]\n",
        expand: expand_mm,
        eval: eval_mm,
    },
];

#[cfg(test)]
mod tests {
    use crate::verify::verify;

    fn run(id: &str, grid: &str) -> crate::verify::VerificationReport {
        verify(id, &grid.parse().unwrap()).unwrap()
    }

    #[test]
    fn hypothesis_filters_skip_rather_than_pass() {
        let r = run("expct_ub", "n = 40\nm = [1, 2]\nc = [1, -1/2]");
        // m = 2 needs n >= 80
        assert_eq!(r.points_checked + r.points_skipped, 4);
        assert!(r.points_skipped >= 2);
        assert!(r.note.contains("skipped"));
    }

    #[test]
    fn small_grids_pass() {
        for (id, grid) in [
            ("spectra_vs_oracle", "family = [pac, coupon]\nd = 1..2\neps = 1/8\nt = 1..2\nn = 3..5\ncoupon_t = 1..3"),
            ("dom1", "n = 40\nm = 1\ntrials = 500\nseed = 7"),
            ("dom2", "n = 40\nm = 2\nt = 60\ntrials = 500\nseed = 7"),
            ("lmlst", "n = [100, 400]\nm = [1, 2]\nc = [1, 2]"),
            ("entropy_pac", "d = [2, 20]\neps = [1/100, 1/8]\nt = [1, 3]"),
            ("entropy_agn", "d = [3, 10]\neps = 1/8\nt = [1, 2]"),
            ("mi_lb", "n = [20, 100]\nm = 2\nkappa = [1, 2]"),
            ("mi_ub", "n = [80, 400]\nm = [1, 2]\nc = [1, 2]"),
            ("hc_sandwich", "n = 3..5\nt = 1..2"),
            ("ratio", "count = 200\nmax_len = 20\nseed = 3"),
            ("wt_est", "n_prime = [2, 10]\nm = [1, 3]\nt = [0, 3, 30]"),
            ("mm_bds", "n = [100, 10000]\nalpha = 1/2\nc = [-1, 1]\ndelta_mm = [0, 1]"),
        ] {
            let r = run(id, grid);
            assert!(r.passed(), "{id}: {r:?}");
        }
    }

    #[test]
    fn ratio_is_deterministic_per_seed() {
        let a = run("ratio", "count = 50\nmax_len = 10\nseed = 9");
        let b = run("ratio", "count = 50\nmax_len = 10\nseed = 9");
        assert_eq!(a, b);
    }
}
