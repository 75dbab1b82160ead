//! One line per acceptance criterion. Exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use qlb_core::combinatorics::johnson_multiplicity;
use qlb_core::infotheory::{hc_from_gram, optimal_success_iterative, pgm_success};
use qlb_core::oracle::{gram_agnostic, gram_coupon, gram_pac, oracle_eigenvalues, spectrum_match};
use qlb_core::spectra::{agnostic_spectrum, coupon_spectrum, pac_spectrum, CouponRecurrence, Spectrum, Tower};
use qlb_core::verify::{demo_standard_argument_gap, verify, GridSpec, VerificationReport};
use qlb_core::walks::{coupon_walk_spec, domination_sufficient, w_walk_spec, Step, WalkSpec};

type Outcome = Result<String, String>;

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn eps_grid() -> [BigRational; 2] {
    [q(1, 8), q(1, 5)]
}

/// Exact multiset of a spectrum, zero eigenvalues dropped.
fn exact_multiset(spec: &Spectrum) -> Vec<BigRational> {
    let mut out = Vec::new();
    for e in &spec.entries {
        let v = e.eigenvalue.as_exact().expect("exact tower").clone();
        if v.is_zero() {
            continue;
        }
        let mult: usize = e.multiplicity.to_string().parse().unwrap();
        out.extend(std::iter::repeat_n(v, mult));
    }
    out.sort();
    out
}

fn sorted(mut v: Vec<BigRational>) -> Vec<BigRational> {
    v.sort();
    v
}

fn run_report(id: &str, grid: Option<&str>) -> Result<VerificationReport, String> {
    let g = match grid {
        Some(text) => text.parse::<GridSpec>().map_err(|e| e.to_string())?,
        None => qlb_core::verify::checker(id).map_err(|e| e.to_string())?.default_grid(),
    };
    verify(id, &g).map_err(|e| e.to_string())
}

fn summarize(reports: &[VerificationReport]) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for r in reports {
        ok &= r.passed();
        parts.push(format!(
            "{} {}/{} (skipped {}, worst {:.3e} {})",
            r.lemma_id,
            r.points_passed,
            r.points_checked,
            r.points_skipped,
            r.worst_margin.unwrap_or(f64::NAN),
            r.unit
        ));
    }
    let text = parts.join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn c1_pac() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for d in 1..=3 {
        for eps in eps_grid() {
            for t in 1..=3 {
                let spec = pac_spectrum(d, &eps, t, Tower::Exact).map_err(|e| e.to_string())?;
                let eigs = oracle_eigenvalues(&gram_pac(d, &eps, t).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                let r = spectrum_match(&spec, &eigs, 1e-9).map_err(|e| e.to_string())?;
                worst = worst.max(r.max_abs_deviation);
                count += 1;
            }
        }
    }
    let spec = pac_spectrum(2, &q(1, 8), 2, Tower::Exact).map_err(|e| e.to_string())?;
    let want = sorted(vec![q(19, 32), q(3, 16), q(3, 16), q(1, 32)]);
    let exact_ok = exact_multiset(&spec) == want;
    let msg = format!("{count} instances, max deviation {worst:.2e}; (2, 1/8, 2) exact: {exact_ok}");
    if worst <= 1e-9 && exact_ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c2_agnostic() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for d in 1..=3 {
        for eps in eps_grid() {
            for t in 1..=3 {
                let spec = agnostic_spectrum(d, &eps, t).map_err(|e| e.to_string())?;
                let eigs = oracle_eigenvalues(&gram_agnostic(d, &eps, t).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                let r = spectrum_match(&spec, &eigs, 1e-9).map_err(|e| e.to_string())?;
                worst = worst.max(r.max_abs_deviation);
                count += 1;
            }
        }
    }
    let msg = format!("{count} instances, max deviation {worst:.2e}");
    if worst <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// `(n, k)` with `1 < k < n` and `m = n - k <= n/2`.
fn coupon_pairs(n_max: usize) -> Vec<(usize, usize)> {
    (3..=n_max)
        .flat_map(|n| (2..n).filter(move |&k| 2 * (n - k) <= n).map(move |k| (n, k)))
        .collect()
}

fn c3_coupon() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (n, k) in coupon_pairs(8) {
        for t in 1..=10 {
            let spec = coupon_spectrum(n, k, t, Tower::Exact).map_err(|e| e.to_string())?;
            let eigs = oracle_eigenvalues(&gram_coupon(n, k, t).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let r = spectrum_match(&spec, &eigs, 1e-10).map_err(|e| e.to_string())?;
            worst = worst.max(r.max_abs_deviation);
            count += 1;
        }
    }
    let spec = coupon_spectrum(3, 2, 1, Tower::Exact).map_err(|e| e.to_string())?;
    let exact_ok = exact_multiset(&spec) == sorted(vec![q(2, 3), q(1, 6), q(1, 6)]);
    let msg = format!("{count} instances, max deviation {worst:.2e}; (3, 2, 1) exact: {exact_ok}");
    if worst <= 1e-10 && exact_ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_walk_identity() -> Outcome {
    summarize(&[run_report("walk_identity", Some("n = 3..40\nt = 200"))?])
}

fn c5_traces() -> Outcome {
    let one = BigRational::one();
    let mut exact = 0usize;
    for d in 1..=3 {
        for eps in eps_grid() {
            for t in 1..=3 {
                let tr = pac_spectrum(d, &eps, t, Tower::Exact).map_err(|e| e.to_string())?.trace_exact();
                if tr.as_ref() != Some(&one) {
                    return Err(format!("pac ({d}, {eps}, {t}) trace {tr:?}"));
                }
                exact += 1;
                let tr = agnostic_spectrum(d, &eps, t).map_err(|e| e.to_string())?.trace_f64();
                if (tr - 1.0).abs() > 1e-10 {
                    return Err(format!("agnostic ({d}, {eps}, {t}) trace {tr}"));
                }
            }
        }
    }
    for (n, k) in coupon_pairs(8) {
        for t in 1..=10 {
            let tr = coupon_spectrum(n, k, t, Tower::Exact).map_err(|e| e.to_string())?.trace_exact();
            if tr.as_ref() != Some(&one) {
                return Err(format!("coupon ({n}, {k}, {t}) trace {tr:?}"));
            }
            exact += 1;
        }
    }
    // every recurrence state behind criterion 4
    for (n, k) in coupon_pairs(40) {
        let m = n - k;
        let mults: Vec<BigInt> = (0..=m)
            .map(|s| BigInt::from(johnson_multiplicity(n as u64, s as u64).unwrap()))
            .collect();
        let mut rec = CouponRecurrence::new(n, k).map_err(|e| e.to_string())?;
        for t in 1..=200 {
            rec.step();
            let total: BigInt = mults.iter().zip(rec.numerators()).map(|(l, x)| l * x).sum();
            if &total != rec.denominator() {
                return Err(format!("coupon ({n}, {k}, {t}) trace is not 1"));
            }
            exact += 1;
        }
    }
    Ok(format!("{exact} exact traces equal 1; agnostic traces within 1e-10"))
}

fn c6_domination() -> Outcome {
    summarize(&[run_report("dom1", None)?, run_report("dom2", None)?])
}

fn c7_expectation() -> Outcome {
    summarize(&[
        run_report("expct_ub", None)?,
        run_report("expct_lb", None)?,
        run_report("lmlst", None)?,
    ])
}

fn c8_hc() -> Outcome {
    let report = run_report("hc_sandwich", None)?;
    let gram = gram_coupon(3, 2, 1).map_err(|e| e.to_string())?;
    let pgm = pgm_success(&gram).map_err(|e| e.to_string())?;
    let hc = hc_from_gram(&gram).map_err(|e| e.to_string())?;
    let opt = optimal_success_iterative(&gram, 10_000, 1e-12).map_err(|e| e.to_string())?.value;
    let inst_ok = (pgm - 8.0 / 9.0).abs() <= 1e-9
        && (hc - 0.94281).abs() <= 1e-5
        && hc * hc - 1e-8 <= opt
        && opt <= hc + 1e-8;
    let head = summarize(std::slice::from_ref(&report));
    let msg = format!(
        "{}; (3, 2, 1): pgm {pgm:.12}, hc {hc:.7}, opt {opt:.12}",
        head.clone().unwrap_or_else(|e| e)
    );
    if head.is_ok() && inst_ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9_entropy() -> Outcome {
    summarize(&[
        run_report("entropy_pac", None)?,
        run_report("entropy_agn", None)?,
        run_report("mi_lb", None)?,
        run_report("mi_ub", None)?,
    ])
}

fn c10_gap() -> Outcome {
    let r = demo_standard_argument_gap(
        0.25,
        &qlb_core::verify::DEFAULT_GAP_NS,
        &qlb_core::verify::DEFAULT_GAP_KAPPAS,
    )
    .map_err(|e| e.to_string())?;
    let first = match &r.first {
        Some(f) => format!(
            "first n={} m={} kappa={} gamma={:.4} > {:.4}, margin {:.3} bits",
            f.n, f.m, f.kappa, f.gamma, r.ceiling_fraction, f.margin
        ),
        None => "no gap found".into(),
    };
    let trends: Vec<String> = r.gamma_trend_in_n.iter().map(|(k, t)| format!("{k}:{t}")).collect();
    let msg = format!(
        "{first}; gamma in n [{}]; floors hold {}; monotone in kappa {}",
        trends.join(" "),
        r.floors_hold,
        r.monotone_in_kappa
    );
    if r.passed() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn inflate_left(spec: &WalkSpec<f64>, s: i64, by: f64) -> WalkSpec<f64> {
    let steps: Vec<Step<f64>> = (spec.lo..=spec.hi)
        .map(|i| {
            let mut st = spec.step(0, i);
            if i == s {
                st.minus += by;
                st.zero -= by;
            }
            st
        })
        .collect();
    WalkSpec::homogeneous("inflated", spec.lo, spec.hi, spec.start, steps).unwrap()
}

fn c11_negative_controls() -> Outcome {
    let spec = coupon_spectrum(5, 3, 2, Tower::Exact).map_err(|e| e.to_string())?;
    let mut eigs = oracle_eigenvalues(&gram_coupon(5, 3, 2).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let clean = spectrum_match(&spec, &eigs, 1e-9).map_err(|e| e.to_string())?.matched;
    eigs[0] += 1e-3;
    let flagged = !spectrum_match(&spec, &eigs, 1e-9).map_err(|e| e.to_string())?.matched;

    let (n, m) = (80, 2);
    let a = coupon_walk_spec(n - 5 * m, m).map_err(|e| e.to_string())?.to_f64();
    let b = w_walk_spec(n, n - m).map_err(|e| e.to_string())?.to_f64();
    let holds = domination_sufficient(&a, &b, 5 * n, 1e-12).holds;
    let bad = inflate_left(&a, 1, 0.2);
    let rejected = !domination_sufficient(&bad, &b, 5 * n, 1e-12).holds;

    let straight = qlb_cli::run_with(["qlb", "verify", "expct_ub"], &mut Vec::new(), &mut Vec::new());
    let inverted = qlb_cli::run_with(["qlb", "verify", "expct_ub", "--invert"], &mut Vec::new(), &mut Vec::new());

    let msg = format!(
        "perturbation flagged {flagged} (clean matches {clean}); inflated left step rejected {rejected} \
         (original holds {holds}); verify expct_ub exit {straight}, inverted exit {inverted}"
    );
    if clean && flagged && holds && rejected && straight == 0 && inverted == 1 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 11] = [
        (1, "pac spectrum vs oracle", 5, c1_pac),
        (2, "agnostic spectrum vs oracle", 5, c2_agnostic),
        (3, "coupon spectrum vs oracle", 30, c3_coupon),
        (4, "walk identity, exact", 60, c4_walk_identity),
        (5, "trace identities", 60, c5_traces),
        (6, "domination", 120, c6_domination),
        (7, "expectation and spectral bounds", 120, c7_expectation),
        (8, "HC sandwich", 60, c8_hc),
        (9, "entropy chains", 120, c9_entropy),
        (10, "gap demo", 300, c10_gap),
        (11, "negative controls", 60, c11_negative_controls),
    ];
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let (ok, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {} {name}: {detail} [{:.2} s, budget {budget} s]",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
