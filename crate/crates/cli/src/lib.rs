//! `qlb`: spectra, entropies, walks, distinguishability and grid verification
//! from the command line.
//!
//! Exit codes: 0 when everything requested succeeded (and every verification
//! passed), 1 when a verification or demo failed, 2 on usage or evaluation
//! errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use qlb_core::infotheory::{
    hc_quantity, optimal_success_iterative, pgm_success, spectrum_entropy, spectrum_for,
    DEFAULT_OPT_ITERS, DEFAULT_OPT_TOL,
};
use qlb_core::combinatorics::log2_biguint;
use qlb_core::oracle::gram_for;
use qlb_core::spectra::{EnsembleParams, Spectrum, Tower};
use qlb_core::verify::{
    checker, checkers, demo_standard_argument_gap, format_float, grid_for, parse_rational,
    verify_with, GapReport, GridSpec, GridValue, VerificationReport, VerifyOptions,
    DEFAULT_GAP_KAPPAS, DEFAULT_GAP_NS,
};
use qlb_core::walks::{walk_dp, walk_mc, w_walk_spec, Distribution, ExactWalkStepper};
use qlb_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qlb", version, about = "Spectra and lower-bound checks for quantum sample ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Seed for Monte Carlo runs; replaces the `seed` axis of a grid.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Arithmetic for spectra and walks.
    #[arg(long, global = true, value_enum)]
    tower: Option<TowerArg>,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TowerArg {
    Exact,
    Float,
}

impl From<TowerArg> for Tower {
    fn from(t: TowerArg) -> Self {
        match t {
            TowerArg::Exact => Tower::Exact,
            TowerArg::Float => Tower::Float,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distinct eigenvalues and multiplicities of the averaged sample state.
    #[command(subcommand)]
    Spectrum(Family),
    /// Entropy of the averaged sample state, in bits.
    #[command(subcommand)]
    Entropy(Family),
    /// Law of the walk W for the coupon ensemble (n, k) after t steps.
    #[command(subcommand)]
    Walk(WalkCmd),
    /// Success probabilities for identifying the ensemble member.
    #[command(subcommand)]
    Distinguish(Measure),
    /// Check one lemma (or `all`) on its grid.
    Verify(VerifyArgs),
    /// Registered lemma ids with their default grids.
    List,
    /// Worked demonstrations.
    #[command(subcommand)]
    Demo(Demo),
}

#[derive(Subcommand, Debug, Clone)]
enum Family {
    /// PAC ensemble: VC dimension d, error eps in (0, 1/4), t samples.
    Pac { d: usize, eps: String, t: usize },
    /// Agnostic ensemble; float tower only.
    Agnostic { d: usize, eps: String, t: usize },
    /// Coupon ensemble: k-subsets of [n], t samples.
    Coupon { n: usize, k: usize, t: usize },
}

impl Family {
    fn params(&self) -> qlb_core::Result<EnsembleParams> {
        match self {
            Family::Pac { d, eps, t } => EnsembleParams::pac(*d, parse_rational(eps)?, *t),
            Family::Agnostic { d, eps, t } => EnsembleParams::agnostic(*d, parse_rational(eps)?, *t),
            Family::Coupon { n, k, t } => EnsembleParams::coupon(*n, *k, *t),
        }
    }

    fn index_name(&self) -> &'static str {
        match self {
            Family::Coupon { .. } => "s",
            _ => "h",
        }
    }
}

#[derive(Subcommand, Debug)]
enum WalkCmd {
    /// Exact or float dynamic programming.
    Dp { n: usize, k: usize, t: usize },
    /// Monte Carlo estimate.
    Mc {
        n: usize,
        k: usize,
        t: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum Measure {
    /// Holevo-Curlander quantity, from the spectrum.
    #[command(subcommand)]
    Hc(Family),
    /// Pretty good measurement, from the Gram matrix.
    #[command(subcommand)]
    Pgm(Family),
    /// Iterative optimum over rank-one measurements, started at the PGM.
    Opt {
        #[command(subcommand)]
        family: Family,
        #[arg(long, default_value_t = DEFAULT_OPT_ITERS)]
        max_iters: usize,
        #[arg(long, default_value_t = DEFAULT_OPT_TOL)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Lemma id, or `all`.
    lemma_id: String,
    /// Grid file; its axes replace those of the default grid.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Check the strict negation of each inequality instead.
    #[arg(long)]
    invert: bool,
    /// Record runtime_ms in the report.
    #[arg(long)]
    timing: bool,
    /// Worker threads; defaults to QLB_WORKERS, then the core count.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Demo {
    /// Entropy of the samples against the ceiling on what the learner's
    /// register can hold, at m = floor(sqrt(n)) and t = kappa n.
    Gap {
        #[arg(long, default_value = "1/4")]
        delta: String,
        /// Comma-separated n values.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Comma-separated kappa values.
        #[arg(long, value_delimiter = ',')]
        kappa: Vec<f64>,
    },
}

/// Runs `qlb` on `argv` (program name first) against the real stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, err) {
        Ok((text, code)) => {
            let written = match &cli.common.out {
                Some(path) => fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => code,
                Err(msg) => {
                    let _ = writeln!(err, "qlb: error: {msg}");
                    EXIT_USAGE
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "qlb: error: {e}");
            EXIT_USAGE
        }
    }
}

type Output = qlb_core::Result<(String, i32)>;

fn execute(cli: &Cli, err: &mut dyn Write) -> Output {
    let c = &cli.common;
    match &cli.command {
        Command::Spectrum(f) => spectrum_cmd(f, c),
        Command::Entropy(f) => entropy_cmd(f, c),
        Command::Walk(w) => walk_cmd(w, c),
        Command::Distinguish(m) => distinguish_cmd(m, c),
        Command::Verify(v) => verify_cmd(v, c),
        Command::List => list_cmd(c),
        Command::Demo(Demo::Gap { delta, n, kappa }) => gap_cmd(delta, n, kappa, c, err),
    }
}

fn tower_of(c: &Common, default: Tower) -> Tower {
    c.tower.map(Tower::from).unwrap_or(default)
}

fn csv_line(fields: &[String]) -> String {
    let quoted: Vec<String> = fields
        .iter()
        .map(|f| {
            if f.contains([',', '"', '\n']) {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect();
    quoted.join(",") + "\n"
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

fn params_json(p: &EnsembleParams) -> Value {
    match p {
        EnsembleParams::Pac { d, eps, t } | EnsembleParams::Agnostic { d, eps, t } => {
            json!({"d": d, "eps": eps.to_string(), "t": t})
        }
        EnsembleParams::Coupon { n, k, m, t } => json!({"n": n, "k": k, "m": m, "t": t}),
    }
}

fn spectrum_of(f: &Family, c: &Common) -> qlb_core::Result<Spectrum> {
    let params = f.params()?;
    let tower = tower_of(c, Tower::Float);
    if matches!(f, Family::Agnostic { .. }) && tower == Tower::Exact {
        return Err(Error::Usage("the agnostic spectrum is irrational; use --tower float".into()));
    }
    spectrum_for(&params, tower)
}

fn eigenvalue_text(e: &qlb_core::spectra::Eigenvalue) -> String {
    match e.as_exact() {
        Some(q) => q.to_string(),
        None => format_float(e.to_f64()),
    }
}

fn spectrum_cmd(f: &Family, c: &Common) -> Output {
    let spec = spectrum_of(f, c)?;
    let idx = f.index_name();
    let text = match c.format {
        Format::Csv => {
            let mut s = csv_line(&[idx.into(), "eigenvalue".into(), "multiplicity".into()]);
            for e in &spec.entries {
                s += &csv_line(&[e.index.to_string(), eigenvalue_text(&e.eigenvalue), e.multiplicity.to_string()]);
            }
            s
        }
        Format::Json => {
            let entries: Vec<Value> = spec
                .entries
                .iter()
                .map(|e| json!({idx: e.index, "eigenvalue": eigenvalue_text(&e.eigenvalue), "multiplicity": e.multiplicity.to_string()}))
                .collect();
            let trace = match spec.trace_exact() {
                Some(q) => q.to_string(),
                None => format_float(spec.trace_f64()),
            };
            pretty(&json!({
                "family": spec.params.family(),
                "params": params_json(&spec.params),
                "tower": spec.tower.to_string(),
                "entries": entries,
                "trace": trace,
            }))
        }
    };
    Ok((text, EXIT_OK))
}

fn entropy_cmd(f: &Family, c: &Common) -> Output {
    let spec = spectrum_of(f, c)?;
    let entropy = spectrum_entropy(&spec);
    let log2_size = log2_biguint(&spec.params.ensemble_size());
    let rank = spec.rank().to_string();
    let text = match c.format {
        Format::Csv => {
            csv_line(&["family".into(), "tower".into(), "entropy_bits".into(), "log2_ensemble_size".into(), "rank".into()])
                + &csv_line(&[
                    spec.params.family().into(),
                    spec.tower.to_string(),
                    format_float(entropy),
                    format_float(log2_size),
                    rank,
                ])
        }
        Format::Json => pretty(&json!({
            "family": spec.params.family(),
            "params": params_json(&spec.params),
            "tower": spec.tower.to_string(),
            "entropy_bits": entropy,
            "log2_ensemble_size": log2_size,
            "rank": rank,
        })),
    };
    Ok((text, EXIT_OK))
}

fn walk_cmd(w: &WalkCmd, c: &Common) -> Output {
    let (n, k, t, label) = match *w {
        WalkCmd::Dp { n, k, t } => (n, k, t, "dp"),
        WalkCmd::Mc { n, k, t, .. } => (n, k, t, "mc"),
    };
    if k == 0 {
        return Err(Error::Domain("walk needs 1 <= k < n".into()));
    }
    let spec = w_walk_spec(n, k)?;
    let rows: Vec<(i64, String)>;
    let mean: String;
    match w {
        WalkCmd::Dp { .. } if tower_of(c, Tower::Exact) == Tower::Exact => {
            let mut stepper = ExactWalkStepper::new(&spec)?;
            for _ in 0..t {
                stepper.step();
            }
            let d: Distribution<BigRational> = stepper.distribution();
            rows = d.probs.iter().enumerate().map(|(i, p)| (d.offset + i as i64, p.to_string())).collect();
            mean = d.mean().to_string();
        }
        WalkCmd::Dp { .. } => {
            let d = walk_dp(&spec.to_f64(), t).pop().expect("walk_dp returns t + 1 laws");
            rows = d.probs.iter().enumerate().map(|(i, p)| (d.offset + i as i64, format_float(*p))).collect();
            mean = format_float(d.mean());
        }
        WalkCmd::Mc { trials, .. } => {
            if c.tower == Some(TowerArg::Exact) {
                return Err(Error::Usage("walk mc runs in floating point; drop --tower exact".into()));
            }
            let d = walk_mc(&spec.to_f64(), t, *trials, c.seed.unwrap_or(1))?;
            rows = d.probs.iter().enumerate().map(|(i, p)| (d.offset + i as i64, format_float(*p))).collect();
            mean = format_float(d.mean());
        }
    }
    let text = match c.format {
        Format::Csv => {
            let mut s = csv_line(&["s".into(), "probability".into()]);
            for (i, p) in &rows {
                s += &csv_line(&[i.to_string(), p.clone()]);
            }
            s
        }
        Format::Json => {
            let probs: Vec<Value> = rows.iter().map(|(i, p)| json!({"s": i, "probability": p})).collect();
            pretty(&json!({"method": label, "n": n, "k": k, "t": t, "seed": c.seed, "mean": mean, "law": probs}))
        }
    };
    Ok((text, EXIT_OK))
}

fn distinguish_cmd(m: &Measure, c: &Common) -> Output {
    let (name, family) = match m {
        Measure::Hc(f) => ("hc", f),
        Measure::Pgm(f) => ("pgm", f),
        Measure::Opt { family, .. } => ("opt", family),
    };
    let params = family.params()?;
    let mut fields: Vec<(&str, Value)> = vec![("measure", json!(name)), ("family", json!(params.family()))];
    match m {
        Measure::Hc(_) => {
            let spec = spectrum_of(family, c)?;
            fields.push(("value", json!(hc_quantity(&spec, &params.ensemble_size()))));
        }
        Measure::Pgm(_) => {
            fields.push(("value", json!(pgm_success(&gram_for(&params)?)?)));
        }
        Measure::Opt { max_iters, tol, .. } => {
            let r = optimal_success_iterative(&gram_for(&params)?, *max_iters, *tol)?;
            fields.push(("value", json!(r.value)));
            fields.push(("initial", json!(r.initial)));
            fields.push(("iterations", json!(r.iterations)));
            fields.push(("converged", json!(r.converged)));
        }
    }
    let text = match c.format {
        Format::Csv => {
            let head: Vec<String> = fields.iter().map(|(k, _)| k.to_string()).collect();
            let row: Vec<String> = fields
                .iter()
                .map(|(_, v)| match v {
                    Value::String(s) => s.clone(),
                    Value::Number(x) if x.is_f64() => format_float(x.as_f64().unwrap_or(f64::NAN)),
                    other => other.to_string(),
                })
                .collect();
            csv_line(&head) + &csv_line(&row)
        }
        Format::Json => {
            let mut obj: serde_json::Map<String, Value> = fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            obj.insert("params".into(), params_json(&params));
            pretty(&Value::Object(obj))
        }
    };
    Ok((text, EXIT_OK))
}

fn verify_cmd(v: &VerifyArgs, c: &Common) -> Output {
    let overrides = match &v.grid {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Usage(format!("cannot read grid file {}: {e}", path.display())))?;
            Some(text.parse::<GridSpec>().map_err(|e| e.at(path.display()))?)
        }
        None => None,
    };
    let ids: Vec<&str> = if v.lemma_id == "all" {
        checkers().iter().map(|c| c.id).collect()
    } else {
        vec![checker(&v.lemma_id)?.id]
    };
    if v.workers == Some(0) {
        return Err(Error::Usage("--workers must be at least 1".into()));
    }
    let opts = VerifyOptions {
        invert: v.invert,
        timing: v.timing,
        workers: v.workers,
    };
    let mut reports = Vec::new();
    for id in &ids {
        let mut grid = grid_for(id, overrides.as_ref())?;
        if let Some(seed) = c.seed {
            if checker(id)?.axes.contains(&"seed") {
                grid.replace("seed", vec![GridValue::int(seed as i64)]);
            } else if ids.len() == 1 {
                return Err(Error::Usage(format!("{id} does not take a seed")));
            }
        }
        reports.push(verify_with(id, &grid, &opts)?);
    }
    let code = if reports.iter().all(VerificationReport::passed) { EXIT_OK } else { EXIT_FAILED };
    let text = match c.format {
        Format::Csv => {
            let mut buf = Vec::new();
            VerificationReport::write_csv(&reports, &mut buf)?;
            String::from_utf8(buf).map_err(|e| Error::Contract(e.to_string()))?
        }
        Format::Json if reports.len() == 1 => reports[0].to_json()? + "\n",
        Format::Json => {
            let v = serde_json::to_value(&reports).map_err(|e| Error::Contract(e.to_string()))?;
            pretty(&v)
        }
    };
    Ok((text, code))
}

fn list_cmd(c: &Common) -> Output {
    let text = match c.format {
        Format::Csv => {
            let mut s = csv_line(&["lemma_id".into(), "unit".into(), "axes".into(), "summary".into()]);
            for k in checkers() {
                s += &csv_line(&[k.id.into(), k.unit.into(), k.axes.join(" "), k.summary.into()]);
            }
            s
        }
        Format::Json => {
            let all: Vec<Value> = checkers()
                .iter()
                .map(|k| {
                    json!({
                        "lemma_id": k.id,
                        "unit": k.unit,
                        "axes": k.axes,
                        "summary": k.summary,
                        "default_grid": k.default_grid().summary(),
                    })
                })
                .collect();
            pretty(&Value::Array(all))
        }
    };
    Ok((text, EXIT_OK))
}

pub const GAP_CSV_HEADER: [&str; 11] = [
    "n", "m", "kappa", "t", "entropy", "log2_binom", "gamma", "floor", "ceiling", "margin", "tower",
];

fn gap_cmd(delta: &str, n: &[usize], kappa: &[f64], c: &Common, err: &mut dyn Write) -> Output {
    let delta = qlb_core::combinatorics::rational_to_f64(&parse_rational(delta)?);
    let ns: Vec<usize> = if n.is_empty() { DEFAULT_GAP_NS.to_vec() } else { n.to_vec() };
    let ks: Vec<f64> = if kappa.is_empty() { DEFAULT_GAP_KAPPAS.to_vec() } else { kappa.to_vec() };
    let report: GapReport = demo_standard_argument_gap(delta, &ns, &ks)?;
    let code = if report.passed() { EXIT_OK } else { EXIT_FAILED };
    let text = match c.format {
        Format::Csv => {
            let mut s = csv_line(&GAP_CSV_HEADER.map(String::from));
            for r in &report.rows {
                s += &csv_line(&[
                    r.n.to_string(),
                    r.m.to_string(),
                    format_float(r.kappa),
                    r.t.to_string(),
                    format_float(r.entropy),
                    format_float(r.log2_binom),
                    format_float(r.gamma),
                    r.floor.map(format_float).unwrap_or_default(),
                    format_float(r.ceiling),
                    format_float(r.margin),
                    r.tower.clone(),
                ]);
            }
            let _ = match &report.first {
                Some(f) => writeln!(
                    err,
                    "first gap: n={} m={} kappa={} gamma={} margin={} bits",
                    f.n,
                    f.m,
                    format_float(f.kappa),
                    format_float(f.gamma),
                    format_float(f.margin)
                ),
                None => writeln!(err, "no gap found above {}", format_float(report.ceiling_fraction)),
            };
            let trends: Vec<String> =
                report.gamma_trend_in_n.iter().map(|(k, t)| format!("kappa={}: {t}", format_float(*k))).collect();
            let _ = writeln!(err, "gamma in n: {}", trends.join(", "));
            let _ = writeln!(
                err,
                "monotone in n: {}, entropy monotone in kappa: {}, floors hold: {}",
                report.monotone_in_n, report.monotone_in_kappa, report.floors_hold
            );
            s
        }
        Format::Json => pretty(&serde_json::to_value(&report).map_err(|e| Error::Contract(e.to_string()))?),
    };
    Ok((text, code))
}
