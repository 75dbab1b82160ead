//! Lemma-level verification over parameter grids.
//!
//! Each registered checker expands a grid into points, filters them by the
//! hypotheses of its statement and evaluates both sides of the inequality at
//! every admissible point. A margin is "bound minus quantity" in the asserted
//! direction with the checker's tolerance already added, so a point passes
//! exactly when its margin is nonnegative.
//!
//! With `invert` the asserted direction is replaced by its strict negation:
//! margins change sign and a point passes only if the new margin is strictly
//! positive. An equality checker therefore fails every point when inverted.

mod checks;
mod gap;
mod grid;
mod report;

pub use gap::{demo_standard_argument_gap, GapReport, GapRow, DEFAULT_GAP_KAPPAS, DEFAULT_GAP_NS};
pub use grid::{parse_rational, GridSpec, GridValue, Point, MAX_GRID_POINTS};
pub use report::{format_float, VerificationReport};

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Environment variable holding the worker count for grid sweeps.
pub const WORKERS_ENV: &str = "QLB_WORKERS";

/// Result of one grid point.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    /// A hypothesis filter rejected the point.
    Skipped(String),
    Checked {
        margin: f64,
        /// Optional label counted into the report note.
        tag: Option<String>,
    },
}

impl Outcome {
    pub fn margin(margin: f64) -> Self {
        Outcome::Checked { margin, tag: None }
    }

    pub fn tagged(margin: f64, tag: impl Into<String>) -> Self {
        Outcome::Checked {
            margin,
            tag: Some(tag.into()),
        }
    }
}

/// A registered lemma checker.
pub struct Checker {
    pub id: &'static str,
    pub summary: &'static str,
    /// Unit of the margins.
    pub unit: &'static str,
    /// Axes a grid file may set.
    pub axes: &'static [&'static str],
    /// Default grid in the grid-file grammar.
    pub default_grid: &'static str,
    expand: fn(&GridSpec) -> Result<Vec<Point>>,
    eval: fn(&Point) -> Result<Outcome>,
}

impl Checker {
    pub fn default_grid(&self) -> GridSpec {
        self.default_grid.parse().expect("built-in grids parse")
    }

    /// Points the checker will evaluate for `grid`, in canonical order.
    pub fn points(&self, grid: &GridSpec) -> Result<Vec<Point>> {
        for (name, _) in grid.axes() {
            if !self.axes.contains(&name.as_str()) {
                return Err(Error::Usage(format!(
                    "{}: unknown grid parameter `{name}` (expected one of {})",
                    self.id,
                    self.axes.join(", ")
                )));
            }
        }
        let mut points = (self.expand)(grid)?;
        if points.len() > MAX_GRID_POINTS {
            return Err(Error::Usage(format!("grid exceeds {MAX_GRID_POINTS} points")));
        }
        points.sort();
        points.dedup();
        Ok(points)
    }

    pub fn eval(&self, point: &Point) -> Result<Outcome> {
        (self.eval)(point).map_err(|e| e.at(format!("{} at {point}", self.id)))
    }
}

pub fn checkers() -> &'static [Checker] {
    checks::REGISTRY
}

pub fn checker(id: &str) -> Result<&'static Checker> {
    checkers().iter().find(|c| c.id == id).ok_or_else(|| {
        let known: Vec<&str> = checkers().iter().map(|c| c.id).collect();
        Error::Usage(format!("unknown lemma id `{id}` (known: {})", known.join(", ")))
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyOptions {
    pub invert: bool,
    /// Record wall-clock time; off by default so reports stay byte-identical.
    pub timing: bool,
    /// Worker count; `None` reads the environment, falling back to rayon's default.
    pub workers: Option<usize>,
}

/// Worker count from the environment, if set.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Usage(format!("{WORKERS_ENV} must be an integer >= 1, got `{s}`"))),
        },
    }
}

/// The default grid of `lemma_id` with the axes of `overrides` replaced.
pub fn grid_for(lemma_id: &str, overrides: Option<&GridSpec>) -> Result<GridSpec> {
    let c = checker(lemma_id)?;
    let base = c.default_grid();
    let Some(over) = overrides else { return Ok(base) };
    let mut out = GridSpec::default();
    for (name, values) in base.axes() {
        let v = over.get(name).unwrap_or(values);
        out.set(name, v.to_vec())?;
    }
    for (name, values) in over.axes() {
        if base.get(name).is_none() {
            out.set(name, values.clone())?;
        }
    }
    Ok(out)
}

pub fn verify(lemma_id: &str, grid: &GridSpec) -> Result<VerificationReport> {
    verify_with(lemma_id, grid, &VerifyOptions::default())
}

pub fn verify_with(lemma_id: &str, grid: &GridSpec, opts: &VerifyOptions) -> Result<VerificationReport> {
    let started = Instant::now();
    let c = checker(lemma_id)?;
    let points = c.points(grid)?;
    let workers = match opts.workers {
        Some(n) => Some(n),
        None => workers_from_env()?,
    };
    let run = || -> Vec<Result<Outcome>> { points.par_iter().map(|p| c.eval(p)).collect() };
    let outcomes = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Resource(format!("worker pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut checked = 0u64;
    let mut passed = 0u64;
    let mut skipped = 0u64;
    let mut worst: Option<(f64, &Point)> = None;
    let mut tags: BTreeMap<String, u64> = BTreeMap::new();
    let mut skip_reasons: BTreeMap<String, u64> = BTreeMap::new();
    for (point, outcome) in points.iter().zip(outcomes) {
        match outcome? {
            Outcome::Skipped(reason) => {
                skipped += 1;
                *skip_reasons.entry(reason).or_default() += 1;
            }
            Outcome::Checked { margin, tag } => {
                checked += 1;
                // -0.0 prints badly and means the same thing
                let margin = margin + 0.0;
                let (margin, ok) = if opts.invert {
                    (-margin, -margin > 0.0)
                } else {
                    (margin, margin >= 0.0)
                };
                if ok {
                    passed += 1;
                }
                if worst.is_none_or(|(w, _)| worse(margin, w)) {
                    worst = Some((margin, point));
                }
                if let Some(tag) = tag {
                    *tags.entry(tag).or_default() += 1;
                }
            }
        }
    }
    let mut note: Vec<String> = tags.iter().map(|(t, n)| format!("{t}: {n}")).collect();
    note.extend(skip_reasons.iter().map(|(r, n)| format!("skipped ({r}): {n}")));
    Ok(VerificationReport {
        lemma_id: c.id.to_string(),
        grid: grid.summary(),
        inverted: opts.invert,
        points_checked: checked,
        points_passed: passed,
        points_skipped: skipped,
        worst_margin: worst.map(|(m, _)| m),
        unit: c.unit.to_string(),
        witness: worst.map(|(_, p)| p.to_strings()).unwrap_or_default(),
        runtime_ms: opts.timing.then(|| started.elapsed().as_millis() as u64),
        note: note.join("; "),
    })
}

/// NaN margins count as failures and take the witness slot.
fn worse(a: f64, b: f64) -> bool {
    !b.is_nan() && (a.is_nan() || a < b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_ids_are_unique_and_grids_parse() {
        let mut ids: Vec<&str> = checkers().iter().map(|c| c.id).collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
        for c in checkers() {
            let g = c.default_grid();
            assert!(!c.points(&g).unwrap().is_empty(), "{}", c.id);
        }
    }

    #[test]
    fn unknown_ids_and_axes_are_usage_errors() {
        assert!(matches!(checker("nope"), Err(Error::Usage(_))));
        let g: GridSpec = "bogus = 3".parse().unwrap();
        assert!(matches!(verify("walk_identity", &g), Err(Error::Usage(_))));
    }

    #[test]
    fn overrides_replace_default_axes() {
        let over: GridSpec = "n = [4, 5]".parse().unwrap();
        let g = grid_for("walk_identity", Some(&over)).unwrap();
        assert_eq!(g.get("n").unwrap().len(), 2);
        assert!(g.get("t").is_some());
    }

    #[test]
    fn small_walk_identity_passes_and_inverts() {
        let g: GridSpec = "n = 3..6\nt = 20".parse().unwrap();
        let r = verify("walk_identity", &g).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.worst_margin, Some(0.0));
        assert!(r.runtime_ms.is_none());
        let inv = verify_with(
            "walk_identity",
            &g,
            &VerifyOptions {
                invert: true,
                workers: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!inv.passed() && inv.points_passed == 0);
        assert_eq!(inv.points_checked, r.points_checked);
    }

    #[test]
    fn worker_count_does_not_change_the_report() {
        let g: GridSpec = "n = [40, 100]\nm = [1, 2]\nc = [1/2, 1, 2]".parse().unwrap();
        let one = verify_with("expct_ub", &g, &VerifyOptions { workers: Some(1), ..Default::default() }).unwrap();
        let four = verify_with("expct_ub", &g, &VerifyOptions { workers: Some(4), ..Default::default() }).unwrap();
        assert_eq!(one, four);
    }
}
