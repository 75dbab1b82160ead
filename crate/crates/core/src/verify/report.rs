use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lemma_id: String,
    /// Summary of the grid axes.
    pub grid: String,
    /// Set when the asserted direction was flipped (negative control).
    pub inverted: bool,
    pub points_checked: u64,
    pub points_passed: u64,
    /// Points that failed the hypothesis filters; never counted as passed.
    pub points_skipped: u64,
    /// Bound minus quantity in the asserted direction, minimised over the
    /// checked points. `None` when nothing was checked.
    pub worst_margin: Option<f64>,
    pub unit: String,
    /// Parameters of the point attaining the worst margin.
    pub witness: BTreeMap<String, String>,
    pub runtime_ms: Option<u64>,
    pub note: String,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.points_checked > 0 && self.points_passed == self.points_checked
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Contract(format!("json: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Usage(format!("bad report json: {e}")))
    }

    pub const CSV_HEADER: [&'static str; 11] = [
        "lemma_id",
        "grid",
        "inverted",
        "points_checked",
        "points_passed",
        "points_skipped",
        "worst_margin",
        "unit",
        "witness",
        "runtime_ms",
        "note",
    ];

    fn csv_row(&self) -> Vec<String> {
        let witness = self
            .witness
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        vec![
            self.lemma_id.clone(),
            self.grid.clone(),
            self.inverted.to_string(),
            self.points_checked.to_string(),
            self.points_passed.to_string(),
            self.points_skipped.to_string(),
            self.worst_margin.map(format_float).unwrap_or_default(),
            self.unit.clone(),
            witness,
            self.runtime_ms.map(|x| x.to_string()).unwrap_or_default(),
            self.note.clone(),
        ]
    }

    /// Header plus one row per report.
    pub fn write_csv<W: Write>(reports: &[VerificationReport], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Contract(format!("csv: {e}"));
        w.write_record(Self::CSV_HEADER).map_err(csv_err)?;
        for r in reports {
            w.write_record(r.csv_row()).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Contract(format!("csv: {e}")))?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        Self::write_csv(std::slice::from_ref(self), &mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Contract(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Vec<VerificationReport>> {
        let bad = |msg: String| Error::Usage(format!("bad report csv: {msg}"));
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.iter().ne(Self::CSV_HEADER.iter().copied()) {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut out = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let f = |i: usize| rec.get(i).unwrap_or("");
            let int = |i: usize| f(i).parse::<u64>().map_err(|e| bad(format!("{}: {e}", Self::CSV_HEADER[i])));
            let opt_float = |i: usize| -> Result<Option<f64>> {
                match f(i) {
                    "" => Ok(None),
                    s => s.parse().map(Some).map_err(|e| bad(format!("worst_margin: {e}"))),
                }
            };
            let witness = f(8)
                .split(';')
                .filter(|s| !s.is_empty())
                .map(|kv| {
                    kv.split_once('=')
                        .map(|(k, v)| (k.to_string(), v.to_string()))
                        .ok_or_else(|| bad(format!("witness entry `{kv}`")))
                })
                .collect::<Result<_>>()?;
            out.push(VerificationReport {
                lemma_id: f(0).to_string(),
                grid: f(1).to_string(),
                inverted: f(2).parse().map_err(|_| bad("inverted".into()))?,
                points_checked: int(3)?,
                points_passed: int(4)?,
                points_skipped: int(5)?,
                worst_margin: opt_float(6)?,
                unit: f(7).to_string(),
                witness,
                runtime_ms: match f(9) {
                    "" => None,
                    _ => Some(int(9)?),
                },
                note: f(10).to_string(),
            });
        }
        Ok(out)
    }
}

/// At most 17 significant digits, enough to read the same double back.
/// Plain decimal between 1e-5 and 1e17, scientific outside.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if !(-5..17).contains(&exp) {
        return sci;
    }
    let decimals = (16 - exp) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        VerificationReport {
            lemma_id: "expct_ub".into(),
            grid: "n=40..2000 (5); c=-3..3 (8)".into(),
            inverted: false,
            points_checked: 31,
            points_passed: 31,
            points_skipped: 9,
            worst_margin: Some(0.1 + 0.2),
            unit: "states".into(),
            witness: [("n".to_string(), "40".to_string()), ("c".to_string(), "-1/2".to_string())]
                .into_iter()
                .collect(),
            runtime_ms: None,
            note: "t rounded, c recomputed, with a comma".into(),
        }
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(VerificationReport::from_json(&r.to_json().unwrap()).unwrap(), r);
    }

    #[test]
    fn csv_round_trip() {
        let mut r = sample();
        let back = VerificationReport::read_csv(r.to_csv().unwrap().as_bytes()).unwrap();
        assert_eq!(back, vec![r.clone()]);
        r.worst_margin = None;
        r.runtime_ms = Some(12);
        r.witness.clear();
        let back = VerificationReport::read_csv(r.to_csv().unwrap().as_bytes()).unwrap();
        assert_eq!(back, vec![r]);
    }

    #[test]
    fn floats_read_back() {
        for x in [2.0 / 3.0, 1.0 / 6.0, 0.5, 1.0, -3.25e-9, 1e20, 123456.789, 1e-300, -0.1 - 0.2] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(2.0 / 3.0), "0.66666666666666663");
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(-2.0), "-2");
    }

    #[test]
    fn passed_needs_a_checked_point() {
        let mut r = sample();
        assert!(r.passed());
        r.points_passed = 30;
        assert!(!r.passed());
        r.points_checked = 0;
        r.points_passed = 0;
        assert!(!r.passed());
    }
}
