//! Summaries, CSV tables and plot data built from raw records.
//!
//! Everything here is recomputed from the records alone: series are
//! regrouped, slopes refitted and verdicts re-judged, so a report never
//! depends on state that was not persisted.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sharpness::record::exponent;
use crate::sharpness::{
    case1_expected, case2_expected, case3_expected, fit_exponent, sweep_expectation, Expectation, ExperimentRecord,
    SlopeFit, Verdict,
};

pub const CSV_HEADER: &str = "case,n,p,q,m,j,value,ratio,slope,stderr,r2,verdict";

/// What a series of this kind is expected to do.
pub fn expectation_for(case: &str, n: usize, p: f64, q: f64, m: f64) -> Expectation {
    let d = n as f64;
    match case {
        "case1" => Expectation::Near {
            value: case1_expected(n, p, q),
            tol: 0.2,
        },
        "case2" => {
            let tol = if p.is_infinite() && q.is_infinite() { 0.25 } else { 0.2 };
            Expectation::Near {
                value: case2_expected(n, p, q),
                tol,
            }
        }
        "case3" => Expectation::Near {
            value: case3_expected(n, q),
            tol: 0.3,
        },
        "upper" => sweep_expectation(n, p, q, m),
        "kernel" => Expectation::Near {
            value: (d + 1.0) / 2.0 - 1.0 / p,
            tol: 0.1,
        },
        "l1-highpass" | "angular" => Expectation::Near {
            value: (d - 1.0) / 2.0,
            tol: 0.15,
        },
        "l1-lowpass" => Expectation::Near { value: 0.0, tol: 0.15 },
        _ => Expectation::None,
    }
}

/// Records sharing one configuration, ordered by scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub case: String,
    pub n: usize,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    pub m: f64,
    pub seed: u64,
    pub records: Vec<ExperimentRecord>,
    /// `None` when fewer than three scales are present.
    pub fit: Option<SlopeFit>,
    pub verdict: Verdict,
}

impl Series {
    pub fn label(&self) -> String {
        format!(
            "case={} n={} p={} q={} m={} seed={}",
            self.case,
            self.n,
            exponent::format(self.p),
            exponent::format(self.q),
            self.m,
            self.seed
        )
    }
}

fn series_order(a: &Series, b: &Series) -> Ordering {
    a.case
        .cmp(&b.case)
        .then(a.p.total_cmp(&b.p))
        .then(a.q.total_cmp(&b.q))
        .then(a.n.cmp(&b.n))
        .then(a.m.total_cmp(&b.m))
        .then(a.seed.cmp(&b.seed))
}

/// Groups records into series, refits and re-judges each one.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<Series> {
    let mut groups: Vec<Series> = Vec::new();
    for r in records {
        let found = groups.iter_mut().find(|s| {
            s.case == r.case
                && s.n == r.n
                && s.p.to_bits() == r.p.to_bits()
                && s.q.to_bits() == r.q.to_bits()
                && s.m.to_bits() == r.m.to_bits()
                && s.seed == r.seed
        });
        match found {
            Some(s) => s.records.push(r.clone()),
            None => groups.push(Series {
                case: r.case.clone(),
                n: r.n,
                p: r.p,
                q: r.q,
                m: r.m,
                seed: r.seed,
                records: vec![r.clone()],
                fit: None,
                verdict: Verdict::Info,
            }),
        }
    }
    for s in &mut groups {
        s.records.sort_by_key(|r| r.j);
        let pts: Vec<(i32, f64)> = s.records.iter().map(|r| (r.j, r.ratio)).collect();
        s.fit = fit_exponent(&pts).ok();
        s.verdict = match &s.fit {
            Some(f) => expectation_for(&s.case, s.n, s.p, s.q, s.m).judge(f.slope),
            None => Verdict::Info,
        };
    }
    groups.sort_by(series_order);
    groups
}

/// Record rows of each series followed by its summary row.
pub fn emit_csv(records: &[ExperimentRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Store("the record store is empty".into()));
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in summarize(records) {
        let head = format!(
            "{},{},{},{},{}",
            s.case,
            s.n,
            exponent::format(s.p),
            exponent::format(s.q),
            s.m
        );
        for r in &s.records {
            let _ = writeln!(out, "{head},{},{},{},,,,", r.j, r.value, r.ratio);
        }
        match &s.fit {
            Some(f) => {
                let _ = writeln!(
                    out,
                    "{head},,,,{},{},{},{}",
                    f.slope,
                    f.stderr,
                    f.r2,
                    s.verdict.as_str()
                );
            }
            None => {
                let _ = writeln!(out, "{head},,,,,,,{}", s.verdict.as_str());
            }
        }
    }
    Ok(out)
}

/// The records as JSON lines, in series order.
pub fn emit_jsonl(records: &[ExperimentRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Store("the record store is empty".into()));
    }
    let mut out = String::new();
    for s in summarize(records) {
        for r in &s.records {
            out.push_str(&serde_json::to_string(r).map_err(|e| Error::Store(e.to_string()))?);
            out.push('\n');
        }
    }
    Ok(out)
}

/// One `# label slope=…` header per series followed by `j log2(ratio)`
/// lines; series are separated by a blank line.
pub fn emit_plotdata(records: &[ExperimentRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Store("the record store is empty".into()));
    }
    let mut out = String::new();
    for (i, s) in summarize(records).iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let slope = s
            .fit
            .as_ref()
            .map(|f| f.slope.to_string())
            .unwrap_or_else(|| "none".into());
        let _ = writeln!(out, "# {} slope={}", s.label(), slope);
        for r in &s.records {
            let _ = writeln!(out, "{} {}", r.j, r.ratio.log2());
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSeries {
    /// `key=value` pairs of the header line.
    pub header: BTreeMap<String, String>,
    pub points: Vec<(i32, f64)>,
}

impl PlotSeries {
    /// Slope refitted from the emitted points.
    pub fn refit(&self) -> Result<SlopeFit> {
        let pts: Vec<(i32, f64)> = self.points.iter().map(|&(j, y)| (j, y.exp2())).collect();
        fit_exponent(&pts)
    }

    /// Slope written in the header, if any.
    pub fn stored_slope(&self) -> Option<f64> {
        self.header.get("slope").and_then(|s| s.parse().ok())
    }
}

pub fn parse_plotdata(text: &str) -> Result<Vec<PlotSeries>> {
    let mut out: Vec<PlotSeries> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let bad = |what: &str| Error::Store(format!("plot data line {}: {what}", i + 1));
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut header = BTreeMap::new();
            for tok in rest.split_whitespace() {
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| bad("header token is not key=value"))?;
                header.insert(k.to_string(), v.to_string());
            }
            out.push(PlotSeries {
                header,
                points: Vec::new(),
            });
            continue;
        }
        let series = out.last_mut().ok_or_else(|| bad("data before the first header"))?;
        let mut cols = line.split_whitespace();
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(bad("expected two columns"));
        };
        let j: i32 = a.parse().map_err(|_| bad("scale is not an integer"))?;
        let y: f64 = b.parse().map_err(|_| bad("value is not a number"))?;
        if !y.is_finite() {
            return Err(bad("value is not finite"));
        }
        series.points.push((j, y));
    }
    Ok(out)
}
