//! Per-scale experiment records and case summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::fit::SlopeFit;
use crate::lattice::GridSpec;

/// Exponents are written as numbers, with `"inf"` for `∞` so that JSON
/// round-trips.
pub mod exponent {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => parse(&t).ok_or_else(|| serde::de::Error::custom(format!("bad exponent {t:?}"))),
        }
    }

    /// Parses a number or `inf`/`infinity`.
    pub fn parse(t: &str) -> Option<f64> {
        match t.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Some(f64::INFINITY),
            other => other.parse::<f64>().ok().filter(|v| v.is_finite()),
        }
    }

    pub fn format(v: f64) -> String {
        if v.is_infinite() {
            "inf".into()
        } else {
            format!("{v}")
        }
    }
}

/// One scale of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub case: String,
    pub n: usize,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    #[serde(with = "exponent")]
    pub r: f64,
    pub m: f64,
    pub j: i32,
    /// Output functional, or the statistic itself where there is no
    /// normalisation.
    pub value: f64,
    pub input_norms: Vec<f64>,
    pub ratio: f64,
    pub grid: Option<GridSpec>,
    pub seed: u64,
    /// Case-specific diagnostics keyed by name.
    #[serde(default)]
    pub extra: BTreeMap<String, f64>,
}

/// Outcome of a verdict check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    /// Measured without a pass/fail expectation.
    Info,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Info => "INFO",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// What a slope is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expectation {
    /// `|slope − value| ≤ tol`.
    Near {
        value: f64,
        tol: f64,
    },
    /// `slope ≤ bound`.
    AtMost {
        bound: f64,
    },
    None,
}

impl Expectation {
    pub fn judge(&self, slope: f64) -> Verdict {
        match *self {
            Expectation::Near { value, tol } => Verdict::from_bool((slope - value).abs() <= tol),
            Expectation::AtMost { bound } => Verdict::from_bool(slope <= bound),
            Expectation::None => Verdict::Info,
        }
    }
}

/// Records of one run and the exponent fitted through their ratios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub case: String,
    pub records: Vec<ExperimentRecord>,
    pub fit: SlopeFit,
    pub expectation: Expectation,
    pub verdict: Verdict,
}

impl CaseOutcome {
    pub fn new(case: &str, records: Vec<ExperimentRecord>, fit: SlopeFit, expectation: Expectation) -> Self {
        let verdict = expectation.judge(fit.slope);
        Self {
            case: case.into(),
            records,
            fit,
            expectation,
            verdict,
        }
    }

    /// Per-scale residuals of the fit, to tell a bad fit from a window
    /// that is not yet asymptotic.
    pub fn residuals(&self) -> Vec<(i32, f64)> {
        self.records
            .iter()
            .map(|r| (r.j, r.ratio.log2() - self.fit.intercept - self.fit.slope * r.j as f64))
            .collect()
    }
}
