//! Run configuration: one TOML file with a section per subcommand.
//!
//! Every key is optional; command-line flags override file values and
//! built-in defaults fill the rest. Unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//!
//! [output]
//! dir = "runs/today"
//!
//! [sharpness]
//! case = 1
//! n = 2
//! p = [1, 2]
//! q = [1, 2]
//! jmin = 5
//! jmax = 8
//!
//! [upper-bound]
//! p = [1, 1]
//! q = ["inf", "inf"]
//! m = [-1, -0.5]
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sharpness::record::exponent;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "WAVELAB_OUT_DIR";

/// Output directory used when neither the config nor the environment
/// names one.
pub const DEFAULT_OUT_DIR: &str = "wavelab-out";

pub const RECORDS_FILE: &str = "records.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";

/// A Lebesgue exponent in `(0, ∞]`, written as a number or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        exponent::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Num(f64),
            Text(String),
        }
        let v = match Repr::deserialize(d)? {
            Repr::Int(v) => v as f64,
            Repr::Num(v) => v,
            Repr::Text(t) => {
                exponent::parse(&t).ok_or_else(|| serde::de::Error::custom(format!("bad exponent {t:?}")))?
            }
        };
        if !(v > 0.0) {
            return Err(serde::de::Error::custom(format!("exponent {v} must be positive")));
        }
        Ok(Exponent(v))
    }
}

impl std::str::FromStr for Exponent {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match exponent::parse(s) {
            Some(v) if v > 0.0 => Ok(Exponent(v)),
            _ => Err(format!("expected a positive number or 'inf', got {s:?}")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionCheckConfig {
    pub instances: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelScanConfig {
    pub n: Option<usize>,
    pub p: Option<Vec<Exponent>>,
    pub jmin: Option<i32>,
    pub jmax: Option<i32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct L1ProbeConfig {
    pub n: Option<usize>,
    /// `highpass` or `lowpass`.
    pub variant: Option<String>,
    pub jmin: Option<i32>,
    pub jmax: Option<i32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularCheckConfig {
    pub jmin: Option<i32>,
    pub jmax: Option<i32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandSymbolConfig {
    pub n: Option<usize>,
    /// `sigma` or `power`.
    pub family: Option<String>,
    pub m: Option<f64>,
    pub jmax: Option<i32>,
    pub radius: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessSection {
    pub case: Option<u8>,
    pub n: Option<usize>,
    pub p: Option<Vec<Exponent>>,
    pub q: Option<Vec<Exponent>>,
    pub jmin: Option<i32>,
    pub jmax: Option<i32>,
    pub delta: Option<f64>,
    pub draws: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpperBoundSection {
    pub p: Option<Vec<Exponent>>,
    pub q: Option<Vec<Exponent>>,
    pub m: Option<Vec<f64>>,
    pub jmin: Option<i32>,
    pub jmax: Option<i32>,
    pub random_pairs: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    /// `csv`, `jsonl` or `plotdata`.
    pub format: Option<String>,
    pub store: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub partition_check: PartitionCheckConfig,
    #[serde(default)]
    pub kernel_scan: KernelScanConfig,
    #[serde(default)]
    pub l1_probe: L1ProbeConfig,
    #[serde(default)]
    pub angular_check: AngularCheckConfig,
    #[serde(default)]
    pub expand_symbol: ExpandSymbolConfig,
    #[serde(default)]
    pub sharpness: SharpnessSection,
    #[serde(default)]
    pub upper_bound: UpperBoundSection,
    #[serde(default)]
    pub report: ReportSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Output directory: the config value, then `$WAVELAB_OUT_DIR`, then
    /// [`DEFAULT_OUT_DIR`].
    pub fn out_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .or_else(|| {
                std::env::var_os(OUT_DIR_ENV)
                    .filter(|v| !v.is_empty())
                    .map(PathBuf::from)
            })
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_exponents() {
        let cfg = RunConfig::parse(
            "seed = 3\n[sharpness]\ncase = 2\np = [\"inf\"]\nq = [\"inf\"]\n[upper-bound]\np = [1, 2.5]\nm = [-1]\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.sharpness.case, Some(2));
        assert_eq!(cfg.sharpness.p, Some(vec![Exponent(f64::INFINITY)]));
        assert_eq!(cfg.upper_bound.p, Some(vec![Exponent(1.0), Exponent(2.5)]));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("[sharpness]\nkase = 1\n").is_err());
        assert!(RunConfig::parse("[nonsense]\n").is_err());
        assert!(RunConfig::parse("[sharpness]\np = [0]\n").is_err());
    }
}
