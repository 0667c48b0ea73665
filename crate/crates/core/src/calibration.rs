//! Frozen regression intervals (`constants.json`) and the results store
//! (`results.jsonl`).

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequalities::RatioRecord;

pub const SCHEMA_VERSION: u32 = 1;
/// Multiplicative slack applied on both ends of a frozen interval.
pub const SLACK: f64 = 1.25;

/// Measured range of one quantity on the reference grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub grid_fingerprint: String,
}

impl Interval {
    /// Tightest interval around `values`; `None` when no value is finite.
    pub fn of(values: &[f64], grid_fingerprint: &str) -> Option<Self> {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return None;
        }
        Some(Interval {
            min_ratio: finite.iter().cloned().fold(f64::INFINITY, f64::min),
            max_ratio: finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            grid_fingerprint: grid_fingerprint.to_string(),
        })
    }

    /// `v ∈ [min/SLACK, max·SLACK]`.
    pub fn admits(&self, v: f64) -> bool {
        v >= self.min_ratio / SLACK && v <= self.max_ratio * SLACK
    }

    pub fn width_factor(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }
}

/// `{"schema_version": 1, key: {min_ratio, max_ratio, grid_fingerprint}, ...}`.
/// Keys are case ids or dotted names of structural checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub schema_version: u32,
    #[serde(flatten)]
    pub entries: BTreeMap<String, Interval>,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            schema_version: SCHEMA_VERSION,
            entries: BTreeMap::new(),
        }
    }
}

impl Constants {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: Constants =
            serde_json::from_str(s).map_err(|e| Error::Calibration(format!("constants file does not parse: {e}")))?;
        if c.schema_version != SCHEMA_VERSION {
            return Err(Error::Calibration(format!("unsupported schema_version {}", c.schema_version)));
        }
        for (k, v) in &c.entries {
            if !(v.min_ratio.is_finite() && v.max_ratio.is_finite() && v.min_ratio <= v.max_ratio) {
                return Err(Error::Calibration(format!("entry '{k}' has an invalid interval")));
            }
        }
        Ok(c)
    }

    /// Missing or unreadable files are calibration errors.
    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Calibration(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("constants serialize")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn insert(&mut self, key: impl Into<String>, interval: Interval) {
        self.entries.insert(key.into(), interval);
    }

    /// The entry for `key`, which must have been calibrated on `grid_fingerprint`.
    pub fn get(&self, key: &str, grid_fingerprint: &str) -> Result<&Interval> {
        let e = self
            .entries
            .get(key)
            .ok_or_else(|| Error::Calibration(format!("no calibrated interval for '{key}'")))?;
        if e.grid_fingerprint != grid_fingerprint {
            return Err(Error::Calibration(format!(
                "'{key}' was calibrated on {}, not {grid_fingerprint}",
                e.grid_fingerprint
            )));
        }
        Ok(e)
    }
}

/// The constants shipped for the reference corpus and grid.
pub fn reference_constants() -> Constants {
    Constants::from_json(include_str!("../data/constants.json")).expect("shipped constants parse")
}

pub fn write_results<W: Write>(mut out: W, records: &[RatioRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_results<R: BufRead>(input: R) -> Result<Vec<RatioRecord>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: RatioRecord = serde_json::from_str(&line)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!("unsupported record schema_version {}", r.schema_version)));
        }
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate, GeneratorSpec};
    use crate::grid::make_grid;
    use crate::inequalities::{evaluate, CaseId, EvalContext, InequalityCase};

    #[test]
    fn interval_slack() {
        let i = Interval::of(&[2.0, 4.0, f64::NAN], "g").unwrap();
        assert_eq!((i.min_ratio, i.max_ratio), (2.0, 4.0));
        assert!(i.admits(1.6) && i.admits(5.0));
        assert!(!i.admits(1.59) && !i.admits(5.01));
        assert_eq!(i.width_factor(), 2.0);
        assert!(Interval::of(&[f64::NAN], "g").is_none());
    }

    #[test]
    fn constants_round_trip_and_shape() {
        let mut c = Constants::default();
        c.insert("thm1_2", Interval::of(&[0.5, 1.5], "fp").unwrap());
        let s = c.to_json();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["thm1_2"]["max_ratio"], 1.5);
        assert_eq!(v["thm1_2"]["grid_fingerprint"], "fp");
        assert_eq!(Constants::from_json(&s).unwrap(), c);
        assert!(c.get("thm1_2", "fp").is_ok());
        assert_eq!(c.get("thm1_2", "other").unwrap_err().code(), "missing-calibration");
        assert_eq!(c.get("lem3_2", "fp").unwrap_err().code(), "missing-calibration");
    }

    #[test]
    fn corrupt_or_missing_constants() {
        assert_eq!(Constants::from_json("{not json").unwrap_err().code(), "missing-calibration");
        assert_eq!(
            Constants::from_json(r#"{"schema_version": 2}"#).unwrap_err().code(),
            "missing-calibration"
        );
        assert_eq!(
            Constants::from_json(r#"{"schema_version": 1, "x": {"min_ratio": 3, "max_ratio": 1, "grid_fingerprint": "g"}}"#)
                .unwrap_err()
                .code(),
            "missing-calibration"
        );
        let e = Constants::load(Path::new("/nonexistent/constants.json")).unwrap_err();
        assert_eq!(e.code(), "missing-calibration");
    }

    #[test]
    fn shipped_constants_cover_every_case() {
        let c = reference_constants();
        let fp = crate::corpus::reference_corpus().grid.fingerprint();
        for id in CaseId::ALL {
            assert!(c.get(id.as_str(), &fp).is_ok(), "{id}");
        }
    }

    #[test]
    fn results_round_trip() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let ctx = EvalContext::new(g).unwrap();
        let f = generate(&GeneratorSpec::gaussian(0.0, 1.0), g).unwrap();
        let recs: Vec<RatioRecord> = [CaseId::Thm1_2, CaseId::Eq2_0a]
            .iter()
            .map(|&id| evaluate(&InequalityCase::reference(id), &f, &ctx).unwrap())
            .collect();
        let mut buf = Vec::new();
        write_results(&mut buf, &recs).unwrap();
        assert_eq!(buf.iter().filter(|b| **b == b'\n').count(), 2);
        assert_eq!(read_results(&buf[..]).unwrap(), recs);
    }
}
