//! Experiment reports: scalar results, per-point rows, line fits and provenance,
//! serialized as JSON (lossless) or CSV (plot-ready).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fit::LineFit;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Chooses by file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    /// Echo of the fully resolved configuration.
    pub config: serde_json::Value,
    pub fits: BTreeMap<String, LineFit>,
    pub provenance: BTreeMap<String, String>,
    pub results: BTreeMap<String, f64>,
    pub rows: Vec<BTreeMap<String, f64>>,
}

impl Default for ExperimentReport {
    fn default() -> Self {
        Self {
            config: serde_json::Value::Object(serde_json::Map::new()),
            fits: BTreeMap::new(),
            provenance: BTreeMap::new(),
            results: BTreeMap::new(),
            rows: Vec::new(),
        }
    }
}

impl ExperimentReport {
    /// A report echoing `config`, stamped with the experiment name and crate version.
    pub fn new(experiment: &str, config: &impl Serialize) -> Result<Self> {
        let config = serde_json::to_value(config).map_err(|e| Error::Serialization(e.to_string()))?;
        let mut provenance = BTreeMap::new();
        provenance.insert("experiment".to_string(), experiment.to_string());
        provenance.insert("crate".to_string(), env!("CARGO_PKG_NAME").to_string());
        provenance.insert("version".to_string(), env!("CARGO_PKG_VERSION").to_string());
        Ok(Self { config, provenance, ..Self::default() })
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.results.insert(name.to_string(), value);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.provenance.insert(key.to_string(), value.to_string());
    }

    pub fn push_row<'a>(&mut self, row: impl IntoIterator<Item = (&'a str, f64)>) {
        self.rows.push(row.into_iter().map(|(k, v)| (k.to_string(), v)).collect());
    }

    pub fn set_fit(&mut self, name: &str, fit: LineFit) {
        self.fits.insert(name.to_string(), fit);
    }

    /// Rejects non-finite numbers, which neither format can carry faithfully.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Serialization(format!("{what} is {v}; reports must be finite")))
            }
        };
        for (k, &v) in &self.results {
            bad(format!("result `{k}`"), v)?;
        }
        for (i, row) in self.rows.iter().enumerate() {
            for (k, &v) in row {
                bad(format!("row {i} field `{k}`"), v)?;
            }
        }
        for (k, f) in &self.fits {
            bad(format!("fit `{k}` slope"), f.slope)?;
            bad(format!("fit `{k}` intercept"), f.intercept)?;
            bad(format!("fit `{k}` residual"), f.rms_residual)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// `name,value` lines: results first, then fit parameters as `fit.<name>.<field>`.
    pub fn to_csv(&self) -> Result<String> {
        self.validate()?;
        let mut out = String::from("name,value\n");
        for (k, v) in &self.results {
            writeln!(out, "{k},{}", csv_float(*v)).unwrap();
        }
        for (k, f) in &self.fits {
            for (field, v) in
                [("slope", f.slope), ("intercept", f.intercept), ("rms_residual", f.rms_residual)]
            {
                writeln!(out, "fit.{k}.{field},{}", csv_float(v)).unwrap();
            }
        }
        Ok(out)
    }
}

/// Seventeen significant digits, enough to round-trip any f64.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows as a table whose header is the sorted union of the row keys.
pub fn rows_to_csv(rows: &[BTreeMap<String, f64>]) -> Result<String> {
    let header: BTreeSet<&str> = rows.iter().flat_map(|r| r.keys().map(String::as_str)).collect();
    let mut out = header.iter().copied().collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in rows {
        let cells = header
            .iter()
            .map(|k| match row.get(*k) {
                Some(v) if v.is_finite() => Ok(csv_float(*v)),
                Some(v) => Err(Error::Serialization(format!("row field `{k}` is {v}"))),
                None => Ok(String::new()),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_report(report: &ExperimentReport, path: &Path, format: Format) -> Result<()> {
    let text = match format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv()?,
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    ExperimentReport::from_json(&std::fs::read_to_string(path)?)
}

pub fn write_rows_csv(rows: &[BTreeMap<String, f64>], path: &Path) -> Result<()> {
    std::fs::write(path, rows_to_csv(rows)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("pair", &serde_json::json!({"x": 100, "h": 5.5})).unwrap();
        r.set("value", -1234.567_890_123_456_7);
        r.set("tiny", 1e-300);
        r.push_row([("X", 1024.0), ("sum", 0.1 + 0.2)]);
        r.push_row([("X", 2048.0)]);
        r.set_fit("sum", LineFit { slope: 0.51, intercept: -3.0, rms_residual: 1e-3 });
        r
    }

    #[test]
    fn empty_report_shapes() {
        let r = ExperimentReport::default();
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in ["config", "results", "provenance"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["results"], serde_json::json!({}));
        assert_eq!(r.to_csv().unwrap(), "name,value\n");
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = sample();
        let back = ExperimentReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.results["value"].to_bits(), r.results["value"].to_bits());
    }

    #[test]
    fn csv_carries_seventeen_digits() {
        let csv = sample().to_csv().unwrap();
        let line = csv.lines().find(|l| l.starts_with("value,")).unwrap();
        let parsed: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, -1234.567_890_123_456_7);
        assert!(csv.contains("fit.sum.slope,"));
        let rows = rows_to_csv(&sample().rows).unwrap();
        assert_eq!(rows.lines().next(), Some("X,sum"));
        assert!(rows.lines().nth(2).unwrap().ends_with(','));
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let mut r = sample();
        r.set("bad", f64::NAN);
        assert!(matches!(r.to_json(), Err(Error::Serialization(_))));
        assert!(matches!(r.to_csv(), Err(Error::Serialization(_))));
        let mut r = sample();
        r.push_row([("inf", f64::INFINITY)]);
        assert!(r.to_json().is_err());
    }

    #[test]
    fn serialization_is_deterministic() {
        assert_eq!(sample().to_json().unwrap(), sample().to_json().unwrap());
    }
}
