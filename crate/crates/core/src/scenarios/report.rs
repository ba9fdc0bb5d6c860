use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ScenarioConfig;
use crate::dynamics::MatrixEntries;
use crate::error::Result;
use crate::linalg::space::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        })
    }
}

/// How `measured` is judged against `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

impl Comparison {
    pub fn symbol(&self) -> &'static str {
        match self {
            Comparison::AtMost => "<=",
            Comparison::Below => "<",
            Comparison::AtLeast => ">=",
            Comparison::Above => ">",
        }
    }

    fn holds(&self, measured: f64, bound: f64) -> bool {
        if !measured.is_finite() {
            return false;
        }
        match self {
            Comparison::AtMost => measured <= bound,
            Comparison::Below => measured < bound,
            Comparison::AtLeast => measured >= bound,
            Comparison::Above => measured > bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub status: Status,
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub detail: String,
}

impl Assertion {
    pub fn check(name: impl Into<String>, measured: f64, comparison: Comparison, tolerance: f64) -> Self {
        let status = if comparison.holds(measured, tolerance) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            name: name.into(),
            status,
            measured: measured.is_finite().then_some(measured),
            tolerance,
            comparison,
            detail: if measured.is_finite() {
                String::new()
            } else {
                format!("non-finite measurement {measured}")
            },
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::check(name, measured, Comparison::AtMost, tolerance)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::check(name, measured, Comparison::AtLeast, tolerance)
    }

    pub fn skipped(name: impl Into<String>, tolerance: f64, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Skipped,
            measured: None,
            tolerance,
            comparison: Comparison::AtMost,
            detail: reason.into(),
        }
    }

    /// A failed row for a check that could not be evaluated at all.
    pub fn errored(name: impl Into<String>, tolerance: f64, reason: impl Into<String>) -> Self {
        Self {
            status: Status::Fail,
            ..Self::skipped(name, tolerance, reason)
        }
    }

    pub fn comparing(mut self, comparison: Comparison) -> Self {
        self.comparison = comparison;
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        let d = detail.into();
        self.detail = if self.detail.is_empty() {
            d
        } else {
            format!("{}; {d}", self.detail)
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Results at one (variant, t) point. `t` is absent for static quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub variant: String,
    pub t: Option<f64>,
    pub quantities: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<MatrixEntries>,
}

impl Record {
    pub fn new(variant: impl Into<String>, t: Option<f64>) -> Self {
        Self {
            variant: variant.into(),
            t,
            quantities: BTreeMap::new(),
            rho: None,
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.quantities.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.quantities.insert(name.to_string(), value);
    }

    pub fn with_rho(mut self, rho: &DensityMatrix) -> Self {
        self.rho = Some(MatrixEntries::from(rho));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub t: f64,
    #[serde(rename = "Z1")]
    pub z1: f64,
    #[serde(rename = "Z2")]
    pub z2: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: ScenarioConfig,
}

impl Provenance {
    pub fn new(config: &ScenarioConfig) -> Self {
        Self {
            tool: "ccrlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config.seed,
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub passed: bool,
    pub records: Vec<Record>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepRow>,
    pub assertions: Vec<Assertion>,
    pub provenance: Provenance,
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

impl ScenarioReport {
    pub fn new(scenario: impl Into<String>, config: &ScenarioConfig) -> Self {
        Self {
            scenario: scenario.into(),
            passed: true,
            records: Vec::new(),
            sweep: Vec::new(),
            assertions: Vec::new(),
            provenance: Provenance::new(config),
        }
    }

    pub fn assert(&mut self, a: Assertion) {
        self.passed &= a.passed();
        self.assertions.push(a);
    }

    pub fn record(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| a.status == Status::Fail)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Long-format table: `variant,t,quantity,value`.
    pub fn records_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["variant", "t", "quantity", "value"])?;
        for r in &self.records {
            for (name, v) in &r.quantities {
                w.write_record([
                    r.variant.as_str(),
                    &format_opt(r.t),
                    name,
                    &format_number(*v),
                ])?;
            }
        }
        finish(w)
    }

    pub fn sweep_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["N", "t", "Z1", "Z2", "Z", "D"])?;
        for s in &self.sweep {
            w.write_record([
                s.n.to_string(),
                format_number(s.t),
                format_number(s.z1),
                format_number(s.z2),
                format_number(s.z),
                format_number(s.d),
            ])?;
        }
        finish(w)
    }

    pub fn checks_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "status", "measured", "comparison", "tolerance", "detail"])?;
        for a in &self.assertions {
            w.write_record([
                a.name.clone(),
                a.status.to_string(),
                format_opt(a.measured),
                a.comparison.symbol().to_string(),
                format_number(a.tolerance),
                a.detail.clone(),
            ])?;
        }
        finish(w)
    }

    /// `variant,t,row,col,re,im` for every record carrying a density matrix.
    pub fn rho_csv(&self) -> Result<Option<String>> {
        if self.records.iter().all(|r| r.rho.is_none()) {
            return Ok(None);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["variant", "t", "row", "col", "re", "im"])?;
        for r in &self.records {
            let Some(rho) = &r.rho else { continue };
            for (i, row) in rho.0.iter().enumerate() {
                for (j, [re, im]) in row.iter().enumerate() {
                    w.write_record([
                        r.variant.clone(),
                        format_opt(r.t),
                        i.to_string(),
                        j.to_string(),
                        format_number(*re),
                        format_number(*im),
                    ])?;
                }
            }
        }
        finish(w).map(Some)
    }

    /// Writes `<name>_checks.csv` and `<name>.json`, plus `<name>.csv`,
    /// `<name>_sweep.csv` and `<name>_rho.csv` when there is content for
    /// them. A report with only sweep rows uses the sweep table as
    /// `<name>.csv`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let name = &self.scenario;
        let mut files: Vec<(String, String)> = Vec::new();
        if self.records.is_empty() {
            if !self.sweep.is_empty() {
                files.push((format!("{name}.csv"), self.sweep_csv()?));
            }
        } else {
            files.push((format!("{name}.csv"), self.records_csv()?));
            if !self.sweep.is_empty() {
                files.push((format!("{name}_sweep.csv"), self.sweep_csv()?));
            }
        }
        files.push((format!("{name}_checks.csv"), self.checks_csv()?));
        if let Some(rho) = self.rho_csv()? {
            files.push((format!("{name}_rho.csv"), rho));
        }
        files.push((format!("{name}.json"), self.to_json()? + "\n"));
        let mut written = Vec::new();
        for (file, content) in files {
            let path = dir.join(file);
            fs::write(&path, content)?;
            written.push(path);
        }
        Ok(written)
    }

    /// One line per assertion, for terminals.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for a in &self.assertions {
            let measured = a.measured.map(|m| format!("{m:.3e}")).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "[{}] {}: {} {} {:.3e}",
                a.status,
                a.name,
                measured,
                a.comparison.symbol(),
                a.tolerance
            ));
            if !a.detail.is_empty() {
                out.push_str(&format!(" ({})", a.detail));
            }
            out.push('\n');
        }
        let failed = self.failures().count();
        out.push_str(&format!(
            "{}: {} checks, {} failed\n",
            self.scenario,
            self.assertions.len(),
            failed
        ));
        out
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| crate::error::LabError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
