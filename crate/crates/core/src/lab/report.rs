use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::fmt_g17;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub label: String,
    pub s: Option<f64>,
    pub k_eps: Option<f64>,
    pub a1: Option<f64>,
    pub ainf: Option<f64>,
    pub quotient: f64,
    pub normalized_quotient: f64,
    pub pass: bool,
    /// Measured side quantities, keyed by name.
    pub extras: BTreeMap<String, f64>,
}

impl TrialRecord {
    pub fn new(trial: usize, label: impl Into<String>, quotient: f64, normalized_quotient: f64) -> Self {
        TrialRecord {
            trial,
            label: label.into(),
            s: None,
            k_eps: None,
            a1: None,
            ainf: None,
            quotient,
            normalized_quotient,
            pass: true,
            extras: BTreeMap::new(),
        }
    }
}

/// Summary of `normalized_quotient` over the records.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregates {
    pub count: usize,
    pub max: f64,
    pub median: f64,
    pub min: f64,
}

impl Aggregates {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Aggregates::default();
        }
        Aggregates {
            count: values.len(),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            median: median(values),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Median with the mean of the two central values for even counts.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub crate_version: String,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub records: Vec<TrialRecord>,
    pub aggregates: Aggregates,
    pub pass_flags: BTreeMap<String, bool>,
    /// Experiment-level measurements (for example per-`s` maxima).
    pub summary: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, seed: u64, config: &impl Serialize, records: Vec<TrialRecord>) -> Result<Self> {
        let mut report = ExperimentReport {
            name: name.into(),
            records,
            aggregates: Aggregates::default(),
            pass_flags: BTreeMap::new(),
            summary: BTreeMap::new(),
            provenance: Provenance {
                seed,
                crate_version: env!("CARGO_PKG_VERSION").to_string(),
                config: serde_json::to_value(config)?,
            },
        };
        report.recompute_aggregates();
        Ok(report)
    }

    pub fn recompute_aggregates(&mut self) {
        let v: Vec<f64> = self.records.iter().map(|r| r.normalized_quotient).collect();
        self.aggregates = Aggregates::of(&v);
    }

    /// True when every pass flag holds (vacuously for descriptive reports).
    pub fn passed(&self) -> bool {
        self.pass_flags.values().all(|&p| p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Per-trial rows: `trial,s,K_eps,a1,ainf,quotient,normalized_quotient,pass`.
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt_g17).unwrap_or_default();
        let mut out = String::from("trial,s,K_eps,a1,ainf,quotient,normalized_quotient,pass\n");
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.trial,
                opt(r.s),
                opt(r.k_eps),
                opt(r.a1),
                opt(r.ainf),
                fmt_g17(r.quotient),
                fmt_g17(r.normalized_quotient),
                r.pass
            )
            .expect("string write");
        }
        out
    }
}
