//! Long-format result records and their CSV / JSON serializations.
//!
//! Columns, in order: `experiment, id, subcommand, seed, depth, grid, order,
//! p, space, metric, value, threshold, passed, wall_time_s, config`. Floats
//! are written with 17 significant digits; absent values are empty in CSV and
//! `null` in JSON.

use std::io::Write;

use serde::Serialize;
use serde_json::value::RawValue;

use crate::config::ExperimentConfig;

pub const COLUMNS: [&str; 15] = [
    "experiment",
    "id",
    "subcommand",
    "seed",
    "depth",
    "grid",
    "order",
    "p",
    "space",
    "metric",
    "value",
    "threshold",
    "passed",
    "wall_time_s",
    "config",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub experiment: String,
    pub id: String,
    pub subcommand: String,
    pub seed: Option<u64>,
    pub depth: Option<usize>,
    pub grid: Option<usize>,
    pub order: Option<usize>,
    pub p: Option<f64>,
    pub space: Option<String>,
    pub metric: String,
    pub value: f64,
    /// Upper bound the value must stay below (or reach, for `>=` metrics).
    pub threshold: Option<f64>,
    /// `None` for informational rows.
    pub passed: Option<bool>,
    pub wall_time_s: f64,
    pub config: String,
}

impl ResultRecord {
    pub fn new(cfg: &ExperimentConfig, experiment: &str, id: impl Into<String>) -> Self {
        Self {
            experiment: experiment.to_string(),
            id: id.into(),
            subcommand: cfg.subcommand.name().to_string(),
            seed: cfg.seed,
            depth: None,
            grid: None,
            order: None,
            p: None,
            space: None,
            metric: String::new(),
            value: f64::NAN,
            threshold: None,
            passed: None,
            wall_time_s: 0.0,
            config: cfg.to_string(),
        }
    }

    pub fn depth(mut self, depth: usize) -> Self {
        self.depth = Some(depth);
        self
    }

    pub fn grid(mut self, grid: usize) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn order(mut self, order: usize) -> Self {
        self.order = Some(order);
        self
    }

    pub fn p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn space(mut self, space: impl Into<String>) -> Self {
        self.space = Some(space.into());
        self
    }

    pub fn time(mut self, seconds: f64) -> Self {
        self.wall_time_s = seconds;
        self
    }

    /// An informational measurement.
    pub fn info(mut self, metric: &str, value: f64) -> Self {
        self.metric = metric.to_string();
        self.value = value;
        self
    }

    /// A measurement that passes when `value < threshold`.
    pub fn below(mut self, metric: &str, value: f64, threshold: f64) -> Self {
        self.metric = metric.to_string();
        self.value = value;
        self.threshold = Some(threshold);
        self.passed = Some(value < threshold);
        self
    }

    /// A measurement that passes when `value <= threshold`.
    pub fn at_most(mut self, metric: &str, value: f64, threshold: f64) -> Self {
        self.metric = metric.to_string();
        self.value = value;
        self.threshold = Some(threshold);
        self.passed = Some(value <= threshold);
        self
    }

    /// A yes/no check recorded as 1 or 0.
    pub fn check(mut self, metric: &str, ok: bool) -> Self {
        self.metric = metric.to_string();
        self.value = if ok { 1.0 } else { 0.0 };
        self.passed = Some(ok);
        self
    }

    pub fn failed(&self) -> bool {
        self.passed == Some(false)
    }
}

/// `v` with 17 significant digits.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn opt_string<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, ToString::to_string)
}

impl ResultRecord {
    fn csv_fields(&self) -> [String; 15] {
        [
            self.experiment.clone(),
            self.id.clone(),
            self.subcommand.clone(),
            opt_string(&self.seed),
            opt_string(&self.depth),
            opt_string(&self.grid),
            opt_string(&self.order),
            self.p.map_or_else(String::new, format_float),
            opt_string(&self.space),
            self.metric.clone(),
            format_float(self.value),
            self.threshold.map_or_else(String::new, format_float),
            opt_string(&self.passed),
            format_float(self.wall_time_s),
            self.config.clone(),
        ]
    }
}

pub fn write_csv<W: Write>(records: &[ResultRecord], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        w.write_record(r.csv_fields())?;
    }
    w.flush()
}

#[derive(Serialize)]
struct JsonRow<'a> {
    experiment: &'a str,
    id: &'a str,
    subcommand: &'a str,
    seed: Option<u64>,
    depth: Option<usize>,
    grid: Option<usize>,
    order: Option<usize>,
    p: Option<Box<RawValue>>,
    space: Option<&'a str>,
    metric: &'a str,
    value: Option<Box<RawValue>>,
    threshold: Option<Box<RawValue>>,
    passed: Option<bool>,
    wall_time_s: Option<Box<RawValue>>,
    config: &'a str,
}

/// Exact 17-digit text as a JSON number; non-finite values become `null`.
fn raw_number(v: f64) -> Option<Box<RawValue>> {
    if v.is_finite() {
        RawValue::from_string(format_float(v)).ok()
    } else {
        None
    }
}

pub fn write_json<W: Write>(records: &[ResultRecord], mut out: W) -> std::io::Result<()> {
    let rows: Vec<JsonRow<'_>> = records
        .iter()
        .map(|r| JsonRow {
            experiment: &r.experiment,
            id: &r.id,
            subcommand: &r.subcommand,
            seed: r.seed,
            depth: r.depth,
            grid: r.grid,
            order: r.order,
            p: r.p.and_then(raw_number),
            space: r.space.as_deref(),
            metric: &r.metric,
            value: raw_number(r.value),
            threshold: r.threshold.and_then(raw_number),
            passed: r.passed,
            wall_time_s: raw_number(r.wall_time_s),
            config: &r.config,
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &rows)?;
    writeln!(out)
}
