//! Aggregation of episode results into per-mode metric rows.
//!
//! Success, tokens and steps are averaged per task over repeats (with the
//! population standard deviation), then averaged across tasks. Provenance
//! shares and rates are pooled counts over every episode of a mode.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Ratio;
use sclplan::controller::{EpisodeResult, Mode, Provenance};
use thiserror::Error;

pub const COLUMNS: [&str; 16] = [
    "Method",
    "Episodes",
    "Tasks",
    "Task Success",
    "Task Success σ",
    "Token Count",
    "Token Count σ",
    "Env Steps",
    "Env Steps σ",
    "Invalid ReAct Predictions",
    "Invalid ReAct Predictions Corrected w/ PV",
    "Global Symbolic Plan Found",
    "Percentage ReAct Actions",
    "Percentage PV Actions",
    "Percentage GSP Actions",
    "Mode",
];

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no episode results to aggregate")]
    Empty,
    #[error("bad metrics CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

/// A count ratio; `None` when the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Share {
    pub num: u64,
    pub den: u64,
}

impl Share {
    pub fn ratio(self) -> Option<Ratio<u64>> {
        (self.den > 0).then(|| Ratio::new(self.num, self.den))
    }

    pub fn value(self) -> Option<f64> {
        (self.den > 0).then(|| self.num as f64 / self.den as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub mode: Mode,
    pub episodes: usize,
    pub tasks: usize,
    pub success: Stat,
    pub tokens: Stat,
    pub steps: Stat,
    pub react: Share,
    pub pv: Share,
    pub gsp: Share,
    /// Invalid predictions over all model-predicted steps.
    pub invalid: Share,
    /// Corrected over invalid; not applicable without PV or without invalid predictions.
    pub corrected: Option<Share>,
    /// Not applicable in modes without a global planner.
    pub global_found: Option<Share>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

/// A row as read back from CSV; all numbers as printed.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub label: String,
    pub values: BTreeMap<String, Option<f64>>,
}

fn stat(values: &[f64]) -> Stat {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Stat { mean, sd: var.sqrt() }
}

fn mean_of(stats: &[Stat]) -> Stat {
    let n = stats.len() as f64;
    Stat { mean: stats.iter().map(|s| s.mean).sum::<f64>() / n, sd: stats.iter().map(|s| s.sd).sum::<f64>() / n }
}

fn row(mode: Mode, episodes: &[&EpisodeResult]) -> MetricsRow {
    let mut by_task: BTreeMap<&str, Vec<&EpisodeResult>> = BTreeMap::new();
    for e in episodes {
        by_task.entry(e.task_id.as_str()).or_default().push(e);
    }
    let per_task = |f: &dyn Fn(&EpisodeResult) -> f64| -> Stat {
        let stats: Vec<Stat> = by_task.values().map(|eps| stat(&eps.iter().map(|e| f(e)).collect::<Vec<_>>())).collect();
        mean_of(&stats)
    };
    let total = |f: &dyn Fn(&EpisodeResult) -> usize| episodes.iter().map(|e| f(e) as u64).sum::<u64>();
    let steps = total(&|e| e.env_steps);
    let react = total(&|e| e.count(Provenance::ReAct));
    let invalid = total(&|e| e.invalid_react_count);
    let corrected = total(&|e| e.invalid_corrected_count);
    let uses_pv = matches!(mode, Mode::ReactPV | Mode::SCLPlan);
    let uses_gsp = matches!(mode, Mode::SCLPlan | Mode::SymbolicOnly);
    MetricsRow {
        mode,
        episodes: episodes.len(),
        tasks: by_task.len(),
        success: per_task(&|e| f64::from(u8::from(e.success))),
        tokens: per_task(&|e| e.tokens as f64),
        steps: per_task(&|e| e.env_steps as f64),
        react: Share { num: react, den: steps },
        pv: Share { num: total(&|e| e.count(Provenance::PV)), den: steps },
        gsp: Share { num: total(&|e| e.count(Provenance::GSP)), den: steps },
        invalid: Share { num: invalid, den: react },
        corrected: (uses_pv && invalid > 0).then_some(Share { num: corrected, den: invalid }),
        global_found: uses_gsp.then(|| Share { num: total(&|e| usize::from(e.goal_found_globally)), den: episodes.len() as u64 }),
    }
}

/// One row per mode present, in mode order.
pub fn aggregate(results: &[EpisodeResult]) -> Result<MetricsTable, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut by_mode: BTreeMap<Mode, Vec<&EpisodeResult>> = BTreeMap::new();
    for r in results {
        by_mode.entry(r.mode).or_default().push(r);
    }
    Ok(MetricsTable { rows: by_mode.into_iter().map(|(m, eps)| row(m, &eps)).collect() })
}

fn fixed(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(v) => format!("{v:.digits$}"),
        None => "-".into(),
    }
}

impl MetricsRow {
    fn cells(&self) -> Vec<String> {
        vec![
            self.mode.label().to_string(),
            self.episodes.to_string(),
            self.tasks.to_string(),
            fixed(Some(self.success.mean), 3),
            fixed(Some(self.success.sd), 3),
            fixed(Some(self.tokens.mean), 1),
            fixed(Some(self.tokens.sd), 1),
            fixed(Some(self.steps.mean), 2),
            fixed(Some(self.steps.sd), 2),
            fixed(self.invalid.value(), 3),
            fixed(self.corrected.and_then(Share::value), 3),
            fixed(self.global_found.and_then(Share::value), 3),
            fixed(self.react.value(), 3),
            fixed(self.pv.value(), 3),
            fixed(self.gsp.value(), 3),
            self.mode.name().to_string(),
        ]
    }
}

impl MetricsTable {
    pub fn row(&self, mode: Mode) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.mode == mode)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.cells()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }

    /// Aligned plain-text table with `±σ` next to the averaged columns.
    pub fn to_text(&self, title: &str) -> String {
        let header = [
            "Method",
            "Task Success",
            "Token Count",
            "Env Steps",
            "Invalid ReAct Predictions",
            "Invalid ReAct Predictions Corrected w/ PV",
            "Global Symbolic Plan Found",
            "Percentage ReAct Actions",
            "Percentage PV Actions",
            "Percentage GSP Actions",
        ];
        let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for r in &self.rows {
            let c = r.cells();
            rows.push(vec![
                c[0].clone(),
                format!("{} (±{})", c[3], c[4]),
                format!("{} (±{})", c[5], c[6]),
                format!("{} (±{})", c[7], c[8]),
                c[9].clone(),
                c[10].clone(),
                c[11].clone(),
                c[12].clone(),
                c[13].clone(),
                c[14].clone(),
            ]);
        }
        let mut out = format!("{title}\n");
        let widths: Vec<usize> = (0..header.len()).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
        for r in &rows {
            let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }
}

/// Reads a CSV written by [`MetricsTable::to_csv`].
pub fn read_csv(text: &str) -> Result<Vec<CsvRow>, MetricsError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| MetricsError::Csv(e.to_string()))?.clone();
    if headers.get(0) != Some("Method") {
        return Err(MetricsError::Csv("first column must be `Method`".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| MetricsError::Csv(e.to_string()))?;
        let mut values = BTreeMap::new();
        for (h, v) in headers.iter().zip(rec.iter()).skip(1) {
            if h == "Mode" {
                continue;
            }
            let parsed = match v {
                "-" => None,
                _ => Some(v.parse::<f64>().map_err(|_| MetricsError::Csv(format!("`{v}` in column `{h}` is not a number")))?),
            };
            values.insert(h.to_string(), parsed);
        }
        rows.push(CsvRow { label: rec.get(0).unwrap_or_default().to_string(), values });
    }
    if rows.is_empty() {
        return Err(MetricsError::Csv("no rows".into()));
    }
    Ok(rows)
}

/// Signed differences candidate − baseline. Rows pair up by method label;
/// a candidate row without a same-named baseline row is compared with the
/// baseline's first row.
pub fn delta_report(baseline: &[CsvRow], candidate: &[CsvRow]) -> String {
    const SHOWN: [&str; 9] = [
        "Task Success",
        "Token Count",
        "Env Steps",
        "Invalid ReAct Predictions",
        "Invalid ReAct Predictions Corrected w/ PV",
        "Global Symbolic Plan Found",
        "Percentage ReAct Actions",
        "Percentage PV Actions",
        "Percentage GSP Actions",
    ];
    let mut out = String::new();
    for cand in candidate {
        let Some(base) = baseline.iter().find(|b| b.label == cand.label).or_else(|| baseline.first()) else { continue };
        let _ = writeln!(out, "{} vs {}", cand.label, base.label);
        let width = SHOWN.iter().map(|s| s.len()).max().unwrap_or(0);
        for col in SHOWN {
            let b = base.values.get(col).copied().flatten();
            let c = cand.values.get(col).copied().flatten();
            let digits = if col == "Token Count" { 1 } else if col == "Env Steps" { 2 } else { 3 };
            let delta = match (b, c) {
                (Some(b), Some(c)) => format!("{:+.digits$}", c - b),
                _ => "-".into(),
            };
            let _ = writeln!(out, "  {col:<width$}  {:>10} -> {:>10}  {delta:>10}", fixed(b, digits), fixed(c, digits));
        }
    }
    out.push_str("Token counts are backend-specific (the offline backends count whitespace-separated words) and are not comparable across backends.\n");
    out
}
