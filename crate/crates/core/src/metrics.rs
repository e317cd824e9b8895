//! Stable-window performance indices of recorded runs.
//!
//! All indices are maxima over the recorded samples whose time lies in the
//! window, so they do not change with `record_decimation` as long as every
//! controller step inside the window is recorded.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::simulator::RunResult;
use crate::{Error, Result, Vec2};

/// Window used for the comparison table unless configured otherwise (s).
pub const DEFAULT_WINDOW: [f64; 2] = [1980.0, 2000.0];
/// The alternative, shorter stable window (s).
pub const ALTERNATE_WINDOW: [f64; 2] = [1990.0, 2000.0];

const WINDOW_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceSummary {
    pub label: String,
    pub window: [f64; 2],
    /// Max absolute tracking error per joint (rad).
    pub mate: Vec2,
    /// Max `|K2_i e2_i|` per joint (N·m).
    pub maae: Vec2,
    /// Max `|ŴᵀS − feedforward|` per joint (N·m), RBFNN runs only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_approx: Option<Vec2>,
    /// Max per-step weight change per joint, RBFNN runs only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_step: Option<Vec2>,
}

fn window_indices(result: &RunResult, window: [f64; 2]) -> Result<std::ops::Range<usize>> {
    let [a, b] = window;
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::invalid(format!("invalid window [{a}, {b}]")));
    }
    let start = result.t.partition_point(|&t| t < a - WINDOW_SLACK);
    let end = result.t.partition_point(|&t| t <= b + WINDOW_SLACK);
    if start >= end {
        return Err(Error::invalid(format!(
            "window [{a}, {b}] contains no samples (run covers [0, {}])",
            result.duration()
        )));
    }
    Ok(start..end)
}

fn max_abs<F: Fn(usize) -> Vec2>(range: std::ops::Range<usize>, f: F) -> Vec2 {
    range.fold([0.0, 0.0], |acc, k| {
        let v = f(k);
        [acc[0].max(v[0].abs()), acc[1].max(v[1].abs())]
    })
}

/// Max over the window of `|e1_i|`.
pub fn mate(result: &RunResult, window: [f64; 2]) -> Result<Vec2> {
    let r = window_indices(result, window)?;
    Ok(max_abs(r, |k| result.e1[k]))
}

/// Max over the window of `|K2_i e2_i|`, the approximation-error proxy used
/// for every controller.
pub fn maae(result: &RunResult, window: [f64; 2], k2: Vec2) -> Result<Vec2> {
    let r = window_indices(result, window)?;
    Ok(max_abs(r, |k| [k2[0] * result.e2[k][0], k2[1] * result.e2[k][1]]))
}

/// Max over the window of `|ŴᵀS(Z_d) − (M q̈_d + C q̇_d + G)(q_d)|`.
pub fn direct_approx_error(result: &RunResult, window: [f64; 2]) -> Result<Vec2> {
    let nn = result
        .nn
        .as_ref()
        .ok_or_else(|| Error::NotApplicable(format!("run '{}' has no network output", result.label)))?;
    let r = window_indices(result, window)?;
    Ok(max_abs(r, |k| [nn[k][0] - result.ff[k][0], nn[k][1] - result.ff[k][1]]))
}

/// Max over the window of the per-step weight change norm, per joint.
pub fn weight_convergence(result: &RunResult, window: [f64; 2]) -> Result<Vec2> {
    let steps = result
        .weight_step
        .as_ref()
        .ok_or_else(|| Error::NotApplicable(format!("run '{}' has no weight history", result.label)))?;
    let r = window_indices(result, window)?;
    Ok(max_abs(r, |k| steps[k]))
}

pub fn summarize(result: &RunResult, window: [f64; 2]) -> Result<PerformanceSummary> {
    Ok(PerformanceSummary {
        label: result.label.clone(),
        window,
        mate: mate(result, window)?,
        maae: maae(result, window, result.gains.k2)?,
        direct_approx: result.nn.is_some().then(|| direct_approx_error(result, window)).transpose()?,
        weight_step: result.weight_step.is_some().then(|| weight_convergence(result, window)).transpose()?,
    })
}

/// One row of a comparison table: a summary or the reason the run failed.
#[derive(Debug, Clone, PartialEq)]
pub enum TableRow {
    Ok(PerformanceSummary),
    Failed { label: String, reason: String },
}

impl TableRow {
    pub fn label(&self) -> &str {
        match self {
            TableRow::Ok(s) => &s.label,
            TableRow::Failed { label, .. } => label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub window: [f64; 2],
    pub rows: Vec<TableRow>,
}

/// Collects rows into a table; every successful row must share one window.
pub fn summary_table(rows: Vec<TableRow>) -> Result<SummaryTable> {
    let mut window = None;
    for r in &rows {
        if let TableRow::Ok(s) = r {
            match window {
                None => window = Some(s.window),
                Some(w) if w != s.window => {
                    return Err(Error::invalid(format!(
                        "row '{}' uses window {:?}, table uses {:?}",
                        s.label, s.window, w
                    )))
                }
                _ => {}
            }
        }
    }
    Ok(SummaryTable {
        window: window.unwrap_or([f64::NAN; 2]),
        rows,
    })
}

impl SummaryTable {
    /// Aligned plain-text table with columns MAAE₁, MATE₁, MAAE₂, MATE₂.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.label().len()).max().unwrap_or(0).max(10);
        let mut s = format!(
            "Performance indices over [{}, {}] s\n{:<width$}  {:>13}  {:>13}  {:>13}  {:>13}\n",
            self.window[0], self.window[1], "Controller", "MAAE_1", "MATE_1", "MAAE_2", "MATE_2"
        );
        for r in &self.rows {
            match r {
                TableRow::Ok(p) => s.push_str(&format!(
                    "{:<width$}  {:>13.4e}  {:>13.4e}  {:>13.4e}  {:>13.4e}\n",
                    p.label, p.maae[0], p.mate[0], p.maae[1], p.mate[1]
                )),
                TableRow::Failed { label, reason } => {
                    s.push_str(&format!("{label:<width$}  FAILED: {reason}\n"));
                }
            }
        }
        s
    }

    /// `{label: {maae: [..], mate: [..], ...}}` in row order. Repeated labels
    /// get a `#k` suffix.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for r in &self.rows {
            let mut key = r.label().to_string();
            let mut k = 2;
            while map.contains_key(&key) {
                key = format!("{}#{k}", r.label());
                k += 1;
            }
            let v = match r {
                TableRow::Ok(p) => {
                    let mut v = json!({"status": "ok", "window": p.window, "maae": p.maae, "mate": p.mate});
                    if let Some(d) = p.direct_approx {
                        v["direct_approx"] = json!(d);
                    }
                    if let Some(w) = p.weight_step {
                        v["weight_step"] = json!(w);
                    }
                    v
                }
                TableRow::Failed { reason, .. } => json!({"status": "failed", "reason": reason}),
            };
            map.insert(key, v);
        }
        Value::Object(map)
    }
}
