//! Realized Order Flow Imbalance over fixed windows.
//!
//! OFI over the window (T-h, T] is the sell-trade count minus the buy-trade
//! count, normalized by their sum. It counts trade events, not traded
//! quantity, and is undefined (missing) when the window has no trades.

use crate::market_data::{build_counting_process, window_count, Side, TradeEvent};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OfiError {
    #[error("empty session: no anchors fit in [0, {0}]")]
    EmptySession(f64),
    #[error("need at least 2 non-missing values, have {0}")]
    TooFewValues(usize),
}

/// OFI for one window given per-side trade counts; `None` when 0/0.
pub fn compute_ofi(n_sell: usize, n_buy: usize) -> Option<f64> {
    let total = n_sell + n_buy;
    if total == 0 {
        return None;
    }
    Some((n_sell as f64 - n_buy as f64) / total as f64)
}

/// Time-stamped realized OFI values over a fixed grid of window ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfiSeries {
    /// Window length h in seconds.
    pub window_h: f64,
    /// Window-end times T_i in seconds, strictly increasing.
    pub anchors: Vec<f64>,
    /// OFI per anchor; `None` marks a zero-trade window.
    pub values: Vec<Option<f64>>,
}

impl OfiSeries {
    /// Non-missing values in anchor order.
    pub fn defined_values(&self) -> Vec<f64> {
        self.values.iter().filter_map(|v| *v).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("anchor_time,ofi\n");
        for (a, v) in self.anchors.iter().zip(&self.values) {
            match v {
                Some(x) => out.push_str(&format!("{a},{x}\n")),
                None => out.push_str(&format!("{a},\n")),
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<OfiSeries, String> {
        let mut anchors = Vec::new();
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("anchor_time")) {
                continue;
            }
            let (a, v) = line
                .split_once(',')
                .ok_or_else(|| format!("line {}: expected anchor_time,ofi", i + 1))?;
            anchors.push(a.trim().parse::<f64>().map_err(|e| format!("line {}: {e}", i + 1))?);
            let v = v.trim();
            values.push(if v.is_empty() {
                None
            } else {
                Some(v.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 1))?)
            });
        }
        let window_h = if anchors.len() >= 2 { anchors[1] - anchors[0] } else { 0.0 };
        Ok(OfiSeries { window_h, anchors, values })
    }
}

/// Realized OFI at anchors `interval, 2*interval, ...` within `[0, session_end]`,
/// each over the trailing window (T-h, T].
pub fn ofi_series(
    trades: &[TradeEvent],
    h: f64,
    interval: f64,
    session_end: f64,
) -> Result<OfiSeries, OfiError> {
    assert!(h > 0.0 && interval > 0.0);
    let n_anchors = (session_end / interval).floor() as usize;
    if n_anchors == 0 {
        return Err(OfiError::EmptySession(session_end));
    }
    let sells = build_counting_process(trades, Side::Sell);
    let buys = build_counting_process(trades, Side::Buy);
    let mut anchors = Vec::with_capacity(n_anchors);
    let mut values = Vec::with_capacity(n_anchors);
    for k in 1..=n_anchors {
        let t_end = k as f64 * interval;
        anchors.push(t_end);
        values.push(compute_ofi(
            window_count(&sells, t_end, h),
            window_count(&buys, t_end, h),
        ));
    }
    Ok(OfiSeries { window_h: h, anchors, values })
}

/// Sample summary in the shape count/mean/std/min/quartiles/max.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Quantile with linear interpolation between order statistics.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Summary statistics over the non-missing values of a series.
pub fn summary_stats(series: &OfiSeries) -> Result<SummaryStats, OfiError> {
    let mut vals = series.defined_values();
    if vals.len() < 2 {
        return Err(OfiError::TooFewValues(vals.len()));
    }
    let n = vals.len();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(SummaryStats {
        count: n,
        mean,
        std: var.sqrt(),
        min: vals[0],
        q25: quantile_sorted(&vals, 0.25),
        median: quantile_sorted(&vals, 0.5),
        q75: quantile_sorted(&vals, 0.75),
        max: vals[n - 1],
    })
}
