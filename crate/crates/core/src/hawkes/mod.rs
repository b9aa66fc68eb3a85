//! Hawkes process models: baseline intensities plus a kernel matrix, with
//! intensity/compensator evaluation and stability diagnostics.
//!
//! Dimension ordering for the trading pipeline is index 0 = SELL, 1 = BUY.

pub mod engine;
mod kernel;

pub use kernel::{grid_edges, GridSpacing, KernelError, KernelSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dimension index of SELL events in the 2-D trading instantiation.
pub const DIM_SELL: usize = 0;
/// Dimension index of BUY events in the 2-D trading instantiation.
pub const DIM_BUY: usize = 1;

#[derive(Debug, Error)]
pub enum HawkesError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("mu must have {expected} non-negative entries")]
    BadBaseline { expected: usize },
    #[error("intensity not strictly positive at an event (dimension {dim}, t={t})")]
    NonPositiveIntensity { dim: usize, t: f64 },
}

/// Baseline intensity vector plus kernel matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HawkesModel {
    pub dim: usize,
    /// Baseline intensities in events/second.
    pub mu: Vec<f64>,
    pub kernel: KernelSpec,
}

impl HawkesModel {
    pub fn new(mu: Vec<f64>, kernel: KernelSpec) -> Result<HawkesModel, HawkesError> {
        kernel.validate()?;
        let dim = kernel.dim();
        if mu.len() != dim || mu.iter().any(|&m| !(m >= 0.0)) {
            return Err(HawkesError::BadBaseline { expected: dim });
        }
        Ok(HawkesModel { dim, mu, kernel })
    }

    /// Homogeneous Poisson model expressed as a zero-kernel Hawkes process.
    pub fn poisson(rates: Vec<f64>) -> HawkesModel {
        let d = rates.len();
        HawkesModel {
            dim: d,
            mu: rates,
            kernel: KernelSpec::zero(d),
        }
    }

    /// Matrix of kernel L1 norms; entry (i, j) is the mean number of direct
    /// type-i children of one type-j event.
    pub fn branching_matrix(&self) -> Result<Vec<Vec<f64>>, HawkesError> {
        let d = self.dim;
        let mut m = vec![vec![0.0; d]; d];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.kernel.l1_norm(i, j)?;
            }
        }
        Ok(m)
    }
}

/// Largest-magnitude eigenvalue of a non-negative matrix by power iteration
/// (tolerance 1e-10, at most 10_000 iterations).
pub fn spectral_radius(matrix: &[Vec<f64>]) -> f64 {
    let d = matrix.len();
    if d == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut radius = 0.0;
    for _ in 0..10_000 {
        let mut w = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                w[i] += matrix[i][j] * v[j];
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().abs();
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if (next - radius).abs() < 1e-10 {
            return next;
        }
        radius = next;
    }
    radius
}

/// Event times per dimension over an observation window [0, horizon].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventHistory {
    /// One sorted time vector per dimension, in seconds.
    pub times: Vec<Vec<f64>>,
    pub horizon: f64,
}

impl EventHistory {
    pub fn new(times: Vec<Vec<f64>>, horizon: f64) -> EventHistory {
        debug_assert!(times
            .iter()
            .all(|ts| ts.windows(2).all(|w| w[0] <= w[1])));
        EventHistory { times, horizon }
    }

    pub fn dim(&self) -> usize {
        self.times.len()
    }

    pub fn total_events(&self) -> usize {
        self.times.iter().map(Vec::len).sum()
    }

    /// Events merged across dimensions, ordered by time (ties keep dimension
    /// order). Returns (time, dimension) pairs.
    pub fn merged(&self) -> Vec<(f64, usize)> {
        let mut all: Vec<(f64, usize)> = self
            .times
            .iter()
            .enumerate()
            .flat_map(|(d, ts)| ts.iter().map(move |&t| (t, d)))
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        all
    }

    /// Restrict to events with time in (lo, hi], shifting times by `shift`.
    pub fn slice_shifted(&self, lo: f64, hi: f64, shift: f64) -> EventHistory {
        let times = self
            .times
            .iter()
            .map(|ts| {
                ts.iter()
                    .filter(|&&t| t > lo && t <= hi)
                    .map(|&t| t + shift)
                    .collect()
            })
            .collect();
        EventHistory::new(times, hi - lo)
    }
}

/// Conditional intensity lambda_i(t): baseline plus kernel contributions of
/// all events strictly before t. Direct double sum; the optimized engines are
/// checked against this.
pub fn intensity(model: &HawkesModel, history: &EventHistory, t: f64, i: usize) -> f64 {
    let mut lambda = model.mu[i];
    for (j, times) in history.times.iter().enumerate() {
        for &s in times {
            if s >= t {
                break;
            }
            lambda += model.kernel.eval(i, j, t - s);
        }
    }
    lambda
}

/// Integrated intensity of dimension i over [a, b], via the kernels' exact
/// antiderivatives.
pub fn compensator(model: &HawkesModel, history: &EventHistory, i: usize, a: f64, b: f64) -> f64 {
    debug_assert!(a <= b);
    let mut total = model.mu[i] * (b - a);
    for (j, times) in history.times.iter().enumerate() {
        for &s in times {
            if s >= b {
                break;
            }
            let lo = (a.max(s)) - s;
            let hi = b - s;
            total += model.kernel.integral(i, j, lo, hi);
        }
    }
    total
}

/// Compensator increments between consecutive type-i events: under the true
/// model these are i.i.d. unit-rate exponentials (time-rescaling theorem).
/// The first entry integrates from t = 0.
pub fn rescaled_interarrivals(model: &HawkesModel, history: &EventHistory, i: usize) -> Vec<f64> {
    match engine::StateEngine::try_new(model) {
        Some(mut eng) => {
            let mut out = Vec::with_capacity(history.times[i].len());
            let mut last_integral = 0.0;
            let mut acc = 0.0;
            let merged = history.merged();
            let mut idx = 0;
            while idx < merged.len() {
                let t = merged[idx].0;
                acc += eng.integrate_and_advance(t)[i];
                // All events at exactly t see the same pre-jump state.
                let mut k = idx;
                while k < merged.len() && merged[k].0 == t {
                    if merged[k].1 == i {
                        out.push(acc - last_integral);
                        last_integral = acc;
                    }
                    k += 1;
                }
                while idx < k {
                    eng.on_event(merged[idx].1);
                    idx += 1;
                }
            }
            out
        }
        None => {
            // No Markovian state for this kernel family; integrate each
            // inter-event interval directly.
            let mut out = Vec::with_capacity(history.times[i].len());
            let mut prev = 0.0;
            for &t in &history.times[i] {
                out.push(compensator(model, history, i, prev, t));
                prev = t;
            }
            out
        }
    }
}
