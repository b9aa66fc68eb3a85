//! Hawkes kernel families: matrix-valued functions phi_ij(t) giving the
//! intensity contribution of a past type-j event at lag t.
//!
//! Every kernel satisfies phi_ij(t) >= 0, phi_ij(t) = 0 for t < 0, and
//! integrability on [0, inf); for the power law that forces beta > 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("kernel matrices must be square with matching dimensions")]
    ShapeMismatch,
    #[error("kernel parameter out of range: {0}")]
    BadParameter(String),
    #[error("power-law kernel with beta <= 1 is not integrable (beta={0})")]
    NonIntegrable(f64),
}

/// Bin spacing for gridded kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    Linear,
    Log,
}

/// Bin edges on [0, support]; log spacing keeps one short first bin at
/// support/1000 and spreads the rest geometrically.
pub fn grid_edges(support: f64, bins: usize, spacing: GridSpacing) -> Vec<f64> {
    assert!(support > 0.0 && bins >= 1);
    let mut edges = Vec::with_capacity(bins + 1);
    edges.push(0.0);
    match spacing {
        GridSpacing::Linear => {
            for k in 1..=bins {
                edges.push(support * k as f64 / bins as f64);
            }
        }
        GridSpacing::Log => {
            let t_min = support * 1e-3;
            if bins == 1 {
                edges.push(support);
            } else {
                let ratio = (support / t_min).powf(1.0 / (bins - 1) as f64);
                for k in 0..bins {
                    edges.push(t_min * ratio.powi(k as i32));
                }
                // Pin the last edge exactly on the support.
                let last = edges.len() - 1;
                edges[last] = support;
            }
        }
    }
    edges
}

/// Kernel matrix specification for a D-dimensional Hawkes process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum KernelSpec {
    /// phi_ij(t) = alpha_ij * exp(-beta_ij * t)
    Exponential {
        alpha: Vec<Vec<f64>>,
        beta: Vec<Vec<f64>>,
    },
    /// phi_ij(t) = sum_u alpha_u[i][j] * exp(-decays[u] * t), decays shared
    /// across all (i, j) pairs.
    SumExponential {
        alphas: Vec<Vec<Vec<f64>>>,
        decays: Vec<f64>,
    },
    /// phi_ij(t) = alpha_ij / (delta_ij + t)^beta_ij
    PowerLaw {
        alpha: Vec<Vec<f64>>,
        beta: Vec<Vec<f64>>,
        delta: Vec<Vec<f64>>,
    },
    /// Piecewise-constant kernel on [0, support) with shared bin edges.
    Grid {
        edges: Vec<f64>,
        values: Vec<Vec<Vec<f64>>>,
    },
}

fn square_dim(m: &[Vec<f64>]) -> Option<usize> {
    let d = m.len();
    m.iter().all(|row| row.len() == d).then_some(d)
}

impl KernelSpec {
    /// Zero-kernel (pure Poisson) of dimension d.
    pub fn zero(d: usize) -> KernelSpec {
        KernelSpec::Exponential {
            alpha: vec![vec![0.0; d]; d],
            beta: vec![vec![1.0; d]; d],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            KernelSpec::Exponential { alpha, .. } => alpha.len(),
            KernelSpec::SumExponential { alphas, .. } => {
                alphas.first().map_or(0, |m| m.len())
            }
            KernelSpec::PowerLaw { alpha, .. } => alpha.len(),
            KernelSpec::Grid { values, .. } => values.len(),
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let non_negative = |m: &[Vec<f64>], name: &str| -> Result<(), KernelError> {
            if m.iter().flatten().any(|&v| !(v >= 0.0)) {
                return Err(KernelError::BadParameter(format!("{name} must be >= 0")));
            }
            Ok(())
        };
        match self {
            KernelSpec::Exponential { alpha, beta } => {
                let d = square_dim(alpha).ok_or(KernelError::ShapeMismatch)?;
                if square_dim(beta) != Some(d) {
                    return Err(KernelError::ShapeMismatch);
                }
                non_negative(alpha, "alpha")?;
                if beta.iter().flatten().any(|&b| !(b > 0.0)) {
                    return Err(KernelError::BadParameter("beta must be > 0".into()));
                }
            }
            KernelSpec::SumExponential { alphas, decays } => {
                if alphas.len() != decays.len() || alphas.is_empty() {
                    return Err(KernelError::ShapeMismatch);
                }
                let d = square_dim(&alphas[0]).ok_or(KernelError::ShapeMismatch)?;
                for m in alphas {
                    if square_dim(m) != Some(d) {
                        return Err(KernelError::ShapeMismatch);
                    }
                    non_negative(m, "alpha")?;
                }
                if decays.iter().any(|&b| !(b > 0.0)) {
                    return Err(KernelError::BadParameter("decays must be > 0".into()));
                }
            }
            KernelSpec::PowerLaw { alpha, beta, delta } => {
                let d = square_dim(alpha).ok_or(KernelError::ShapeMismatch)?;
                if square_dim(beta) != Some(d) || square_dim(delta) != Some(d) {
                    return Err(KernelError::ShapeMismatch);
                }
                non_negative(alpha, "alpha")?;
                if beta.iter().flatten().any(|&b| !(b > 1.0)) {
                    return Err(KernelError::BadParameter("beta must be > 1".into()));
                }
                if delta.iter().flatten().any(|&v| !(v > 0.0)) {
                    return Err(KernelError::BadParameter("delta must be > 0".into()));
                }
            }
            KernelSpec::Grid { edges, values } => {
                let d = values.len();
                if edges.len() < 2 || edges[0] != 0.0 {
                    return Err(KernelError::BadParameter(
                        "grid edges must start at 0 with at least one bin".into(),
                    ));
                }
                if edges.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(KernelError::BadParameter("grid edges must increase".into()));
                }
                let bins = edges.len() - 1;
                for row in values {
                    if row.len() != d {
                        return Err(KernelError::ShapeMismatch);
                    }
                    for cell in row {
                        if cell.len() != bins {
                            return Err(KernelError::ShapeMismatch);
                        }
                        if cell.iter().any(|&v| !(v >= 0.0)) {
                            return Err(KernelError::BadParameter(
                                "grid values must be >= 0".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// phi_ij(t); zero for t < 0 and beyond a grid kernel's support.
    pub fn eval(&self, i: usize, j: usize, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match self {
            KernelSpec::Exponential { alpha, beta } => {
                alpha[i][j] * (-beta[i][j] * t).exp()
            }
            KernelSpec::SumExponential { alphas, decays } => alphas
                .iter()
                .zip(decays)
                .map(|(a, &b)| a[i][j] * (-b * t).exp())
                .sum(),
            KernelSpec::PowerLaw { alpha, beta, delta } => {
                alpha[i][j] / (delta[i][j] + t).powf(beta[i][j])
            }
            KernelSpec::Grid { edges, values } => {
                let support = *edges.last().unwrap();
                if t >= support {
                    return 0.0;
                }
                let bin = edges.partition_point(|&e| e <= t) - 1;
                values[i][j][bin]
            }
        }
    }

    /// Integral of phi_ij over lags [lo, hi], 0 <= lo <= hi.
    pub fn integral(&self, i: usize, j: usize, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo >= 0.0 && hi >= lo);
        match self {
            KernelSpec::Exponential { alpha, beta } => {
                let b = beta[i][j];
                alpha[i][j] / b * ((-b * lo).exp() - (-b * hi).exp())
            }
            KernelSpec::SumExponential { alphas, decays } => alphas
                .iter()
                .zip(decays)
                .map(|(a, &b)| a[i][j] / b * ((-b * lo).exp() - (-b * hi).exp()))
                .sum(),
            KernelSpec::PowerLaw { alpha, beta, delta } => {
                let (b, d) = (beta[i][j], delta[i][j]);
                alpha[i][j] * ((d + lo).powf(1.0 - b) - (d + hi).powf(1.0 - b)) / (b - 1.0)
            }
            KernelSpec::Grid { edges, values } => {
                let mut acc = 0.0;
                for (k, w) in edges.windows(2).enumerate() {
                    let overlap = (hi.min(w[1]) - lo.max(w[0])).max(0.0);
                    acc += values[i][j][k] * overlap;
                }
                acc
            }
        }
    }

    /// L1 norm of phi_ij: the expected number of direct type-i children of a
    /// type-j event.
    pub fn l1_norm(&self, i: usize, j: usize) -> Result<f64, KernelError> {
        match self {
            KernelSpec::Exponential { alpha, beta } => Ok(alpha[i][j] / beta[i][j]),
            KernelSpec::SumExponential { alphas, decays } => Ok(alphas
                .iter()
                .zip(decays)
                .map(|(a, &b)| a[i][j] / b)
                .sum()),
            KernelSpec::PowerLaw { alpha, beta, delta } => {
                let b = beta[i][j];
                if b <= 1.0 {
                    return Err(KernelError::NonIntegrable(b));
                }
                Ok(alpha[i][j] * delta[i][j].powf(1.0 - b) / (b - 1.0))
            }
            KernelSpec::Grid { edges, values } => Ok(edges
                .windows(2)
                .enumerate()
                .map(|(k, w)| values[i][j][k] * (w[1] - w[0]))
                .sum()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: [[f64; 2]; 2]) -> Vec<Vec<f64>> {
        v.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn exponential_at_zero_is_alpha() {
        let k = KernelSpec::Exponential {
            alpha: m([[1.0, 0.0], [0.0, 1.0]]),
            beta: m([[2.0, 1.0], [1.0, 2.0]]),
        };
        assert_eq!(k.eval(0, 0, 0.0), 1.0);
    }

    #[test]
    fn causality_all_variants_zero_before_lag_zero() {
        let variants = [
            KernelSpec::Exponential {
                alpha: m([[1.0, 0.2], [0.2, 1.0]]),
                beta: m([[2.0, 1.0], [1.0, 2.0]]),
            },
            KernelSpec::SumExponential {
                alphas: vec![m([[0.2; 2]; 2]), m([[0.3; 2]; 2])],
                decays: vec![1.0, 3.0],
            },
            KernelSpec::PowerLaw {
                alpha: m([[1.0; 2]; 2]),
                beta: m([[2.0; 2]; 2]),
                delta: m([[1.0; 2]; 2]),
            },
            KernelSpec::Grid {
                edges: vec![0.0, 1.0, 2.0],
                values: vec![vec![vec![0.5, 0.25]; 2]; 2],
            },
        ];
        for k in variants {
            assert_eq!(k.eval(0, 1, -0.5), 0.0);
        }
    }

    #[test]
    fn power_law_point_value() {
        let k = KernelSpec::PowerLaw {
            alpha: m([[1.0; 2]; 2]),
            beta: m([[2.0; 2]; 2]),
            delta: m([[1.0; 2]; 2]),
        };
        assert!((k.eval(0, 0, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn l1_closed_forms() {
        let exp = KernelSpec::Exponential {
            alpha: m([[0.5; 2]; 2]),
            beta: m([[1.0; 2]; 2]),
        };
        assert_eq!(exp.l1_norm(0, 0).unwrap(), 0.5);

        let sumexp = KernelSpec::SumExponential {
            alphas: vec![m([[0.2; 2]; 2]), m([[0.3; 2]; 2])],
            decays: vec![1.0, 3.0],
        };
        assert!((sumexp.l1_norm(0, 0).unwrap() - 0.3).abs() < 1e-15);

        let pl = KernelSpec::PowerLaw {
            alpha: m([[1.0; 2]; 2]),
            beta: m([[3.0; 2]; 2]),
            delta: m([[2.0; 2]; 2]),
        };
        assert!((pl.l1_norm(0, 0).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn power_law_below_one_not_integrable() {
        let pl = KernelSpec::PowerLaw {
            alpha: m([[1.0; 2]; 2]),
            beta: m([[0.9; 2]; 2]),
            delta: m([[2.0; 2]; 2]),
        };
        assert!(matches!(pl.l1_norm(0, 0), Err(KernelError::NonIntegrable(_))));
    }

    /// Adaptive Simpson quadrature, the independent oracle for closed forms.
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
        let c = 0.5 * (a + b);
        let h = b - a;
        let (fa, fb, fc) = (f(a), f(b), f(c));
        let whole = h / 6.0 * (fa + 4.0 * fc + fb);
        fn step(
            f: &impl Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fb: f64,
            fc: f64,
            whole: f64,
            eps: f64,
            depth: u32,
        ) -> f64 {
            let c = 0.5 * (a + b);
            let (lc, rc) = (0.5 * (a + c), 0.5 * (c + b));
            let (flc, frc) = (f(lc), f(rc));
            let left = (c - a) / 6.0 * (fa + 4.0 * flc + fc);
            let right = (b - c) / 6.0 * (fc + 4.0 * frc + fb);
            if depth == 0 || (left + right - whole).abs() < 15.0 * eps {
                left + right + (left + right - whole) / 15.0
            } else {
                step(f, a, c, fa, fc, flc, left, eps / 2.0, depth - 1)
                    + step(f, c, b, fc, fb, frc, right, eps / 2.0, depth - 1)
            }
        }
        step(f, a, b, fa, fb, fc, whole, eps, depth)
    }

    #[test]
    fn l1_matches_quadrature_for_all_variants() {
        let variants = [
            KernelSpec::Exponential {
                alpha: m([[0.8, 0.1], [0.2, 0.5]]),
                beta: m([[1.2, 0.7], [2.0, 1.5]]),
            },
            KernelSpec::SumExponential {
                alphas: vec![m([[0.2, 0.05], [0.05, 0.2]]), m([[0.6, 0.1], [0.1, 0.6]])],
                decays: vec![0.5, 4.0],
            },
            KernelSpec::PowerLaw {
                alpha: m([[0.4, 0.1], [0.1, 0.4]]),
                beta: m([[2.5, 3.0], [3.0, 2.5]]),
                delta: m([[0.5, 1.0], [1.0, 0.5]]),
            },
            KernelSpec::Grid {
                edges: grid_edges(10.0, 20, GridSpacing::Log),
                values: vec![vec![(0..20).map(|k| 0.02 * (20 - k) as f64).collect(); 2]; 2],
            },
        ];
        for kernel in variants {
            kernel.validate().unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    // Truncate the infinite integral far into the tail.
                    let horizon = match &kernel {
                        KernelSpec::PowerLaw { .. } => 2.0e6,
                        KernelSpec::Grid { edges, .. } => *edges.last().unwrap(),
                        _ => 60.0,
                    };
                    let quad = simpson(&|t| kernel.eval(i, j, t), 0.0, horizon, 1e-12, 40);
                    let closed = kernel.l1_norm(i, j).unwrap();
                    // Power-law tail beyond the horizon is still visible at 1e-6.
                    let tail = match &kernel {
                        KernelSpec::PowerLaw { .. } => kernel.integral(i, j, horizon, 1e12),
                        _ => 0.0,
                    };
                    assert!(
                        (quad + tail - closed).abs() <= 1e-6 * closed.max(1e-12),
                        "{kernel:?} ({i},{j}): quad {quad} vs closed {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn grid_eval_uses_right_continuous_bins() {
        let k = KernelSpec::Grid {
            edges: vec![0.0, 1.0, 3.0, 6.0],
            values: vec![vec![vec![3.0, 2.0, 1.0]; 1]; 1],
        };
        assert_eq!(k.eval(0, 0, 0.0), 3.0);
        assert_eq!(k.eval(0, 0, 1.0), 2.0);
        assert_eq!(k.eval(0, 0, 2.999), 2.0);
        assert_eq!(k.eval(0, 0, 5.0), 1.0);
        assert_eq!(k.eval(0, 0, 6.0), 0.0);
        assert_eq!(k.eval(0, 0, 100.0), 0.0);
        assert!((k.l1_norm(0, 0).unwrap() - (3.0 + 4.0 + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn log_edges_cover_support() {
        let edges = grid_edges(60.0, 60, GridSpacing::Log);
        assert_eq!(edges.len(), 61);
        assert_eq!(edges[0], 0.0);
        assert_eq!(*edges.last().unwrap(), 60.0);
        assert!(edges.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let k = KernelSpec::Exponential {
            alpha: m([[0.1 + 0.2, 0.3333333333333333], [1e-17, 0.7]]),
            beta: m([[1.2, 0.9], [2.0, 1.1]]),
        };
        let text = serde_json::to_string(&k).unwrap();
        let back: KernelSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(k, back);
    }
}
