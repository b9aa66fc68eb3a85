//! Markovian decay-state evaluation of exponential-family intensities.
//!
//! Exponential and sum-of-exponential kernels admit O(1) updates of the
//! running sums R = sum over past events of exp(-beta * (t - s)), which turns
//! O(n^2) intensity sweeps into O(n). One-hour fit windows hold ~1e5 events,
//! so thinning simulation and likelihood evaluation both ride on this.

use super::kernel::KernelSpec;
use super::{EventHistory, HawkesModel};

/// Decay states for one of the exponential kernel families.
#[derive(Debug, Clone)]
pub enum StateEngine {
    Exp {
        mu: Vec<f64>,
        alpha: Vec<Vec<f64>>,
        beta: Vec<Vec<f64>>,
        /// r[i][j] = sum over past j-events of exp(-beta_ij (t - s)).
        r: Vec<Vec<f64>>,
        t: f64,
    },
    SumExp {
        mu: Vec<f64>,
        alphas: Vec<Vec<Vec<f64>>>,
        decays: Vec<f64>,
        /// s[j][u] = sum over past j-events of exp(-decays[u] (t - s)).
        s: Vec<Vec<f64>>,
        t: f64,
    },
}

impl StateEngine {
    /// Engine for the model's kernel, if it is exponential-family.
    pub fn try_new(model: &HawkesModel) -> Option<StateEngine> {
        let d = model.dim;
        match &model.kernel {
            KernelSpec::Exponential { alpha, beta } => Some(StateEngine::Exp {
                mu: model.mu.clone(),
                alpha: alpha.clone(),
                beta: beta.clone(),
                r: vec![vec![0.0; d]; d],
                t: 0.0,
            }),
            KernelSpec::SumExponential { alphas, decays } => Some(StateEngine::SumExp {
                mu: model.mu.clone(),
                alphas: alphas.clone(),
                decays: decays.clone(),
                s: vec![vec![0.0; decays.len()]; d],
                t: 0.0,
            }),
            _ => None,
        }
    }

    /// Engine with state seeded by replaying a history (its times may be
    /// negative for shifted conditioning windows). Current time ends at
    /// `origin`.
    pub fn with_prefix(model: &HawkesModel, prefix: &EventHistory, origin: f64) -> Option<StateEngine> {
        let mut eng = StateEngine::try_new(model)?;
        let merged = prefix.merged();
        if let Some(&(first, _)) = merged.first() {
            eng.set_time(first);
        }
        for (s, j) in merged {
            eng.advance_to(s);
            eng.on_event(j);
        }
        eng.advance_to(origin);
        Some(eng)
    }

    fn set_time(&mut self, new_t: f64) {
        match self {
            StateEngine::Exp { t, .. } | StateEngine::SumExp { t, .. } => *t = new_t,
        }
    }

    pub fn time(&self) -> f64 {
        match self {
            StateEngine::Exp { t, .. } | StateEngine::SumExp { t, .. } => *t,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            StateEngine::Exp { mu, .. } | StateEngine::SumExp { mu, .. } => mu.len(),
        }
    }

    /// Decay all states forward to time `new_t` >= current time.
    pub fn advance_to(&mut self, new_t: f64) {
        match self {
            StateEngine::Exp { beta, r, t, .. } => {
                let dt = new_t - *t;
                if dt > 0.0 {
                    for (ri, bi) in r.iter_mut().zip(beta.iter()) {
                        for (rij, bij) in ri.iter_mut().zip(bi.iter()) {
                            *rij *= (-bij * dt).exp();
                        }
                    }
                    *t = new_t;
                }
            }
            StateEngine::SumExp { decays, s, t, .. } => {
                let dt = new_t - *t;
                if dt > 0.0 {
                    let factors: Vec<f64> = decays.iter().map(|b| (-b * dt).exp()).collect();
                    for sj in s.iter_mut() {
                        for (sju, f) in sj.iter_mut().zip(&factors) {
                            *sju *= f;
                        }
                    }
                    *t = new_t;
                }
            }
        }
    }

    /// Register an event of dimension j at the current time.
    pub fn on_event(&mut self, j: usize) {
        match self {
            StateEngine::Exp { r, .. } => {
                for ri in r.iter_mut() {
                    ri[j] += 1.0;
                }
            }
            StateEngine::SumExp { s, .. } => {
                for sju in s[j].iter_mut() {
                    *sju += 1.0;
                }
            }
        }
    }

    /// Right-limit intensity of dimension i at the current time.
    pub fn lambda(&self, i: usize) -> f64 {
        match self {
            StateEngine::Exp { mu, alpha, r, .. } => {
                mu[i] + alpha[i].iter().zip(r[i].iter()).map(|(a, x)| a * x).sum::<f64>()
            }
            StateEngine::SumExp { mu, alphas, s, .. } => {
                let mut acc = mu[i];
                for (u, a) in alphas.iter().enumerate() {
                    for (j, sj) in s.iter().enumerate() {
                        acc += a[i][j] * sj[u];
                    }
                }
                acc
            }
        }
    }

    pub fn lambda_total(&self) -> f64 {
        (0..self.dim()).map(|i| self.lambda(i)).sum()
    }

    /// Integral of each lambda_i from the current time to `new_t`, advancing
    /// the state to `new_t`. Exact: no events may occur inside the interval.
    pub fn integrate_and_advance(&mut self, new_t: f64) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        match self {
            StateEngine::Exp { mu, alpha, beta, r, t } => {
                let dt = new_t - *t;
                if dt <= 0.0 {
                    return out;
                }
                for i in 0..d {
                    let mut acc = mu[i] * dt;
                    for j in 0..d {
                        let b = beta[i][j];
                        acc += alpha[i][j] / b * r[i][j] * (1.0 - (-b * dt).exp());
                    }
                    out[i] = acc;
                }
                for (ri, bi) in r.iter_mut().zip(beta.iter()) {
                    for (rij, bij) in ri.iter_mut().zip(bi.iter()) {
                        *rij *= (-bij * dt).exp();
                    }
                }
                *t = new_t;
            }
            StateEngine::SumExp { mu, alphas, decays, s, t } => {
                let dt = new_t - *t;
                if dt <= 0.0 {
                    return out;
                }
                let eat: Vec<f64> = decays.iter().map(|b| (-b * dt).exp()).collect();
                for i in 0..d {
                    let mut acc = mu[i] * dt;
                    for (u, a) in alphas.iter().enumerate() {
                        for (j, sj) in s.iter().enumerate() {
                            acc += a[i][j] / decays[u] * sj[u] * (1.0 - eat[u]);
                        }
                    }
                    out[i] = acc;
                }
                for sj in s.iter_mut() {
                    for (sju, f) in sj.iter_mut().zip(&eat) {
                        *sju *= f;
                    }
                }
                *t = new_t;
            }
        }
        out
    }
}
