//! Time-series diagnostics for realized OFI: autocorrelations, the augmented
//! Dickey-Fuller stationarity test, and normality tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("need at least {need} observations, have {have}")]
    TooFewObservations { need: usize, have: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("max_lag {max_lag} must be below series length {len}")]
    LagTooLarge { max_lag: usize, len: usize },
    #[error("singular regression matrix")]
    SingularDesign,
}

/// Sample autocorrelation function at lags 0..=max_lag.
///
/// Denominator is the lag-0 autocovariance, so acf[0] = 1.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>, DiagnosticsError> {
    let n = series.len();
    if max_lag >= n {
        return Err(DiagnosticsError::LagTooLarge { max_lag, len: n });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c0: f64 = series.iter().map(|x| (x - mean).powi(2)).sum();
    if c0 == 0.0 {
        return Err(DiagnosticsError::ZeroVariance);
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let ck: f64 = (k..n)
            .map(|t| (series[t] - mean) * (series[t - k] - mean))
            .sum();
        out.push(ck / c0);
    }
    Ok(out)
}

/// Partial autocorrelation function via the Durbin-Levinson recursion,
/// pacf[0] = 1 by convention and pacf[1] = acf[1] exactly.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>, DiagnosticsError> {
    let rho = acf(series, max_lag)?;
    let mut out = vec![1.0];
    if max_lag == 0 {
        return Ok(out);
    }
    let mut phi_prev = vec![rho[1]]; // phi_{1,1}
    out.push(rho[1]);
    for k in 2..=max_lag {
        let num =
            rho[k] - (1..k).map(|j| phi_prev[j - 1] * rho[k - j]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi_prev[j - 1] * rho[j]).sum::<f64>();
        let phi_kk = if den.abs() < 1e-300 { 0.0 } else { num / den };
        let mut phi = vec![0.0; k];
        for j in 1..k {
            phi[j - 1] = phi_prev[j - 1] - phi_kk * phi_prev[k - j - 1];
        }
        phi[k - 1] = phi_kk;
        out.push(phi_kk);
        phi_prev = phi;
    }
    Ok(out)
}

/// ADF critical values for the constant-only regression near n = 314.
pub const ADF_CRITICAL_1PCT: f64 = -3.451;
pub const ADF_CRITICAL_5PCT: f64 = -2.870;
pub const ADF_CRITICAL_10PCT: f64 = -2.571;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    #[serde(rename = "ADFStatistic")]
    pub statistic: f64,
    #[serde(rename = "LagOrder")]
    pub lag_order: usize,
    #[serde(rename = "NoOfSamples")]
    pub n_obs: usize,
    #[serde(rename = "CriticalValues")]
    pub critical_values: CriticalValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    #[serde(rename = "1%")]
    pub pct1: f64,
    #[serde(rename = "5%")]
    pub pct5: f64,
    #[serde(rename = "10%")]
    pub pct10: f64,
}

impl AdfResult {
    pub fn rejects_unit_root_at_5pct(&self) -> bool {
        self.statistic < self.critical_values.pct5
    }
}

fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>, f64)> {
    let xtx = x.transpose() * x;
    let xtx_inv = xtx.try_inverse()?;
    let beta = &xtx_inv * (x.transpose() * y);
    let resid = y - x * &beta;
    let dof = x.nrows() as f64 - x.ncols() as f64;
    if dof <= 0.0 {
        return None;
    }
    let s2 = resid.dot(&resid) / dof;
    Some((beta, xtx_inv, s2))
}

/// Augmented Dickey-Fuller test with a constant and no trend.
///
/// Regresses the first difference on the lagged level and `lag_order` lagged
/// differences; the statistic is the t-ratio of the lagged-level coefficient.
/// `lag_order = None` applies the Schwert rule floor(12 * (n/100)^(1/4)).
pub fn adf_test(series: &[f64], lag_order: Option<usize>) -> Result<AdfResult, DiagnosticsError> {
    let n = series.len();
    if n < 20 {
        return Err(DiagnosticsError::TooFewObservations { need: 20, have: n });
    }
    let schwert = (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize;
    let mut lags = lag_order.unwrap_or(schwert);
    // Keep enough residual degrees of freedom for the t-ratio.
    let max_lags = (n - 1).saturating_sub(8) / 2;
    lags = lags.min(max_lags);

    let diffs: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let n_eff = diffs.len() - lags;
    let k = 2 + lags; // constant, y_{t-1}, lagged diffs
    let mut x = DMatrix::zeros(n_eff, k);
    let mut y = DVector::zeros(n_eff);
    for row in 0..n_eff {
        let t = row + lags; // index into diffs
        y[row] = diffs[t];
        x[(row, 0)] = 1.0;
        x[(row, 1)] = series[t]; // y_{t-1}: level preceding diffs[t]
        for l in 1..=lags {
            x[(row, 1 + l)] = diffs[t - l];
        }
    }
    let (beta, xtx_inv, s2) = ols(&x, &y).ok_or(DiagnosticsError::SingularDesign)?;
    let se = (s2 * xtx_inv[(1, 1)]).sqrt();
    if !se.is_finite() || se == 0.0 {
        return Err(DiagnosticsError::SingularDesign);
    }
    Ok(AdfResult {
        statistic: beta[1] / se,
        lag_order: lags,
        n_obs: n_eff,
        critical_values: CriticalValues {
            pct1: ADF_CRITICAL_1PCT,
            pct5: ADF_CRITICAL_5PCT,
            pct10: ADF_CRITICAL_10PCT,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityTest {
    #[serde(rename = "TestStatistic")]
    pub statistic: f64,
    #[serde(rename = "PValue")]
    pub p_value: f64,
}

fn sample_mean_std(series: &[f64]) -> Result<(f64, f64), DiagnosticsError> {
    let n = series.len();
    if n < 8 {
        return Err(DiagnosticsError::TooFewObservations { need: 8, have: n });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 {
        return Err(DiagnosticsError::ZeroVariance);
    }
    Ok((mean, var.sqrt()))
}

/// Survival function of the Kolmogorov distribution, P(K > lambda).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let cdf = if lambda < 1.18 {
        // Theta-function form converges fast for small lambda.
        let v = (std::f64::consts::PI * std::f64::consts::PI) / (8.0 * lambda * lambda);
        ((2.0 * std::f64::consts::PI).sqrt() / lambda)
            * ((-v).exp() + (-9.0 * v).exp() + (-25.0 * v).exp())
    } else {
        let w = lambda * lambda;
        1.0 - 2.0 * ((-2.0 * w).exp() - (-8.0 * w).exp() + (-18.0 * w).exp())
    };
    (1.0 - cdf).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov statistic of `sorted` against `cdf`,
/// with the asymptotic p-value.
pub fn ks_test_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> NormalityTest {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let z = cdf(x);
        d = d.max((i as f64 + 1.0) / n - z).max(z - i as f64 / n);
    }
    NormalityTest {
        statistic: d,
        p_value: kolmogorov_sf(n.sqrt() * d),
    }
}

/// Kolmogorov-Smirnov test against a normal with estimated mean and std.
pub fn ks_normality(series: &[f64]) -> Result<NormalityTest, DiagnosticsError> {
    let (mean, std) = sample_mean_std(series)?;
    let normal = statrs::distribution::Normal::new(mean, std).unwrap();
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ks_test_sorted(&sorted, |x| normal.cdf(x)))
}

/// Anderson-Darling normality test with estimated parameters, including the
/// small-sample statistic adjustment and the usual p-value approximation.
pub fn anderson_darling(series: &[f64]) -> Result<NormalityTest, DiagnosticsError> {
    let (mean, std) = sample_mean_std(series)?;
    let n = series.len();
    let normal = statrs::distribution::Normal::new(0.0, 1.0).unwrap();
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let z: Vec<f64> = sorted
        .iter()
        .map(|x| normal.cdf((x - mean) / std).clamp(1e-15, 1.0 - 1e-15))
        .collect();
    let nf = n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        sum += (2.0 * i as f64 + 1.0) * (z[i].ln() + (1.0 - z[n - 1 - i]).ln());
    }
    let a2 = -nf - sum / nf;
    let a2_adj = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = if a2_adj >= 0.6 {
        (1.2937 - 5.709 * a2_adj + 0.0186 * a2_adj * a2_adj).exp()
    } else if a2_adj >= 0.34 {
        (0.9177 - 4.279 * a2_adj - 1.38 * a2_adj * a2_adj).exp()
    } else if a2_adj >= 0.2 {
        1.0 - (-8.318 + 42.796 * a2_adj - 59.938 * a2_adj * a2_adj).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a2_adj - 223.73 * a2_adj * a2_adj).exp()
    };
    Ok(NormalityTest {
        statistic: a2_adj,
        p_value: p.clamp(0.0, 1.0),
    })
}

/// All diagnostics in one report, serialized with the table field names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adf: Option<AdfResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<NormalityTest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ad: Option<NormalityTest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acf: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pacf: Option<Vec<f64>>,
}
