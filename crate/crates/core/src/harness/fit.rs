use serde::{Deserialize, Serialize};

use crate::asymptotics::{LogFactor, RatePrediction};
use crate::error::{Error, Result};

/// Least-squares line through (log ε, log value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

fn line_fit(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    // A perfectly flat series is explained exactly by the constant model.
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Log-log rate fit of value(ε).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub samples: Vec<(f64, f64)>,
    pub raw: LineFit,
    pub predicted: Option<f64>,
    /// s in value·|log ε|^s used for the corrected fit (0 when no log factor is predicted).
    pub log_power: f64,
    pub corrected: Option<LineFit>,
}

impl RateFit {
    pub fn slope(&self) -> f64 {
        self.raw.slope
    }

    /// Corrected slope when a log factor is predicted, raw slope otherwise.
    pub fn best_slope(&self) -> f64 {
        self.corrected.map_or(self.raw.slope, |c| c.slope)
    }

    pub fn best_r_squared(&self) -> f64 {
        self.corrected.map_or(self.raw.r_squared, |c| c.r_squared)
    }
}

/// Fits log value = a + s·log ε; with a log-factor prediction also fits value·|log ε|^s.
pub fn fit_rate(samples: &[(f64, f64)], prediction: Option<&RatePrediction>) -> Result<RateFit> {
    let log_power = match prediction.map(|p| p.log_factor) {
        Some(LogFactor::Over) => 1.0,
        Some(LogFactor::Times) => -1.0,
        _ => 0.0,
    };
    let mut fit = fit_with_log_power(samples, log_power)?;
    fit.predicted = prediction.map(|p| p.exponent);
    Ok(fit)
}

/// Raw fit plus the fit of value·|log ε|^s (omitted when s = 0).
pub fn fit_with_log_power(samples: &[(f64, f64)], log_power: f64) -> Result<RateFit> {
    if samples.len() < 4 {
        return Err(Error::TooFewSamples(samples.len()));
    }
    for &(e, v) in samples {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositive(v));
        }
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::InvalidParameter(format!("ε = {e} outside (0, 1)")));
        }
    }
    let x: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let raw = line_fit(&x, &y);
    let corrected = (log_power != 0.0).then(|| {
        let yc: Vec<f64> = samples
            .iter()
            .zip(&y)
            .map(|(s, ly)| ly + log_power * s.0.ln().abs().ln())
            .collect();
        line_fit(&x, &yc)
    });
    Ok(RateFit {
        samples: samples.to_vec(),
        raw,
        predicted: None,
        log_power,
        corrected,
    })
}
