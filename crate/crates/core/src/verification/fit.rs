//! Least-squares power-law fits on log-log axes.

use serde::Serialize;

use crate::error::{Error, Result};

/// Slope, intercept and `r²` of the least-squares line through `(x, y)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, intercept, r_squared)
}

/// Slope of `log y` against `log x` over the points with `x, y > 0`.
/// `None` if fewer than two such points remain.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    (lx.len() >= 2).then(|| linear_fit(&lx, &ly).0)
}

/// Power law `-value ≈ prefactor · ε^η`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    /// Which points entered the regression (the negative ones).
    pub used: Vec<bool>,
    pub eta: f64,
    pub prefactor: f64,
    pub r_squared: f64,
}

/// Fits `log(-value)` against `log ε`. Non-negative values are dropped with
/// a warning; fewer than three usable points is an error.
pub fn fit_exponent(epsilons: &[f64], values: &[f64]) -> Result<ExponentFit> {
    assert_eq!(
        epsilons.len(),
        values.len(),
        "epsilons and values differ in length"
    );
    let used: Vec<bool> = epsilons
        .iter()
        .zip(values)
        .map(|(e, v)| *e > 0.0 && *v < 0.0 && v.is_finite())
        .collect();
    for (i, ok) in used.iter().enumerate() {
        if !ok {
            log::warn!(
                "dropping point eps = {}, value = {} from the exponent fit",
                epsilons[i],
                values[i]
            );
        }
    }
    let (x, y): (Vec<f64>, Vec<f64>) = epsilons
        .iter()
        .zip(values)
        .zip(&used)
        .filter(|(_, ok)| **ok)
        .map(|((e, v), _)| (e.ln(), (-v).ln()))
        .unzip();
    if x.len() < 3 {
        return Err(Error::TooFewPoints { usable: x.len() });
    }
    let (eta, intercept, r_squared) = linear_fit(&x, &y);
    Ok(ExponentFit {
        epsilons: epsilons.to_vec(),
        values: values.to_vec(),
        used,
        eta,
        prefactor: intercept.exp(),
        r_squared,
    })
}
