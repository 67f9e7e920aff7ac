//! Log-log rate fitting of distance traces.

use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateFit {
    Fit { slope: f64, intercept: f64, r2: f64, points: usize },
    /// Every distance after burn-in is zero.
    ConvergedExactly,
}

/// Least squares of `ln d_n` on `ln n` over stages `n > burn_in`
/// (stages are numbered from 1). Zero distances are skipped.
pub fn fit_rate(distances: &[f64], burn_in: usize) -> Result<RateFit> {
    if distances.len() <= burn_in + 10 {
        return Err(invalid(format!("trace of length {} is too short for burn-in {burn_in}", distances.len())));
    }
    let pts: Vec<(f64, f64)> = distances
        .iter()
        .enumerate()
        .skip(burn_in)
        .filter(|(_, d)| **d > 1e-12)
        .map(|(i, d)| (((i + 1) as f64).ln(), d.ln()))
        .collect();
    if pts.is_empty() {
        return Ok(RateFit::ConvergedExactly);
    }
    if pts.len() < 2 {
        return Err(invalid("fewer than two nonzero distances after burn-in"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if ss_tot <= 1e-300 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit::Fit { slope, intercept, r2, points: pts.len() })
}
