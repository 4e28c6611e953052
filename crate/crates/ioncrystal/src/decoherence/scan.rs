use serde::{Deserialize, Serialize};

use super::{evaluate, Bath, CouplingScales, DiagramMode, ErrorBreakdown};
use crate::lattice::{bose_einstein, PhysicalParams};
use crate::phonons::Spectrum;
use crate::{Error, Result};

/// `points` temperatures spaced evenly in log between `t_min` and `t_max`.
pub fn log_spaced(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max >= t_min) || points == 0 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < t_min <= t_max and at least one point, got [{t_min}, {t_max}] with {points}"
        )));
    }
    if points == 1 {
        return Ok(vec![t_max]);
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    Ok((0..points)
        .map(|i| {
            if i == points - 1 {
                t_max
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect())
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Diagram terms and errors of the crystal at each temperature (kelvin).
pub fn temperature_scan(
    spectrum: &Spectrum,
    params: &PhysicalParams,
    scales: &CouplingScales,
    temperatures: &[f64],
    mode: DiagramMode,
) -> Result<Vec<ErrorBreakdown>> {
    let base = Bath::lattice(spectrum, f64::INFINITY);
    temperatures
        .iter()
        .map(|&t| {
            let p = PhysicalParams { temperature: t, ..*params };
            p.validate()?;
            let x = p.inverse_thermal_ratio();
            let bath = base.clone().with_occupations(|w| bose_einstein(x * w));
            Ok(ErrorBreakdown::from_diagrams(t, &evaluate(&bath, scales, mode)))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    /// Log-log slope of E against T over the points in [t_max/10, t_max].
    pub slope_upper_decade: f64,
    pub max_eprime_over_e: f64,
    pub max_e: f64,
}

impl ScanSummary {
    pub fn from_scan(rows: &[ErrorBreakdown]) -> Self {
        let t_top = rows.iter().map(|r| r.temperature).fold(f64::NEG_INFINITY, f64::max);
        let upper: Vec<&ErrorBreakdown> = rows.iter().filter(|r| r.temperature >= t_top / 10.0 * (1.0 - 1e-12)).collect();
        let t: Vec<f64> = upper.iter().map(|r| r.temperature).collect();
        let e: Vec<f64> = upper.iter().map(|r| r.error_e).collect();
        Self {
            slope_upper_decade: if t.len() >= 2 { loglog_slope(&t, &e) } else { f64::NAN },
            max_eprime_over_e: upper.iter().map(|r| r.error_eprime / r.error_e).fold(f64::NEG_INFINITY, f64::max),
            max_e: rows.iter().map(|r| r.error_e).fold(f64::NEG_INFINITY, f64::max),
        }
    }
}
