//! Asymptotic laws of s-number sequences.
//!
//! Fits are ordinary least squares in log space over an inclusive, 1-based
//! index window `(n_min, n_max)`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::SNumbers;

/// Fewest points accepted in a fit window.
pub const MIN_FIT_POINTS: usize = 8;
/// Power-law exponents at or below this count as sub-polynomial decay.
pub const SUBPOLYNOMIAL_ALPHA: f64 = 0.05;
/// Largest relative dip tolerated in a "monotonically increasing" trend.
pub const TREND_DIP_TOLERANCE: f64 = 0.05;
/// Relative spread (max − min)/mean below which a trend is read as converged.
pub const LIMIT_SPREAD_TOLERANCE: f64 = 0.10;
/// Trend samples per factor of ten in n.
pub const SAMPLES_PER_DECADE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    /// s_n ≈ a·n^(−alpha)
    PowerLaw,
    /// s_n ≈ a·(ln n)^beta
    SlowlyVaryingLog,
}

/// A fitted asymptotic law for s_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub kind: DecayKind,
    pub a: f64,
    /// Decay exponent (power law) or log power (slowly varying).
    pub exponent: f64,
    pub fit_window: (usize, usize),
    /// RMS residual of the fit in log scale.
    pub residual: f64,
}

impl DecayProfile {
    /// Power-law exponent α, if this is a power-law fit.
    pub fn alpha(&self) -> Option<f64> {
        (self.kind == DecayKind::PowerLaw).then_some(self.exponent)
    }

    /// Log power β, if this is a slowly varying fit.
    pub fn beta(&self) -> Option<f64> {
        (self.kind == DecayKind::SlowlyVaryingLog).then_some(self.exponent)
    }

    /// Model value at index n.
    pub fn eval(&self, n: f64) -> f64 {
        match self.kind {
            DecayKind::PowerLaw => self.a * n.powf(-self.exponent),
            DecayKind::SlowlyVaryingLog => self.a * n.ln().powf(self.exponent),
        }
    }
}

/// Schatten order ρ = inf{p : Σ s^p < ∞} read off a fitted law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchattenOrder {
    Finite(f64),
    /// Decay is slower than every power: the operator lies in no S_p.
    Infinite,
}

impl SchattenOrder {
    pub fn is_infinite(&self) -> bool {
        matches!(self, SchattenOrder::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            SchattenOrder::Finite(r) => Some(*r),
            SchattenOrder::Infinite => None,
        }
    }
}

/// Finite-N surrogates for the limits n²·s_n → ∞ and n^α·s_n → a.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitDiagnostics {
    pub n2_trend: Vec<(usize, f64)>,
    pub nalpha_trend: Vec<(usize, f64)>,
    pub verdict_n2_divergent: bool,
    pub verdict_nalpha_limit: Option<f64>,
}

/// Result of a straight-line least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the residuals.
    pub rms: f64,
}

/// Ordinary least squares y ≈ slope·x + intercept.
pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(u, v)| (v - slope * u - intercept).powi(2)).sum();
    LineFit { slope, intercept, rms: (ss / n).sqrt() }
}

fn window_values(s: &SNumbers, window: (usize, usize), min_start: usize) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    if lo < min_start || hi > s.len() || hi <= lo {
        return Err(LabError::InvalidParameter(format!(
            "fit window ({lo}, {hi}) must satisfy {min_start} <= n_min < n_max <= {}",
            s.len()
        )));
    }
    let points = hi - lo + 1;
    if points < MIN_FIT_POINTS {
        return Err(LabError::InsufficientData { points, required: MIN_FIT_POINTS });
    }
    (lo..=hi)
        .map(|n| {
            let v = s.s(n);
            if v > 0.0 {
                Ok((n as f64, v))
            } else {
                Err(LabError::ZeroInWindow { index: n })
            }
        })
        .collect()
}

/// Fits s_n ≈ a·n^(−α) on (ln n, ln s_n).
pub fn fit_power_law(s: &SNumbers, window: (usize, usize)) -> Result<DecayProfile> {
    let pts = window_values(s, window, 2)?;
    let x: Vec<f64> = pts.iter().map(|(n, _)| n.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let fit = fit_line(&x, &y);
    Ok(DecayProfile {
        kind: DecayKind::PowerLaw,
        a: fit.intercept.exp(),
        exponent: -fit.slope,
        fit_window: window,
        residual: fit.rms,
    })
}

/// Fits s_n ≈ a·(ln n)^β on (ln ln n, ln s_n).
pub fn fit_slowly_varying_log(s: &SNumbers, window: (usize, usize)) -> Result<DecayProfile> {
    let pts = window_values(s, window, 3)?;
    let x: Vec<f64> = pts.iter().map(|(n, _)| n.ln().ln()).collect();
    let y: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let fit = fit_line(&x, &y);
    Ok(DecayProfile {
        kind: DecayKind::SlowlyVaryingLog,
        a: fit.intercept.exp(),
        exponent: fit.slope,
        fit_window: window,
        residual: fit.rms,
    })
}

/// Schatten order from the power-law fit: 1/α, or `Infinite` for
/// sub-polynomial decay.
///
/// A slowly varying sequence has local log-log slope ~ 1/ln n, which stays far
/// above any fixed threshold at reachable N. Decay is therefore also declared
/// sub-polynomial when a decreasing log-power law fits the window better than
/// the power law does.
pub fn estimate_schatten_order(s: &SNumbers, window: (usize, usize)) -> Result<SchattenOrder> {
    let power = fit_power_law(s, window)?;
    if power.exponent <= SUBPOLYNOMIAL_ALPHA {
        return Ok(SchattenOrder::Infinite);
    }
    if window.0 >= 3 {
        let slow = fit_slowly_varying_log(s, window)?;
        if slow.exponent < 0.0 && slow.residual < power.residual {
            return Ok(SchattenOrder::Infinite);
        }
    }
    Ok(SchattenOrder::Finite(1.0 / power.exponent))
}

/// Geometrically spaced sample indices in [1, len], always including len.
pub fn geometric_samples(len: usize, per_decade: usize) -> Vec<usize> {
    let mut out = Vec::new();
    if len == 0 {
        return out;
    }
    let ratio = 10f64.powf(1.0 / per_decade as f64);
    let mut x = 1.0_f64;
    while (x.round() as usize) < len {
        let n = x.round() as usize;
        if out.last() != Some(&n) {
            out.push(n);
        }
        x *= ratio;
    }
    if out.last() != Some(&len) {
        out.push(len);
    }
    out
}

/// Samples n²·s_n and n^α·s_n and reads trend verdicts from the last decade
/// (samples with n ≥ len/10).
pub fn limit_diagnostics(s: &SNumbers, alpha: f64) -> Result<LimitDiagnostics> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(LabError::InvalidParameter(format!("alpha = {alpha} must lie in (0, 2)")));
    }
    let len = s.len();
    let samples = geometric_samples(len, SAMPLES_PER_DECADE);
    let n2_trend: Vec<(usize, f64)> = samples.iter().map(|&n| (n, (n * n) as f64 * s.s(n))).collect();
    let nalpha_trend: Vec<(usize, f64)> = samples.iter().map(|&n| (n, (n as f64).powf(alpha) * s.s(n))).collect();

    let decade_start = (len as f64 / 10.0).ceil() as usize;
    let last = |trend: &[(usize, f64)]| -> Vec<f64> {
        trend.iter().filter(|(n, _)| *n >= decade_start).map(|(_, v)| *v).collect()
    };

    let n2_last = last(&n2_trend);
    let verdict_n2_divergent = n2_last.len() >= 2 && {
        let steps_ok = n2_last.windows(2).all(|w| w[1] >= (1.0 - TREND_DIP_TOLERANCE) * w[0]);
        let first = n2_last[0];
        let end = *n2_last.last().unwrap();
        steps_ok && end > (1.0 + LIMIT_SPREAD_TOLERANCE) * first
    };

    let na_last = last(&nalpha_trend);
    let verdict_nalpha_limit = if na_last.is_empty() {
        None
    } else {
        let mean = na_last.iter().sum::<f64>() / na_last.len() as f64;
        let max = na_last.iter().copied().fold(f64::MIN, f64::max);
        let min = na_last.iter().copied().fold(f64::MAX, f64::min);
        (mean > 0.0 && (max - min) / mean < LIMIT_SPREAD_TOLERANCE).then_some(mean)
    };

    Ok(LimitDiagnostics { n2_trend, nalpha_trend, verdict_n2_divergent, verdict_nalpha_limit })
}

/// L(x) = (ln x)^β, the standard slowly varying function.
pub fn log_power(x: f64, beta: f64) -> f64 {
    x.ln().powf(beta)
}
