use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allan deviation of a series over a grid of averaging times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllanResult {
    /// Averaging times, s, strictly increasing.
    pub taus: Vec<f64>,
    /// Deviations in the unit of the input series.
    pub deviations: Vec<f64>,
    /// Number of non-overlapping clusters available at each τ.
    pub cluster_counts: Vec<usize>,
    /// Approximate fractional 1σ uncertainty, `1 / √(2 (K − 1))` for K clusters.
    pub confidence: Vec<f64>,
    pub overlapping: bool,
    /// Requested τ values that could not be evaluated.
    pub omitted: Vec<OmittedTau>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmittedTau {
    pub tau: f64,
    pub reason: String,
}

impl AllanResult {
    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Points whose τ lies in `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let tol = 1e-9 * hi.abs().max(lo.abs());
        self.taus
            .iter()
            .zip(&self.deviations)
            .filter(move |(t, _)| **t >= lo - tol && **t <= hi + tol)
            .map(|(t, d)| (*t, *d))
    }
}

fn cluster_size(tau: f64, sample_period: f64) -> Result<usize> {
    let m = (tau / sample_period).round();
    if !(tau.is_finite() && m >= 1.0 && (m * sample_period - tau).abs() <= 1e-9 * tau) {
        return Err(Error::Config(format!(
            "tau {tau} s is not a positive multiple of the sample period {sample_period} s"
        )));
    }
    Ok(m as usize)
}

fn non_overlapping_avar(series: &[f64], m: usize) -> f64 {
    let means: Vec<f64> = series
        .chunks_exact(m)
        .map(|c| c.iter().sum::<f64>() / m as f64)
        .collect();
    let sum: f64 = means.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    sum / (2.0 * (means.len() - 1) as f64)
}

/// Overlapping estimator via prefix sums of the mean-removed series.
fn overlapping_avar(prefix: &[f64], m: usize) -> f64 {
    let n = prefix.len() - 1;
    let terms = n + 1 - 2 * m;
    let sum: f64 = (0..terms)
        .map(|j| (prefix[j + 2 * m] - 2.0 * prefix[j + m] + prefix[j]).powi(2))
        .sum();
    sum / (2.0 * (m * m) as f64 * terms as f64)
}

/// Two-sample (Allan) deviation of `series` at each averaging time in `taus`.
///
/// Every τ must be an integer multiple of `sample_period`. A τ with fewer than
/// two full clusters is reported in [`AllanResult::omitted`] rather than
/// returned as NaN.
pub fn allan_deviation(
    series: &[f64],
    sample_period: f64,
    taus: &[f64],
    overlapping: bool,
) -> Result<AllanResult> {
    if !(sample_period.is_finite() && sample_period > 0.0) {
        return Err(Error::Config(format!(
            "sample period must be positive, got {sample_period}"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("series contains non-finite values".into()));
    }

    let mut sizes = taus
        .iter()
        .map(|&t| cluster_size(t, sample_period))
        .collect::<Result<Vec<_>>>()?;
    sizes.sort_unstable();
    sizes.dedup();

    let prefix = if overlapping {
        let mean = series.iter().sum::<f64>() / series.len().max(1) as f64;
        let mut acc = 0.0;
        let mut p = Vec::with_capacity(series.len() + 1);
        p.push(0.0);
        for v in series {
            acc += v - mean;
            p.push(acc);
        }
        p
    } else {
        Vec::new()
    };

    let mut out = AllanResult {
        taus: Vec::new(),
        deviations: Vec::new(),
        cluster_counts: Vec::new(),
        confidence: Vec::new(),
        overlapping,
        omitted: Vec::new(),
    };
    for m in sizes {
        let tau = m as f64 * sample_period;
        let clusters = series.len() / m;
        if clusters < 2 {
            out.omitted.push(OmittedTau {
                tau,
                reason: format!(
                    "needs {} samples for two clusters, series has {}",
                    2 * m,
                    series.len()
                ),
            });
            continue;
        }
        let avar = if overlapping {
            overlapping_avar(&prefix, m)
        } else {
            non_overlapping_avar(series, m)
        };
        out.taus.push(tau);
        out.deviations.push(avar.max(0.0).sqrt());
        out.cluster_counts.push(clusters);
        out.confidence
            .push(1.0 / (2.0 * (clusters - 1) as f64).sqrt());
    }
    Ok(out)
}

/// Roughly log-spaced τ grid between `start` and `stop`, snapped to
/// multiples of the sample period and de-duplicated.
pub fn log_spaced_taus(sample_period: f64, start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if !(sample_period > 0.0 && start > 0.0 && stop >= start && points >= 1) {
        return Err(Error::Config(format!(
            "invalid tau grid {start}:{stop}:{points} for sample period {sample_period}"
        )));
    }
    let (l0, l1) = (start.ln(), stop.ln());
    let mut sizes: Vec<u64> = (0..points)
        .map(|i| {
            let frac = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
            let tau = (l0 + frac * (l1 - l0)).exp();
            ((tau / sample_period).round() as u64).max(1)
        })
        .collect();
    sizes.dedup();
    Ok(sizes.into_iter().map(|m| m as f64 * sample_period).collect())
}

/// Fit window for the τ^(−1/2) extrapolation: `[4 · sample_period, duration / 10]`.
pub fn default_fit_window(sample_period: f64, duration: f64) -> (f64, f64) {
    (4.0 * sample_period, duration / 10.0)
}

fn positive_window(result: &AllanResult, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
    let pts: Vec<(f64, f64)> = result.window(lo, hi).collect();
    if pts.is_empty() {
        return Err(Error::Config(format!("no Allan points in fit window [{lo}, {hi}] s")));
    }
    if pts.iter().any(|(_, d)| *d <= 0.0) {
        return Err(Error::Config(format!(
            "fit window [{lo}, {hi}] s contains zero deviations; log-log fit undefined"
        )));
    }
    Ok(pts)
}

/// Least-squares slope of log σ against log τ over `[lo, hi]`.
pub fn loglog_slope(result: &AllanResult, lo: f64, hi: f64) -> Result<f64> {
    let pts = positive_window(result, lo, hi)?;
    if pts.len() < 2 {
        return Err(Error::Config("slope fit needs at least two points".into()));
    }
    let n = pts.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|(t, d)| (t.ln(), d.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasStabilityMethod {
    /// The minimum of the Allan curve.
    Minimum,
    /// Fit `a · τ^(−1/2)` over `fit_window` and evaluate it at `target_tau`.
    SqrtExtrapolation { fit_window: (f64, f64), target_tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasStability {
    pub value: f64,
    pub tau: f64,
}

pub fn bias_stability(result: &AllanResult, method: BiasStabilityMethod) -> Result<BiasStability> {
    if result.is_empty() {
        return Err(Error::Config("Allan result is empty".into()));
    }
    match method {
        BiasStabilityMethod::Minimum => {
            let (i, value) = result
                .deviations
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, d)| (i, *d))
                .expect("non-empty");
            Ok(BiasStability {
                value,
                tau: result.taus[i],
            })
        }
        BiasStabilityMethod::SqrtExtrapolation {
            fit_window: (lo, hi),
            target_tau,
        } => {
            if !(target_tau.is_finite() && target_tau > 0.0) {
                return Err(Error::Config(format!("target tau must be positive, got {target_tau}")));
            }
            let pts = positive_window(result, lo, hi)?;
            // With the slope pinned at -1/2, the least-squares intercept is the mean.
            let log_a = pts.iter().map(|(t, d)| d.ln() + 0.5 * t.ln()).sum::<f64>() / pts.len() as f64;
            Ok(BiasStability {
                value: log_a.exp() / target_tau.sqrt(),
                tau: target_tau,
            })
        }
    }
}
