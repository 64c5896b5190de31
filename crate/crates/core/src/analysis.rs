//! End-to-end analysis of a dataset: beam and area combination, regression
//! drift removal, Allan deviation, bias stability and ARW.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::io::{
    AllanSection, ArwSection, BiasStabilitySection, Provenance, RegressionSection, Report,
    ScaleFactorSection,
};
use crate::phase::scale_factor;
use crate::simulator::Dataset;
use crate::stability::{
    allan_deviation, arw_from_psd, bias_stability, default_fit_window, detrend_regression,
    log_spaced_taus, phase_to_rate, psd_welch, rank_channels, AllanResult, BiasStability,
    BiasStabilityMethod, ChannelCorrelation, PsdResult, RegressionModel, Window,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiasMethod {
    Minimum,
    /// τ^(−1/2) extrapolation. Defaults: the standard fit window and the
    /// longest reported τ.
    Extrapolate {
        fit_window: Option<(f64, f64)>,
        target_tau: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    /// Auxiliary channels to regress out; `None` uses all of them.
    pub channels: Option<Vec<String>>,
    /// Averaging times, s; `None` uses a log grid from one sample to half
    /// the record.
    pub taus: Option<Vec<f64>>,
    pub overlapping: bool,
    pub method: BiasMethod,
    /// Size of the reduced regression using only the best-correlated channels.
    pub top_k: usize,
    /// rad/(rad/s); `None` derives it from the recorded instrument.
    pub scale_factor: Option<f64>,
    /// Hz; `None` uses the upper half of the spectrum.
    pub arw_band: Option<(f64, f64)>,
    /// `None` picks the largest power of two not above an eighth of the record.
    pub psd_segment_length: Option<usize>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            channels: None,
            taus: None,
            overlapping: false,
            method: BiasMethod::Minimum,
            top_k: 3,
            scale_factor: None,
            arw_band: None,
            psd_segment_length: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopK {
    pub model: RegressionModel,
    pub corrected: Vec<f64>,
    pub allan: AllanResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub time: Vec<f64>,
    /// Combined rotation signal, rad.
    pub raw: Vec<f64>,
    /// Rotation signal after regression, rad. Equal to `raw` with no channels.
    pub corrected: Vec<f64>,
    pub ranking: Vec<ChannelCorrelation>,
    pub regression: Option<RegressionModel>,
    pub top_k: Option<TopK>,
    pub raw_allan: AllanResult,
    pub allan: AllanResult,
    pub method: BiasMethod,
    pub fit_window: Option<(f64, f64)>,
    pub bias: BiasStability,
    /// PSD of the corrected rotation rate, (rad/s)²/Hz.
    pub psd: PsdResult,
    pub arw_band: (f64, f64),
    /// deg/√hr.
    pub arw: f64,
    pub scale_factor: f64,
    pub warnings: Vec<String>,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn analyze(dataset: &Dataset, options: &AnalysisOptions) -> Result<Analysis> {
    dataset.validate()?;
    let n = dataset.len();
    if n < 4 {
        return Err(Error::Config(format!("dataset has {n} rows; analysis needs at least 4")));
    }
    let dt = dataset.sample_period();
    let duration = n as f64 * dt;
    let sf = match options.scale_factor {
        Some(sf) => sf,
        None => scale_factor(&dataset.truth.spec.instrument, &dataset.truth.spec.models.constants),
    };
    if !(sf.is_finite() && sf > 0.0) {
        return Err(Error::Config(format!("scale factor must be positive, got {sf}")));
    }
    let mut warnings = Vec::new();

    let names: Vec<String> = match &options.channels {
        Some(requested) => {
            for name in requested {
                if !dataset.aux.contains_key(name) {
                    let available: Vec<&str> = dataset.aux.keys().map(String::as_str).collect();
                    return Err(Error::Config(format!(
                        "auxiliary channel `{name}` not in dataset; available: [{}]",
                        available.join(", ")
                    )));
                }
            }
            requested.clone()
        }
        None => dataset.aux.keys().cloned().collect(),
    };

    let raw = dataset.rotation_signal()?;
    let selected: Vec<(&str, &[f64])> = names
        .iter()
        .map(|n| (n.as_str(), dataset.aux[n].as_slice()))
        .collect();
    let ranking = rank_channels(&raw, &selected)?;
    let usable: Vec<(&str, &[f64])> = ranking
        .iter()
        .filter(|c| {
            if c.zero_variance {
                warnings.push(format!("channel `{}` is constant and was not regressed", c.name));
            }
            !c.zero_variance
        })
        .map(|c| (c.name.as_str(), dataset.aux[&c.name].as_slice()))
        .collect();
    // Regress in the requested order so coefficients line up with the request.
    let usable: Vec<(&str, &[f64])> = selected
        .iter()
        .filter(|(name, _)| usable.iter().any(|(u, _)| u == name))
        .copied()
        .collect();

    let (regression, corrected) = if usable.is_empty() {
        (None, raw.clone())
    } else {
        let (model, residual) = detrend_regression(&raw, &usable)?;
        (Some(model), residual)
    };

    let taus = match &options.taus {
        Some(t) => t.clone(),
        None => log_spaced_taus(dt, dt, duration / 2.0, 24)?,
    };
    let raw_allan = allan_deviation(&raw, dt, &taus, options.overlapping)?;
    let allan = allan_deviation(&corrected, dt, &taus, options.overlapping)?;
    for o in &allan.omitted {
        warnings.push(format!("tau {} s omitted: {}", o.tau, o.reason));
    }
    if allan.is_empty() {
        return Err(Error::Config(format!(
            "no requested tau fits two clusters in a {duration} s record"
        )));
    }

    let top_k = if options.top_k > 0 && options.top_k < usable.len() {
        let best: Vec<(&str, &[f64])> = ranking
            .iter()
            .filter(|c| !c.zero_variance)
            .take(options.top_k)
            .map(|c| (c.name.as_str(), dataset.aux[&c.name].as_slice()))
            .collect();
        let (model, corrected) = detrend_regression(&raw, &best)?;
        let allan = allan_deviation(&corrected, dt, &taus, options.overlapping)?;
        Some(TopK {
            model,
            corrected,
            allan,
        })
    } else {
        None
    };

    let (method, fit_window) = match options.method {
        BiasMethod::Minimum => (BiasStabilityMethod::Minimum, None),
        BiasMethod::Extrapolate {
            fit_window,
            target_tau,
        } => {
            let window = fit_window.unwrap_or_else(|| default_fit_window(dt, duration));
            let target = target_tau.unwrap_or_else(|| *allan.taus.last().expect("non-empty"));
            (
                BiasStabilityMethod::SqrtExtrapolation {
                    fit_window: window,
                    target_tau: target,
                },
                Some(window),
            )
        }
    };
    let bias = bias_stability(&allan, method)?;

    let rate: Vec<f64> = corrected.iter().map(|p| p / sf).collect();
    let segment = match options.psd_segment_length {
        Some(s) => s,
        None => {
            let cap = (n / 8).max(4);
            1 << (usize::BITS - 1 - cap.leading_zeros())
        }
    };
    let psd = psd_welch(&rate, dt, segment, Window::Hann)?;
    let nyquist = 0.5 / dt;
    let arw_band = options.arw_band.unwrap_or((0.5 * nyquist, nyquist));
    let arw = arw_from_psd(&psd, arw_band)?;

    Ok(Analysis {
        time: dataset.time.clone(),
        raw,
        corrected,
        ranking,
        regression,
        top_k,
        raw_allan,
        allan,
        method: options.method,
        fit_window,
        bias,
        psd,
        arw_band,
        arw,
        scale_factor: sf,
        warnings,
    })
}

impl Analysis {
    pub fn to_report(&self, input_sha256: String, parameters: BTreeMap<String, String>) -> Result<Report> {
        let to_rate = |phase: f64| phase_to_rate(phase, self.scale_factor);
        let regression = match &self.regression {
            Some(m) => RegressionSection {
                channels: m.channels.clone(),
                coefficients_rad_per_unit: m.coefficients.clone(),
                standard_errors_rad_per_unit: m.standard_errors.clone(),
                intercept_rad: m.intercept,
                residual_rms_rad: m.residual_rms,
            },
            None => {
                let mu = mean(&self.raw);
                let rms = (self.raw.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / self.raw.len() as f64).sqrt();
                RegressionSection {
                    channels: Vec::new(),
                    coefficients_rad_per_unit: Vec::new(),
                    standard_errors_rad_per_unit: Vec::new(),
                    intercept_rad: mu,
                    residual_rms_rad: rms,
                }
            }
        };
        Ok(Report {
            scale_factor: Some(ScaleFactorSection {
                value_rad_per_rad_s: self.scale_factor,
            }),
            allan: Some(AllanSection {
                overlapping: self.allan.overlapping,
                taus_s: self.allan.taus.clone(),
                deviation_rad: self.allan.deviations.clone(),
                deviation_deghr: self.allan.deviations.iter().map(|&d| to_rate(d)).collect::<Result<_>>()?,
                raw_deviation_rad: self.raw_allan.deviations.clone(),
                confidence_frac: self.allan.confidence.clone(),
                cluster_counts_n: self.allan.cluster_counts.iter().map(|&c| c as u64).collect(),
                omitted_taus_s: self.allan.omitted.iter().map(|o| o.tau).collect(),
            }),
            bias_stability: Some(BiasStabilitySection {
                method: match self.method {
                    BiasMethod::Minimum => "minimum",
                    BiasMethod::Extrapolate { .. } => "extrapolate",
                }
                .into(),
                value_rad: self.bias.value,
                value_deghr: to_rate(self.bias.value)?,
                tau_s: self.bias.tau,
                fit_window_lo_s: self.fit_window.map(|w| w.0),
                fit_window_hi_s: self.fit_window.map(|w| w.1),
            }),
            arw: Some(ArwSection {
                value_deg_rthr: self.arw,
                band_lo_hz: self.arw_band.0,
                band_hi_hz: self.arw_band.1,
                segment_length_n: self.psd.segment_length as u64,
            }),
            regression: Some(regression),
            provenance: Some(Provenance {
                input_sha256,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                parameters,
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{simulate, AuxChannelSpec, AuxProcess, Coupling, Schedule, SimulationSpec};

    fn spec() -> SimulationSpec {
        SimulationSpec {
            schedule: Schedule {
                duration: 3600.0,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_rotation_only() {
        let mut s = spec();
        s.environment.rotation_rate.z = s.models.constants.omega_earth;
        let d = simulate(&s, 1).unwrap();
        let a = analyze(&d, &AnalysisOptions::default()).unwrap();
        assert_eq!(a.corrected, a.raw);
        assert!(a.allan.deviations.iter().all(|&v| v == 0.0));
        assert!(a.regression.is_none());
        let report = a.to_report("0".repeat(64), BTreeMap::new()).unwrap();
        report.validate().unwrap();
    }

    #[test]
    fn missing_channel_lists_available() {
        let mut s = spec();
        s.aux.push(AuxChannelSpec {
            name: "temp".into(),
            process: AuxProcess::RandomWalk { step_sigma: 0.1 },
            coupling: 0.0,
            couples_to: Coupling::AreaOdd,
        });
        let d = simulate(&s, 1).unwrap();
        let opts = AnalysisOptions {
            channels: Some(vec!["pressure".into()]),
            ..Default::default()
        };
        let err = analyze(&d, &opts).unwrap_err().to_string();
        assert!(err.contains("pressure") && err.contains("[temp]"), "{err}");
    }

    #[test]
    fn infeasible_taus_are_omitted_with_warning() {
        let mut s = spec();
        s.noise.white_phase_noise_sigma = 1e-3;
        let d = simulate(&s, 2).unwrap();
        let opts = AnalysisOptions {
            taus: Some(vec![20.0, 200.0, 4000.0]),
            ..Default::default()
        };
        let a = analyze(&d, &opts).unwrap();
        assert_eq!(a.allan.taus, vec![20.0, 200.0]);
        assert!(a.warnings.iter().any(|w| w.contains("4000")));
    }

    #[test]
    fn constant_channel_skipped() {
        let mut s = spec();
        s.noise.white_phase_noise_sigma = 1e-3;
        s.aux.push(AuxChannelSpec {
            name: "flat".into(),
            process: AuxProcess::Constant { value: 2.0 },
            coupling: 0.1,
            couples_to: Coupling::AreaOdd,
        });
        let d = simulate(&s, 3).unwrap();
        let a = analyze(&d, &AnalysisOptions::default()).unwrap();
        assert!(a.regression.is_none());
        assert!(a.warnings.iter().any(|w| w.contains("flat")));
    }
}
