//! TOML analysis reports. Every numeric key ends in its unit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleFactorSection {
    pub value_rad_per_rad_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllanSection {
    pub overlapping: bool,
    pub taus_s: Vec<f64>,
    /// Of the analyzed (drift-corrected) rotation signal.
    pub deviation_rad: Vec<f64>,
    /// Same curve expressed as rotation rate.
    pub deviation_deghr: Vec<f64>,
    pub raw_deviation_rad: Vec<f64>,
    pub confidence_frac: Vec<f64>,
    pub cluster_counts_n: Vec<u64>,
    /// Requested τ values that had fewer than two clusters.
    pub omitted_taus_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasStabilitySection {
    /// `minimum` or `extrapolate`.
    pub method: String,
    pub value_rad: f64,
    pub value_deghr: f64,
    pub tau_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window_lo_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window_hi_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArwSection {
    pub value_deg_rthr: f64,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    pub segment_length_n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionSection {
    pub channels: Vec<String>,
    pub coefficients_rad_per_unit: Vec<f64>,
    pub standard_errors_rad_per_unit: Vec<f64>,
    pub intercept_rad: f64,
    pub residual_rms_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub input_sha256: String,
    pub tool_version: String,
    pub parameters: BTreeMap<String, String>,
}

/// Sections are optional while a report is assembled; all are required to
/// write or read one.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_factor: Option<ScaleFactorSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allan: Option<AllanSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias_stability: Option<BiasStabilitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arw: Option<ArwSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regression: Option<RegressionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T> {
    section
        .as_ref()
        .ok_or_else(|| Error::Format(format!("report is missing the [{name}] section")))
}

fn finite(key: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::Format(format!("report field {key} holds non-finite {v}"))),
        None => Ok(()),
    }
}

fn same_len(key: &str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Format(format!(
            "report field {key} has {actual} entries, expected {expected}"
        )))
    }
}

impl Report {
    pub fn validate(&self) -> Result<()> {
        let sf = require(&self.scale_factor, "scale_factor")?;
        finite("scale_factor.value_rad_per_rad_s", &[sf.value_rad_per_rad_s])?;

        let allan = require(&self.allan, "allan")?;
        let n = allan.taus_s.len();
        for (key, values) in [
            ("allan.taus_s", &allan.taus_s),
            ("allan.deviation_rad", &allan.deviation_rad),
            ("allan.deviation_deghr", &allan.deviation_deghr),
            ("allan.raw_deviation_rad", &allan.raw_deviation_rad),
            ("allan.confidence_frac", &allan.confidence_frac),
            ("allan.omitted_taus_s", &allan.omitted_taus_s),
        ] {
            finite(key, values)?;
            if key != "allan.omitted_taus_s" {
                same_len(key, n, values.len())?;
            }
        }
        same_len("allan.cluster_counts_n", n, allan.cluster_counts_n.len())?;

        let bs = require(&self.bias_stability, "bias_stability")?;
        if !matches!(bs.method.as_str(), "minimum" | "extrapolate") {
            return Err(Error::Format(format!(
                "bias_stability.method `{}` is not `minimum` or `extrapolate`",
                bs.method
            )));
        }
        let window: Vec<f64> = bs.fit_window_lo_s.into_iter().chain(bs.fit_window_hi_s).collect();
        finite("bias_stability", &[bs.value_rad, bs.value_deghr, bs.tau_s])?;
        finite("bias_stability.fit_window", &window)?;

        let arw = require(&self.arw, "arw")?;
        finite("arw", &[arw.value_deg_rthr, arw.band_lo_hz, arw.band_hi_hz])?;

        let reg = require(&self.regression, "regression")?;
        let p = reg.channels.len();
        same_len("regression.coefficients_rad_per_unit", p, reg.coefficients_rad_per_unit.len())?;
        same_len(
            "regression.standard_errors_rad_per_unit",
            p,
            reg.standard_errors_rad_per_unit.len(),
        )?;
        finite("regression.coefficients_rad_per_unit", &reg.coefficients_rad_per_unit)?;
        finite("regression.standard_errors_rad_per_unit", &reg.standard_errors_rad_per_unit)?;
        finite("regression", &[reg.intercept_rad, reg.residual_rms_rad])?;
        if reg.residual_rms_rad < 0.0 {
            return Err(Error::Format("regression.residual_rms_rad is negative".into()));
        }

        let prov = require(&self.provenance, "provenance")?;
        if prov.input_sha256.len() != 64 || !prov.input_sha256.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::Format(format!(
                "provenance.input_sha256 `{}` is not a SHA-256 hex digest",
                prov.input_sha256
            )));
        }
        Ok(())
    }
}

pub fn report_to_string(report: &Report) -> Result<String> {
    report.validate()?;
    toml::to_string(report).map_err(|e| Error::Format(e.to_string()))
}

pub fn report_from_str(text: &str) -> Result<Report> {
    let report: Report = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    report.validate()?;
    Ok(report)
}

pub fn write_report(report: &Report, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = report_to_string(report)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Report> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    report_from_str(&text)
}

/// Whether the report's recorded digest matches the file at `input`.
pub fn digest_matches(report: &Report, input: impl AsRef<Path>) -> Result<bool> {
    let prov = require(&report.provenance, "provenance")?;
    Ok(super::file_digest(input)? == prov.input_sha256)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Report {
        Report {
            scale_factor: Some(ScaleFactorSection {
                value_rad_per_rad_s: 125_590.123_456_789,
            }),
            allan: Some(AllanSection {
                overlapping: false,
                taus_s: vec![20.0, 40.0, 80.0],
                deviation_rad: vec![1e-3, 7.1e-4, 5.000000000000001e-4],
                deviation_deghr: vec![1.6e-3, 1.1e-3, 8.2e-4],
                raw_deviation_rad: vec![1.1e-3, 9e-4, 1.3e-3],
                confidence_frac: vec![0.05, 0.07, 0.1],
                cluster_counts_n: vec![200, 100, 50],
                omitted_taus_s: vec![1e5],
            }),
            bias_stability: Some(BiasStabilitySection {
                method: "extrapolate".into(),
                value_rad: 1.15e-4,
                value_deghr: 0.19,
                tau_s: 7200.0,
                fit_window_lo_s: Some(80.0),
                fit_window_hi_s: Some(1440.0),
            }),
            arw: Some(ArwSection {
                value_deg_rthr: 3.3e-6,
                band_lo_hz: 1e-3,
                band_hi_hz: 2e-2,
                segment_length_n: 256,
            }),
            regression: Some(RegressionSection {
                channels: vec!["temp".into(), "tilt".into()],
                coefficients_rad_per_unit: vec![0.03, -1e-300],
                standard_errors_rad_per_unit: vec![1e-4, 2e-4],
                intercept_rad: 9.1,
                residual_rms_rad: 1e-3,
            }),
            provenance: Some(Provenance {
                input_sha256: "ab".repeat(32),
                tool_version: "0.1.0".into(),
                parameters: [("method".to_string(), "min".to_string())].into(),
            }),
        }
    }

    #[test]
    fn round_trip_and_determinism() {
        let r = example();
        let a = report_to_string(&r).unwrap();
        let b = report_to_string(&r).unwrap();
        assert_eq!(a, b);
        assert_eq!(report_from_str(&a).unwrap(), r);
    }

    #[test]
    fn missing_section_rejected() {
        let mut r = example();
        r.arw = None;
        assert!(matches!(report_to_string(&r), Err(Error::Format(m)) if m.contains("[arw]")));
        let mut text = report_to_string(&example()).unwrap();
        let start = text.find("[arw]").unwrap();
        let end = start + text[start..].find("\n\n").unwrap();
        text.replace_range(start..end, "");
        assert!(report_from_str(&text).is_err());
    }

    #[test]
    fn inconsistent_lengths_rejected() {
        let mut r = example();
        r.allan.as_mut().unwrap().confidence_frac.pop();
        assert!(report_to_string(&r).is_err());
        let mut r = example();
        r.regression.as_mut().unwrap().coefficients_rad_per_unit[0] = f64::NAN;
        assert!(report_to_string(&r).is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let text = report_to_string(&example()).unwrap() + "\n[extra]\nx_s = 1.0\n";
        assert!(report_from_str(&text).is_err());
    }
}
