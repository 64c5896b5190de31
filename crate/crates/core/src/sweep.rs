//! Noiseless parameter sweeps over the applied bias field or the π-pulse
//! offset, with the plain least-squares fits used to read them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{total_phase, AreaSign, BeamDirection, EnvironmentState, InstrumentConfig, PhaseModels};
use crate::stability::{combine_area, detrend_regression};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Common applied field B, T: the first half sees `B`, the second
    /// `B · field_ratio`.
    BiasField,
    /// π-pulse displacement Δ, m.
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub forward: f64,
    pub reversed: f64,
    pub rotation_like: f64,
    pub bias_like: f64,
}

/// `y = c0 + c1 x + c2 x²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    pub coefficients: [f64; 3],
    /// Extremum, `−c1 / (2 c2)`.
    pub apex: f64,
    pub residual_rms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
    /// Quadratic fits for a field sweep, one per area configuration.
    pub parabolas: Option<[QuadraticFit; 2]>,
    /// Linear fits for an offset sweep: forward, reversed, rotation-like,
    /// bias-like.
    pub lines: Option<[LinearFit; 4]>,
}

fn column(rows: &[SweepRow], f: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
    rows.iter().map(f).collect()
}

/// Least-squares parabola. The abscissa is centered and scaled to [−1, 1]
/// before fitting so tiny field values do not ill-condition the problem.
pub fn fit_quadratic(x: &[f64], y: &[f64]) -> Result<QuadraticFit> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    if half.is_nan() || half <= 0.0 {
        return Err(Error::Config("quadratic fit needs distinct abscissae".into()));
    }
    let u: Vec<f64> = x.iter().map(|v| (v - mid) / half).collect();
    let u2: Vec<f64> = u.iter().map(|v| v * v).collect();
    let (model, _) = detrend_regression(y, &[("u", &u), ("u2", &u2)])?;
    let (a, b, c) = (model.intercept, model.coefficients[0], model.coefficients[1]);
    if c == 0.0 {
        return Err(Error::Domain("sweep is not curved; no apex".into()));
    }
    // Back to x: y = a + b (x − m)/h + c (x − m)²/h².
    let c2 = c / (half * half);
    let c1 = b / half - 2.0 * c * mid / (half * half);
    let c0 = a - b * mid / half + c * mid * mid / (half * half);
    Ok(QuadraticFit {
        coefficients: [c0, c1, c2],
        apex: mid - b * half / (2.0 * c),
        residual_rms: model.residual_rms,
    })
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let (model, _) = detrend_regression(y, &[("x", x)])?;
    Ok(LinearFit {
        slope: model.coefficients[0],
        intercept: model.intercept,
        residual_rms: model.residual_rms,
    })
}

fn configure(
    parameter: SweepParameter,
    value: f64,
    field_ratio: f64,
    instrument: &InstrumentConfig,
    env: &EnvironmentState,
) -> (InstrumentConfig, EnvironmentState) {
    let mut cfg = *instrument;
    let mut env = *env;
    match parameter {
        SweepParameter::BiasField => {
            env.bias_field_half1 = value;
            env.bias_field_half2 = value * field_ratio;
        }
        SweepParameter::Delta => cfg.center_pulse_offset = value,
    }
    (cfg, env)
}

/// Evaluates both area configurations of the `+x` beam at `steps` evenly
/// spaced parameter values, then fits them.
pub fn sweep(
    instrument: &InstrumentConfig,
    env: &EnvironmentState,
    models: &PhaseModels,
    parameter: SweepParameter,
    range: (f64, f64),
    steps: usize,
    field_ratio: f64,
) -> Result<SweepResult> {
    let (lo, hi) = range;
    if steps < 3 {
        return Err(Error::Config(format!("sweep needs at least 3 steps, got {steps}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Config(format!("sweep range {lo}:{hi} must be finite with lo < hi")));
    }
    if !(field_ratio.is_finite() && field_ratio > 0.0) {
        return Err(Error::Config(format!("field ratio must be positive, got {field_ratio}")));
    }
    let values: Vec<f64> = (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect();
    for v in [lo, hi] {
        let (cfg, env) = configure(parameter, v, field_ratio, instrument, env);
        cfg.validate()?;
        env.validate()?;
    }

    let mut rows = Vec::with_capacity(steps);
    for &value in &values {
        let (cfg, env) = configure(parameter, value, field_ratio, instrument, env);
        let phase = |area| {
            total_phase(&cfg.with_signs(area, BeamDirection::Plus), &env, models).map(|b| b.total)
        };
        let forward = phase(AreaSign::Forward)?;
        let reversed = phase(AreaSign::Reversed)?;
        let (rot, bias) = combine_area(&[forward], &[reversed])?;
        rows.push(SweepRow {
            value,
            forward,
            reversed,
            rotation_like: rot[0],
            bias_like: bias[0],
        });
    }

    let (parabolas, lines) = match parameter {
        SweepParameter::BiasField => (
            Some([
                fit_quadratic(&values, &column(&rows, |r| r.forward))?,
                fit_quadratic(&values, &column(&rows, |r| r.reversed))?,
            ]),
            None,
        ),
        SweepParameter::Delta => (
            None,
            Some([
                fit_line(&values, &column(&rows, |r| r.forward))?,
                fit_line(&values, &column(&rows, |r| r.reversed))?,
                fit_line(&values, &column(&rows, |r| r.rotation_like))?,
                fit_line(&values, &column(&rows, |r| r.bias_like))?,
            ]),
        ),
    };
    Ok(SweepResult {
        parameter,
        rows,
        parabolas,
        lines,
    })
}
