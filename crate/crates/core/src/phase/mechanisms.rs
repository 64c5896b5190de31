use nalgebra::Vector3;

use super::{
    AreaSign, EnvironmentState, InstrumentConfig, IntensityCouplingModel, PhaseBudget,
    PhaseModels, PhysicalConstants, ZeemanModel, MAX_MISALIGNMENT_RAD,
};
use crate::error::{Error, Result};

fn k_eff_vector(config: &InstrumentConfig, consts: &PhysicalConstants) -> Vector3<f64> {
    Vector3::new(0.0, config.area_sign.sign() * consts.k_eff_magnitude, 0.0)
}

fn check_inputs(config: &InstrumentConfig, env: &EnvironmentState) -> Result<()> {
    config.validate()?;
    env.validate()
}

/// Rotation scale factor `2 k_eff L² / v` in rad per rad/s, for the forward
/// area on the `+x` beam.
pub fn scale_factor(config: &InstrumentConfig, consts: &PhysicalConstants) -> f64 {
    2.0 * consts.k_eff_magnitude * config.pulse_spacing * config.pulse_spacing / config.atom_speed
}

/// Sagnac phase `s_area · s_beam · 2 k_eff L² Ω_z / v`.
pub fn sagnac_phase(
    config: &InstrumentConfig,
    env: &EnvironmentState,
    consts: &PhysicalConstants,
) -> Result<f64> {
    check_inputs(config, env)?;
    let signs = config.area_sign.sign() * config.beam_direction.sign();
    Ok(signs * scale_factor(config, consts) * env.rotation_rate.z)
}

/// The four lowest-order terms of the phase produced by displacing the π
/// pulse by Δ from the interferometer center:
///
/// ```text
/// [ ħk²/(m v),  2 k·v / v,  4L k·(Ω×v) / v²,  2L k·g / v² ] · Δ
/// ```
///
/// with `k` the area-signed wave vector and `v` the full atom velocity.
pub fn center_pulse_phase(
    config: &InstrumentConfig,
    env: &EnvironmentState,
    consts: &PhysicalConstants,
) -> Result<[f64; 4]> {
    check_inputs(config, env)?;
    let k = k_eff_vector(config, consts);
    let v_vec = config.velocity();
    let v = config.atom_speed;
    let l = config.pulse_spacing;
    let delta = config.center_pulse_offset;

    let recoil = consts.hbar * k.dot(&k) / (consts.atom_mass * v) * delta;
    let transverse = 2.0 * k.dot(&v_vec) / v * delta;
    let rotation = 4.0 * l * k.dot(&env.rotation_rate.cross(&v_vec)) / (v * v) * delta;
    let gravity = 2.0 * l * k.dot(&env.acceleration) / (v * v) * delta;
    Ok([recoil, transverse, rotation, gravity])
}

/// Linear-acceleration phase `k · a (L/v)²`. Independent of the beam
/// direction, so it drops out of the counter-propagating beam difference.
pub fn acceleration_phase(
    config: &InstrumentConfig,
    env: &EnvironmentState,
    consts: &PhysicalConstants,
) -> Result<f64> {
    check_inputs(config, env)?;
    let k = k_eff_vector(config, consts);
    let t = config.half_transit_time();
    Ok(k.dot(&env.acceleration) * t * t)
}

/// Quadratic Zeeman phase from unequal bias fields in the two halves:
///
/// `s_beam · 2π K_z [(B₂ + B_s)² − (B₁ + B_s)²] (L/v)`
///
/// The beam traversing `-x` visits the halves in the opposite order, hence
/// the beam sign. A fraction `reversal_imperfection` of the phase follows the
/// area sign; the rest is area-even.
pub fn zeeman_phase(
    model: &ZeemanModel,
    config: &InstrumentConfig,
    env: &EnvironmentState,
) -> Result<f64> {
    model.validate()?;
    check_inputs(config, env)?;
    let b1 = env.bias_field_half1 + env.stray_field;
    let b2 = env.bias_field_half2 + env.stray_field;
    let base = 2.0
        * std::f64::consts::PI
        * model.quadratic_coefficient
        * (b2 * b2 - b1 * b1)
        * config.half_transit_time();
    let eps = model.reversal_imperfection;
    let parity = (1.0 - eps) + eps * config.area_sign.sign();
    Ok(config.beam_direction.sign() * parity * base)
}

/// Intensity-dependent phase, linear in the two fractional intensity
/// deviations. The coupling splits into an area-odd part `(1 − r)` and an
/// area-even part `r`, with `r` the reversal imbalance.
pub fn intensity_phase(
    model: &IntensityCouplingModel,
    env: &EnvironmentState,
    area: AreaSign,
    beam: super::BeamDirection,
) -> Result<f64> {
    model.validate()?;
    env.validate()?;
    let row = match area {
        AreaSign::Forward => &model.coefficients[0],
        AreaSign::Reversed => &model.coefficients[1],
    };
    let coupling = row[0] * env.intensity_deviation.x + row[1] * env.intensity_deviation.y;
    let r = model.reversal_imbalance;
    Ok(beam.sign() * (r + (1.0 - r) * area.sign()) * coupling)
}

/// Gravity and vertical-velocity shift from π/2 beams tilted by ±θ out of the
/// plane of the atomic beam and π beam:
///
/// `−s_area · s_beam · 2 k sinθ (a_z L² + v_z L v) / v²`
///
/// Survives both area reversal and beam subtraction. Only valid for
/// `|θ| < 0.1 rad`.
pub fn misalignment_phase(
    config: &InstrumentConfig,
    env: &EnvironmentState,
    consts: &PhysicalConstants,
) -> Result<f64> {
    check_inputs(config, env)?;
    let theta = config.vertical_misalignment;
    if theta.abs() >= MAX_MISALIGNMENT_RAD {
        return Err(Error::Domain(format!(
            "vertical misalignment {theta} rad outside small-angle range (|θ| < {MAX_MISALIGNMENT_RAD})"
        )));
    }
    let signs = config.area_sign.sign() * config.beam_direction.sign();
    let l = config.pulse_spacing;
    let v = config.atom_speed;
    let vertical = env.acceleration.z * l * l + config.transverse_velocity.y * l * v;
    Ok(-signs * 2.0 * consts.k_eff_magnitude * theta.sin() * vertical / (v * v))
}

pub fn total_phase(
    config: &InstrumentConfig,
    env: &EnvironmentState,
    models: &PhaseModels,
) -> Result<PhaseBudget> {
    models.validate()?;
    let consts = &models.constants;
    let mut budget = PhaseBudget {
        sagnac: sagnac_phase(config, env, consts)?,
        center_pulse_terms: center_pulse_phase(config, env, consts)?,
        acceleration: acceleration_phase(config, env, consts)?,
        zeeman: zeeman_phase(&models.zeeman, config, env)?,
        intensity: intensity_phase(
            &models.intensity,
            env,
            config.area_sign,
            config.beam_direction,
        )?,
        misalignment_gravity: misalignment_phase(config, env, consts)?,
        applied_bias: config.area_sign.sign()
            * config.beam_direction.sign()
            * env.applied_rotation_bias_phase,
        total: 0.0,
    };
    budget.total = budget.field_sum();
    Ok(budget)
}
