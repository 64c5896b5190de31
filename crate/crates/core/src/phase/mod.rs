//! Closed-form phase model of a three-pulse (π/2–π–π/2) atom-beam Sagnac
//! interferometer with electro-optic area reversal and two counter-propagating
//! atomic beams.
//!
//! # Frame
//!
//! * `x`: atomic-beam axis. The beam selected by [`BeamDirection`] travels
//!   along `+x` or `-x`.
//! * `y`: horizontal Raman axis. The effective two-photon wave vector is
//!   `k_eff = area_sign · |k_eff| · ŷ`, so area reversal flips `k_eff` and every
//!   sign rule below follows from the formulas rather than being hand-coded.
//! * `z`: vertical, normal to the interferometer plane. `Ω_⊥ = Ω_z`.
//!
//! Every mechanism is returned separately in a [`PhaseBudget`] so the
//! cancellation properties of area reversal and beam subtraction can be
//! checked term by term.

mod detection;
mod mechanisms;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

pub use detection::{detection_signal, phase_from_signal};
pub use mechanisms::{
    acceleration_phase, center_pulse_phase, intensity_phase, misalignment_phase, sagnac_phase,
    scale_factor, total_phase, zeeman_phase,
};

/// Cesium D2 line wavelength used for the default `k_eff`.
pub const CESIUM_D2_WAVELENGTH_M: f64 = 852.347e-9;
/// 132.905451961 u.
pub const CESIUM_MASS_KG: f64 = 132.905_451_961 * 1.660_539_066_60e-27;
pub const HBAR_J_S: f64 = 1.054_571_817e-34;
pub const STANDARD_GRAVITY_M_S2: f64 = 9.806_65;
/// Clock-transition quadratic Zeeman coefficient of cesium (427.45 Hz/G²).
pub const CESIUM_CLOCK_ZEEMAN_HZ_PER_T2: f64 = 4.2745e10;
/// Small-angle validity limit of the misalignment model.
pub const MAX_MISALIGNMENT_RAD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum AreaSign {
    Forward,
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum BeamDirection {
    Plus,
    Minus,
}

macro_rules! impl_sign {
    ($ty:ident, $pos:ident, $neg:ident) => {
        impl $ty {
            pub const BOTH: [$ty; 2] = [$ty::$pos, $ty::$neg];

            pub fn sign(self) -> f64 {
                match self {
                    $ty::$pos => 1.0,
                    $ty::$neg => -1.0,
                }
            }

            pub fn flipped(self) -> Self {
                match self {
                    $ty::$pos => $ty::$neg,
                    $ty::$neg => $ty::$pos,
                }
            }
        }

        impl From<$ty> for i8 {
            fn from(s: $ty) -> i8 {
                match s {
                    $ty::$pos => 1,
                    $ty::$neg => -1,
                }
            }
        }

        impl TryFrom<i8> for $ty {
            type Error = String;

            fn try_from(v: i8) -> std::result::Result<Self, String> {
                match v {
                    1 => Ok($ty::$pos),
                    -1 => Ok($ty::$neg),
                    other => Err(format!("sign must be +1 or -1, got {other}")),
                }
            }
        }
    };
}

impl_sign!(AreaSign, Forward, Reversed);
impl_sign!(BeamDirection, Plus, Minus);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub atom_mass: f64,
    /// Two-photon effective wave number, rad/m.
    pub k_eff_magnitude: f64,
    /// Reference Earth rotation rate, rad/s.
    pub omega_earth: f64,
    pub g_magnitude: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: HBAR_J_S,
            atom_mass: CESIUM_MASS_KG,
            k_eff_magnitude: 4.0 * std::f64::consts::PI / CESIUM_D2_WAVELENGTH_M,
            omega_earth: units::deg_per_hr_to_rad_per_s(units::EARTH_RATE_DEG_PER_HR),
            g_magnitude: STANDARD_GRAVITY_M_S2,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hbar", self.hbar),
            ("atom_mass", self.atom_mass),
            ("k_eff_magnitude", self.k_eff_magnitude),
            ("omega_earth", self.omega_earth),
            ("g_magnitude", self.g_magnitude),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Domain(format!(
                    "constants.{name} must be finite and positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstrumentConfig {
    /// Distance between consecutive interaction regions, m.
    pub pulse_spacing: f64,
    /// Effective longitudinal atom speed, m/s.
    pub atom_speed: f64,
    /// (horizontal, vertical) atom velocity perpendicular to the beam axis, m/s.
    pub transverse_velocity: Vector2<f64>,
    /// Displacement Δ of the π pulse from the interferometer center, m.
    pub center_pulse_offset: f64,
    pub area_sign: AreaSign,
    pub beam_direction: BeamDirection,
    /// Tilt of the π/2 Raman beams out of the atomic-beam/π-beam plane, rad.
    pub vertical_misalignment: f64,
}

impl Default for InstrumentConfig {
    fn default() -> Self {
        Self {
            pulse_spacing: 0.968,
            atom_speed: 220.0,
            transverse_velocity: Vector2::zeros(),
            center_pulse_offset: 0.0,
            area_sign: AreaSign::Forward,
            beam_direction: BeamDirection::Plus,
            vertical_misalignment: 0.0,
        }
    }
}

impl InstrumentConfig {
    pub fn with_signs(mut self, area: AreaSign, beam: BeamDirection) -> Self {
        self.area_sign = area;
        self.beam_direction = beam;
        self
    }

    /// Time an atom spends between two consecutive pulses, L/v.
    pub fn half_transit_time(&self) -> f64 {
        self.pulse_spacing / self.atom_speed
    }

    /// Full atom velocity vector in the instrument frame.
    pub fn velocity(&self) -> Vector3<f64> {
        Vector3::new(
            self.beam_direction.sign() * self.atom_speed,
            self.transverse_velocity.x,
            self.transverse_velocity.y,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.pulse_spacing,
            self.atom_speed,
            self.transverse_velocity.x,
            self.transverse_velocity.y,
            self.center_pulse_offset,
            self.vertical_misalignment,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("instrument config has non-finite fields".into()));
        }
        if self.pulse_spacing <= 0.0 {
            return Err(Error::Domain(format!(
                "pulse_spacing must be positive, got {}",
                self.pulse_spacing
            )));
        }
        if self.atom_speed <= 0.0 {
            return Err(Error::Domain(format!(
                "atom_speed must be positive, got {}",
                self.atom_speed
            )));
        }
        if self.center_pulse_offset.abs() >= self.pulse_spacing {
            return Err(Error::Domain(format!(
                "|center_pulse_offset| {} must be below pulse_spacing {}",
                self.center_pulse_offset, self.pulse_spacing
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentState {
    /// Platform rotation, rad/s. The `z` component is the sensed signal.
    pub rotation_rate: Vector3<f64>,
    /// Gravity plus platform acceleration, m/s².
    pub acceleration: Vector3<f64>,
    /// Bias field in the first half of the interferometer, T.
    pub bias_field_half1: f64,
    pub bias_field_half2: f64,
    /// Uniform stray field added to both halves, T.
    pub stray_field: f64,
    /// Fractional deviation of the two Raman laser intensities from nominal.
    pub intensity_deviation: Vector2<f64>,
    /// Electro-optic rotation-bias phase, rad (applied with rotation parity).
    pub applied_rotation_bias_phase: f64,
}

impl Default for EnvironmentState {
    fn default() -> Self {
        Self {
            rotation_rate: Vector3::zeros(),
            acceleration: Vector3::new(0.0, 0.0, -STANDARD_GRAVITY_M_S2),
            bias_field_half1: 0.0,
            bias_field_half2: 0.0,
            stray_field: 0.0,
            intensity_deviation: Vector2::zeros(),
            applied_rotation_bias_phase: 0.0,
        }
    }
}

impl EnvironmentState {
    pub fn validate(&self) -> Result<()> {
        let finite = self.rotation_rate.iter().all(|v| v.is_finite())
            && self.acceleration.iter().all(|v| v.is_finite())
            && self.intensity_deviation.iter().all(|v| v.is_finite())
            && [
                self.bias_field_half1,
                self.bias_field_half2,
                self.stray_field,
                self.applied_rotation_bias_phase,
            ]
            .iter()
            .all(|v| v.is_finite());
        if finite {
            Ok(())
        } else {
            Err(Error::Domain("environment state has non-finite fields".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeemanModel {
    /// Clock-transition quadratic Zeeman coefficient, Hz/T².
    pub quadratic_coefficient: f64,
    /// Fraction of the Zeeman phase that follows the area sign instead of
    /// staying area-even. Zero for a perfect reversal.
    pub reversal_imperfection: f64,
}

impl Default for ZeemanModel {
    fn default() -> Self {
        Self {
            quadratic_coefficient: CESIUM_CLOCK_ZEEMAN_HZ_PER_T2,
            reversal_imperfection: 0.0,
        }
    }
}

impl ZeemanModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.quadratic_coefficient.is_finite() && self.quadratic_coefficient > 0.0) {
            return Err(Error::Domain(format!(
                "zeeman.quadratic_coefficient must be positive, got {}",
                self.quadratic_coefficient
            )));
        }
        if !(0.0..=1.0).contains(&self.reversal_imperfection) {
            return Err(Error::Domain(format!(
                "zeeman.reversal_imperfection must lie in [0, 1], got {}",
                self.reversal_imperfection
            )));
        }
        Ok(())
    }
}

/// Empirical linear coupling of Raman intensity drifts into phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityCouplingModel {
    /// rad per unit fractional deviation, indexed `[area][laser]` with area 0
    /// the forward configuration.
    pub coefficients: [[f64; 2]; 2],
    /// Fraction of the coupling that does not flip with the area sign.
    pub reversal_imbalance: f64,
}

impl Default for IntensityCouplingModel {
    fn default() -> Self {
        Self {
            coefficients: [[0.05, 0.05], [0.05, 0.05]],
            reversal_imbalance: 0.1,
        }
    }
}

impl IntensityCouplingModel {
    pub fn validate(&self) -> Result<()> {
        if !self.coefficients.iter().flatten().all(|c| c.is_finite()) {
            return Err(Error::Domain("intensity.coefficients must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.reversal_imbalance) {
            return Err(Error::Domain(format!(
                "intensity.reversal_imbalance must lie in [0, 1], got {}",
                self.reversal_imbalance
            )));
        }
        Ok(())
    }
}

/// The sub-models consumed by [`total_phase`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseModels {
    pub constants: PhysicalConstants,
    pub zeeman: ZeemanModel,
    pub intensity: IntensityCouplingModel,
}

impl PhaseModels {
    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.zeeman.validate()?;
        self.intensity.validate()
    }
}

/// Interferometer phase split by mechanism, all in rad.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseBudget {
    pub sagnac: f64,
    /// The four center-pulse-displacement terms: recoil, transverse velocity,
    /// rotation and acceleration.
    pub center_pulse_terms: [f64; 4],
    /// In-plane linear acceleration, `k_eff · a (L/v)²`.
    pub acceleration: f64,
    pub zeeman: f64,
    pub intensity: f64,
    pub misalignment_gravity: f64,
    pub applied_bias: f64,
    pub total: f64,
}

impl PhaseBudget {
    /// Sum of every mechanism field, in the order `total` is accumulated.
    pub fn field_sum(&self) -> f64 {
        self.sagnac
            + self.center_pulse_terms.iter().sum::<f64>()
            + self.acceleration
            + self.zeeman
            + self.intensity
            + self.misalignment_gravity
            + self.applied_bias
    }
}
