//! Synthetic multi-hour datasets from a chopped area-reversal schedule.
//!
//! Each chop cycle spends its first half in the forward area configuration
//! and its second half reversed. Both counter-propagating beams are sampled
//! at once. The environment, rotation noise and auxiliary processes evolve at
//! the sample period. One point per (beam, area) is recorded per cycle, the
//! mean over that half-cycle.
//!
//! Sign conventions for the injected terms, with `s` the area sign and `b`
//! the beam direction:
//!
//! | term                          | contribution          |
//! |-------------------------------|-----------------------|
//! | rotation noise (ARW, RRW)     | `s · b · SF · ω(t)`   |
//! | area-odd auxiliary channel    | `s · b · c · x(t)`    |
//! | area-even auxiliary channel   | `c · x(t)`            |
//! | startup transient             | `A e^(−t/τ)`          |
//! | white detection noise         | independent per point |
//!
//! so after [`Dataset::rotation_signal`] an area-odd channel appears as
//! `c · x`. Area-even terms drop out of it exactly with both beams; with a
//! single beam the forward and reversed half-cycles sample them at different
//! times and their rate of change leaks through.

mod dataset;

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{
    scale_factor, total_phase, AreaSign, BeamDirection, EnvironmentState, InstrumentConfig,
    PhaseModels,
};
use crate::units;

pub use dataset::{apply_rotation_bias, ChannelKey, Dataset, Truth};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AuxProcess {
    /// Brownian motion with `step_sigma` channel units per √s, starting at 0.
    RandomWalk { step_sigma: f64 },
    /// `amplitude · sin(2π t / period)`.
    Sinusoid { amplitude: f64, period: f64 },
    /// Stationary Ornstein–Uhlenbeck process with standard deviation `sigma`.
    OrnsteinUhlenbeck { sigma: f64, correlation_time: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    #[serde(rename = "both_areas_even")]
    AreaEven,
    #[serde(rename = "both_areas_odd")]
    AreaOdd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxChannelSpec {
    pub name: String,
    pub process: AuxProcess,
    /// rad per channel unit.
    pub coupling: f64,
    pub couples_to: Coupling,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StartupTransient {
    /// rad.
    pub amplitude: f64,
    /// s.
    pub decay_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation of the white noise on each recorded point, rad.
    pub white_phase_noise_sigma: f64,
    /// White rotation-rate noise, deg/√hr.
    pub rotation_noise_arw: f64,
    /// (deg/hr)/√hr.
    pub rate_random_walk: f64,
    pub startup_transient: StartupTransient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamMode {
    Single,
    Dual,
}

impl BeamMode {
    pub fn beams(self) -> &'static [BeamDirection] {
        match self {
            BeamMode::Single => &[BeamDirection::Plus],
            BeamMode::Dual => &BeamDirection::BOTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// s.
    pub sample_period: f64,
    /// One full forward + reversed cycle, s.
    pub chop_period: f64,
    /// s.
    pub duration: f64,
    pub beams: BeamMode,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            sample_period: 1.0,
            chop_period: 20.0,
            duration: 4.0 * 3600.0,
            beams: BeamMode::Dual,
        }
    }
}

impl Schedule {
    /// Validates the schedule and returns the number of samples per cycle.
    pub fn samples_per_cycle(&self) -> Result<usize> {
        let finite = [self.sample_period, self.chop_period, self.duration]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.sample_period <= 0.0 {
            return Err(Error::Config(format!(
                "schedule.sample_period must be positive and finite, got {}",
                self.sample_period
            )));
        }
        if self.chop_period < 2.0 * self.sample_period {
            return Err(Error::Config(format!(
                "schedule.chop_period {} must be at least twice the sample period {}",
                self.chop_period, self.sample_period
            )));
        }
        let n = (self.chop_period / self.sample_period).round();
        if (n * self.sample_period - self.chop_period).abs() > 1e-9 * self.chop_period
            || !(n as u64).is_multiple_of(2)
        {
            return Err(Error::Config(format!(
                "schedule.chop_period {} must span an even number of samples of {} s",
                self.chop_period, self.sample_period
            )));
        }
        if self.duration < self.chop_period {
            return Err(Error::Config(format!(
                "schedule.duration {} is shorter than one chop period {}",
                self.duration, self.chop_period
            )));
        }
        Ok(n as usize)
    }

    pub fn cycles(&self) -> usize {
        (self.duration / self.chop_period * (1.0 + 1e-12)).floor() as usize
    }
}

/// Everything needed to generate a dataset apart from the seed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimulationSpec {
    /// Area sign and beam direction here are ignored; the schedule sets them.
    pub instrument: InstrumentConfig,
    pub environment: EnvironmentState,
    pub models: PhaseModels,
    pub schedule: Schedule,
    pub noise: NoiseSpec,
    pub aux: Vec<AuxChannelSpec>,
}

fn valid_channel_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn non_negative(key: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{key} must be finite and non-negative, got {value}")))
    }
}

fn positive(key: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{key} must be finite and positive, got {value}")))
    }
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        let section = |name: &str, r: Result<()>| {
            r.map_err(|e| match e {
                Error::Domain(m) | Error::Config(m) => Error::Config(format!("{name}: {m}")),
                other => other,
            })
        };
        section("instrument", self.instrument.validate())?;
        section("environment", self.environment.validate())?;
        section("models", self.models.validate())?;
        self.schedule.samples_per_cycle()?;

        let n = &self.noise;
        non_negative("noise.white_phase_noise_sigma", n.white_phase_noise_sigma)?;
        non_negative("noise.rotation_noise_arw", n.rotation_noise_arw)?;
        non_negative("noise.rate_random_walk", n.rate_random_walk)?;
        non_negative("noise.startup_transient.amplitude", n.startup_transient.amplitude)?;
        if n.startup_transient.amplitude > 0.0 {
            positive("noise.startup_transient.decay_time", n.startup_transient.decay_time)?;
        }

        let mut names = BTreeSet::new();
        for (i, ch) in self.aux.iter().enumerate() {
            if !valid_channel_name(&ch.name) {
                return Err(Error::Config(format!(
                    "aux[{i}].name `{}` must be non-empty ASCII alphanumerics, '_', '-' or '.'",
                    ch.name
                )));
            }
            if !names.insert(ch.name.as_str()) {
                return Err(Error::Config(format!("aux[{i}].name `{}` is duplicated", ch.name)));
            }
            if !ch.coupling.is_finite() {
                return Err(Error::Config(format!("aux[{i}].coupling must be finite")));
            }
            let key = |field: &str| format!("aux[{i}].process.{field}");
            match ch.process {
                AuxProcess::RandomWalk { step_sigma } => positive(&key("step_sigma"), step_sigma)?,
                AuxProcess::Sinusoid { amplitude, period } => {
                    positive(&key("amplitude"), amplitude)?;
                    positive(&key("period"), period)?;
                }
                AuxProcess::OrnsteinUhlenbeck {
                    sigma,
                    correlation_time,
                } => {
                    positive(&key("sigma"), sigma)?;
                    positive(&key("correlation_time"), correlation_time)?;
                }
                AuxProcess::Constant { value } => {
                    if !value.is_finite() {
                        return Err(Error::Config(format!("{} must be finite", key("value"))));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Evolving state of one auxiliary channel.
struct AuxState {
    process: AuxProcess,
    value: f64,
}

impl AuxState {
    fn new(process: AuxProcess, rng: &mut ChaCha8Rng) -> Self {
        let value = match process {
            AuxProcess::OrnsteinUhlenbeck { sigma, .. } => sigma * normal(rng),
            AuxProcess::Constant { value } => value,
            AuxProcess::RandomWalk { .. } | AuxProcess::Sinusoid { .. } => 0.0,
        };
        Self { process, value }
    }

    fn value_at(&self, t: f64) -> f64 {
        match self.process {
            AuxProcess::Sinusoid { amplitude, period } => {
                amplitude * (std::f64::consts::TAU * t / period).sin()
            }
            _ => self.value,
        }
    }

    fn step(&mut self, dt: f64, rng: &mut ChaCha8Rng) {
        match self.process {
            AuxProcess::RandomWalk { step_sigma } => self.value += step_sigma * dt.sqrt() * normal(rng),
            AuxProcess::OrnsteinUhlenbeck {
                sigma,
                correlation_time,
            } => {
                let decay = (-dt / correlation_time).exp();
                self.value = self.value * decay + sigma * (1.0 - decay * decay).sqrt() * normal(rng);
            }
            AuxProcess::Sinusoid { .. } | AuxProcess::Constant { .. } => {}
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Generates a dataset. Identical `spec` and `seed` give bit-identical output.
pub fn simulate(spec: &SimulationSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let schedule = &spec.schedule;
    let per_cycle = schedule.samples_per_cycle()?;
    let half = per_cycle / 2;
    let cycles = schedule.cycles();
    let dt = schedule.sample_period;

    let keys: Vec<ChannelKey> = schedule
        .beams
        .beams()
        .iter()
        .flat_map(|&beam| AreaSign::BOTH.map(|area| ChannelKey { beam, area }))
        .collect();
    let static_phase = keys
        .iter()
        .map(|k| {
            let cfg = spec.instrument.with_signs(k.area, k.beam);
            total_phase(&cfg, &spec.environment, &spec.models).map(|b| b.total)
        })
        .collect::<Result<Vec<f64>>>()?;

    let sf = scale_factor(&spec.instrument, &spec.models.constants);
    let arw_sigma = units::deg_per_sqrt_hr_to_rad_per_sqrt_s(spec.noise.rotation_noise_arw) / dt.sqrt();
    let rrw_step = units::rate_random_walk_to_si(spec.noise.rate_random_walk) * dt.sqrt();
    let white = spec.noise.white_phase_noise_sigma;
    let transient = spec.noise.startup_transient;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut aux: Vec<AuxState> = spec.aux.iter().map(|c| AuxState::new(c.process, &mut rng)).collect();
    let mut rate_walk = 0.0;

    let mut time = Vec::with_capacity(cycles);
    let mut phases = vec![Vec::with_capacity(cycles); keys.len()];
    let mut aux_out = vec![Vec::with_capacity(cycles); aux.len()];
    let mut aux_now = vec![0.0; aux.len()];

    for cycle in 0..cycles {
        let mut aux_sum = vec![0.0; aux.len()];
        for (h, area) in AreaSign::BOTH.into_iter().enumerate() {
            let s = area.sign();
            let mut sums = vec![0.0; keys.len()];
            for i in 0..half {
                let sample = cycle * per_cycle + h * half + i;
                let t = sample as f64 * dt;

                let arw = if arw_sigma > 0.0 { arw_sigma * normal(&mut rng) } else { 0.0 };
                let omega = arw + rate_walk;
                for (j, state) in aux.iter().enumerate() {
                    aux_now[j] = state.value_at(t);
                    aux_sum[j] += aux_now[j];
                }
                let drift_odd: f64 = spec
                    .aux
                    .iter()
                    .zip(&aux_now)
                    .filter(|(c, _)| c.couples_to == Coupling::AreaOdd)
                    .map(|(c, x)| c.coupling * x)
                    .sum();
                let drift_even: f64 = spec
                    .aux
                    .iter()
                    .zip(&aux_now)
                    .filter(|(c, _)| c.couples_to == Coupling::AreaEven)
                    .map(|(c, x)| c.coupling * x)
                    .sum();
                let startup = if transient.amplitude > 0.0 {
                    transient.amplitude * (-t / transient.decay_time).exp()
                } else {
                    0.0
                };

                for (k, key) in keys.iter().enumerate() {
                    if key.area != area {
                        continue;
                    }
                    let b = key.beam.sign();
                    sums[k] += static_phase[k]
                        + s * b * (sf * omega + drift_odd)
                        + drift_even
                        + startup;
                }

                if rrw_step > 0.0 {
                    rate_walk += rrw_step * normal(&mut rng);
                }
                for state in aux.iter_mut() {
                    state.step(dt, &mut rng);
                }
            }
            for (k, key) in keys.iter().enumerate() {
                if key.area != area {
                    continue;
                }
                let noise = if white > 0.0 { white * normal(&mut rng) } else { 0.0 };
                phases[k].push(sums[k] / half as f64 + noise);
            }
        }
        time.push((cycle as f64 + 0.5) * schedule.chop_period);
        for (out, sum) in aux_out.iter_mut().zip(&aux_sum) {
            out.push(sum / per_cycle as f64);
        }
    }

    Ok(Dataset {
        time,
        phases: keys.into_iter().zip(phases).collect(),
        aux: spec
            .aux
            .iter()
            .map(|c| c.name.clone())
            .zip(aux_out)
            .collect(),
        truth: Truth {
            seed,
            applied_rotation_bias: 0.0,
            spec: spec.clone(),
        },
    })
}
