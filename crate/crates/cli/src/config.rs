//! Run configuration.
//!
//! The TOML document mirrors the simulator's types field for field, in SI
//! units, and is layered over their defaults, so any subset of keys may be
//! given. Keys that do not exist are rejected with their dotted path.
//!
//! ```toml
//! seed = 7
//!
//! [schedule]
//! chop_period = 20.0
//!
//! [[aux]]
//! name = "temp"
//! coupling = 0.02
//! couples_to = "both_areas_odd"
//! process.random_walk.step_sigma = 0.005
//!
//! [sweep]
//! field_ratio = 1.005
//! ```

use std::path::Path;

use sagnac_core::simulator::SimulationSpec;
use toml::{Table, Value};

use crate::CliError;

/// Half-to-half field ratio used by bias-field sweeps unless configured.
pub const DEFAULT_FIELD_RATIO: f64 = 1.005;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub spec: SimulationSpec,
    /// Second-half to first-half bias field ratio for sweeps.
    pub field_ratio: f64,
}

fn merge(base: &mut Table, overlay: Table, path: &str) -> Result<(), CliError> {
    for (key, value) in overlay {
        let full = if path.is_empty() {
            key.clone()
        } else {
            format!("{path}.{key}")
        };
        match (base.get_mut(&key), value) {
            (None, _) => return Err(CliError::config(format!("unknown key `{full}`"))),
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o, &full)?,
            (Some(Value::Table(_)), _) => {
                return Err(CliError::config(format!("`{full}` must be a table")))
            }
            (Some(slot), v) => *slot = v,
        }
    }
    Ok(())
}

fn take_seed(doc: &mut Table) -> Result<u64, CliError> {
    match doc.remove("seed") {
        None => Ok(0),
        Some(Value::Integer(n)) if n >= 0 => Ok(n as u64),
        Some(other) => Err(CliError::config(format!(
            "`seed` must be a non-negative integer, got {other}"
        ))),
    }
}

fn take_field_ratio(doc: &mut Table) -> Result<f64, CliError> {
    let Some(section) = doc.remove("sweep") else {
        return Ok(DEFAULT_FIELD_RATIO);
    };
    let Value::Table(mut section) = section else {
        return Err(CliError::config("`sweep` must be a table"));
    };
    let ratio = match section.remove("field_ratio") {
        None => DEFAULT_FIELD_RATIO,
        Some(Value::Float(v)) => v,
        Some(Value::Integer(v)) => v as f64,
        Some(other) => {
            return Err(CliError::config(format!(
                "`sweep.field_ratio` must be a number, got {other}"
            )))
        }
    };
    if let Some(key) = section.keys().next() {
        return Err(CliError::config(format!("unknown key `sweep.{key}`")));
    }
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(CliError::config(format!("`sweep.field_ratio` must be positive, got {ratio}")));
    }
    Ok(ratio)
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let mut doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::config(format!("invalid TOML: {e}")))?;
    let seed = take_seed(&mut doc)?;
    let field_ratio = take_field_ratio(&mut doc)?;

    let defaults = SimulationSpec::default();
    let mut base = Table::try_from(&defaults).map_err(|e| CliError::config(e.to_string()))?;
    // Aux channels have no defaults to merge into; they are taken as given.
    let aux = doc.remove("aux");
    merge(&mut base, doc, "")?;
    if let Some(aux) = aux {
        base.insert("aux".into(), aux);
    }

    let spec: SimulationSpec = Value::Table(base)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::config(format!("invalid configuration: {e}")))?;
    spec.validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    Ok(RunConfig {
        seed,
        spec,
        field_ratio,
    })
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sagnac_core::simulator::{AuxProcess, BeamMode, Coupling};

    #[test]
    fn empty_config_is_default() {
        let c = parse("").unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.spec, SimulationSpec::default());
        assert_eq!(c.field_ratio, DEFAULT_FIELD_RATIO);
    }

    #[test]
    fn partial_override() {
        let c = parse(
            r#"
seed = 12
[schedule]
chop_period = 10.0
beams = "single"
[environment]
rotation_rate = [0.0, 0.0, 7.2921e-5]
[[aux]]
name = "temp"
coupling = 0.02
couples_to = "both_areas_odd"
process.random_walk.step_sigma = 0.005
[sweep]
field_ratio = 1.01
"#,
        )
        .unwrap();
        assert_eq!(c.seed, 12);
        assert_eq!(c.spec.schedule.chop_period, 10.0);
        assert_eq!(c.spec.schedule.sample_period, 1.0);
        assert_eq!(c.spec.schedule.beams, BeamMode::Single);
        assert_eq!(c.spec.environment.rotation_rate.z, 7.2921e-5);
        assert_eq!(c.spec.aux[0].couples_to, Coupling::AreaOdd);
        assert_eq!(c.spec.aux[0].process, AuxProcess::RandomWalk { step_sigma: 0.005 });
        assert_eq!(c.field_ratio, 1.01);
    }

    #[test]
    fn unknown_keys_named() {
        let err = parse("[schedule]\nchop_periood = 3.0\n").unwrap_err();
        assert!(err.message.contains("schedule.chop_periood"), "{}", err.message);
        let err = parse("colour = 1\n").unwrap_err();
        assert!(err.message.contains("colour"));
        let err = parse("[sweep]\nratio = 2.0\n").unwrap_err();
        assert!(err.message.contains("sweep.ratio"));
        let err = parse(
            "[[aux]]\nname = \"t\"\ncoupling = 0.1\ncouples_to = \"both_areas_odd\"\nprocess.constant.value = 1.0\ngain = 3\n",
        )
        .unwrap_err();
        assert!(err.message.contains("gain"), "{}", err.message);
    }

    #[test]
    fn invariant_violations_named() {
        let err = parse("[schedule]\nchop_period = 1.5\n").unwrap_err();
        assert!(err.message.contains("schedule.chop_period"), "{}", err.message);
        let err = parse("[noise]\nwhite_phase_noise_sigma = -1.0\n").unwrap_err();
        assert!(err.message.contains("noise.white_phase_noise_sigma"));
        assert!(parse("seed = -3\n").is_err());
    }
}
