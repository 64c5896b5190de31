use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BeamMode, SimulationSpec};
use crate::error::{Error, Result};
use crate::phase::{AreaSign, BeamDirection};
use crate::stability::{combine_area, combine_beams};

/// Identifies one phase channel. Orders beam first, then area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelKey {
    pub beam: BeamDirection,
    pub area: AreaSign,
}

impl ChannelKey {
    /// Column name in the dataset file: `phase_b0_fwd_rad` etc., with `b0`
    /// the `+x` beam.
    pub fn column_name(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ChannelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let beam = match self.beam {
            BeamDirection::Plus => 0,
            BeamDirection::Minus => 1,
        };
        let area = match self.area {
            AreaSign::Forward => "fwd",
            AreaSign::Reversed => "rev",
        };
        write!(f, "phase_b{beam}_{area}_rad")
    }
}

impl FromStr for ChannelKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("`{s}` is not a phase column name"));
        let rest = s.strip_prefix("phase_b").ok_or_else(bad)?;
        let rest = rest.strip_suffix("_rad").ok_or_else(bad)?;
        let (beam, area) = rest.split_once('_').ok_or_else(bad)?;
        let beam = match beam {
            "0" => BeamDirection::Plus,
            "1" => BeamDirection::Minus,
            _ => return Err(bad()),
        };
        let area = match area {
            "fwd" => AreaSign::Forward,
            "rev" => AreaSign::Reversed,
            _ => return Err(bad()),
        };
        Ok(ChannelKey { beam, area })
    }
}

/// Exact record of the inputs that produced a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub seed: u64,
    /// Cumulative bias removed by [`apply_rotation_bias`], rad.
    pub applied_rotation_bias: f64,
    pub spec: SimulationSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Cycle centers, s.
    pub time: Vec<f64>,
    /// Half-cycle mean phase per channel, rad.
    pub phases: BTreeMap<ChannelKey, Vec<f64>>,
    /// Cycle-mean auxiliary channels, keyed by name.
    pub aux: BTreeMap<String, Vec<f64>>,
    pub truth: Truth,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn phase(&self, beam: BeamDirection, area: AreaSign) -> Option<&[f64]> {
        self.phases.get(&ChannelKey { beam, area }).map(Vec::as_slice)
    }

    /// Spacing of the time column, s.
    pub fn sample_period(&self) -> f64 {
        match self.time.as_slice() {
            [first, .., last] => (last - first) / (self.time.len() - 1) as f64,
            _ => self.truth.spec.schedule.chop_period,
        }
    }

    pub fn beams(&self) -> BeamMode {
        if self.phases.keys().any(|k| k.beam == BeamDirection::Minus) {
            BeamMode::Dual
        } else {
            BeamMode::Single
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.time.len();
        if n == 0 {
            return Err(Error::Format("dataset has no rows".into()));
        }
        if self.time.iter().any(|t| !t.is_finite()) {
            return Err(Error::Format("time column contains a non-finite value".into()));
        }
        if n > 1 {
            let dt = self.sample_period();
            if dt <= 0.0 {
                return Err(Error::Format("time column is not strictly increasing".into()));
            }
            for (i, w) in self.time.windows(2).enumerate() {
                let step = w[1] - w[0];
                if step <= 0.0 || (step - dt).abs() > 1e-9 * dt {
                    return Err(Error::Format(format!(
                        "time column is not uniform at row {}: step {step} vs {dt}",
                        i + 1
                    )));
                }
            }
        }

        let expected: Vec<ChannelKey> = self
            .truth
            .spec
            .schedule
            .beams
            .beams()
            .iter()
            .flat_map(|&beam| AreaSign::BOTH.map(|area| ChannelKey { beam, area }))
            .collect();
        let present: Vec<ChannelKey> = self.phases.keys().copied().collect();
        if present != expected {
            let names = |ks: &[ChannelKey]| ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", ");
            return Err(Error::Format(format!(
                "phase channels [{}] do not match the schedule, expected [{}]",
                names(&present),
                names(&expected)
            )));
        }

        let columns = self
            .phases
            .iter()
            .map(|(k, v)| (k.to_string(), v))
            .chain(self.aux.iter().map(|(k, v)| (format!("aux_{k}"), v)));
        for (name, values) in columns {
            if values.len() != n {
                return Err(Error::Shape {
                    what: "dataset column",
                    left: n,
                    right: values.len(),
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!("column {name} contains a non-finite value")));
            }
        }
        Ok(())
    }

    fn area_pair(&self, beam: BeamDirection) -> Result<(Vec<f64>, Vec<f64>)> {
        let get = |area| {
            self.phase(beam, area)
                .ok_or_else(|| Error::Format(format!("missing channel {}", ChannelKey { beam, area })))
        };
        combine_area(get(AreaSign::Forward)?, get(AreaSign::Reversed)?)
    }

    /// Area-odd, beam-odd part of the phase: `rotation_like` of each beam,
    /// then half-differenced across beams when both are present.
    pub fn rotation_signal(&self) -> Result<Vec<f64>> {
        let (plus, _) = self.area_pair(BeamDirection::Plus)?;
        match self.beams() {
            BeamMode::Single => Ok(plus),
            BeamMode::Dual => {
                let (minus, _) = self.area_pair(BeamDirection::Minus)?;
                combine_beams(&plus, &minus)
            }
        }
    }

    /// Area-even, beam-even part of the phase: `bias_like` of each beam,
    /// averaged across beams when both are present.
    pub fn bias_signal(&self) -> Result<Vec<f64>> {
        let (_, plus) = self.area_pair(BeamDirection::Plus)?;
        match self.beams() {
            BeamMode::Single => Ok(plus),
            BeamMode::Dual => {
                let (_, minus) = self.area_pair(BeamDirection::Minus)?;
                Ok(plus.iter().zip(&minus).map(|(a, b)| 0.5 * (a + b)).collect())
            }
        }
    }
}

/// Subtracts a known rotation-bias phase with the sign a rotation would
/// carry: `−bias` on the forward `+x` channel, `+bias` on reversed, and the
/// opposite on the `−x` beam.
pub fn apply_rotation_bias(dataset: &Dataset, bias: f64) -> Dataset {
    let mut out = dataset.clone();
    for (key, values) in out.phases.iter_mut() {
        let shift = key.area.sign() * key.beam.sign() * bias;
        for v in values.iter_mut() {
            *v -= shift;
        }
    }
    out.truth.applied_rotation_bias += bias;
    out
}
