//! Simulator of an area-reversible atom-interferometer Sagnac gyroscope and
//! the stability analysis used to characterize its long-term drift.
//!
//! * [`phase`]: closed-form interferometer phase, per mechanism.
//! * [`simulator`]: chopped area-reversal datasets with environmental drifts.
//! * [`stability`]: area/beam combination, Allan deviation, bias stability,
//!   Welch PSD, ARW and regression drift removal.
//! * [`io`]: text dataset and report formats.
//! * [`analysis`]: the full pipeline from a dataset to a report.
//! * [`sweep`]: noiseless bias-field and pulse-offset sweeps.

pub mod analysis;
pub mod error;
pub mod io;
pub mod phase;
pub mod simulator;
pub mod stability;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
