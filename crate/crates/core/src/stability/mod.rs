//! Analysis pipeline for chopped, dual-beam gyroscope data.

mod allan;
mod combine;
mod psd;
mod regression;

pub use allan::{
    allan_deviation, bias_stability, default_fit_window, log_spaced_taus, loglog_slope,
    AllanResult, BiasStability, BiasStabilityMethod, OmittedTau,
};
pub use combine::{combine_area, combine_beams};
pub use psd::{arw_from_psd, psd_welch, PsdResult, Window};
pub use regression::{detrend_regression, rank_channels, ChannelCorrelation, RegressionModel};

use crate::error::{Error, Result};
use crate::units;

/// Converts an interferometer phase to a rotation rate in deg/hr using a
/// scale factor in rad per rad/s.
pub fn phase_to_rate(phase: f64, scale_factor: f64) -> Result<f64> {
    if !(scale_factor.is_finite() && scale_factor > 0.0) {
        return Err(Error::Domain(format!(
            "scale factor must be positive, got {scale_factor}"
        )));
    }
    Ok(units::rad_per_s_to_deg_per_hr(phase / scale_factor))
}
