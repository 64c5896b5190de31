use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Hann,
}

impl Window {
    /// Periodic window coefficients of length `n`.
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
                .collect(),
        }
    }
}

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdResult {
    /// Hz, from 0 to Nyquist.
    pub frequencies: Vec<f64>,
    /// (input unit)²/Hz.
    pub psd: Vec<f64>,
    pub segment_length: usize,
    pub overlap: usize,
    pub segments: usize,
    pub window: Window,
}

/// Welch estimate: 50 %-overlapping segments, per-segment mean removal,
/// windowing and averaged one-sided periodograms normalized to density.
pub fn psd_welch(
    series: &[f64],
    sample_period: f64,
    segment_length: usize,
    window: Window,
) -> Result<PsdResult> {
    if !(sample_period.is_finite() && sample_period > 0.0) {
        return Err(Error::Config(format!(
            "sample period must be positive, got {sample_period}"
        )));
    }
    if segment_length < 2 {
        return Err(Error::Config(format!(
            "segment length must be at least 2, got {segment_length}"
        )));
    }
    if segment_length > series.len() {
        return Err(Error::Config(format!(
            "segment length {segment_length} exceeds series length {}",
            series.len()
        )));
    }

    let fs = 1.0 / sample_period;
    let w = window.coefficients(segment_length);
    let w_energy: f64 = w.iter().map(|c| c * c).sum();
    let step = segment_length - segment_length / 2;
    let segments = (series.len() - segment_length) / step + 1;
    let bins = segment_length / 2 + 1;

    let fft = FftPlanner::new().plan_fft_forward(segment_length);
    let mut buf = vec![Complex::new(0.0, 0.0); segment_length];
    let mut acc = vec![0.0; bins];
    for s in 0..segments {
        let seg = &series[s * step..s * step + segment_length];
        let mean = seg.iter().sum::<f64>() / segment_length as f64;
        for ((b, x), c) in buf.iter_mut().zip(seg).zip(&w) {
            *b = Complex::new((x - mean) * c, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }

    let nyquist_bin = segment_length.is_multiple_of(2).then_some(bins - 1);
    let psd = acc
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let one_sided = if k == 0 || Some(k) == nyquist_bin { 1.0 } else { 2.0 };
            one_sided * p / (segments as f64 * fs * w_energy)
        })
        .collect();
    let frequencies = (0..bins)
        .map(|k| k as f64 * fs / segment_length as f64)
        .collect();

    Ok(PsdResult {
        frequencies,
        psd,
        segment_length,
        overlap: segment_length - step,
        segments,
        window,
    })
}

/// Angle random walk from the white floor of a rotation-rate PSD in
/// (rad/s)²/Hz, returned in deg/√hr.
///
/// Uses the median PSD over the band so narrowband lines do not bias the
/// floor: `ARW = sqrt(median / 2)` in rad/√s.
pub fn arw_from_psd(psd: &PsdResult, band: (f64, f64)) -> Result<f64> {
    let (lo, hi) = band;
    let f_max = psd.frequencies.last().copied().unwrap_or(0.0);
    if !(lo >= 0.0 && hi > lo && hi <= f_max * (1.0 + 1e-12)) {
        return Err(Error::Config(format!(
            "ARW band [{lo}, {hi}] Hz must be non-empty and inside [0, {f_max}] Hz"
        )));
    }
    let mut values: Vec<f64> = psd
        .frequencies
        .iter()
        .zip(&psd.psd)
        .filter(|(f, _)| **f >= lo && **f <= hi)
        .map(|(_, p)| *p)
        .collect();
    if values.is_empty() {
        return Err(Error::Config(format!("no PSD bins in band [{lo}, {hi}] Hz")));
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    Ok(units::rad_per_sqrt_s_to_deg_per_sqrt_hr((median / 2.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn white(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn zero_series_zero_psd() {
        let r = psd_welch(&[0.0; 300], 0.1, 64, Window::Hann).unwrap();
        assert!(r.psd.iter().all(|&p| p == 0.0));
        assert_eq!(r.frequencies.len(), 33);
        assert_relative_eq!(*r.frequencies.last().unwrap(), 5.0);
    }

    #[test]
    fn white_noise_level_and_parseval() {
        let y = white(200_000, 1);
        let r = psd_welch(&y, 1.0, 256, Window::Hann).unwrap();
        let interior = &r.psd[1..r.psd.len() - 1];
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        assert!((mean / 2.0 - 1.0).abs() < 0.02, "{mean}");

        let df = r.frequencies[1];
        let power: f64 = r.psd.iter().sum::<f64>() * df;
        let var = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        assert!((power / var - 1.0).abs() < 0.05, "{power} vs {var}");
    }

    #[test]
    fn sinusoid_peak() {
        let fs = 50.0;
        let f0 = 6.25;
        let y: Vec<f64> = (0..4096)
            .map(|i| (2.0 * PI * f0 * i as f64 / fs).sin())
            .collect();
        let r = psd_welch(&y, 1.0 / fs, 512, Window::Hann).unwrap();
        let (k, _) = r
            .psd
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_relative_eq!(r.frequencies[k], f0, max_relative = 1e-12);
    }

    #[test]
    fn segment_longer_than_series() {
        assert!(matches!(
            psd_welch(&[1.0; 10], 1.0, 11, Window::Hann),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn flat_psd_arw_definition() {
        let s0 = 4e-14;
        let flat = PsdResult {
            frequencies: (0..=50).map(|k| k as f64 * 0.2).collect(),
            psd: vec![s0; 51],
            segment_length: 100,
            overlap: 50,
            segments: 1,
            window: Window::Hann,
        };
        let arw = arw_from_psd(&flat, (2.0, 7.0)).unwrap();
        assert_relative_eq!(
            arw,
            units::rad_per_sqrt_s_to_deg_per_sqrt_hr((s0 / 2.0).sqrt()),
            max_relative = 1e-14
        );
        assert!(matches!(arw_from_psd(&flat, (7.0, 2.0)), Err(Error::Config(_))));
        assert!(matches!(arw_from_psd(&flat, (2.0, 20.0)), Err(Error::Config(_))));
        assert!(matches!(arw_from_psd(&flat, (2.05, 2.15)), Err(Error::Config(_))));
    }

    #[test]
    fn narrowband_spur_does_not_move_median() {
        let fs = 20.0;
        let y = white(72_000, 9);
        let spur: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(i, v)| v + 3.0 * (2.0 * PI * 4.0 * i as f64 / fs).sin())
            .collect();
        let clean = psd_welch(&y, 1.0 / fs, 256, Window::Hann).unwrap();
        let dirty = psd_welch(&spur, 1.0 / fs, 256, Window::Hann).unwrap();
        let a = arw_from_psd(&clean, (2.0, 7.0)).unwrap();
        let b = arw_from_psd(&dirty, (2.0, 7.0)).unwrap();
        assert!((b / a - 1.0).abs() < 0.10, "{a} vs {b}");
        // The spur itself is large.
        let peak = dirty.psd.iter().cloned().fold(0.0, f64::max);
        assert!(peak > 100.0 * clean.psd[50]);
    }
}
