use std::f64::consts::TAU;

use crate::error::{Error, Result};

fn check_fringe(contrast: f64, offset: f64) -> Result<()> {
    if !(contrast > 0.0 && contrast <= 1.0) {
        return Err(Error::Domain(format!("contrast must lie in (0, 1], got {contrast}")));
    }
    let half = contrast / 2.0;
    if !(offset >= half && offset <= 1.0 - half) {
        return Err(Error::Domain(format!(
            "offset {offset} must lie in [{half}, {}] for contrast {contrast}",
            1.0 - half
        )));
    }
    Ok(())
}

/// Upper-state population after the final beamsplitter,
/// `offset − (contrast / 2) cos(phase)`.
pub fn detection_signal(phase: f64, contrast: f64, offset: f64) -> Result<f64> {
    check_fringe(contrast, offset)?;
    if !phase.is_finite() {
        return Err(Error::Domain(format!("phase must be finite, got {phase}")));
    }
    Ok(offset - 0.5 * contrast * phase.cos())
}

/// Inverts [`detection_signal`], returning the solution of
/// `cos(phase) = 2 (offset − P) / contrast` closest to `branch_hint`.
/// A hint of π/2 selects the principal `(0, π)` branch.
pub fn phase_from_signal(population: f64, contrast: f64, offset: f64, branch_hint: f64) -> Result<f64> {
    check_fringe(contrast, offset)?;
    let argument = 2.0 * (offset - population) / contrast;
    if !(-1.0..=1.0).contains(&argument) {
        return Err(Error::Saturation { argument });
    }
    let base = argument.acos();
    let turns = ((branch_hint - base) / TAU).round();
    let up = base + TAU * turns;
    let turns_neg = ((branch_hint + base) / TAU).round();
    let down = -base + TAU * turns_neg;
    Ok(if (up - branch_hint).abs() <= (down - branch_hint).abs() {
        up
    } else {
        down
    })
}
