use crate::error::{Error, Result};

fn check_aligned(what: &'static str, a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape {
            what,
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Splits forward/reversed-area phases into the area-odd (rotation-like)
/// half-difference and the area-even (bias-like) mean.
pub fn combine_area(forward: &[f64], reversed: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_aligned("forward vs reversed area series", forward, reversed)?;
    Ok(forward
        .iter()
        .zip(reversed)
        .map(|(f, r)| ((f - r) / 2.0, (f + r) / 2.0))
        .unzip())
}

/// Half-difference of the two counter-propagating beams' rotation-like
/// series. Beam-even content (linear acceleration) cancels.
pub fn combine_beams(beam_plus: &[f64], beam_minus: &[f64]) -> Result<Vec<f64>> {
    check_aligned("beam series", beam_plus, beam_minus)?;
    Ok(beam_plus
        .iter()
        .zip(beam_minus)
        .map(|(a, b)| (a - b) / 2.0)
        .collect())
}
