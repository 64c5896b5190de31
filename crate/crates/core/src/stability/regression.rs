use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pearson correlation of one auxiliary channel with a target series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelCorrelation {
    pub name: String,
    pub r: f64,
    /// The channel is constant; `r` is reported as 0.
    pub zero_variance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub channels: Vec<String>,
    /// rad per channel unit, one per channel.
    pub coefficients: Vec<f64>,
    /// Ordinary-least-squares standard errors of the coefficients.
    pub standard_errors: Vec<f64>,
    pub intercept: f64,
    pub residual_rms: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_aligned(target: &[f64], aux: &[(&str, &[f64])]) -> Result<()> {
    for (_, series) in aux {
        if series.len() != target.len() {
            return Err(Error::Shape {
                what: "auxiliary channel vs target",
                left: series.len(),
                right: target.len(),
            });
        }
    }
    Ok(())
}

/// Orders channels by |Pearson r| with `target`, descending; ties by name.
pub fn rank_channels(target: &[f64], aux: &[(&str, &[f64])]) -> Result<Vec<ChannelCorrelation>> {
    check_aligned(target, aux)?;
    if target.len() < 2 {
        return Err(Error::Config("correlation needs at least two samples".into()));
    }
    let ty = mean(target);
    let yc: Vec<f64> = target.iter().map(|v| v - ty).collect();
    let syy = dot(&yc, &yc);

    let mut out: Vec<ChannelCorrelation> = aux
        .iter()
        .map(|(name, x)| {
            let tx = mean(x);
            let xc: Vec<f64> = x.iter().map(|v| v - tx).collect();
            let sxx = dot(&xc, &xc);
            let zero_variance = sxx == 0.0;
            let r = if zero_variance || syy == 0.0 {
                0.0
            } else {
                dot(&xc, &yc) / (sxx * syy).sqrt()
            };
            ChannelCorrelation {
                name: name.to_string(),
                r,
                zero_variance,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.r.abs()
            .total_cmp(&a.r.abs())
            .then_with(|| a.name.cmp(&b.name))
    });
    Ok(out)
}

/// Relative residual norm below which a column counts as collinear.
const COLLINEAR_TOL: f64 = 1e-10;

/// Ordinary least squares of `target` on the auxiliary channels plus an
/// intercept. Returns the fitted model and `target − prediction`.
///
/// Columns are mean-centered (absorbing the intercept) and orthogonalized by
/// modified Gram–Schmidt with one re-orthogonalization pass.
pub fn detrend_regression(
    target: &[f64],
    aux: &[(&str, &[f64])],
) -> Result<(RegressionModel, Vec<f64>)> {
    check_aligned(target, aux)?;
    if aux.is_empty() {
        return Err(Error::Config("regression needs at least one channel".into()));
    }
    let n = target.len();
    let p = aux.len();
    if n <= p + 1 {
        return Err(Error::Config(format!(
            "regression on {p} channels needs more than {} samples, got {n}",
            p + 1
        )));
    }
    if target.iter().chain(aux.iter().flat_map(|(_, s)| s.iter())).any(|v| !v.is_finite()) {
        return Err(Error::Domain("regression inputs contain non-finite values".into()));
    }

    let means: Vec<f64> = aux.iter().map(|(_, x)| mean(x)).collect();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut r = vec![vec![0.0; p]; p];

    for (j, (name, x)) in aux.iter().enumerate() {
        let mut v: Vec<f64> = x.iter().map(|a| a - means[j]).collect();
        let norm0 = dot(&v, &v).sqrt();
        if norm0 == 0.0 {
            return Err(Error::RankDeficient {
                channel: name.to_string(),
                with: vec!["intercept".into()],
            });
        }
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let proj = dot(qi, &v);
                r[i][j] += proj;
                v.iter_mut().zip(qi).for_each(|(a, b)| *a -= proj * b);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= COLLINEAR_TOL * norm0 {
            // Express the column through the earlier ones to name the partners.
            let rel = back_substitute(&r, j, |i| r[i][j]);
            let with = rel
                .iter()
                .enumerate()
                .filter(|(i, c)| c.abs() * r[*i][*i] > 1e-8 * norm0)
                .map(|(i, _)| aux[i].0.to_string())
                .collect();
            return Err(Error::RankDeficient {
                channel: name.to_string(),
                with,
            });
        }
        r[j][j] = norm;
        v.iter_mut().for_each(|a| *a /= norm);
        q.push(v);
    }

    let ty = mean(target);
    let mut y: Vec<f64> = target.iter().map(|v| v - ty).collect();
    let mut qty = vec![0.0; p];
    for (i, qi) in q.iter().enumerate() {
        let proj = dot(qi, &y);
        qty[i] = proj;
        y.iter_mut().zip(qi).for_each(|(a, b)| *a -= proj * b);
    }
    let coefficients = back_substitute(&r, p, |i| qty[i]);
    let intercept = ty - coefficients.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();

    let residual: Vec<f64> = (0..n)
        .map(|t| {
            let pred: f64 = aux.iter().zip(&coefficients).map(|((_, x), b)| b * x[t]).sum();
            target[t] - intercept - pred
        })
        .collect();
    let rss = dot(&residual, &residual);
    let residual_rms = (rss / n as f64).sqrt();

    // Cov(b) = s² (RᵀR)⁻¹ = s² R⁻¹ R⁻ᵀ.
    let s2 = rss / (n - p - 1) as f64;
    let r_inv: Vec<Vec<f64>> = (0..p)
        .map(|col| back_substitute(&r, p, |i| if i == col { 1.0 } else { 0.0 }))
        .collect();
    let standard_errors = (0..p)
        .map(|j| (s2 * r_inv.iter().map(|c| c[j] * c[j]).sum::<f64>()).sqrt())
        .collect();

    Ok((
        RegressionModel {
            channels: aux.iter().map(|(name, _)| name.to_string()).collect(),
            coefficients,
            standard_errors,
            intercept,
            residual_rms,
        },
        residual,
    ))
}

/// Solves the leading `size × size` upper-triangular block of `r` against `rhs`.
fn back_substitute(r: &[Vec<f64>], size: usize, rhs: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut x = vec![0.0; size];
    for i in (0..size).rev() {
        let tail: f64 = (i + 1..size).map(|k| r[i][k] * x[k]).sum();
        x[i] = (rhs(i) - tail) / r[i][i];
    }
    x
}
