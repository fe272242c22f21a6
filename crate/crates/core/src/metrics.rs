//! Reconstruction quality and rate diagnostics.

use crate::error::{ensure_dim, Error, Result};
use crate::forward::residual_sqr;
use crate::model::Matrix;
use crate::scalar::Scalar;

/// `‖c − c_ref‖₂`
pub fn l2_error(c: &[f64], c_ref: &[f64]) -> Result<f64> {
    ensure_dim("image lengths", c_ref.len(), c.len())?;
    Ok(c.iter()
        .zip(c_ref)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// `‖Sc − u‖₂`
pub fn data_residual<T: Scalar>(s: &Matrix<T>, c: &[f64], u: &[T]) -> Result<f64> {
    ensure_dim("image length", s.cols(), c.len())?;
    ensure_dim("measurement length", s.rows(), u.len())?;
    Ok(residual_sqr(s, c, u).sqrt())
}

/// Parameters of the one-dimensional SSIM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimOptions {
    pub window_len: usize,
    pub k1: f64,
    pub k2: f64,
    /// `L`; `None` uses `max(c_ref) − min(c_ref)`.
    pub dynamic_range: Option<f64>,
}

impl Default for SsimOptions {
    fn default() -> Self {
        Self {
            window_len: 7,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: None,
        }
    }
}

/// Mean luminance and contrast-structure terms over all windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParts {
    pub ssim: f64,
    pub luminance: f64,
    pub contrast_structure: f64,
}

/// SSIM of two signals, averaged over every length-`window_len` window with
/// uniform weights (population moments):
///
/// ```text
/// SSIM = (2µxµy + C1)(2σxy + C2) / ((µx² + µy² + C1)(σx² + σy² + C2))
/// ```
///
/// with `C1 = (k1 L)²`, `C2 = (k2 L)²`.
pub fn ssim_1d(c: &[f64], c_ref: &[f64], opts: &SsimOptions) -> Result<f64> {
    Ok(ssim_parts(c, c_ref, opts)?.ssim)
}

pub fn ssim_parts(c: &[f64], c_ref: &[f64], opts: &SsimOptions) -> Result<SsimParts> {
    ensure_dim("image lengths", c_ref.len(), c.len())?;
    let w = opts.window_len;
    if w < 3 || w % 2 == 0 {
        return Err(Error::Invalid(format!(
            "SSIM window must be odd and >= 3, got {w}"
        )));
    }
    if c.len() < w {
        return Err(Error::Invalid(format!(
            "signal length {} shorter than the SSIM window {w}",
            c.len()
        )));
    }
    let range = match opts.dynamic_range {
        Some(r) => r,
        None => {
            let max = c_ref.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = c_ref.iter().copied().fold(f64::INFINITY, f64::min);
            max - min
        }
    };
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::ParameterDomain {
            name: "dynamic_range",
            value: range,
            domain: "> 0",
        });
    }
    let c1 = (opts.k1 * range).powi(2);
    let c2 = (opts.k2 * range).powi(2);

    let n = (c.len() - w + 1) as f64;
    let (mut ssim, mut lum, mut cs) = (0.0, 0.0, 0.0);
    for (x, y) in c.windows(w).zip(c_ref.windows(w)) {
        let inv = 1.0 / w as f64;
        let mx = x.iter().sum::<f64>() * inv;
        let my = y.iter().sum::<f64>() * inv;
        let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
        for (a, b) in x.iter().zip(y) {
            let (da, db) = (a - mx, b - my);
            vx += da * da;
            vy += db * db;
            cov += da * db;
        }
        let (vx, vy, cov) = (vx * inv, vy * inv, cov * inv);
        let l = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
        let s = (2.0 * cov + c2) / (vx + vy + c2);
        ssim += l * s;
        lum += l;
        cs += s;
    }
    Ok(SsimParts {
        ssim: ssim / n,
        luminance: lum / n,
        contrast_structure: cs / n,
    })
}

/// Least-squares slope of `log(discrepancy)` against `log(noise)`.
pub fn empirical_rate(levels: &[(f64, f64)]) -> Result<f64> {
    if levels.len() < 3 {
        return Err(Error::Invalid(format!(
            "rate fit needs at least 3 points, got {}",
            levels.len()
        )));
    }
    if let Some(&(n, d)) = levels
        .iter()
        .find(|&&(n, d)| !(n > 0.0 && d > 0.0 && n.is_finite() && d.is_finite()))
    {
        return Err(Error::Invalid(format!(
            "rate fit needs positive finite values, got ({n}, {d})"
        )));
    }
    let pts: Vec<(f64, f64)> = levels.iter().map(|&(n, d)| (n.ln(), d.ln())).collect();
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("rate fit needs distinct noise levels".into()));
    }
    Ok(sxy / sxx)
}
