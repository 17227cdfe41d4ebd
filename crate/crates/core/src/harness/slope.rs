//! Least-squares power-law fits in log-log space.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which abscissae enter a fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Window {
    All,
    /// `x ≥ value`.
    From(f64),
    /// `x ≥ value · max x`.
    TailFraction(f64),
}

impl Window {
    fn lower(self, max_x: f64) -> f64 {
        match self {
            Window::All => f64::NEG_INFINITY,
            Window::From(v) => v,
            Window::TailFraction(f) => f * max_x,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Points used, after windowing and dropping non-positive values.
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `log y`.
    pub residual: f64,
    pub window: Window,
    /// Points inside the window dropped for `x ≤ 0` or `y ≤ 0`.
    pub dropped: usize,
    /// The data look like geometric decay: `log y` is fit better by a line
    /// in `x` than in `log x`.
    pub super_polynomial: bool,
}

/// Ordinary least squares `(slope, intercept, rms residual)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

/// Fits `log y = slope · log x + intercept` over the window. Needs at least
/// two usable points with distinct abscissae.
pub fn fit_loglog(points: &[(f64, f64)], window: Window) -> Result<SlopeFit> {
    let max_x = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let lo = window.lower(max_x);
    let inside: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 >= lo).collect();
    let usable: Vec<(f64, f64)> = inside.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0).collect();
    let dropped = inside.len() - usable.len();
    let distinct = usable.iter().any(|p| p.0 != usable[0].0);
    if usable.len() < 2 || !distinct {
        return Err(Error::Config(format!(
            "a slope fit needs two positive points with distinct abscissae, have {}",
            usable.len()
        )));
    }
    let xs: Vec<f64> = usable.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.1).collect();
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let (slope, intercept, residual) = least_squares(&lx, &ly);
    let super_polynomial = xs.len() >= 3 && slope < 0.0 && {
        let (_, _, semilog) = least_squares(&xs, &ly);
        semilog < residual
    };
    Ok(SlopeFit {
        xs,
        ys,
        slope,
        intercept,
        residual,
        window,
        dropped,
        super_polynomial,
    })
}
