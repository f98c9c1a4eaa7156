//! Log-log slope fits.

use crate::error::{Error, Result};

/// Values at or below this are excluded from a fit.
pub const FLOOR: f64 = 1e-300;
pub const MIN_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// Fitted exponent, negative for decay.
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub residual_rms: f64,
    pub n_points: usize,
    /// In-window samples dropped by the floor.
    pub excluded: usize,
}

/// Least-squares line through `(ln t, ln y)` for `t` in `window`.
pub fn fit_rate(t: &[f64], y: &[f64], window: (f64, f64)) -> Result<RateFit> {
    assert_eq!(t.len(), y.len(), "series lengths differ");
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Fit(format!("empty window [{lo}, {hi}]")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0;
    for (&ti, &yi) in t.iter().zip(y) {
        if ti < lo || ti > hi {
            continue;
        }
        if yi > FLOOR && yi.is_finite() {
            xs.push(ti.ln());
            ys.push(yi.ln());
        } else {
            excluded += 1;
        }
    }
    let n = xs.len();
    if n < MIN_POINTS {
        return Err(Error::Fit(format!(
            "{n} usable points in [{lo}, {hi}] ({excluded} excluded), need {MIN_POINTS}"
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        window,
        residual_rms: (rss / nf).sqrt(),
        n_points: n,
        excluded,
    })
}
