//! Rough classification of measured growth curves.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 5;
/// Largest allowed gap between the first-half and second-half log-log slopes.
pub const SLOPE_WINDOW: f64 = 0.5;
const PLATEAU: f64 = 1.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    Polynomial { degree: f64 },
    AtLeastExponential { rate: f64 },
    Inconclusive,
}

impl Growth {
    pub fn label(&self) -> &'static str {
        match self {
            Growth::Bounded => "bounded",
            Growth::Polynomial { .. } => "polynomial",
            Growth::AtLeastExponential { .. } => "at_least_exponential",
            Growth::Inconclusive => "inconclusive",
        }
    }
}

/// Least squares fit `y = a + b x`; returns `(b, residual sum of squares)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let rss = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    (b, rss)
}

/// Classifies samples `(n, value)` with `n > 0` and `value > 0`; other
/// points are ignored.
pub fn classify_growth(samples: &[(f64, f64)]) -> Result<Growth> {
    let pts: Vec<(f64, f64)> = samples.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0 && y.is_finite()).collect();
    if pts.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples { got: pts.len(), need: MIN_SAMPLES });
    }
    let tail = &pts[pts.len() / 2..];
    let hi = tail.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let lo = tail.iter().map(|p| p.1).fold(f64::MAX, f64::min);
    if hi / lo <= PLATEAU {
        return Ok(Growth::Bounded);
    }
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope_ll, rss_ll) = linear_fit(&lx, &ly);
    let (slope_sl, rss_sl) = linear_fit(&x, &ly);
    if rss_ll <= rss_sl {
        let h = pts.len() / 2;
        let (s1, _) = linear_fit(&lx[..=h], &ly[..=h]);
        let (s2, _) = linear_fit(&lx[h..], &ly[h..]);
        if (s1 - s2).abs() <= SLOPE_WINDOW && slope_ll > 0.0 {
            return Ok(Growth::Polynomial { degree: slope_ll });
        }
    } else if slope_sl > 0.0 {
        return Ok(Growth::AtLeastExponential { rate: slope_sl.exp() });
    }
    Ok(Growth::Inconclusive)
}
