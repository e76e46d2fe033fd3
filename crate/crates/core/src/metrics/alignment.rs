use serde::{Deserialize, Serialize};

use crate::error::{FontError, Result};

/// Pearson correlation between model weights and model accuracy. When either
/// input is constant the correlation is undefined: `correlation` is NaN and
/// `degenerate` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightAlignment {
    pub correlation: f64,
    pub degenerate: bool,
}

pub fn weight_alignment(weights: &[f64], per_model_ari: &[f64]) -> Result<WeightAlignment> {
    if weights.len() != per_model_ari.len() {
        return Err(FontError::LengthMismatch { a: weights.len(), b: per_model_ari.len() });
    }
    if weights.len() < 3 {
        return Err(FontError::TooFewModels { min: 3, got: weights.len() });
    }
    match pearson(weights, per_model_ari) {
        Some(r) => Ok(WeightAlignment { correlation: r, degenerate: false }),
        None => Ok(WeightAlignment { correlation: f64::NAN, degenerate: true }),
    }
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
