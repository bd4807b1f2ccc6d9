use super::{CausalConfig, CausalUnit};
use crate::error::{Error, Result};

/// Scores are clamped to `[SCORE_EPS, 1 - SCORE_EPS]` so they stay strictly inside (0, 1).
pub const SCORE_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let z = self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        sigmoid(z).clamp(SCORE_EPS, 1.0 - SCORE_EPS)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Batch gradient descent on mean log-loss plus `l2/2 * |w|^2` (bias unpenalized),
/// starting from zero weights.
pub fn fit_logistic(
    features: &[Vec<f64>],
    labels: &[bool],
    iters: usize,
    rate: f64,
    l2: f64,
) -> LogisticModel {
    let dim = features.first().map_or(0, Vec::len);
    let n = features.len() as f64;
    let mut model = LogisticModel {
        weights: vec![0.0; dim],
        bias: 0.0,
    };
    let mut grad = vec![0.0; dim];
    for _ in 0..iters {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (x, &y) in features.iter().zip(labels) {
            let z = model.bias + model.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            let err = sigmoid(z) - if y { 1.0 } else { 0.0 };
            grad_b += err;
            grad.iter_mut().zip(x).for_each(|(g, v)| *g += err * v);
        }
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= rate * (g / n + l2 * *w);
        }
        model.bias -= rate * grad_b / n;
    }
    model
}

/// P(treatment | covariates) for every unit, from a logistic model fit on the units.
pub fn propensity_scores(units: &[CausalUnit], cfg: &CausalConfig) -> Result<Vec<f64>> {
    if units.is_empty() {
        return Err(Error::EmptyInput("causal units"));
    }
    let treated = units.iter().filter(|u| u.treatment).count();
    if treated == 0 || treated == units.len() {
        return Err(Error::InsufficientSupport {
            treated,
            control: units.len() - treated,
            min: 1,
        });
    }
    let features: Vec<Vec<f64>> = units.iter().map(CausalUnit::features).collect();
    let labels: Vec<bool> = units.iter().map(|u| u.treatment).collect();
    let model = fit_logistic(&features, &labels, cfg.lr_iters, cfg.lr_rate, cfg.lr_l2);
    Ok(features.iter().map(|x| model.predict(x)).collect())
}
