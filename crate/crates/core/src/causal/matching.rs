use serde::{Deserialize, Serialize};

use super::{CausalConfig, CausalUnit};
use crate::error::{Error, Result};

/// Controls whose distance is within this of the nearest one count as tied.
const TIE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedEffect {
    pub psi: f64,
    pub n_treated: usize,
    pub n_control: usize,
    pub n_matched: usize,
    pub n_unmatched: usize,
}

/// Nearest-neighbour propensity matching, with replacement, inside a caliper.
///
/// Each treated unit is compared with the mean outcome of its nearest controls
/// (all controls at the minimal distance, so the estimate does not depend on
/// unit order or ids). Treated units with no control inside the caliper are
/// left out and counted in `n_unmatched`.
pub fn matched_ate(
    units: &[CausalUnit],
    scores: &[f64],
    cfg: &CausalConfig,
) -> Result<MatchedEffect> {
    if units.len() != scores.len() {
        return Err(Error::InvalidArgument(format!(
            "{} units but {} scores",
            units.len(),
            scores.len()
        )));
    }
    let mut controls: Vec<(f64, f64)> = units
        .iter()
        .zip(scores)
        .filter(|(u, _)| !u.treatment)
        .map(|(u, &s)| (s, if u.outcome { 1.0 } else { 0.0 }))
        .collect();
    let n_control = controls.len();
    let n_treated = units.len() - n_control;
    if n_treated < cfg.min_support || n_control < cfg.min_support {
        return Err(Error::InsufficientSupport {
            treated: n_treated,
            control: n_control,
            min: cfg.min_support,
        });
    }
    controls.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut diff_sum = 0.0;
    let mut n_matched = 0;
    for (u, &s) in units.iter().zip(scores).filter(|(u, _)| u.treatment) {
        let Some(control_mean) = nearest_control_outcome(&controls, s, cfg.caliper) else {
            continue;
        };
        n_matched += 1;
        diff_sum += if u.outcome { 1.0 } else { 0.0 } - control_mean;
    }
    if n_matched == 0 {
        return Err(Error::NoMatches);
    }
    Ok(MatchedEffect {
        psi: diff_sum / n_matched as f64,
        n_treated,
        n_control,
        n_matched,
        n_unmatched: n_treated - n_matched,
    })
}

// Mean outcome of the controls nearest to `score`, if the nearest lies within the caliper.
fn nearest_control_outcome(sorted: &[(f64, f64)], score: f64, caliper: f64) -> Option<f64> {
    let idx = sorted.partition_point(|c| c.0 < score);
    let left = idx.checked_sub(1).map(|i| score - sorted[i].0);
    let right = sorted.get(idx).map(|c| c.0 - score);
    let best = match (left, right) {
        (Some(l), Some(r)) => l.min(r),
        (Some(d), None) | (None, Some(d)) => d,
        (None, None) => return None,
    };
    if best > caliper {
        return None;
    }
    let limit = best + TIE_EPS;
    let mut sum = 0.0;
    let mut count = 0usize;
    for c in sorted[..idx].iter().rev().take_while(|c| score - c.0 <= limit) {
        sum += c.1;
        count += 1;
    }
    for c in sorted[idx..].iter().take_while(|c| c.0 - score <= limit) {
        sum += c.1;
        count += 1;
    }
    Some(sum / count as f64)
}
