//! Tail classification of ladder partial values.
//!
//! Increments `Δ_i` between rungs are converted to slopes per unit of
//! `L = ln(1/ε)` and fitted by `ln(Δ_i/h_i) = α + λ L_i`. A negative `λ`
//! means geometric decay of the increments (finite limit); a positive
//! `λ` means power growth `ε^{−λ}`; `λ ≈ 0` with a non-negligible slope
//! means logarithmic growth.

use std::fmt;

use crate::error::{Error, Result};

use super::Verdict;

const MIN_RUNGS: usize = 4;
const FIT_INCREMENTS: usize = 4;
const GEOMETRIC_RATIO: f64 = 0.9;
const TAIL_FRACTION: f64 = 0.05;
const POWER_EXPONENT: f64 = 0.05;
const LOG_SLOPE_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// All increments vanish.
    Flat,
    /// Increments shrink by `ratio` per rung; `tail` is the extrapolated remainder.
    Geometric { ratio: f64, tail: f64 },
    /// Values grow like `ε^{−exponent}`.
    Power { exponent: f64 },
    /// Values grow like `slope · ln(1/ε)`.
    Logarithmic { slope: f64 },
    /// No model fits decisively.
    Undetermined { ratio: f64, exponent: f64 },
    /// Too few rungs to fit.
    TooShort,
}

impl fmt::Display for TailModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailModel::Flat => write!(f, "flat"),
            TailModel::Geometric { ratio, tail } => write!(f, "geometric(ratio={ratio:.4e};tail={tail:.4e})"),
            TailModel::Power { exponent } => write!(f, "power(exponent={exponent:.4e})"),
            TailModel::Logarithmic { slope } => write!(f, "logarithmic(slope={slope:.4e})"),
            TailModel::Undetermined { ratio, exponent } => {
                write!(f, "undetermined(ratio={ratio:.4e};exponent={exponent:.4e})")
            }
            TailModel::TooShort => write!(f, "too-short"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub model: TailModel,
}

pub fn classify(ladder: &[(f64, f64)]) -> Result<Classification> {
    if ladder.len() < MIN_RUNGS {
        return Err(Error::InvalidInput(format!(
            "classification needs at least {MIN_RUNGS} rungs, got {}",
            ladder.len()
        )));
    }
    for w in ladder.windows(2) {
        let ((e0, v0), (e1, v1)) = (w[0], w[1]);
        if !(e1 < e0 && e1 > 0.0) {
            return Err(Error::InvalidInput(format!("ladder truncations must strictly decrease: {e0} then {e1}")));
        }
        if !(v1 >= v0) || !v1.is_finite() {
            return Err(Error::InvalidInput(format!(
                "ladder values must be finite and nondecreasing: {v0} then {v1}"
            )));
        }
    }
    let start = ladder.len().saturating_sub(FIT_INCREMENTS + 1);
    let tail = &ladder[start..];
    let mut inc = Vec::new();
    let mut h = Vec::new();
    let mut mid = Vec::new();
    for w in tail.windows(2) {
        let ((e0, v0), (e1, v1)) = (w[0], w[1]);
        inc.push(v1 - v0);
        h.push((e0 / e1).ln());
        mid.push(0.5 * ((1.0 / e0).ln() + (1.0 / e1).ln()));
    }
    let max_inc = inc.iter().copied().fold(0.0, f64::max);
    if max_inc == 0.0 {
        return Ok(Classification { verdict: Verdict::Converges, model: TailModel::Flat });
    }
    let floor = max_inc * 1e-12;
    let y: Vec<f64> = inc.iter().zip(&h).map(|(d, h)| (d.max(floor) / h).ln()).collect();
    let n = y.len() as f64;
    let mx = mid.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = mid.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = mid.iter().zip(&y).map(|(x, y)| (x - mx) * (y - my)).sum();
    let lambda = sxy / sxx;
    let alpha = my - lambda * mx;
    let h_mean = h.iter().sum::<f64>() / n;
    let ratio = (lambda * h_mean).exp();
    let last_value = tail.last().unwrap().1;
    let last_l = (1.0 / tail.last().unwrap().0).ln();

    if ratio < GEOMETRIC_RATIO && lambda < 0.0 {
        let remainder = (alpha + lambda * last_l).exp() / (-lambda);
        if remainder < TAIL_FRACTION * last_value {
            return Ok(Classification {
                verdict: Verdict::Converges,
                model: TailModel::Geometric { ratio, tail: remainder },
            });
        }
    }
    if lambda > POWER_EXPONENT {
        return Ok(Classification { verdict: Verdict::Diverges, model: TailModel::Power { exponent: lambda } });
    }
    let slope = inc.iter().zip(&h).map(|(d, h)| d / h).sum::<f64>() / n;
    if ratio >= GEOMETRIC_RATIO && slope * h_mean > LOG_SLOPE_FRACTION * last_value {
        return Ok(Classification { verdict: Verdict::Diverges, model: TailModel::Logarithmic { slope } });
    }
    Ok(Classification {
        verdict: Verdict::Inconclusive,
        model: TailModel::Undetermined { ratio, exponent: lambda },
    })
}
