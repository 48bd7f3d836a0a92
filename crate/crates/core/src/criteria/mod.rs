//! Analytic avoidability criteria evaluated along truncation ladders.

mod balayage;
mod classify;
mod radial;
mod wiener;

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use balayage::{balayage, balayage_kernel};
pub use classify::{classify, Classification, TailModel};
pub use radial::{
    deterministic_criterion, exterior_criterion, exterior_deterministic_criterion,
    expected_obstacle_count, expected_obstacle_count_ladder, lundh_criterion, radial_criterion,
};
pub use wiener::{
    expected_wiener, wiener_series, wiener_series_infinity, ExpectedWiener, WienerRung,
};

/// Default truncation ladder.
pub const DEFAULT_LADDER: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Converges => "converges",
            Verdict::Diverges => "diverges",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn is_decided(&self) -> bool {
        *self != Verdict::Inconclusive
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Partial values of one criterion along a ladder, with the tail verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub criterion: String,
    /// `(ε_i, value_i)`, ε strictly decreasing, values nondecreasing.
    pub ladder: Vec<(f64, f64)>,
    pub verdict: Verdict,
    pub model: TailModel,
    pub params: String,
}

impl CriterionReport {
    /// Builds a report and classifies its tail.
    pub fn new(criterion: &str, ladder: Vec<(f64, f64)>, params: String) -> Result<Self> {
        let Classification { verdict, model } = classify(&ladder)?;
        Ok(CriterionReport { criterion: criterion.to_string(), ladder, verdict, model, params })
    }

    pub fn last_value(&self) -> f64 {
        self.ladder.last().map_or(0.0, |&(_, v)| v)
    }

    /// Extrapolated limit for convergent tails.
    pub fn limit_estimate(&self) -> Option<f64> {
        match self.model {
            TailModel::Flat => Some(self.last_value()),
            TailModel::Geometric { tail, .. } => Some(self.last_value() + tail),
            _ => None,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.ladder.iter().map(|&(_, v)| v).collect()
    }

    /// CSV rows (no header), one per rung.
    pub fn write_csv_rows<W: Write>(&self, mut w: W) -> Result<()> {
        for &(eps, v) in &self.ladder {
            writeln!(
                w,
                "{},{:e},{:.12e},{},{},{}",
                self.criterion,
                eps,
                v,
                self.verdict,
                csv_field(&self.model.to_string()),
                csv_field(&self.params)
            )?;
        }
        Ok(())
    }
}

pub const CSV_SCHEMA_LINE: &str = "# schema=1";
pub const CRITERIA_CSV_HEADER: &str = "criterion,epsilon,value,verdict,model,params";

/// Writes reports as one CSV table with the schema comment and header.
pub fn write_criteria_csv<W: Write>(reports: &[CriterionReport], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA_LINE}")?;
    writeln!(w, "{CRITERIA_CSV_HEADER}")?;
    for r in reports {
        r.write_csv_rows(&mut w)?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Checks that a ladder is strictly decreasing within `(0, upper)`.
pub(crate) fn check_ladder(ladder: &[f64], upper: f64) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::InvalidParameter("empty truncation ladder".into()));
    }
    if ladder.iter().any(|&e| !(e > 0.0 && e < upper)) {
        return Err(Error::InvalidParameter(format!(
            "ladder entries must lie in (0, {upper}), got {ladder:?}"
        )));
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "ladder must be strictly decreasing, got {ladder:?}"
        )));
    }
    Ok(())
}

/// Validates an interior truncation ladder: strictly decreasing in `(0, 1)`.
pub fn validate_ladder(ladder: &[f64]) -> Result<()> {
    check_ladder(ladder, 1.0)
}

/// Classification that tolerates short ladders: fewer than four rungs
/// converge only when every value is zero.
pub fn report_any_length(criterion: &str, ladder: Vec<(f64, f64)>, params: String) -> Result<CriterionReport> {
    if ladder.len() >= 4 {
        return CriterionReport::new(criterion, ladder, params);
    }
    let zero = ladder.iter().all(|&(_, v)| v == 0.0);
    Ok(CriterionReport {
        criterion: criterion.to_string(),
        ladder,
        verdict: if zero { Verdict::Converges } else { Verdict::Inconclusive },
        model: if zero { TailModel::Flat } else { TailModel::TooShort },
        params,
    })
}
