//! Radius profiles φ and intensity profiles ν as functions of `t = |x|`.
//!
//! Every family is radial. Table profiles interpolate log-linearly in
//! `1 − t` (so a power law `κ(1−t)^p` is reproduced exactly between its
//! knots) and extend the outermost segments as power laws.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Knot table interpolated log-linearly in `1 − t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogTable {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl LogTable {
    fn check(&self) -> Result<()> {
        if self.knots.len() < 2 || self.knots.len() != self.values.len() {
            return Err(Error::InvalidProfile(
                "table needs at least two knots and one value per knot".into(),
            ));
        }
        if !self.knots.windows(2).all(|w| w[0] < w[1])
            || self.knots[0] < 0.0
            || *self.knots.last().unwrap() >= 1.0
        {
            return Err(Error::InvalidProfile(
                "table knots must be strictly increasing in [0, 1)".into(),
            ));
        }
        if !self.values.iter().all(|v| *v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidProfile(
                "table values must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    fn segment_slope(&self, i: usize) -> f64 {
        let u0 = (1.0 - self.knots[i]).ln();
        let u1 = (1.0 - self.knots[i + 1]).ln();
        (self.values[i + 1].ln() - self.values[i].ln()) / (u1 - u0)
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.knots.len();
        let i = match self.knots.iter().position(|&k| k > t) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => n - 2,
        };
        let slope = self.segment_slope(i);
        let u = (1.0 - t).ln() - (1.0 - self.knots[i]).ln();
        self.values[i] * (slope * u).exp()
    }

    /// Exponent of the final power-law segment.
    fn tail_exponent(&self) -> f64 {
        self.segment_slope(self.knots.len() - 2)
    }

    /// Supremum on `[a, b]`: the table is monotone between knots.
    fn sup_on(&self, a: f64, b: f64) -> f64 {
        self.knots
            .iter()
            .copied()
            .filter(|&k| k > a && k < b)
            .chain([a, b])
            .map(|t| self.eval(t))
            .fold(0.0, f64::max)
    }

    fn is_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    fn describe(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(";");
        format!("knots={},values={}", join(&self.knots), join(&self.values))
    }
}

/// Obstacle radius φ(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum RadiusProfile {
    /// `κ (1 − t)^γ`
    PowerLaw { kappa: f64, gamma: f64 },
    /// `κ` (use `κ = 0` for no obstacles)
    Constant { kappa: f64 },
    Table(LogTable),
}

/// Poisson intensity ν(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum IntensityProfile {
    /// `κ (1 − t)^{−β}`
    PowerLaw { kappa: f64, beta: f64 },
    Constant { kappa: f64 },
    Table(LogTable),
}

/// Profile on the exterior `r = |x| ≥ 1`, used for both φ and ν there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ExteriorProfile {
    /// `κ r^p`
    PowerLaw { kappa: f64, exponent: f64 },
    Constant { kappa: f64 },
}

fn finite_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!("{name} must be finite and >= 0, got {v}")))
    }
}

impl RadiusProfile {
    pub fn power_law(kappa: f64, gamma: f64) -> Self {
        RadiusProfile::PowerLaw { kappa, gamma }
    }

    /// `c (1 − t)`, the linear profile.
    pub fn linear(c: f64) -> Self {
        RadiusProfile::PowerLaw { kappa: c, gamma: 1.0 }
    }

    pub fn zero() -> Self {
        RadiusProfile::Constant { kappa: 0.0 }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            RadiusProfile::PowerLaw { kappa, gamma } => {
                if !(*kappa > 0.0 && kappa.is_finite()) {
                    return Err(Error::InvalidProfile(format!("power-law kappa must be > 0, got {kappa}")));
                }
                if !(*gamma >= 1.0 && gamma.is_finite()) {
                    return Err(Error::InvalidProfile(format!("power-law gamma must be >= 1, got {gamma}")));
                }
                Ok(())
            }
            RadiusProfile::Constant { kappa } => finite_nonneg("kappa", *kappa),
            RadiusProfile::Table(t) => {
                t.check()?;
                if !t.is_decreasing() {
                    return Err(Error::InvalidProfile("radius table must be decreasing in t".into()));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            RadiusProfile::PowerLaw { kappa, gamma } => kappa * (1.0 - t).powf(*gamma),
            RadiusProfile::Constant { kappa } => *kappa,
            RadiusProfile::Table(tab) => tab.eval(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RadiusProfile::Constant { kappa } if *kappa == 0.0)
    }

    /// `p` with `φ(t) ≍ (1 − t)^p` as `t → 1`; `None` for the zero profile.
    pub fn tail_exponent(&self) -> Option<f64> {
        match self {
            _ if self.is_zero() => None,
            RadiusProfile::PowerLaw { gamma, .. } => Some(*gamma),
            RadiusProfile::Constant { .. } => Some(0.0),
            RadiusProfile::Table(t) => Some(t.tail_exponent()),
        }
    }
}

impl IntensityProfile {
    pub fn power_law(kappa: f64, beta: f64) -> Self {
        IntensityProfile::PowerLaw { kappa, beta }
    }

    pub fn constant(kappa: f64) -> Self {
        IntensityProfile::Constant { kappa }
    }

    pub fn zero() -> Self {
        IntensityProfile::Constant { kappa: 0.0 }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            IntensityProfile::PowerLaw { kappa, beta } => {
                if !(*kappa > 0.0 && kappa.is_finite()) {
                    return Err(Error::InvalidProfile(format!("power-law kappa must be > 0, got {kappa}")));
                }
                if !beta.is_finite() {
                    return Err(Error::InvalidProfile("power-law beta must be finite".into()));
                }
                Ok(())
            }
            IntensityProfile::Constant { kappa } => finite_nonneg("kappa", *kappa),
            IntensityProfile::Table(t) => t.check(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            IntensityProfile::PowerLaw { kappa, beta } => kappa * (1.0 - t).powf(-beta),
            IntensityProfile::Constant { kappa } => *kappa,
            IntensityProfile::Table(tab) => tab.eval(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, IntensityProfile::Constant { kappa } if *kappa == 0.0)
    }

    /// `p` with `ν(t) ≍ (1 − t)^p` as `t → 1`; `None` for the zero profile.
    pub fn tail_exponent(&self) -> Option<f64> {
        match self {
            _ if self.is_zero() => None,
            IntensityProfile::PowerLaw { beta, .. } => Some(-beta),
            IntensityProfile::Constant { .. } => Some(0.0),
            IntensityProfile::Table(t) => Some(t.tail_exponent()),
        }
    }

    /// An upper bound for ν on `[a, b]`, exact for every family.
    pub fn sup_on(&self, a: f64, b: f64) -> f64 {
        match self {
            IntensityProfile::Table(t) => t.sup_on(a, b),
            _ => self.eval(a).max(self.eval(b)),
        }
    }
}

impl ExteriorProfile {
    pub fn check(&self) -> Result<()> {
        match self {
            ExteriorProfile::PowerLaw { kappa, exponent } => {
                finite_nonneg("kappa", *kappa)?;
                if !exponent.is_finite() {
                    return Err(Error::InvalidProfile("exponent must be finite".into()));
                }
                Ok(())
            }
            ExteriorProfile::Constant { kappa } => finite_nonneg("kappa", *kappa),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            ExteriorProfile::PowerLaw { kappa, exponent } => kappa * r.powf(*exponent),
            ExteriorProfile::Constant { kappa } => *kappa,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ExteriorProfile::PowerLaw { kappa, .. } | ExteriorProfile::Constant { kappa } => *kappa == 0.0,
        }
    }

    /// `p` with `f(r) ≍ r^p` as `r → ∞`.
    pub fn growth_exponent(&self) -> Option<f64> {
        match self {
            _ if self.is_zero() => None,
            ExteriorProfile::PowerLaw { exponent, .. } => Some(*exponent),
            ExteriorProfile::Constant { .. } => Some(0.0),
        }
    }
}

// Compact one-line descriptors, e.g. `power-law(kappa=0.1,gamma=1.0)`.

impl fmt::Display for RadiusProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusProfile::PowerLaw { kappa, gamma } => write!(f, "power-law(kappa={kappa:?},gamma={gamma:?})"),
            RadiusProfile::Constant { kappa } => write!(f, "constant(kappa={kappa:?})"),
            RadiusProfile::Table(t) => write!(f, "table({})", t.describe()),
        }
    }
}

impl fmt::Display for IntensityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntensityProfile::PowerLaw { kappa, beta } => write!(f, "power-law(kappa={kappa:?},beta={beta:?})"),
            IntensityProfile::Constant { kappa } => write!(f, "constant(kappa={kappa:?})"),
            IntensityProfile::Table(t) => write!(f, "table({})", t.describe()),
        }
    }
}

impl fmt::Display for ExteriorProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExteriorProfile::PowerLaw { kappa, exponent } => {
                write!(f, "power-law(kappa={kappa:?},exponent={exponent:?})")
            }
            ExteriorProfile::Constant { kappa } => write!(f, "constant(kappa={kappa:?})"),
        }
    }
}

/// Splits `family(k=v,k=v)` into the family name and key/value pairs.
fn parse_descriptor(s: &str) -> Result<(String, Vec<(String, String)>)> {
    let bad = || Error::InvalidProfile(format!("malformed profile descriptor `{s}`"));
    let s = s.trim();
    let open = s.find('(').ok_or_else(bad)?;
    if !s.ends_with(')') {
        return Err(bad());
    }
    let family = s[..open].trim().to_string();
    let body = &s[open + 1..s.len() - 1];
    let mut pairs = Vec::new();
    for part in body.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(bad)?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok((family, pairs))
}

fn lookup(pairs: &[(String, String)], key: &str) -> Result<f64> {
    let v = pairs
        .iter()
        .find(|(k, _)| k == key)
        .ok_or_else(|| Error::InvalidProfile(format!("missing `{key}`")))?;
    v.1.parse()
        .map_err(|_| Error::InvalidProfile(format!("`{key}` is not a number: {}", v.1)))
}

fn lookup_list(pairs: &[(String, String)], key: &str) -> Result<Vec<f64>> {
    let v = pairs
        .iter()
        .find(|(k, _)| k == key)
        .ok_or_else(|| Error::InvalidProfile(format!("missing `{key}`")))?;
    v.1.split(';')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::InvalidProfile(format!("`{key}` entry is not a number: {x}")))
        })
        .collect()
}

impl FromStr for RadiusProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (family, p) = parse_descriptor(s)?;
        let profile = match family.as_str() {
            "power-law" => RadiusProfile::PowerLaw {
                kappa: lookup(&p, "kappa")?,
                gamma: lookup(&p, "gamma")?,
            },
            "constant" => RadiusProfile::Constant { kappa: lookup(&p, "kappa")? },
            "table" => RadiusProfile::Table(LogTable {
                knots: lookup_list(&p, "knots")?,
                values: lookup_list(&p, "values")?,
            }),
            other => return Err(Error::InvalidProfile(format!("unknown radius family `{other}`"))),
        };
        profile.check()?;
        Ok(profile)
    }
}

impl FromStr for IntensityProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (family, p) = parse_descriptor(s)?;
        let profile = match family.as_str() {
            "power-law" => IntensityProfile::PowerLaw {
                kappa: lookup(&p, "kappa")?,
                beta: lookup(&p, "beta")?,
            },
            "constant" => IntensityProfile::Constant { kappa: lookup(&p, "kappa")? },
            "table" => IntensityProfile::Table(LogTable {
                knots: lookup_list(&p, "knots")?,
                values: lookup_list(&p, "values")?,
            }),
            other => return Err(Error::InvalidProfile(format!("unknown intensity family `{other}`"))),
        };
        profile.check()?;
        Ok(profile)
    }
}

/// Outcome of checking the standing assumptions on (φ, ν).
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileValidation {
    /// Smallest `C` with `φ(x)/C ≤ φ(y) ≤ C φ(x)` over the test pairs.
    pub phi_quasi_constancy: f64,
    /// Same for ν.
    pub nu_quasi_constancy: f64,
    pub quasi_constancy_ok: bool,
    /// `sup φ(t)/(1 − t)`; must stay below 1.
    pub radius_ratio: f64,
    pub radius_ratio_ok: bool,
    /// `sup (1 − t)² φ(t)^{d−2} ν(t)`; must stay bounded as `t → 1`.
    pub mass_bound: f64,
    pub mass_bound_ok: bool,
}

impl ProfileValidation {
    pub fn passes(&self) -> bool {
        self.quasi_constancy_ok && self.radius_ratio_ok && self.mass_bound_ok
    }

    /// Names of the failed assumptions.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.quasi_constancy_ok {
            out.push("quasi-constancy of phi and nu on half-distance balls");
        }
        if !self.radius_ratio_ok {
            out.push("phi(t)/(1-t) <= c < 1");
        }
        if !self.mass_bound_ok {
            out.push("(1-t)^2 phi^(d-2) nu bounded near the sphere");
        }
        out
    }
}

/// Quasi-constancy constants above this are treated as unbounded.
const QUASI_CONSTANCY_LIMIT: f64 = 1e6;

/// Test radii: geometric toward the sphere, `1 − 2^{−k/8}`.
fn test_radii(max_k: u32) -> impl Iterator<Item = f64> {
    (0..=max_k).map(|k| 1.0 - 2f64.powf(-(k as f64) / 8.0))
}

fn pair_ratio(a: f64, b: f64) -> f64 {
    match (a == 0.0, b == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => (a / b).max(b / a),
    }
}

fn quasi_constancy<F: Fn(f64) -> f64>(f: F) -> f64 {
    let mut c: f64 = 1.0;
    for t in test_radii(160) {
        let h = 0.5 * (1.0 - t);
        let ft = f(t);
        for j in -8..=8 {
            let s = (t + h * j as f64 / 8.0).max(0.0);
            c = c.max(pair_ratio(ft, f(s)));
        }
    }
    c
}

/// Checks quasi-constancy, the radius bound and the mass growth bound on a
/// deterministic grid of radii (tail behavior decided from the families'
/// asymptotic exponents).
pub fn validate_profiles(
    phi: &RadiusProfile,
    nu: &IntensityProfile,
    d: usize,
) -> Result<ProfileValidation> {
    crate::error::check_dimension(d)?;
    phi.check()?;
    nu.check()?;
    for t in test_radii(320) {
        let (a, b) = (phi.eval(t), nu.eval(t));
        if !(a.is_finite() && a >= 0.0 && b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidProfile(format!(
                "profile not evaluable at t = {t}: phi = {a}, nu = {b}"
            )));
        }
    }

    let phi_c = quasi_constancy(|t| phi.eval(t));
    let nu_c = quasi_constancy(|t| nu.eval(t));

    let radius_ratio = test_radii(320)
        .map(|t| phi.eval(t) / (1.0 - t))
        .fold(0.0, f64::max);

    let mass = |t: f64| (1.0 - t).powi(2) * phi.eval(t).powi(d as i32 - 2) * nu.eval(t);
    let mass_bound = test_radii(320).map(mass).fold(0.0, f64::max);
    let tail_ok = match (phi.tail_exponent(), nu.tail_exponent()) {
        (Some(p), Some(n)) => 2.0 + (d as f64 - 2.0) * p + n >= -1e-12,
        _ => true,
    };

    Ok(ProfileValidation {
        phi_quasi_constancy: phi_c,
        nu_quasi_constancy: nu_c,
        quasi_constancy_ok: phi_c <= QUASI_CONSTANCY_LIMIT && nu_c <= QUASI_CONSTANCY_LIMIT,
        radius_ratio,
        radius_ratio_ok: radius_ratio < 1.0,
        mass_bound,
        mass_bound_ok: mass_bound.is_finite() && tail_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_radius_passes_with_its_slope() {
        let v = validate_profiles(&RadiusProfile::linear(0.5), &IntensityProfile::constant(1.0), 3).unwrap();
        assert_relative_eq!(v.radius_ratio, 0.5, epsilon = 1e-12);
        assert!(v.radius_ratio_ok);
        assert!(v.passes());
    }

    #[test]
    fn steep_radius_fails() {
        let v = validate_profiles(&RadiusProfile::linear(2.0), &IntensityProfile::constant(1.0), 3).unwrap();
        assert_relative_eq!(v.radius_ratio, 2.0, epsilon = 1e-12);
        assert!(!v.radius_ratio_ok);
        assert!(!v.passes());
    }

    #[test]
    fn mass_bound_example() {
        // (1−t)²·0.1(1−t)·(1−t)^{−3} ≡ 0.1
        let v = validate_profiles(&RadiusProfile::linear(0.1), &IntensityProfile::power_law(1.0, 3.0), 3).unwrap();
        assert_relative_eq!(v.mass_bound, 0.1, epsilon = 1e-12);
        assert!(v.mass_bound_ok && v.passes());
        // β = 3.5 makes the quantity blow up like (1−t)^{−1/2}.
        let v = validate_profiles(&RadiusProfile::linear(0.1), &IntensityProfile::power_law(1.0, 3.5), 3).unwrap();
        assert!(!v.mass_bound_ok);
    }

    #[test]
    fn quasi_constancy_of_power_laws() {
        // On |y| ∈ [t − h/2, t + h/2], (1−s)/(1−t) ∈ [1/2, 3/2].
        let v = validate_profiles(&RadiusProfile::power_law(0.1, 2.0), &IntensityProfile::power_law(1.0, 3.0), 3).unwrap();
        assert_relative_eq!(v.phi_quasi_constancy, 4.0, max_relative = 1e-9);
        assert_relative_eq!(v.nu_quasi_constancy, 8.0, max_relative = 1e-9);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(validate_profiles(&RadiusProfile::power_law(-1.0, 1.0), &IntensityProfile::zero(), 3).is_err());
        assert!(validate_profiles(&RadiusProfile::power_law(0.1, 0.5), &IntensityProfile::zero(), 3).is_err());
        assert!(validate_profiles(&RadiusProfile::linear(0.1), &IntensityProfile::constant(f64::NAN), 3).is_err());
        let increasing = RadiusProfile::Table(LogTable { knots: vec![0.0, 0.5], values: vec![0.1, 0.2] });
        assert!(increasing.check().is_err());
    }

    #[test]
    fn table_matches_power_law() {
        let tab = IntensityProfile::Table(LogTable {
            knots: vec![0.0, 0.5, 0.9],
            values: vec![1.0, 4.0, 100.0],
        });
        let pl = IntensityProfile::power_law(1.0, 2.0);
        for t in [0.0, 0.2, 0.5, 0.7, 0.9, 0.99, 0.999999] {
            assert_relative_eq!(tab.eval(t), pl.eval(t), max_relative = 1e-12);
        }
        assert_relative_eq!(tab.tail_exponent().unwrap(), -2.0, epsilon = 1e-12);
        assert_relative_eq!(tab.sup_on(0.2, 0.7), pl.eval(0.7), max_relative = 1e-12);
    }

    #[test]
    fn descriptors_round_trip() {
        let phis = [
            RadiusProfile::linear(0.1),
            RadiusProfile::zero(),
            RadiusProfile::Table(LogTable { knots: vec![0.0, 0.5], values: vec![0.1, 0.05] }),
        ];
        for p in phis {
            assert_eq!(p.to_string().parse::<RadiusProfile>().unwrap(), p);
        }
        let nus = [IntensityProfile::power_law(1.0, 2.0), IntensityProfile::constant(100.0)];
        for n in nus {
            assert_eq!(n.to_string().parse::<IntensityProfile>().unwrap(), n);
        }
        assert!("power-law(kappa=1)".parse::<IntensityProfile>().is_err());
        assert!("sine(kappa=1)".parse::<RadiusProfile>().is_err());
    }
}
