//! The rigorous convergence-radius and coefficient bounds, evaluated in log
//! space, plus comparison reports.
//!
//! Four bounds are implemented, each `1 / (e^{x + 1} K)` for an exponent
//! `x` and an integral constant `K`:
//!
//! | bound               | exponent    | constant    | applies to            |
//! |---------------------|-------------|-------------|-----------------------|
//! | `penrose_ruelle`    | `2 beta B`  | `C(beta)`   | every admissible V    |
//! | `brydges_federbush` | `beta B`    | `beta ||V||`| absolutely summable V |
//! | `penrose`           | `beta B`    | `C*(beta)`  | hard core + finite tail |
//! | `ruelle`            | `beta B~`   | `C~(beta)`  | nonnegative + stable split |
//!
//! All arithmetic is done on logarithms (the exponents reach hundreds for
//! realistic stability constants); reported values carry both the log and
//! the exponentiated value.

use crate::potential::RadialPotential;
use crate::quad::{self, IntegralConstants, QuadError, QuadratureSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum BoundsError {
    #[error("integral constant must be positive, got {0}")]
    NonPositiveConstant(f64),
    #[error("{0} requires {1}, which is absent for this potential")]
    MissingInput(&'static str, &'static str),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// A positive quantity carried as `(log, value)`; the value may underflow
/// to 0 while the log stays exact.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct LogValue {
    pub log: f64,
    pub value: f64,
}

impl LogValue {
    pub fn from_log(log: f64) -> LogValue {
        LogValue { log, value: log.exp() }
    }

    pub fn ratio_to(self, other: LogValue) -> LogValue {
        LogValue::from_log(self.log - other.log)
    }
}

fn radius(exponent: f64, constant: f64) -> Result<LogValue, BoundsError> {
    if !(constant > 0.0) {
        return Err(BoundsError::NonPositiveConstant(constant));
    }
    Ok(LogValue::from_log(-(exponent + 1.0) - constant.ln()))
}

/// `1 / (e^{2 beta B + 1} C(beta))`.
pub fn penrose_ruelle_radius(b: f64, c_beta: f64, beta: f64) -> Result<LogValue, BoundsError> {
    assert!(b >= 0.0 && beta > 0.0);
    radius(2.0 * beta * b, c_beta)
}

/// `1 / (e^{beta B + 1} beta ||V||_1)`.
pub fn brydges_federbush_radius(b: f64, v_l1: f64, beta: f64) -> Result<LogValue, BoundsError> {
    assert!(b >= 0.0 && beta > 0.0);
    radius(beta * b, beta * v_l1)
}

/// `1 / (e^{beta B + 1} C*(beta))`.
pub fn penrose_potential_radius(b: f64, c_star: f64, beta: f64) -> Result<LogValue, BoundsError> {
    assert!(b >= 0.0 && beta > 0.0);
    radius(beta * b, c_star)
}

/// `1 / (e^{beta B~ + 1} C~(beta))`.
pub fn ruelle_potential_radius(
    b_tilde: f64,
    c_tilde: f64,
    beta: f64,
) -> Result<LogValue, BoundsError> {
    assert!(b_tilde >= 0.0 && beta > 0.0);
    radius(beta * b_tilde, c_tilde)
}

/// Which coefficient-bound formula to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundTheorem {
    /// `e^{2 beta B (n-1)} n^{n-2} C^{n-1} / n!`
    PenroseRuelle,
    /// `e^{beta B (n-1)} n^{n-2} (beta ||V||)^{n-1} / n!`
    BrydgesFederbush,
    /// `e^{beta B n} n^{n-2} (C*)^{n-1} / n!`
    Penrose,
    /// `e^{beta B~ n} n^{n-2} (C~)^{n-1} / n!`
    Ruelle,
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// The selected `|C_n|` bound, in log space. `constant` is the matching
/// integral constant (already including `beta` for the Brydges-Federbush
/// norm).
pub fn coefficient_bound(
    theorem: BoundTheorem,
    n: usize,
    b: f64,
    constant: f64,
    beta: f64,
) -> Result<LogValue, BoundsError> {
    assert!(n >= 2 && b >= 0.0 && beta > 0.0);
    if !(constant > 0.0) {
        return Err(BoundsError::NonPositiveConstant(constant));
    }
    let nf = n as f64;
    let exponent = match theorem {
        BoundTheorem::PenroseRuelle => 2.0 * beta * b * (nf - 1.0),
        BoundTheorem::BrydgesFederbush => beta * b * (nf - 1.0),
        BoundTheorem::Penrose | BoundTheorem::Ruelle => beta * b * nf,
    };
    let log = exponent + (nf - 2.0) * nf.ln() + (nf - 1.0) * constant.ln() - ln_factorial(n);
    Ok(LogValue::from_log(log))
}

/// Stability inputs for a report: `b` bounds the potential's own constant,
/// `b_tilde` the split part's.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StabilityInputs {
    pub b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_tilde: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub potential_id: String,
    pub beta: f64,
    pub stability: StabilityInputs,
    pub constants: IntegralConstants,
    /// radius bounds by name, only those applicable
    pub radii: BTreeMap<String, LogValue>,
    /// `coefficient_bounds[name][k]` bounds `|C_{k+2}|`, orders 2..=8
    pub coefficient_bounds: BTreeMap<String, Vec<LogValue>>,
    /// pairwise ratios `radii[num] / radii[den]` keyed `"num/den"`
    pub ratios: BTreeMap<String, LogValue>,
    /// name of the largest radius
    pub best: String,
}

pub const MAX_COEFFICIENT_ORDER: usize = 8;

/// Computes every applicable radius and coefficient bound for `p` at `beta`.
pub fn compare_report(
    p: &RadialPotential,
    beta: f64,
    stability: StabilityInputs,
    spec: &QuadratureSpec,
) -> Result<BoundReport, BoundsError> {
    let constants = IntegralConstants::compute(p, beta, spec)?;
    // the split constant defaults to the declared split's own value
    let b_tilde = stability
        .b_tilde
        .or_else(|| p.ruelle_split.as_ref().map(|s| s.stability_constant_phi2));
    let c_tilde = match (&p.ruelle_split, constants.c_tilde_beta) {
        (Some(split), None) => Some(quad::c_tilde_beta(split, beta, spec)?),
        (_, v) => v,
    };

    let mut radii = BTreeMap::new();
    radii.insert(
        "penrose_ruelle".to_string(),
        penrose_ruelle_radius(stability.b, constants.c_beta, beta)?,
    );
    if let Some(v_l1) = constants.v_l1 {
        radii.insert(
            "brydges_federbush".to_string(),
            brydges_federbush_radius(stability.b, v_l1, beta)?,
        );
    }
    if let Some(c_star) = constants.c_star_beta {
        radii.insert("penrose".to_string(), penrose_potential_radius(stability.b, c_star, beta)?);
    }
    if let (Some(bt), Some(ct)) = (b_tilde, c_tilde) {
        radii.insert("ruelle".to_string(), ruelle_potential_radius(bt, ct, beta)?);
    }

    let mut coefficient_bounds = BTreeMap::new();
    let orders: Vec<usize> = (2..=MAX_COEFFICIENT_ORDER).collect();
    let mut push = |name: &str, theorem: BoundTheorem, b: f64, k: f64| -> Result<(), BoundsError> {
        let list: Result<Vec<LogValue>, BoundsError> = orders
            .iter()
            .map(|&n| coefficient_bound(theorem, n, b, k, beta))
            .collect();
        coefficient_bounds.insert(name.to_string(), list?);
        Ok(())
    };
    push("penrose_ruelle", BoundTheorem::PenroseRuelle, stability.b, constants.c_beta)?;
    if let Some(v_l1) = constants.v_l1 {
        push("brydges_federbush", BoundTheorem::BrydgesFederbush, stability.b, beta * v_l1)?;
    }
    if let Some(c_star) = constants.c_star_beta {
        push("penrose", BoundTheorem::Penrose, stability.b, c_star)?;
    }
    if let (Some(bt), Some(ct)) = (b_tilde, c_tilde) {
        push("ruelle", BoundTheorem::Ruelle, bt, ct)?;
    }

    let mut ratios = BTreeMap::new();
    let names: Vec<&String> = radii.keys().collect();
    for (i, num) in names.iter().enumerate() {
        for den in names.iter().skip(i + 1) {
            let r = radii[*num].ratio_to(radii[*den]);
            ratios.insert(format!("{num}/{den}"), r);
        }
    }
    let best = radii
        .iter()
        .max_by(|a, b| a.1.log.partial_cmp(&b.1.log).unwrap())
        .map(|(k, _)| k.clone())
        .unwrap();

    let mut constants = constants;
    constants.c_tilde_beta = c_tilde;
    Ok(BoundReport {
        potential_id: potential_id(p),
        beta,
        stability: StabilityInputs { b: stability.b, b_tilde },
        constants,
        radii,
        coefficient_bounds,
        ratios,
        best,
    })
}

fn potential_id(p: &RadialPotential) -> String {
    let kind = serde_json::to_value(p)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str().map(String::from)))
        .unwrap_or_else(|| "potential".into());
    format!("{kind}_d{}", p.dimension)
}
