//! Radial pair potentials and the algebraic pair interactions they induce.
//!
//! A [`RadialPotential`] is a rotationally invariant pair potential `V(r)`
//! on `[0, inf)` taking values in the extended reals `R ∪ {+inf}`. The value
//! `+inf` models a hard core: a pair of particles closer than the core
//! radius is *incompatible*. Negative infinity is forbidden everywhere
//! (stable potentials are bounded below), as is NaN.
//!
//! Potentials are declared in JSON as
//! `{"kind": "...", "params": {...}, "dimension": d, "hard_core_radius": a?,
//! "envelope": {...}?, "ruelle_split": {...}?}`; the serde derives below fix
//! that schema.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum PotentialError {
    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
    #[error("dimension mismatch: potential lives in d={expected}, point has {got} coordinates")]
    DimensionMismatch { expected: u32, got: usize },
    #[error("interaction matrix needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid potential: {0}")]
    Invalid(String),
    #[error("operation requires a Ruelle split, none present")]
    MissingSplit,
}

// ---------------------------------------------------------------------------
// Extended reals
// ---------------------------------------------------------------------------

/// A real number or `+inf`. `-inf` and NaN are unrepresentable by invariant.
#[derive(Clone, Copy, Debug)]
pub enum ExtendedReal {
    Finite(f64),
    PositiveInfinity,
}

impl ExtendedReal {
    pub const INFINITY: ExtendedReal = ExtendedReal::PositiveInfinity;

    /// Wraps a finite value. Panics on NaN or `-inf`: those are programming
    /// errors, not data.
    pub fn finite(x: f64) -> ExtendedReal {
        assert!(
            !x.is_nan() && x != f64::NEG_INFINITY,
            "ExtendedReal forbids NaN and -inf, got {x}"
        );
        if x == f64::INFINITY {
            ExtendedReal::PositiveInfinity
        } else {
            ExtendedReal::Finite(x)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::PositiveInfinity)
    }

    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PositiveInfinity => None,
        }
    }

    /// `e^{-x}`, exactly 0 for `x = +inf`.
    pub fn exp_neg(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => (-v).exp(),
            ExtendedReal::PositiveInfinity => 0.0,
        }
    }

    /// The Mayer factor `e^{-x} - 1`, exactly -1 for `x = +inf`.
    pub fn mayer_f(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => (-v).exp_m1(),
            ExtendedReal::PositiveInfinity => -1.0,
        }
    }

    /// Multiplication by a strictly positive scalar (`beta * V`).
    pub fn scale(self, s: f64) -> ExtendedReal {
        assert!(s > 0.0, "scale factor must be positive, got {s}");
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::finite(s * v),
            ExtendedReal::PositiveInfinity => ExtendedReal::PositiveInfinity,
        }
    }
}

impl std::ops::Add for ExtendedReal {
    type Output = ExtendedReal;
    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::finite(a + b),
            _ => ExtendedReal::PositiveInfinity,
        }
    }
}

impl PartialEq for ExtendedReal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a == b,
            (ExtendedReal::PositiveInfinity, ExtendedReal::PositiveInfinity) => true,
            _ => false,
        }
    }
}
impl Eq for ExtendedReal {}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            // no NaN by invariant, so finite comparison is total
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a.partial_cmp(b).unwrap(),
            (ExtendedReal::Finite(_), ExtendedReal::PositiveInfinity) => Ordering::Less,
            (ExtendedReal::PositiveInfinity, ExtendedReal::Finite(_)) => Ordering::Greater,
            (ExtendedReal::PositiveInfinity, ExtendedReal::PositiveInfinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PositiveInfinity => write!(f, "+inf"),
        }
    }
}

// ---------------------------------------------------------------------------
// Envelope metadata
// ---------------------------------------------------------------------------

/// One closed-form envelope term, `c * r^{-q}` or `c * e^{-k r}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EnvelopeFn {
    PowerLaw { coeff: f64, exponent: f64 },
    /// `sum_k c_k r^{-q_k}`, terms as `(c_k, q_k)` pairs.
    PowerSum { terms: Vec<(f64, f64)> },
    Exponential { coeff: f64, rate: f64 },
}

impl EnvelopeFn {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            EnvelopeFn::PowerLaw { coeff, exponent } => coeff * r.powf(-exponent),
            EnvelopeFn::PowerSum { terms } => {
                terms.iter().map(|&(c, q)| c * r.powf(-q)).sum()
            }
            EnvelopeFn::Exponential { coeff, rate } => coeff * (-rate * r).exp(),
        }
    }

    fn power_terms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            EnvelopeFn::PowerLaw { coeff, exponent } => Some(vec![(*coeff, *exponent)]),
            EnvelopeFn::PowerSum { terms } => Some(terms.clone()),
            EnvelopeFn::Exponential { .. } => None,
        }
    }

    /// Is `int_from^inf r^{d-1} f(r) dr` finite?
    pub fn tail_integrable(&self, d: u32) -> bool {
        match self.power_terms() {
            Some(terms) => terms.iter().all(|&(c, q)| c == 0.0 || q > d as f64),
            None => true, // exponential
        }
    }

    /// Closed-form `int_from^inf r^{d-1} f(r) dr`. Requires `from > 0` and an
    /// integrable tail.
    pub fn tail_integral(&self, d: u32, from: f64) -> f64 {
        self.shifted_tail_integral(d, from, 0.0)
    }

    /// Closed-form `int_from^inf (u + shift)^{d-1} f(u) du` for integer `d`.
    ///
    /// The shifted form bounds the mass of a core-shifted envelope
    /// `u -> f(u - shift)` integrated in d dimensions.
    pub fn shifted_tail_integral(&self, d: u32, from: f64, shift: f64) -> f64 {
        let m = (d - 1) as i32;
        // (u + s)^m = sum_k C(m,k) s^{m-k} u^k
        let mut total = 0.0;
        for k in 0..=m {
            let binom = binomial(m, k) * shift.powi(m - k);
            if binom == 0.0 && shift == 0.0 && k != m {
                continue;
            }
            total += binom * self.moment_tail(k, from);
        }
        total
    }

    /// `int_from^inf u^k f(u) du` for integer k >= 0.
    fn moment_tail(&self, k: i32, from: f64) -> f64 {
        match self {
            EnvelopeFn::PowerLaw { coeff, exponent } => {
                let p = exponent - k as f64;
                assert!(p > 1.0, "tail integral diverges: exponent {exponent}, moment {k}");
                coeff * from.powf(1.0 - p) / (p - 1.0)
            }
            EnvelopeFn::PowerSum { terms } => terms
                .iter()
                .map(|&(c, q)| {
                    let p = q - k as f64;
                    assert!(
                        c == 0.0 || p > 1.0,
                        "tail integral diverges: exponent {q}, moment {k}"
                    );
                    if c == 0.0 { 0.0 } else { c * from.powf(1.0 - p) / (p - 1.0) }
                })
                .sum(),
            EnvelopeFn::Exponential { coeff, rate } => {
                // int_R^inf u^k e^{-a u} du = e^{-aR} k!/a^{k+1} sum_j (aR)^j/j!
                let a = *rate;
                let mut fact = 1.0;
                let mut sum = 0.0;
                let mut pow = 1.0;
                for j in 0..=k {
                    if j > 0 {
                        fact *= j as f64;
                        pow *= a * from;
                    }
                    sum += pow / fact;
                }
                let kfact = (1..=k).map(|j| j as f64).product::<f64>();
                coeff * (-a * from).exp() * kfact / a.powi(k + 1) * sum
            }
        }
    }
}

fn binomial(n: i32, k: i32) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Lennard-Jones type envelope: `V >= xi` on `(0, r1]` with non-integrable
/// `xi`, `V >= -w` on `[r1, r2]`, `V >= -eta` on `[r2, inf)` with integrable
/// `eta`. Both `xi` and `eta` must be nonnegative and monotone decreasing on
/// their domains; [`Envelope::verify_on_grid`] samples that.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Envelope {
    pub r1: f64,
    pub r2: f64,
    pub w: f64,
    pub xi: EnvelopeFn,
    pub eta: EnvelopeFn,
}

impl Envelope {
    pub fn validate(&self, d: u32) -> Result<(), PotentialError> {
        if !(self.r1 > 0.0 && self.r2 >= self.r1) {
            return Err(PotentialError::Invalid(format!(
                "envelope needs 0 < r1 <= r2, got r1={}, r2={}",
                self.r1, self.r2
            )));
        }
        if !self.eta.tail_integrable(d) {
            return Err(PotentialError::Invalid(
                "envelope eta tail integral diverges".into(),
            ));
        }
        Ok(())
    }

    /// Samples nonnegativity and monotonicity of `xi` on `(0, r1]` and `eta`
    /// on `[r2, inf)`, and `V >= envelope bound` against the potential.
    pub fn verify_on_grid(&self, p: &RadialPotential) -> Result<(), PotentialError> {
        let check = |f: &EnvelopeFn, lo: f64, hi: f64, name: &str| {
            let mut prev = f64::INFINITY;
            for i in 0..=200 {
                let r = lo * (hi / lo).powf(i as f64 / 200.0);
                let v = f.eval(r);
                if v < -1e-12 {
                    return Err(PotentialError::Invalid(format!(
                        "envelope {name} negative at r={r}: {v}"
                    )));
                }
                if v > prev * (1.0 + 1e-9) + 1e-12 {
                    return Err(PotentialError::Invalid(format!(
                        "envelope {name} not monotone decreasing near r={r}"
                    )));
                }
                prev = v;
            }
            Ok(())
        };
        check(&self.xi, self.r1 * 1e-3, self.r1, "xi")?;
        check(&self.eta, self.r2, self.r2 * 100.0, "eta")?;
        // envelope sampling: V >= xi below r1, V >= -w on [r1,r2], V >= -eta beyond
        for i in 0..=300 {
            let r = self.r1 * 1e-3 * (self.r2 * 100.0 / (self.r1 * 1e-3)).powf(i as f64 / 300.0);
            let v = p.evaluate(r).map_err(|e| PotentialError::Invalid(e.to_string()))?;
            let bound = if r <= self.r1 {
                self.xi.eval(r)
            } else if r <= self.r2 {
                -self.w
            } else {
                -self.eta.eval(r)
            };
            if let Some(v) = v.as_finite() {
                if v < bound - 1e-9 * (1.0 + bound.abs()) {
                    return Err(PotentialError::Invalid(format!(
                        "potential violates its envelope at r={r}: V={v} < {bound}"
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Potential kinds
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `+inf` for `r <= radius`, 0 beyond.
    HardCore { radius: f64 },
    /// `+inf` for `r <= core_radius` (core optional via `core_radius = 0`),
    /// `-depth` on `(core_radius, range]`, 0 beyond.
    SquareWell { core_radius: f64, depth: f64, range: f64 },
    /// `e^{2 rho (1-r)} - 2 e^{rho (1-r)}`; minimum -1 at `r = 1`.
    Morse { rho: f64 },
    /// `4 eps ((sigma/r)^12 - (sigma/r)^6)`.
    #[serde(rename = "lennard_jones_126")]
    LennardJones126 { epsilon: f64, sigma: f64 },
    /// Generalized power pair `c1 r^{-p1} - c2 r^{-p2}` with `p1 > p2`.
    LjType { repulsive_coeff: f64, repulsive_exponent: f64, attractive_coeff: f64, attractive_exponent: f64 },
    /// Piecewise-linear interpolation on a strictly increasing radial grid
    /// (log-uniform by convention, see [`log_grid`]); clamped to the first
    /// value below the grid, 0 beyond the last point.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
    /// Componentwise sum in extended arithmetic.
    Sum { parts: Vec<PotentialKind> },
}

impl PotentialKind {
    fn eval(&self, r: f64) -> ExtendedReal {
        match self {
            PotentialKind::HardCore { radius } => {
                if r <= *radius {
                    ExtendedReal::PositiveInfinity
                } else {
                    ExtendedReal::Finite(0.0)
                }
            }
            PotentialKind::SquareWell { core_radius, depth, range } => {
                if *core_radius > 0.0 && r <= *core_radius {
                    ExtendedReal::PositiveInfinity
                } else if r <= *range {
                    ExtendedReal::Finite(-depth)
                } else {
                    ExtendedReal::Finite(0.0)
                }
            }
            PotentialKind::Morse { rho } => {
                let u = (rho * (1.0 - r)).exp();
                if u.is_infinite() {
                    ExtendedReal::PositiveInfinity
                } else {
                    ExtendedReal::finite(u * u - 2.0 * u)
                }
            }
            PotentialKind::LennardJones126 { epsilon, sigma } => {
                if r == 0.0 {
                    return ExtendedReal::PositiveInfinity;
                }
                let s6 = (sigma / r).powi(6);
                let v = 4.0 * epsilon * (s6 * s6 - s6);
                if v.is_infinite() { ExtendedReal::PositiveInfinity } else { ExtendedReal::finite(v) }
            }
            PotentialKind::LjType {
                repulsive_coeff: c1,
                repulsive_exponent: p1,
                attractive_coeff: c2,
                attractive_exponent: p2,
            } => {
                if r == 0.0 {
                    return ExtendedReal::PositiveInfinity;
                }
                let v = c1 * r.powf(-p1) - c2 * r.powf(-p2);
                if v.is_infinite() { ExtendedReal::PositiveInfinity } else { ExtendedReal::finite(v) }
            }
            PotentialKind::Tabulated { radii, values } => {
                if r <= radii[0] {
                    return ExtendedReal::finite(values[0]);
                }
                if r >= *radii.last().unwrap() {
                    return ExtendedReal::Finite(0.0);
                }
                let idx = radii.partition_point(|&g| g < r) - 1;
                let (r0, r1) = (radii[idx], radii[idx + 1]);
                let t = (r - r0) / (r1 - r0);
                ExtendedReal::finite(values[idx] * (1.0 - t) + values[idx + 1] * t)
            }
            PotentialKind::Sum { parts } => parts
                .iter()
                .fold(ExtendedReal::Finite(0.0), |acc, p| acc + p.eval(r)),
        }
    }

    fn intrinsic_core(&self) -> Option<f64> {
        match self {
            PotentialKind::HardCore { radius } => Some(*radius),
            PotentialKind::SquareWell { core_radius, .. } if *core_radius > 0.0 => {
                Some(*core_radius)
            }
            PotentialKind::Sum { parts } => parts
                .iter()
                .filter_map(|p| p.intrinsic_core())
                .max_by(|a, b| a.partial_cmp(b).unwrap()),
            _ => None,
        }
    }

    /// Radii where the formula jumps or kinks; used as quadrature panel
    /// boundaries.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            PotentialKind::HardCore { radius } => vec![*radius],
            PotentialKind::SquareWell { core_radius, range, .. } => {
                let mut v = vec![*range];
                if *core_radius > 0.0 {
                    v.push(*core_radius);
                }
                v
            }
            PotentialKind::Morse { rho } => vec![1.0 - 2f64.ln() / rho, 1.0],
            PotentialKind::LennardJones126 { sigma, .. } => {
                vec![*sigma, 2f64.powf(1.0 / 6.0) * sigma]
            }
            PotentialKind::LjType {
                repulsive_coeff: c1,
                repulsive_exponent: p1,
                attractive_coeff: c2,
                attractive_exponent: p2,
            } => {
                if *c2 > 0.0 && *c1 > 0.0 {
                    vec![(c1 / c2).powf(1.0 / (p1 - p2))]
                } else {
                    vec![]
                }
            }
            PotentialKind::Tabulated { radii, .. } => radii.clone(),
            PotentialKind::Sum { parts } => {
                let mut v: Vec<f64> = parts.iter().flat_map(|p| p.breakpoints()).collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v
            }
        }
    }

    fn validate(&self) -> Result<(), PotentialError> {
        let bad = |msg: String| Err(PotentialError::Invalid(msg));
        match self {
            PotentialKind::HardCore { radius } => {
                if *radius <= 0.0 {
                    return bad(format!("hard core radius must be positive, got {radius}"));
                }
            }
            PotentialKind::SquareWell { core_radius, range, .. } => {
                if *core_radius < 0.0 || *range <= *core_radius {
                    return bad(format!(
                        "square well needs 0 <= core_radius < range, got {core_radius}, {range}"
                    ));
                }
            }
            PotentialKind::Morse { rho } => {
                if *rho <= 0.0 {
                    return bad(format!("Morse rho must be positive, got {rho}"));
                }
            }
            PotentialKind::LennardJones126 { epsilon, sigma } => {
                if *epsilon <= 0.0 || *sigma <= 0.0 {
                    return bad("LJ(12,6) needs positive epsilon and sigma".into());
                }
            }
            PotentialKind::LjType {
                repulsive_coeff,
                repulsive_exponent,
                attractive_coeff,
                attractive_exponent,
            } => {
                if *repulsive_coeff <= 0.0
                    || *attractive_coeff < 0.0
                    || repulsive_exponent <= attractive_exponent
                {
                    return bad("LJ-type needs c1 > 0, c2 >= 0 and p1 > p2".into());
                }
            }
            PotentialKind::Tabulated { radii, values } => {
                if radii.len() != values.len() || radii.len() < 2 {
                    return bad("tabulated potential needs matching radii/values, length >= 2".into());
                }
                if radii[0] <= 0.0 || radii.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("tabulated radii must be positive and strictly increasing".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("tabulated values must be finite".into());
                }
            }
            PotentialKind::Sum { parts } => {
                if parts.is_empty() {
                    return bad("sum potential needs at least one part".into());
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }
}

/// Log-uniform grid of `n` radii on `[rmin, rmax]`.
pub fn log_grid(rmin: f64, rmax: f64, n: usize) -> Vec<f64> {
    assert!(rmin > 0.0 && rmax > rmin && n >= 2);
    let ratio = (rmax / rmin).ln();
    (0..n)
        .map(|i| rmin * (ratio * i as f64 / (n - 1) as f64).exp())
        .collect()
}

// ---------------------------------------------------------------------------
// Tail behavior
// ---------------------------------------------------------------------------

/// What is known analytically about `|V(r)|` for large `r`.
#[derive(Clone, Debug, PartialEq)]
pub enum TailBehavior {
    /// `V(r) = 0` exactly for `r >= from`.
    Zero { from: f64 },
    /// `|V(r)| <= eta(r)` for `r >= from`, with closed-form tail integrals.
    Enveloped { from: f64, eta: EnvelopeFn },
    /// No verifiable tail information.
    Unknown,
}

// ---------------------------------------------------------------------------
// RadialPotential
// ---------------------------------------------------------------------------

/// Ruelle split metadata: `V = phi1 + phi2` with `phi1 >= 0` tempered and
/// `phi2` finite, stable with constant `stability_constant_phi2`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RuelleSplit {
    pub phi1: Box<RadialPotential>,
    pub phi2: Box<RadialPotential>,
    pub stability_constant_phi2: f64,
}

impl RuelleSplit {
    /// Grid checks: `phi1 >= 0` everywhere sampled, `phi2` finite everywhere.
    pub fn verify_on_grid(&self) -> Result<(), PotentialError> {
        for i in 0..=400 {
            let r = 1e-4 * (1e6f64).powf(i as f64 / 400.0);
            if let Some(v) = self.phi1.evaluate(r)?.as_finite() {
                if v < -1e-12 {
                    return Err(PotentialError::Invalid(format!(
                        "ruelle split phi1 negative at r={r}: {v}"
                    )));
                }
            }
            if self.phi2.evaluate(r)?.is_infinite() {
                return Err(PotentialError::Invalid(format!(
                    "ruelle split phi2 infinite at r={r}"
                )));
            }
        }
        Ok(())
    }
}

/// A radial pair potential with dimension and optional core, envelope and
/// Ruelle-split metadata.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RadialPotential {
    #[serde(flatten)]
    pub kind: PotentialKind,
    pub dimension: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hard_core_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Envelope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ruelle_split: Option<RuelleSplit>,
}

/// Structural classification labels. `Stable` is deliberately absent:
/// stability is a global property established by the `stability` module or
/// asserted by the caller, never read off the formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Repulsive,
    Bounded,
    HardCore,
    LjType,
    AbsolutelySummableCandidate,
}

impl RadialPotential {
    pub fn new(kind: PotentialKind, dimension: u32) -> RadialPotential {
        RadialPotential {
            kind,
            dimension,
            hard_core_radius: None,
            envelope: None,
            ruelle_split: None,
        }
    }

    pub fn hard_core(radius: f64, dimension: u32) -> RadialPotential {
        RadialPotential::new(PotentialKind::HardCore { radius }, dimension)
    }

    pub fn square_well(core_radius: f64, depth: f64, range: f64, dimension: u32) -> RadialPotential {
        RadialPotential::new(
            PotentialKind::SquareWell { core_radius, depth, range },
            dimension,
        )
    }

    pub fn morse(rho: f64, dimension: u32) -> RadialPotential {
        RadialPotential::new(PotentialKind::Morse { rho }, dimension)
    }

    pub fn lennard_jones(epsilon: f64, sigma: f64, dimension: u32) -> RadialPotential {
        RadialPotential::new(PotentialKind::LennardJones126 { epsilon, sigma }, dimension)
    }

    /// The LJ(12,6) potential with its canonical envelope:
    /// `xi = V` on `(0, sigma]`, `w = eps`, `eta = |V|` beyond the minimum.
    pub fn lennard_jones_with_envelope(epsilon: f64, sigma: f64, dimension: u32) -> RadialPotential {
        let mut p = Self::lennard_jones(epsilon, sigma, dimension);
        let c = 4.0 * epsilon;
        let s6 = sigma.powi(6);
        let s12 = s6 * s6;
        p.envelope = Some(Envelope {
            r1: sigma,
            r2: 2f64.powf(1.0 / 6.0) * sigma,
            w: epsilon,
            xi: EnvelopeFn::PowerSum { terms: vec![(c * s12, 12.0), (-c * s6, 6.0)] },
            eta: EnvelopeFn::PowerSum { terms: vec![(c * s6, 6.0), (-c * s12, 12.0)] },
        });
        p
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        if self.dimension == 0 {
            return Err(PotentialError::Invalid("dimension must be >= 1".into()));
        }
        self.kind.validate()?;
        if let Some(a) = self.hard_core_radius {
            if a < 0.0 {
                return Err(PotentialError::Invalid(format!(
                    "hard_core_radius must be nonnegative, got {a}"
                )));
            }
        }
        if let Some(env) = &self.envelope {
            env.validate(self.dimension)?;
        }
        if let Some(split) = &self.ruelle_split {
            split.phi1.validate()?;
            split.phi2.validate()?;
            if split.stability_constant_phi2 < 0.0 {
                return Err(PotentialError::Invalid(
                    "stability_constant_phi2 must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }

    /// The effective hard-core radius: the declared one if present, else the
    /// kind-intrinsic one.
    pub fn core_radius(&self) -> Option<f64> {
        self.hard_core_radius.or_else(|| self.kind.intrinsic_core())
    }

    /// Evaluates `V(r)`. `r` must be nonnegative.
    pub fn evaluate(&self, r: f64) -> Result<ExtendedReal, PotentialError> {
        if r < 0.0 || r.is_nan() {
            return Err(PotentialError::NegativeRadius(r));
        }
        if let Some(a) = self.core_radius() {
            if r <= a {
                return Ok(ExtendedReal::PositiveInfinity);
            }
        }
        Ok(self.kind.eval(r))
    }

    /// Quadrature panel boundaries: kind breakpoints plus the core radius
    /// and envelope radii.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = self.kind.breakpoints();
        if let Some(a) = self.core_radius() {
            v.push(a);
        }
        if let Some(env) = &self.envelope {
            v.push(env.r1);
            v.push(env.r2);
        }
        v.retain(|x| x.is_finite() && *x > 0.0);
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        v
    }

    /// Tail knowledge: analytic zero, a declared or natural envelope, or
    /// nothing. User-declared envelopes win over kind-natural ones.
    pub fn tail(&self) -> TailBehavior {
        if let Some(env) = &self.envelope {
            return TailBehavior::Enveloped { from: env.r2, eta: env.eta.clone() };
        }
        match &self.kind {
            PotentialKind::HardCore { radius } => TailBehavior::Zero { from: *radius },
            PotentialKind::SquareWell { range, .. } => TailBehavior::Zero { from: *range },
            PotentialKind::Morse { rho } => TailBehavior::Enveloped {
                // |V| <= 2 e^{rho(1-r)} once e^{rho(1-r)} <= 2
                from: 1.0 - 2f64.ln() / rho,
                eta: EnvelopeFn::Exponential { coeff: 2.0 * rho.exp(), rate: *rho },
            },
            PotentialKind::LennardJones126 { epsilon, sigma } => {
                let c = 4.0 * epsilon;
                let s6 = sigma.powi(6);
                TailBehavior::Enveloped {
                    from: *sigma,
                    eta: EnvelopeFn::PowerLaw { coeff: c * s6, exponent: 6.0 },
                }
            }
            PotentialKind::LjType {
                repulsive_coeff: c1,
                repulsive_exponent: _,
                attractive_coeff: c2,
                attractive_exponent: p2,
            } => {
                if *c2 == 0.0 {
                    // purely repulsive power law: not tempered unless cut off
                    let _ = c1;
                    TailBehavior::Unknown
                } else {
                    let kind_bp = self.kind.breakpoints();
                    TailBehavior::Enveloped {
                        from: kind_bp[0],
                        eta: EnvelopeFn::PowerLaw { coeff: *c2, exponent: *p2 },
                    }
                }
            }
            PotentialKind::Tabulated { radii, .. } => {
                TailBehavior::Zero { from: *radii.last().unwrap() }
            }
            PotentialKind::Sum { .. } => {
                // per-part combination is only sound when every part is known
                let parts = match &self.kind {
                    PotentialKind::Sum { parts } => parts,
                    _ => unreachable!(),
                };
                let mut from: f64 = 0.0;
                let mut terms: Vec<(f64, f64)> = Vec::new();
                let mut exps: Vec<(f64, f64)> = Vec::new();
                for part in parts {
                    let sub = RadialPotential::new(part.clone(), self.dimension);
                    match sub.tail() {
                        TailBehavior::Zero { from: f } => from = from.max(f),
                        TailBehavior::Enveloped { from: f, eta } => {
                            from = from.max(f);
                            match eta {
                                EnvelopeFn::PowerLaw { coeff, exponent } => {
                                    terms.push((coeff, exponent))
                                }
                                EnvelopeFn::PowerSum { terms: t } => terms.extend(t),
                                EnvelopeFn::Exponential { coeff, rate } => exps.push((coeff, rate)),
                            }
                        }
                        TailBehavior::Unknown => return TailBehavior::Unknown,
                    }
                }
                if terms.is_empty() && exps.len() == 1 {
                    TailBehavior::Enveloped {
                        from,
                        eta: EnvelopeFn::Exponential { coeff: exps[0].0, rate: exps[0].1 },
                    }
                } else if exps.is_empty() && !terms.is_empty() {
                    TailBehavior::Enveloped { from, eta: EnvelopeFn::PowerSum { terms } }
                } else if exps.is_empty() && terms.is_empty() {
                    TailBehavior::Zero { from }
                } else {
                    // mixed exponential + power tails: dominate exponentials
                    // by conservative power laws is not worth it here
                    TailBehavior::Unknown
                }
            }
        }
    }

    /// Is the potential finite everywhere on `(0, inf)` with a finite limit
    /// at 0?
    pub fn is_bounded(&self) -> bool {
        if self.core_radius().is_some() {
            return false;
        }
        fn kind_bounded(k: &PotentialKind) -> bool {
            match k {
                PotentialKind::HardCore { .. } => false,
                PotentialKind::SquareWell { core_radius, .. } => *core_radius == 0.0,
                PotentialKind::Morse { .. } | PotentialKind::Tabulated { .. } => true,
                PotentialKind::LennardJones126 { .. } | PotentialKind::LjType { .. } => false,
                PotentialKind::Sum { parts } => parts.iter().all(kind_bounded),
            }
        }
        kind_bounded(&self.kind)
    }

    fn is_structurally_repulsive(&self) -> bool {
        fn kind_rep(k: &PotentialKind) -> bool {
            match k {
                PotentialKind::HardCore { .. } => true,
                PotentialKind::SquareWell { depth, .. } => *depth <= 0.0,
                PotentialKind::Morse { .. }
                | PotentialKind::LennardJones126 { .. } => false,
                PotentialKind::LjType { attractive_coeff, .. } => *attractive_coeff == 0.0,
                PotentialKind::Tabulated { values, .. } => values.iter().all(|v| *v >= 0.0),
                PotentialKind::Sum { parts } => parts.iter().all(kind_rep),
            }
        }
        kind_rep(&self.kind)
    }

    fn is_lj_type(&self) -> bool {
        fn kind_lj(k: &PotentialKind) -> bool {
            match k {
                PotentialKind::LennardJones126 { .. } => true,
                PotentialKind::LjType { repulsive_coeff, .. } => *repulsive_coeff > 0.0,
                PotentialKind::Sum { parts } => parts.iter().any(kind_lj),
                _ => false,
            }
        }
        kind_lj(&self.kind) && self.core_radius().is_none()
    }

    /// Structural labels; never infers stability or unverifiable analysis.
    pub fn classify(&self) -> BTreeSet<Label> {
        let mut labels = BTreeSet::new();
        if self.core_radius().map(|a| a > 0.0).unwrap_or(false) {
            labels.insert(Label::HardCore);
        }
        if self.is_structurally_repulsive() {
            labels.insert(Label::Repulsive);
        }
        if self.is_bounded() {
            labels.insert(Label::Bounded);
        }
        if self.is_lj_type() {
            labels.insert(Label::LjType);
        }
        let tail_ok = match self.tail() {
            TailBehavior::Zero { .. } => true,
            TailBehavior::Enveloped { eta, .. } => eta.tail_integrable(self.dimension),
            TailBehavior::Unknown => false,
        };
        if self.is_bounded() && tail_ok {
            labels.insert(Label::AbsolutelySummableCandidate);
        }
        labels
    }

    /// Penrose check (artifact sense): positive hard core, finite
    /// nonpositive tail, sampled on a grid.
    pub fn is_penrose(&self) -> bool {
        let Some(a) = self.core_radius() else { return false };
        if a <= 0.0 {
            return false;
        }
        for i in 1..=400 {
            let r = a * (1.0 + 0.02 * i as f64);
            match self.evaluate(r) {
                Ok(ExtendedReal::Finite(v)) => {
                    if v > 1e-12 {
                        return false;
                    }
                }
                _ => return false,
            }
        }
        matches!(self.tail(), TailBehavior::Zero { .. } | TailBehavior::Enveloped { .. })
    }

    /// The algebraic pair interaction `beta * V(|x_i - x_j|)` on `points`.
    pub fn interaction_matrix(
        &self,
        beta: f64,
        points: &[Vec<f64>],
    ) -> Result<InteractionMatrix, PotentialError> {
        let n = points.len();
        if n < 2 {
            return Err(PotentialError::TooFewPoints(n));
        }
        for pt in points {
            if pt.len() != self.dimension as usize {
                return Err(PotentialError::DimensionMismatch {
                    expected: self.dimension,
                    got: pt.len(),
                });
            }
        }
        let mut m = InteractionMatrix::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let r = distance(&points[i], &points[j]);
                m.set(i, j, self.evaluate(r)?.scale(beta));
            }
        }
        Ok(m)
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------------------
// Interaction matrices
// ---------------------------------------------------------------------------

/// Symmetric `n x n` matrix of extended reals with an unread diagonal; the
/// algebraic pair interaction on `[n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionMatrix {
    n: usize,
    // upper triangle, entry (i, j) with i < j at index i*n - i*(i+1)/2 + j - i - 1
    entries: Vec<ExtendedReal>,
}

impl InteractionMatrix {
    pub fn zeros(n: usize) -> InteractionMatrix {
        assert!(n >= 2, "interaction matrix needs n >= 2");
        InteractionMatrix { n, entries: vec![ExtendedReal::Finite(0.0); n * (n - 1) / 2] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> ExtendedReal) -> InteractionMatrix {
        let mut m = InteractionMatrix::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * self.n - i * (i + 1) / 2 + j - i - 1
    }

    /// Symmetric access, `i != j`.
    pub fn get(&self, i: usize, j: usize) -> ExtendedReal {
        assert!(i != j, "diagonal of an interaction matrix is never read");
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.entries[self.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ExtendedReal) {
        assert!(i != j);
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.entries[k] = v;
    }

    /// Upper-triangle iteration in lexicographic pair order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, ExtendedReal)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).map(move |j| (i, j, self.entries[self.idx(i, j)]))
        })
    }

    pub fn is_bounded(&self) -> bool {
        self.entries.iter().all(|e| e.is_finite())
    }

    /// `i ~ j` compatibility: the pair value is finite.
    pub fn compatible(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_finite()
    }

    /// Entrywise `V^H`: infinite entries replaced by the cap `H`.
    pub fn capped(&self, h: f64) -> InteractionMatrix {
        InteractionMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|e| match e {
                    ExtendedReal::Finite(v) => ExtendedReal::Finite(*v),
                    ExtendedReal::PositiveInfinity => ExtendedReal::finite(h),
                })
                .collect(),
        }
    }

    /// Entrywise sum in extended arithmetic.
    pub fn add(&self, other: &InteractionMatrix) -> InteractionMatrix {
        assert_eq!(self.n, other.n);
        InteractionMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}
