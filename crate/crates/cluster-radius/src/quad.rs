//! Radial quadrature in `d` dimensions for the integral constants.
//!
//! Every integral in sight is radial, so everything reduces to adaptive
//! one-dimensional panels with the surface-area prefactor
//! `2 pi^{d/2} / Gamma(d/2)`. Kinks (core boundary, well edge, sign
//! changes) are panel boundaries; panels are refined by comparing one
//! Gauss-Legendre pass against its bisection. Improper tails are truncated
//! at a cut chosen so that the closed-form envelope bound on the remainder
//! is far below tolerance, and that bound is then added to the result.

use crate::potential::{
    EnvelopeFn, PotentialError, RadialPotential, RuelleSplit, TailBehavior,
};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, LazyLock, Mutex};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum QuadError {
    #[error("temperedness failure: {0}")]
    Temperedness(String),
    #[error("classification error: {0}")]
    Classification(String),
    #[error("summability error: {0}")]
    Summability(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// Tolerances and panel order for the adaptive radial integrator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Optional truncation-radius override; chosen automatically from the
    /// envelope when absent.
    pub tail_cut: Option<f64>,
    pub panel_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        // far below every acceptance tolerance in the suite
        QuadratureSpec { rel_tol: 1e-8, abs_tol: 1e-12, tail_cut: None, panel_order: 16 }
    }
}

impl QuadratureSpec {
    pub fn with_tols(rel_tol: f64, abs_tol: f64) -> Self {
        QuadratureSpec { rel_tol, abs_tol, ..Default::default() }
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes
// ---------------------------------------------------------------------------

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

static GL_CACHE: LazyLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// ascending nodes. Computed by Newton iteration and cached.
pub fn gauss_legendre(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    assert!(n >= 1);
    if let Some(hit) = GL_CACHE.lock().unwrap().get(&n) {
        return hit.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..64 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let arc = Arc::new((nodes, weights));
    GL_CACHE.lock().unwrap().insert(n, arc.clone());
    arc
}

fn gl_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        s += w * f(mid + half * x);
    }
    s * half
}

/// Integral value together with the internal refinement-difference error
/// estimate.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
}

struct Adaptive<'a> {
    f: &'a dyn Fn(f64) -> f64,
    rule: Arc<(Vec<f64>, Vec<f64>)>,
    rel_tol: f64,
}

impl Adaptive<'_> {
    fn panel(&self, a: f64, b: f64, abs_budget: f64, depth: u32) -> (f64, f64) {
        let whole = gl_panel(self.f, a, b, &self.rule);
        let mid = 0.5 * (a + b);
        let left = gl_panel(self.f, a, mid, &self.rule);
        let right = gl_panel(self.f, mid, b, &self.rule);
        let refined = left + right;
        let err = (whole - refined).abs();
        if err <= abs_budget.max(self.rel_tol * refined.abs()) || depth >= 48 || (b - a) < 1e-300 {
            return (refined, err);
        }
        let (lv, le) = self.panel(a, mid, 0.5 * abs_budget, depth + 1);
        let (rv, re) = self.panel(mid, b, 0.5 * abs_budget, depth + 1);
        (lv + rv, le + re)
    }
}

/// Adaptive Gauss-Legendre integration of `f` on `[lo, hi]` with the given
/// interior panel boundaries. Deterministic: panels are processed in
/// ascending order and the recursion has no data-dependent reordering.
pub fn integrate(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> QuadResult {
    if hi <= lo {
        return QuadResult { value: 0.0, error_estimate: 0.0 };
    }
    let mut edges = vec![lo];
    for &b in breakpoints {
        if b > lo && b < hi {
            edges.push(b);
        }
    }
    edges.push(hi);
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * hi.abs().max(1.0));

    let adaptive = Adaptive {
        f,
        rule: gauss_legendre(spec.panel_order.max(2)),
        rel_tol: spec.rel_tol,
    };
    let mut value = 0.0;
    let mut err = 0.0;
    let span = hi - lo;
    for w in edges.windows(2) {
        let budget = spec.abs_tol * ((w[1] - w[0]) / span).max(1e-6);
        let (v, e) = adaptive.panel(w[0], w[1], budget, 0);
        value += v;
        err += e;
    }
    QuadResult { value, error_estimate: err }
}

// ---------------------------------------------------------------------------
// Sphere geometry
// ---------------------------------------------------------------------------

/// `Gamma(k/2)` for a positive integer `k`, in closed form.
fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1);
    if k % 2 == 0 {
        // (k/2 - 1)!
        (1..k / 2).map(|i| i as f64).product()
    } else {
        // (k/2 - 1)(k/2 - 2)...(1/2) sqrt(pi)
        let mut v = PI.sqrt();
        let mut half = k as f64 / 2.0 - 1.0;
        while half > 0.0 {
            v *= half;
            half -= 1.0;
        }
        v
    }
}

/// Volume `W_a(d)` of the radius-`a` ball in `d` dimensions.
pub fn sphere_volume(d: u32, a: f64) -> f64 {
    assert!(d >= 1, "dimension must be >= 1");
    assert!(a >= 0.0);
    PI.powf(d as f64 / 2.0) * a.powi(d as i32) / gamma_half(d + 2)
}

/// Surface area of the unit sphere in `d` dimensions, `2 pi^{d/2} / Gamma(d/2)`.
pub fn surface_area(d: u32) -> f64 {
    assert!(d >= 1);
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

// ---------------------------------------------------------------------------
// Integral constants
// ---------------------------------------------------------------------------

/// How the improper tail of the last computed constant was handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailStatus {
    AnalyticZero,
    EnvelopeBounded,
    /// No envelope available beyond the truncation radius; the reported
    /// value carries an unverified tail.
    Unverified,
}

/// The integral constants attached to one potential at one temperature.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegralConstants {
    pub c_beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_star_beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_tilde_beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_l1: Option<f64>,
    /// `W_a(d)` for the hard core, 0 without one.
    pub sphere_volume: f64,
    pub tail: TailStatus,
}

impl IntegralConstants {
    /// Computes every constant applicable to `p` at inverse temperature
    /// `beta`; inapplicable ones are left absent rather than failing the
    /// whole report.
    pub fn compute(
        p: &RadialPotential,
        beta: f64,
        spec: &QuadratureSpec,
    ) -> Result<IntegralConstants, QuadError> {
        let (c_beta_v, tail) = c_beta_status(p, beta, spec)?;
        let c_star = if p.is_penrose() { Some(c_star_beta(p, beta, spec)?) } else { None };
        let v_l1_v = v_l1(p, spec).ok();
        let c_tilde = match &p.ruelle_split {
            Some(split) => Some(c_tilde_beta(split, beta, spec)?),
            None => None,
        };
        let w = p.core_radius().map(|a| sphere_volume(p.dimension, a)).unwrap_or(0.0);
        Ok(IntegralConstants {
            c_beta: c_beta_v,
            c_star_beta: c_star,
            c_tilde_beta: c_tilde,
            v_l1: v_l1_v,
            sphere_volume: w,
            tail,
        })
    }
}

/// Describes one radial improper integral: core handled exactly, middle by
/// adaptive panels, tail by envelope bound.
struct RadialJob<'a> {
    p: &'a RadialPotential,
    /// pointwise integrand on the finite region, as a function of (r, V info)
    integrand: Box<dyn Fn(f64) -> f64 + 'a>,
    /// converts the envelope eta into a pointwise bound for the integrand
    tail_of_eta: Box<dyn Fn(f64) -> f64 + 'a>,
    /// amplification guard: tail bound is trusted once eta(T) is below this
    eta_small: f64,
}

fn run_radial(job: RadialJob<'_>, spec: &QuadratureSpec) -> Result<(f64, TailStatus), QuadError> {
    let p = job.p;
    let d = p.dimension;
    let surf = surface_area(d);
    let a = p.core_radius().unwrap_or(0.0);
    let lo = a;

    let weighted = |r: f64| r.powi(d as i32 - 1) * (job.integrand)(r);
    let breaks = p.breakpoints();

    let (cut, tail_value, status) = match (spec.tail_cut, p.tail()) {
        (Some(t), behavior) => {
            let status = match behavior {
                TailBehavior::Zero { .. } => TailStatus::AnalyticZero,
                TailBehavior::Enveloped { .. } => TailStatus::EnvelopeBounded,
                TailBehavior::Unknown => TailStatus::Unverified,
            };
            (t, 0.0, status)
        }
        (None, TailBehavior::Zero { from }) => (from, 0.0, TailStatus::AnalyticZero),
        (None, TailBehavior::Enveloped { from, eta }) => {
            if !eta.tail_integrable(d) {
                return Err(QuadError::Temperedness(
                    "envelope tail integral diverges".into(),
                ));
            }
            // coarse pass for the relative-tolerance scale
            let t0 = from.max(lo).max(1.0) * 2.0;
            let coarse = integrate(
                &weighted,
                lo,
                t0,
                &breaks,
                &QuadratureSpec { rel_tol: 1e-3, abs_tol: 1e-6, ..spec.clone() },
            );
            let target = 0.1 * spec.abs_tol.max(spec.rel_tol * coarse.value.abs().max(1e-30));
            let mut cut = t0;
            let mut ok = false;
            for _ in 0..80 {
                let bound = surf * (job.tail_of_eta)(cut);
                if bound <= target && eta.eval(cut) <= job.eta_small {
                    ok = true;
                    break;
                }
                cut *= 2.0;
            }
            if !ok {
                return Err(QuadError::Temperedness(format!(
                    "could not drive envelope tail below {target:e}"
                )));
            }
            (cut, surf * (job.tail_of_eta)(cut), TailStatus::EnvelopeBounded)
        }
        (None, TailBehavior::Unknown) => {
            // Open contract: integrate to a heuristic cut and flag the tail.
            let scale = breaks.last().copied().unwrap_or(1.0).max(1.0);
            (64.0 * scale, 0.0, TailStatus::Unverified)
        }
    };

    let core = if a > 0.0 { sphere_volume(d, a) * (job.integrand)(a * 0.5) } else { 0.0 };
    let main = integrate(&weighted, lo, cut, &breaks, spec);
    Ok((core + surf * main.value + tail_value, status))
}

/// `C(beta) = int |e^{-beta V(|x|)} - 1| dx`; inside a hard core the
/// integrand is exactly 1.
pub fn c_beta(p: &RadialPotential, beta: f64, spec: &QuadratureSpec) -> Result<f64, QuadError> {
    Ok(c_beta_status(p, beta, spec)?.0)
}

pub fn c_beta_status(
    p: &RadialPotential,
    beta: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, TailStatus), QuadError> {
    assert!(beta > 0.0, "beta must be positive");
    let job = RadialJob {
        p,
        integrand: Box::new(move |r| p.evaluate(r).map(|v| v.scale(beta).mayer_f().abs()).unwrap_or(1.0)),
        // |e^{-beta V} - 1| <= beta*eta*e^{beta*eta}; the e^{beta*eta(T)}
        // amplification is bounded by e once eta(T) <= 1/beta
        tail_of_eta: Box::new(move |cut| match p.tail() {
            TailBehavior::Enveloped { eta, .. } => {
                let amp = (beta * eta.eval(cut)).exp();
                amp * beta * eta.tail_integral(p.dimension, cut)
            }
            _ => 0.0,
        }),
        eta_small: 1.0 / beta,
    };
    run_radial(job, spec)
}

/// `C*(beta) = W_a(d) + beta int_{|x| >= a} |V| dx`; Penrose potentials only.
pub fn c_star_beta(
    p: &RadialPotential,
    beta: f64,
    spec: &QuadratureSpec,
) -> Result<f64, QuadError> {
    assert!(beta > 0.0);
    if !p.is_penrose() {
        return Err(QuadError::Classification(
            "C*(beta) requires a Penrose potential (hard core, finite nonpositive tail)".into(),
        ));
    }
    let a = p.core_radius().expect("penrose potential has a core");
    let d = p.dimension;
    let surf = surface_area(d);
    let weighted = |r: f64| {
        r.powi(d as i32 - 1)
            * p.evaluate(r).map(|v| v.as_finite().map(f64::abs).unwrap_or(0.0)).unwrap_or(0.0)
    };
    let breaks = p.breakpoints();
    let (cut, tail_value) = match (spec.tail_cut, p.tail()) {
        (Some(t), _) => (t, 0.0),
        (None, TailBehavior::Zero { from }) => (from.max(a), 0.0),
        (None, TailBehavior::Enveloped { from, eta }) => {
            if !eta.tail_integrable(d) {
                return Err(QuadError::Temperedness("envelope tail diverges".into()));
            }
            let mut cut = from.max(a).max(1.0) * 2.0;
            for _ in 0..80 {
                if surf * eta.tail_integral(d, cut) <= 0.1 * spec.abs_tol {
                    break;
                }
                cut *= 2.0;
            }
            (cut, surf * eta.tail_integral(d, cut))
        }
        (None, TailBehavior::Unknown) => {
            return Err(QuadError::Temperedness(
                "C* needs an envelope or an analytically zero tail".into(),
            ));
        }
    };
    let tail_int = integrate(&weighted, a, cut, &breaks, spec);
    Ok(sphere_volume(d, a) + beta * (surf * tail_int.value + tail_value))
}

/// `||V||_1 = int |V(|x|)| dx` for potentials finite everywhere.
pub fn v_l1(p: &RadialPotential, spec: &QuadratureSpec) -> Result<f64, QuadError> {
    if p.core_radius().is_some() {
        return Err(QuadError::Summability("||V||_1 diverges: hard core present".into()));
    }
    if !p.is_bounded() {
        return Err(QuadError::Summability(
            "||V||_1 requires a potential finite everywhere (diverges at the origin)".into(),
        ));
    }
    let job = RadialJob {
        p,
        integrand: Box::new(move |r| {
            p.evaluate(r).map(|v| v.as_finite().map(f64::abs).unwrap_or(0.0)).unwrap_or(0.0)
        }),
        tail_of_eta: Box::new(move |cut| match p.tail() {
            TailBehavior::Enveloped { eta, .. } => eta.tail_integral(p.dimension, cut),
            _ => 0.0,
        }),
        eta_small: f64::INFINITY,
    };
    let (value, status) = run_radial(job, spec)?;
    if status == TailStatus::Unverified {
        return Err(QuadError::Summability(
            "||V||_1 tail cannot be verified without an envelope".into(),
        ));
    }
    Ok(value)
}

/// `C~(beta) = int [ |e^{-beta Phi1} - 1| + beta |Phi2| ] dx` for a Ruelle
/// split.
pub fn c_tilde_beta(
    split: &RuelleSplit,
    beta: f64,
    spec: &QuadratureSpec,
) -> Result<f64, QuadError> {
    let phi1_part = c_beta(&split.phi1, beta, spec)?;
    let phi2_part = v_l1(&split.phi2, spec)
        .map_err(|e| QuadError::Summability(format!("phi2 L1 norm: {e}")))?;
    Ok(phi1_part + beta * phi2_part)
}

/// Convenience: closed-form `eta` tail integral used by callers that need
/// shifted envelope masses, re-exported through [`EnvelopeFn`].
pub fn envelope_tail_mass(eta: &EnvelopeFn, d: u32, from: f64, shift: f64) -> f64 {
    surface_area(d) * eta.shifted_tail_integral(d, from, shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialKind;

    /// Simpson's rule on a fixed fine grid: the independent slow route used
    /// to validate the adaptive integrator.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn gl_nodes_integrate_polynomials_exactly() {
        let rule = gauss_legendre(8);
        // degree 15 is integrated exactly by 8 points
        let f = |x: f64| 3.0 * x.powi(15) + x.powi(14) - 2.0 * x.powi(7) + 1.0;
        let got = gl_panel(&f, -1.0, 1.0, &rule);
        let exact = 2.0 / 15.0 + 2.0; // odd terms vanish
        assert!((got - exact).abs() < 1e-13);
    }

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(3, 1.0) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((sphere_volume(1, 2.0) - 4.0).abs() < 1e-14);
        assert!((sphere_volume(2, 1.0) - PI).abs() < 1e-14);
        assert!((surface_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((surface_area(1) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_matches_simpson_on_smooth_integrand() {
        let f = |r: f64| (-r * r / 2.0).exp() * r;
        let spec = QuadratureSpec::default();
        let got = integrate(&f, 0.0, 10.0, &[], &spec);
        let slow = simpson(&f, 0.0, 10.0, 400_000);
        assert!((got.value - slow).abs() < 1e-10);
    }

    #[test]
    fn c_beta_pure_hard_core() {
        let p = RadialPotential::hard_core(1.0, 3);
        let spec = QuadratureSpec::default();
        for beta in [0.3, 1.0, 4.0] {
            let v = c_beta(&p, beta, &spec).unwrap();
            assert!((v - 4.0 * PI / 3.0).abs() < 1e-10, "beta={beta}: {v}");
        }
    }

    #[test]
    fn c_beta_square_well_closed_form() {
        // 4pi/3 + (e - 1)(4pi/3)(2^3 - 1) for a=1, w=1, R=2, beta=1
        let p = RadialPotential::square_well(1.0, 1.0, 2.0, 3);
        let spec = QuadratureSpec::default();
        let v = c_beta(&p, 1.0, &spec).unwrap();
        let exact = 4.0 * PI / 3.0 * (1.0 + (1f64.exp() - 1.0) * 7.0);
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn c_star_square_well_closed_form() {
        let p = RadialPotential::square_well(1.0, 1.0, 2.0, 3);
        let spec = QuadratureSpec::default();
        let v = c_star_beta(&p, 1.0, &spec).unwrap();
        let exact = 4.0 * PI / 3.0 * (1.0 + 7.0);
        assert!((v - exact).abs() < 1e-9 * exact);

        // zero tail: pure core reduces to the sphere volume
        let core = RadialPotential::hard_core(1.0, 3);
        let v = c_star_beta(&core, 1.0, &spec).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn c_star_strictly_below_c_for_attractive_tails() {
        let p = RadialPotential::square_well(1.0, 1.0, 2.0, 3);
        let spec = QuadratureSpec::default();
        for beta in [0.1, 0.5, 1.0, 2.0] {
            let c = c_beta(&p, beta, &spec).unwrap();
            let cs = c_star_beta(&p, beta, &spec).unwrap();
            assert!(cs < c, "beta={beta}: C*={cs}, C={c}");
        }
    }

    #[test]
    fn c_beta_rejects_nonintegrable_tail() {
        // attraction decaying like r^{-2} in d=3: the envelope tail test fails
        let p = RadialPotential::new(
            PotentialKind::LjType {
                repulsive_coeff: 1.0,
                repulsive_exponent: 12.0,
                attractive_coeff: 1.0,
                attractive_exponent: 2.0,
            },
            3,
        );
        assert!(matches!(
            c_beta(&p, 1.0, &QuadratureSpec::default()),
            Err(QuadError::Temperedness(_))
        ));
    }

    #[test]
    fn c_star_rejects_non_penrose() {
        let p = RadialPotential::morse(6.0, 3);
        assert!(matches!(
            c_star_beta(&p, 1.0, &QuadratureSpec::default()),
            Err(QuadError::Classification(_))
        ));
    }

    #[test]
    fn v_l1_examples() {
        let spec = QuadratureSpec::default();
        // coreless square well in d=1: depth 1 on [1,2] from both sides
        let p = RadialPotential::square_well(0.0, 1.0, 2.0, 1);
        // V = -1 on (0,2]; restrict to the [1,2] annulus with a sum of wells
        let tail_only = RadialPotential::new(
            PotentialKind::Sum {
                parts: vec![
                    PotentialKind::SquareWell { core_radius: 0.0, depth: 1.0, range: 2.0 },
                    PotentialKind::SquareWell { core_radius: 0.0, depth: -1.0, range: 1.0 },
                ],
            },
            1,
        );
        let v = v_l1(&tail_only, &spec).unwrap();
        assert!((v - 2.0).abs() < 1e-10, "{v}");
        let v_full = v_l1(&p, &spec).unwrap();
        assert!((v_full - 4.0).abs() < 1e-10);

        // hard cores are rejected
        assert!(matches!(
            v_l1(&RadialPotential::hard_core(1.0, 3), &spec),
            Err(QuadError::Summability(_))
        ));
        // origin-divergent potentials are rejected
        assert!(matches!(
            v_l1(&RadialPotential::lennard_jones(1.0, 1.0, 3), &spec),
            Err(QuadError::Summability(_))
        ));
    }

    #[test]
    fn morse_l1_norm_closed_form() {
        // int r^2 |V_rho| dr in closed form: signed part plus twice the
        // negative lobe beyond the zero crossing r0 = 1 - ln2/rho
        let rho = 6.0f64;
        let exp_tail = |k: f64, r: f64| (-k * r).exp() * (r * r / k + 2.0 * r / k / k + 2.0 / k / k / k);
        let signed = (2.0 * rho).exp() * 2.0 / (2.0 * rho).powi(3) - 2.0 * rho.exp() * 2.0 / rho.powi(3);
        let r0 = 1.0 - 2f64.ln() / rho;
        let neg_lobe = 2.0 * rho.exp() * exp_tail(rho, r0) - (2.0 * rho).exp() * exp_tail(2.0 * rho, r0);
        let exact = 4.0 * PI * (signed + 2.0 * neg_lobe);

        let p = RadialPotential::morse(rho, 3);
        let v = v_l1(&p, &QuadratureSpec::default()).unwrap();
        assert!((v - exact).abs() < 1e-7 * exact, "got {v}, closed form {exact}");
    }

    #[test]
    fn c_beta_morse_against_simpson_oracle() {
        let p = RadialPotential::morse(6.0, 3);
        let spec = QuadratureSpec::default();
        let v = c_beta(&p, 1.0, &spec).unwrap();
        let integrand = |r: f64| {
            r * r * p.evaluate(r).unwrap().scale(1.0).mayer_f().abs()
        };
        let slow = 4.0 * PI * simpson(&integrand, 1e-9, 40.0, 800_000);
        assert!((v - slow).abs() < 1e-6 * slow, "adaptive {v} vs simpson {slow}");
    }

    #[test]
    fn c_tilde_reduces_to_parts() {
        let spec = QuadratureSpec::default();
        // phi1 = hard core, phi2 = 0: C~ = C(core) = W_a
        let split = RuelleSplit {
            phi1: Box::new(RadialPotential::hard_core(1.0, 3)),
            phi2: Box::new(RadialPotential::square_well(0.0, 0.0, 1.0, 3)),
            stability_constant_phi2: 0.0,
        };
        let v = c_tilde_beta(&split, 1.0, &spec).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-10);

        // phi1 = 0, phi2 = Morse: C~ = beta ||phi2||
        let split = RuelleSplit {
            phi1: Box::new(RadialPotential::square_well(0.0, 0.0, 1.0, 3)),
            phi2: Box::new(RadialPotential::morse(6.0, 3)),
            stability_constant_phi2: 38.65,
        };
        let v = c_tilde_beta(&split, 1.0, &spec).unwrap();
        let l1 = v_l1(&RadialPotential::morse(6.0, 3), &spec).unwrap();
        assert!((v - l1).abs() < 1e-8 * l1);

        // square well split into core + well, beta = 1:
        // W_a + w (W_R - W_a)
        let split = RuelleSplit {
            phi1: Box::new(RadialPotential::hard_core(1.0, 3)),
            phi2: Box::new(RadialPotential::new(
                PotentialKind::Sum {
                    parts: vec![
                        PotentialKind::SquareWell { core_radius: 0.0, depth: 1.0, range: 2.0 },
                        PotentialKind::SquareWell { core_radius: 0.0, depth: -1.0, range: 1.0 },
                    ],
                },
                3,
            )),
            stability_constant_phi2: 0.5,
        };
        let v = c_tilde_beta(&split, 1.0, &spec).unwrap();
        let exact = 4.0 * PI / 3.0 + (sphere_volume(3, 2.0) - sphere_volume(3, 1.0));
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn refinement_converges() {
        let p = RadialPotential::morse(6.0, 3);
        let coarse = c_beta(&p, 1.0, &QuadratureSpec::with_tols(1e-6, 1e-9)).unwrap();
        let fine = c_beta(&p, 1.0, &QuadratureSpec::with_tols(5e-7, 5e-10)).unwrap();
        assert!((coarse - fine).abs() < 1e-6 * fine.abs());
    }

    #[test]
    fn dilation_scaling() {
        // V(r/s) multiplies every constant by s^d
        let spec = QuadratureSpec::default();
        let base = RadialPotential::square_well(1.0, 1.0, 2.0, 3);
        let s = 1.7;
        let scaled = RadialPotential::square_well(s, 1.0, 2.0 * s, 3);
        for beta in [0.5, 1.0] {
            let c0 = c_beta(&base, beta, &spec).unwrap();
            let c1 = c_beta(&scaled, beta, &spec).unwrap();
            assert!((c1 - s.powi(3) * c0).abs() < 1e-8 * c1);
            let cs0 = c_star_beta(&base, beta, &spec).unwrap();
            let cs1 = c_star_beta(&scaled, beta, &spec).unwrap();
            assert!((cs1 - s.powi(3) * cs0).abs() < 1e-8 * cs1);
        }
    }

    #[test]
    fn constants_bundle() {
        let p = RadialPotential::square_well(1.0, 1.0, 2.0, 3);
        let c = IntegralConstants::compute(&p, 1.0, &QuadratureSpec::default()).unwrap();
        assert!(c.c_star_beta.is_some());
        assert!(c.v_l1.is_none()); // hard core: no L1 norm
        assert_eq!(c.tail, TailStatus::AnalyticZero);
        assert!((c.sphere_volume - 4.0 * PI / 3.0).abs() < 1e-12);
    }
}
