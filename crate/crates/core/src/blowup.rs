//! The blown-up chart `k = Φ(y/a)` and the local analysis at the fused focus.
//!
//! With `Φ(z) = atan(z)/π + 1/2` the arctan model becomes
//!
//! ```text
//! ẋ = 1 − x − k x
//! k̇ = (1/(aπ)) sin²(πk) (β − βε − kε − α + a(β + k) cot(πk) − (αβ − α) x)
//! ```
//!
//! Rescaling time by `a` gives the fast system, which stays smooth at `a = 0`
//! where `x = 3/4` becomes a line of equilibria for `ε = 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrator::{Orientation, Section};
use crate::linalg::{self, eigenvalues, numeric_jacobian, Eigen2, Mat2};
use crate::ode::{IntegrationOptions, VectorField};
use crate::poincare::{find_limit_cycle, poincare_map, CycleOptions, PeriodicOrbit, PoincareError, SmoothFlow, Stability};
use crate::roots::{brent, newton2, RootOptions};
use crate::welander::{pseudoequilibrium, virtual_equilibria, Chart, WelanderParams, WelanderSmooth};

/// Distance kept from `k = 0` and `k = 1`.
pub const K_GUARD: f64 = 1e-6;

/// The point `(x, k) = (3/4, 1/3)` at `ε = a = 0`.
pub const BASE_POINT: [f64; 2] = [0.75, 1.0 / 3.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlowupError {
    #[error("k = {k} is outside ({lo}, {hi})", lo = K_GUARD, hi = 1.0 - K_GUARD)]
    Domain { k: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("ε = 0: the critical manifold degenerates to the line x = 3/4")]
    NonHyperbolic,
    #[error("equilibrium iteration did not converge (best {best:?})")]
    NotConverged { best: [f64; 2] },
    #[error("no equilibrium with k inside the guarded domain")]
    NoRootInDomain,
    #[error("no eigenvalue crossing for a = {a} on ε ∈ [{lo}, {hi}] (largest real part {max_re:e})")]
    NotFound { a: f64, lo: f64, hi: f64, max_re: f64 },
    #[error("coefficient {name}: constant {constant} disagrees with finite differences {oracle} (relative error {rel_err:e})")]
    Coefficient { name: &'static str, constant: f64, oracle: f64, rel_err: f64 },
    #[error("limit cycle: {0}")]
    Cycle(#[from] PoincareError),
}

fn check_a(p: &WelanderParams, strict: bool) -> Result<(), BlowupError> {
    p.validate().map_err(|e| BlowupError::InvalidParams(e.to_string()))?;
    if strict && p.a <= 0.0 {
        return Err(BlowupError::InvalidParams(format!("the blown-up chart needs a > 0 (got {})", p.a)));
    }
    Ok(())
}

fn check_k(k: f64) -> Result<(), BlowupError> {
    if k > K_GUARD && k < 1.0 - K_GUARD {
        Ok(())
    } else {
        Err(BlowupError::Domain { k })
    }
}

pub fn phi(z: f64) -> f64 {
    z.atan() / PI + 0.5
}

pub fn phi_inv(k: f64) -> Result<f64, BlowupError> {
    if k > 0.0 && k < 1.0 {
        Ok(-1.0 / (PI * k).tan())
    } else {
        Err(BlowupError::Domain { k })
    }
}

/// `(x, y) ↦ (x, Φ(y/a))`.
pub fn xy_to_xk(xy: [f64; 2], a: f64) -> [f64; 2] {
    [xy[0], phi(xy[1] / a)]
}

/// `(x, k) ↦ (x, a Φ⁻¹(k))`.
pub fn xk_to_xy(xk: [f64; 2], a: f64) -> Result<[f64; 2], BlowupError> {
    Ok([xk[0], a * phi_inv(xk[1])?])
}

/// Fast-time right-hand side without parameter or domain checks. It is
/// polynomial in `a` and `ε`, which the finite-difference oracle relies on.
fn fast_rhs(x: f64, k: f64, p: &WelanderParams) -> [f64; 2] {
    let s = (PI * k).sin();
    let cot = (PI * k).cos() / s;
    let g = p.beta - p.beta * p.epsilon - k * p.epsilon - p.alpha + p.a * (p.beta + k) * cot
        - (p.alpha * p.beta - p.alpha) * x;
    [p.a * (1.0 - x - k * x), s * s * g / PI]
}

/// Right-hand side in the original time.
pub fn blowup_field(x: f64, k: f64, p: &WelanderParams) -> Result<[f64; 2], BlowupError> {
    check_a(p, true)?;
    check_k(k)?;
    let [fx, fk] = fast_rhs(x, k, p);
    Ok([fx / p.a, fk / p.a])
}

/// Right-hand side in the fast time `τ = t/a`; defined for `a = 0` too.
pub fn fast_field(x: f64, k: f64, p: &WelanderParams) -> Result<[f64; 2], BlowupError> {
    check_a(p, false)?;
    check_k(k)?;
    Ok(fast_rhs(x, k, p))
}

/// The blown-up model in the original time, for trajectory integration.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowUpSystem {
    pub params: WelanderParams,
}

impl BlowUpSystem {
    pub fn new(params: WelanderParams) -> Result<Self, BlowupError> {
        check_a(&params, true)?;
        Ok(Self { params })
    }
}

impl VectorField for BlowUpSystem {
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, String> {
        blowup_field(x[0], x[1], &self.params).map(|v| v.to_vec()).map_err(|e| e.to_string())
    }
}

/// The fast system, smooth down to `a = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FastSystem {
    pub params: WelanderParams,
}

impl VectorField for FastSystem {
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, String> {
        fast_field(x[0], x[1], &self.params).map(|v| v.to_vec()).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub k: f64,
    /// `∂k′/∂k` on the manifold.
    pub transverse_rate: f64,
    pub normally_hyperbolic: bool,
}

/// Point of the `a = 0` critical manifold above `x`, if it lies in the
/// guarded domain.
pub fn critical_manifold(x: f64, p: &WelanderParams) -> Result<Option<CriticalPoint>, BlowupError> {
    check_a(p, false)?;
    if p.epsilon == 0.0 {
        return Err(BlowupError::NonHyperbolic);
    }
    let k = (p.beta - p.beta * p.epsilon - p.alpha - (p.alpha * p.beta - p.alpha) * x) / p.epsilon;
    if check_k(k).is_err() {
        return Ok(None);
    }
    // the bracket vanishes on the manifold, so only its own k-derivative survives
    let transverse_rate = -p.epsilon * (PI * k).sin().powi(2) / PI;
    Ok(Some(CriticalPoint { k, transverse_rate, normally_hyperbolic: transverse_rate != 0.0 }))
}

/// Equilibrium of the blown-up system near the Filippov pseudoequilibrium.
///
/// When the sliding flow has no equilibrium, Newton is seeded at the
/// equilibria of the `k = 0` and `k = 1` fields instead.
pub fn smooth_equilibrium(p: &WelanderParams) -> Result<[f64; 2], BlowupError> {
    check_a(p, true)?;
    let mut seeds: Vec<[f64; 2]> = pseudoequilibrium(p).map(|(x, k)| [x, k]).into_iter().collect();
    for e in virtual_equilibria(p) {
        seeds.push(xy_to_xk([e.t, e.to_xy(p).y], p.a));
    }
    seeds.push(BASE_POINT);
    // scale the x-equation by 1/a so both residuals are O(1)
    let g = |v: [f64; 2]| {
        check_k(v[1]).ok()?;
        let [_, fk] = fast_rhs(v[0], v[1], p);
        Some([1.0 - v[0] - v[1] * v[0], fk])
    };
    let jac = |v: [f64; 2]| numeric_jacobian(g, v, 1e-7);
    let mut outside = false;
    for seed in seeds.iter().filter(|s| check_k(s[1]).is_ok()) {
        match newton2(g, jac, *seed, 1e-15, 100) {
            Ok(r) if check_k(r[1]).is_ok() => return Ok(r),
            Ok(_) => outside = true,
            Err(_) => {}
        }
    }
    if outside {
        Err(BlowupError::NoRootInDomain)
    } else {
        Err(BlowupError::NotConverged { best: seeds[0] })
    }
}

/// Numerical Jacobian of the fast field.
pub fn fast_jacobian(x: [f64; 2], p: &WelanderParams) -> Result<Mat2, BlowupError> {
    check_a(p, false)?;
    check_k(x[1])?;
    numeric_jacobian(|v| check_k(v[1]).ok().map(|_| fast_rhs(v[0], v[1], p)), x, 1e-7)
        .ok_or(BlowupError::Domain { k: x[1] })
}

/// Variables of the local expansion: `ξ = x − 3/4`, `ψ = k − 1/3`, `a`, `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Var {
    Xi,
    Psi,
    A,
    Eps,
}

/// One Taylor coefficient `∂^m f_c / ∂v₁…∂v_m` at the base point (the
/// monomials below are all square-free, so no factorials appear).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: &'static str,
    /// 1 for `f₁ = x′`, 2 for `f₂ = k′`.
    pub component: usize,
    pub monomial: Vec<Var>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientCheck {
    pub name: &'static str,
    pub constant: f64,
    pub oracle: f64,
    pub rel_err: f64,
}

/// Second-order expansion of the fast field at `(3/4, 1/3, a = 0, ε = 0)`:
///
/// ```text
/// f₁ = −(4/3) aξ − (3/4) aψ
/// f₂ = −5/(8π) ε + 5/(8π√3) a + 3/(10π) ξ + (√3/(4π) − 5/12) aψ
///      − (5/(4√3) + 3/(4π)) εψ + (√3/5) ξψ
/// ```
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalExpansion {
    pub base_point: [f64; 4],
    pub f1: Vec<Coefficient>,
    pub f2: Vec<Coefficient>,
}

impl Default for LocalExpansion {
    fn default() -> Self {
        Self::new()
    }
}

impl LocalExpansion {
    /// The expansion for α = 4/5, β = 1/2.
    pub fn new() -> Self {
        let s3 = 3f64.sqrt();
        let c = |name, component, monomial: &[Var], value| Coefficient {
            name,
            component,
            monomial: monomial.to_vec(),
            value,
        };
        use Var::*;
        Self {
            base_point: [0.75, 1.0 / 3.0, 0.0, 0.0],
            f1: vec![c("f1_a_xi", 1, &[A, Xi], -4.0 / 3.0), c("f1_a_psi", 1, &[A, Psi], -0.75)],
            f2: vec![
                c("f2_eps", 2, &[Eps], -5.0 / (8.0 * PI)),
                c("f2_a", 2, &[A], 5.0 / (8.0 * PI * s3)),
                c("f2_xi", 2, &[Xi], 3.0 / (10.0 * PI)),
                c("f2_a_psi", 2, &[A, Psi], s3 / (4.0 * PI) - 5.0 / 12.0),
                c("f2_eps_psi", 2, &[Eps, Psi], -(5.0 / (4.0 * s3) + 3.0 / (4.0 * PI))),
                c("f2_xi_psi", 2, &[Xi, Psi], s3 / 5.0),
            ],
        }
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &Coefficient> {
        self.f1.iter().chain(&self.f2)
    }

    pub fn get(&self, name: &str) -> f64 {
        self.coefficients().find(|c| c.name == name).map(|c| c.value).expect("known coefficient")
    }

    /// Checks every constant against Richardson-extrapolated finite
    /// differences of [`fast_field`].
    pub fn verify(&self, rel_tol: f64) -> Result<Vec<CoefficientCheck>, BlowupError> {
        let mut out = Vec::new();
        for c in self.coefficients() {
            let oracle = fd_coefficient(c.component, &c.monomial, 1.0);
            let rel_err = (oracle - c.value).abs() / c.value.abs();
            if !(rel_err <= rel_tol) {
                return Err(BlowupError::Coefficient { name: c.name, constant: c.value, oracle, rel_err });
            }
            out.push(CoefficientCheck { name: c.name, constant: c.value, oracle, rel_err });
        }
        Ok(out)
    }

    /// Linear part in `(ξ, ψ)` truncated to first order in `(a, ε)`.
    pub fn jacobian(&self, a: f64, eps: f64) -> Mat2 {
        [
            [self.get("f1_a_xi") * a, self.get("f1_a_psi") * a],
            [self.get("f2_xi"), self.get("f2_eps_psi") * eps + self.get("f2_a_psi") * a],
        ]
    }

    pub fn trace(&self, a: f64, eps: f64) -> f64 {
        linalg::trace(&self.jacobian(a, eps))
    }

    pub fn discriminant(&self, a: f64, eps: f64) -> f64 {
        let j = self.jacobian(a, eps);
        linalg::trace(&j).powi(2) - 4.0 * linalg::det(&j)
    }

    /// Slope `ρ_H` of the zero-trace line `ε = ρ_H a`.
    pub fn hopf_slope(&self) -> f64 {
        let per_a = self.get("f1_a_xi") + self.get("f2_a_psi");
        -per_a / self.get("f2_eps_psi")
    }

    pub fn hopf_line(&self, a: f64) -> f64 {
        self.hopf_slope() * a
    }

    /// First-order offset `ξ` of the equilibrium from the base point; `ψ`
    /// follows from `x = 1/(1 + k)`.
    pub fn equilibrium_shift(&self, a: f64, eps: f64) -> [f64; 2] {
        let xi = -(self.get("f2_eps") * eps + self.get("f2_a") * a) / self.get("f2_xi");
        let psi = -self.get("f1_a_xi") / self.get("f1_a_psi") * xi;
        [xi, psi]
    }

    /// Trace at the displaced equilibrium, to first order in `(a, ε)`. It
    /// picks up `(√3/5) ξ_eq` from the `ξψ` term, which [`Self::trace`] omits.
    pub fn equilibrium_trace(&self, a: f64, eps: f64) -> f64 {
        let [xi, _] = self.equilibrium_shift(a, eps);
        self.trace(a, eps) + self.get("f2_xi_psi") * xi
    }

    /// Slope of the zero line of [`Self::equilibrium_trace`].
    pub fn equilibrium_hopf_slope(&self) -> f64 {
        let per_a = self.equilibrium_trace(1.0, 0.0);
        let per_eps = self.equilibrium_trace(0.0, 1.0);
        -per_a / per_eps
    }
}

/// Richardson-extrapolated difference quotient of a fast-field component at
/// the base point. Central differences in `ξ, ψ, ε`; forward in `a` (the
/// field is affine in `a`, and `a < 0` is outside the model). `step_scale`
/// multiplies the default steps.
pub fn fd_coefficient(component: usize, monomial: &[Var], step_scale: f64) -> f64 {
    fn eval(component: usize, v: [f64; 4]) -> f64 {
        let p = WelanderParams { a: v[2], epsilon: v[3], ..WelanderParams::default() };
        fast_rhs(0.75 + v[0], 1.0 / 3.0 + v[1], &p)[component - 1]
    }
    fn diff(component: usize, v: [f64; 4], dirs: &[Var], h: f64) -> f64 {
        let Some((&d, rest)) = dirs.split_first() else { return eval(component, v) };
        let i = d as usize;
        let mut vp = v;
        vp[i] += h;
        if d == Var::A {
            (diff(component, vp, rest, h) - diff(component, v, rest, h)) / h
        } else {
            let mut vm = v;
            vm[i] -= h;
            (diff(component, vp, rest, h) - diff(component, vm, rest, h)) / (2.0 * h)
        }
    }
    // roundoff in an m-th difference grows like u/h^m
    let h = step_scale * if monomial.len() == 1 { 1e-5 } else { 1e-3 };
    let order = if monomial.contains(&Var::A) { 1 } else { 2 };
    let w = f64::from(1u32 << order);
    let base = [0.0; 4];
    (w * diff(component, base, monomial, 0.5 * h) - diff(component, base, monomial, h)) / (w - 1.0)
}

/// Builds the expansion and verifies it against the finite-difference oracle.
pub fn local_expansion() -> Result<LocalExpansion, BlowupError> {
    let e = LocalExpansion::new();
    e.verify(1e-6)?;
    Ok(e)
}

/// Linearisation of the fast system at its equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSpectrum {
    pub eps: f64,
    pub equilibrium: [f64; 2],
    pub jacobian: Mat2,
    pub eigen: Eigen2,
}

pub fn equilibrium_spectrum(a: f64, eps: f64) -> Result<EquilibriumSpectrum, BlowupError> {
    let p = WelanderParams::smooth(eps, a);
    let equilibrium = smooth_equilibrium(&p)?;
    let jacobian = fast_jacobian(equilibrium, &p)?;
    Ok(EquilibriumSpectrum { eps, equilibrium, jacobian, eigen: eigenvalues(&jacobian) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSample {
    /// Distance `ε* − ε` below the crossing.
    pub depth: f64,
    pub amplitude: f64,
    pub floquet_estimate: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfRecord {
    pub a: f64,
    pub eps_star: f64,
    /// `ε*/a`.
    pub ratio: f64,
    pub predicted: f64,
    pub equilibrium: [f64; 2],
    /// Fast-time frequency of the critical pair.
    pub omega: f64,
    /// `d(Re λ)/dε` at the crossing.
    pub transversality: f64,
    pub amplitudes: Vec<AmplitudeSample>,
    /// Log–log slope of amplitude against depth.
    pub amplitude_slope: Option<f64>,
    pub supercritical: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HopfOptions {
    /// Grid points in the coarse scan for the crossing.
    pub grid: usize,
    /// Amplitude samples over one decade of depth below `ε*`.
    pub amplitude_points: usize,
    /// Deepest sample as a fraction of `|ε*|`.
    pub max_depth: f64,
    pub measure_amplitude: bool,
}

impl Default for HopfOptions {
    fn default() -> Self {
        Self { grid: 200, amplitude_points: 5, max_depth: 0.1, measure_amplitude: true }
    }
}

/// Real part of the critical pair (trace/2 works on both sides of the
/// complex region and is smooth).
fn half_trace(a: f64, eps: f64) -> Result<f64, BlowupError> {
    let s = equilibrium_spectrum(a, eps)?;
    Ok(0.5 * linalg::trace(&s.jacobian))
}

/// Locates the loss of stability of the smooth equilibrium when `ε`
/// decreases through `[lo, hi]`, and probes the cycles born there.
pub fn verify_hopf_numerically(a: f64, eps_range: [f64; 2], opts: &HopfOptions) -> Result<HopfRecord, BlowupError> {
    if !(a > 0.0) {
        return Err(BlowupError::InvalidParams(format!("a must be positive (got {a})")));
    }
    let [lo, hi] = eps_range;
    let n = opts.grid.max(2);
    let mut max_re = f64::NEG_INFINITY;
    let mut bracket = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let eps = hi - (hi - lo) * i as f64 / n as f64;
        let Ok(s) = equilibrium_spectrum(a, eps) else {
            prev = None;
            continue;
        };
        let re = 0.5 * linalg::trace(&s.jacobian);
        max_re = max_re.max(s.eigen.max_re());
        if let Some((pe, pre)) = prev {
            if pre < 0.0 && re >= 0.0 && linalg::det(&s.jacobian) > 0.0 {
                bracket = Some((eps, pe));
                break;
            }
        }
        prev = Some((eps, re));
    }
    let Some((b_lo, b_hi)) = bracket else {
        return Err(BlowupError::NotFound { a, lo, hi, max_re });
    };
    let eps_star = brent(|e| half_trace(a, e), b_lo, b_hi, RootOptions { x_tol: 1e-14 * a, ..RootOptions::default() })
        .map_err(|_| BlowupError::NotFound { a, lo, hi, max_re })?;
    let spec = equilibrium_spectrum(a, eps_star)?;
    let d = 1e-3 * eps_star.abs().max(a);
    let transversality = (half_trace(a, eps_star + d)? - half_trace(a, eps_star - d)?) / (2.0 * d);

    let mut amplitudes = Vec::new();
    let mut amplitude_slope = None;
    if opts.measure_amplitude {
        let m = opts.amplitude_points.max(2);
        let deepest = opts.max_depth * eps_star.abs();
        for j in 0..m {
            let depth = deepest * 10f64.powf(-(j as f64) / (m - 1) as f64);
            amplitudes.push(cycle_amplitude(a, eps_star - depth, depth)?);
        }
        amplitudes.reverse();
        amplitude_slope = Some(log_log_slope(&amplitudes));
    }
    let supercritical = amplitude_slope.is_some_and(|s| (s - 0.5).abs() <= 0.1)
        && amplitudes.iter().all(|s| s.floquet_estimate < 1.0);
    Ok(HopfRecord {
        a,
        eps_star,
        ratio: eps_star / a,
        predicted: LocalExpansion::new().hopf_line(a),
        equilibrium: spec.equilibrium,
        omega: spec.eigen.im[0],
        transversality,
        amplitudes,
        amplitude_slope,
        supercritical,
    })
}

fn log_log_slope(samples: &[AmplitudeSample]) -> f64 {
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.depth.ln(), s.amplitude.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Attracting cycle of the smooth `(x, y)` model around an unstable
/// equilibrium, found on the section `y = y_eq` crossed upwards.
pub fn smooth_limit_cycle(p: &WelanderParams, ode: IntegrationOptions) -> Result<PeriodicOrbit, BlowupError> {
    let eq = smooth_equilibrium(p)?;
    let eigen = eigenvalues(&fast_jacobian(eq, p)?);
    if eigen.re[0].min(eigen.re[1]) <= 0.0 {
        return Err(PoincareError::BracketInvalid {
            lo: eq[0],
            hi: eq[0],
            reason: "the equilibrium is not a repeller".into(),
        }
        .into());
    }
    let [x_eq, y_eq] = xk_to_xy(eq, p.a)?;
    let field = WelanderSmooth::new(*p, Chart::Xy).map_err(|e| BlowupError::InvalidParams(e.to_string()))?;
    let flow = SmoothFlow { field, opts: ode };
    let section = Section::new(1, y_eq, Orientation::Increasing);
    // a repelling node gives no rotation estimate; the nonsmooth cycles have
    // periods of order one
    let period = if eigen.is_complex() { 2.0 * PI * p.a / eigen.im[0] } else { 4.0 };
    let opts = CycleOptions { t_max: 50.0 * period, ..CycleOptions::default() };
    // expand outward until the return map contracts
    let mut inner = x_eq + 1e-6;
    let mut r = 1e-5;
    let outer = loop {
        let s = x_eq + r;
        if poincare_map(&flow, &section, s, opts.t_max)? < s {
            break s;
        }
        inner = s;
        r *= 2.0;
        if r > 0.5 {
            return Err(PoincareError::BracketInvalid { lo: x_eq, hi: s, reason: "no contraction found".into() }.into());
        }
    };
    Ok(find_limit_cycle(&flow, &section, [inner, outer], &opts)?)
}

fn cycle_amplitude(a: f64, eps: f64, depth: f64) -> Result<AmplitudeSample, BlowupError> {
    let orbit = smooth_limit_cycle(&WelanderParams::smooth(eps, a), IntegrationOptions::default())?;
    Ok(AmplitudeSample {
        depth,
        amplitude: orbit.amplitude,
        floquet_estimate: orbit.floquet_estimate,
        stability: orbit.stability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_pair() {
        assert_eq!(phi(0.0), 0.5);
        assert!((phi_inv(0.75).unwrap() - 1.0).abs() < 1e-15);
        assert!(phi_inv(0.0).is_err() && phi_inv(1.0).is_err());
    }

    #[test]
    fn guard_is_an_error() {
        let p = WelanderParams::smooth(0.0, 0.01);
        assert!(matches!(blowup_field(0.75, 1e-9, &p), Err(BlowupError::Domain { .. })));
        assert!(matches!(fast_field(0.75, 1.0 - 1e-9, &p), Err(BlowupError::Domain { .. })));
        assert!(blowup_field(0.75, 0.5, &WelanderParams::smooth(0.0, 0.0)).is_err());
        assert!(fast_field(0.75, 0.5, &WelanderParams { a: -1e-3, ..p }).is_err());
    }

    #[test]
    fn field_at_base_point() {
        let a = 0.01;
        let p = WelanderParams::smooth(0.0, a);
        let expected = 3.0 / (4.0 * PI) * (5.0 / 6.0) / 3f64.sqrt();
        let [fx, fk] = fast_field(0.75, 1.0 / 3.0, &p).unwrap();
        assert!(fx.abs() < 1e-16);
        assert!((fk - a * expected).abs() < 1e-15);
        let [_, sk] = blowup_field(0.75, 1.0 / 3.0, &p).unwrap();
        assert!((sk - expected).abs() < 1e-13);
    }

    #[test]
    fn line_of_equilibria_at_origin() {
        let p = WelanderParams::smooth(0.0, 0.0);
        for k in [0.1, 0.3, 0.5, 0.9] {
            assert_eq!(fast_field(0.75, k, &p).unwrap()[1], 0.0);
        }
    }

    #[test]
    fn critical_manifold_cases() {
        let p = WelanderParams::smooth(0.01, 0.0);
        assert_eq!(critical_manifold(0.75, &p).unwrap(), None);
        let q = WelanderParams::smooth(-0.03, 0.0);
        // k = 1/2 where 0.4 x = 0.3 + 0.5ε + 0.5ε
        let x = (0.3 + q.epsilon) / 0.4;
        let c = critical_manifold(x, &q).unwrap().unwrap();
        assert!((c.k - 0.5).abs() < 1e-12);
        assert!(c.normally_hyperbolic);
        assert!(fast_field(x, c.k, &q).unwrap()[1].abs() < 1e-15);
        assert_eq!(critical_manifold(0.75, &WelanderParams::smooth(0.0, 0.0)), Err(BlowupError::NonHyperbolic));
    }

    #[test]
    fn expansion_matches_oracle() {
        let checks = local_expansion().unwrap().verify(1e-6).unwrap();
        assert_eq!(checks.len(), 8);
    }

    #[test]
    fn zero_trace_line() {
        let e = LocalExpansion::new();
        let rho = e.hopf_slope();
        assert!((rho + 1.6786).abs() < 1e-4, "{rho}");
        assert!(e.trace(1.0, rho).abs() < 1e-14);
        assert!(linalg::det(&e.jacobian(0.0, 0.0)).abs() < 1e-15);
        assert!(e.discriminant(0.01, e.hopf_line(0.01)) < 0.0);
        let c = e.equilibrium_hopf_slope();
        assert!((c - (-26.0 * PI / 9.0 + 1.0 / 3f64.sqrt())).abs() < 1e-12, "{c}");
    }

    #[test]
    fn equilibrium_approaches_pseudoequilibrium() {
        let mut prev = None;
        for a in [1e-2, 1e-3, 1e-4] {
            let p = WelanderParams::smooth(0.02, a);
            let eq = smooth_equilibrium(&p).unwrap();
            let (x, k) = pseudoequilibrium(&p).unwrap();
            let d = (eq[0] - x).hypot(eq[1] - k);
            if let Some(pd) = prev {
                let ratio: f64 = pd / d;
                assert!(ratio > 5.0 && ratio < 20.0, "{ratio}");
            }
            prev = Some(d);
        }
    }

    #[test]
    fn rejects_nonpositive_a() {
        assert!(verify_hopf_numerically(0.0, [-0.1, 0.0], &HopfOptions::default()).is_err());
        assert!(smooth_equilibrium(&WelanderParams::smooth(0.0, 0.0)).is_err());
    }
}
