//! Welander's nondimensional two-box convection model.
//!
//! ```text
//! Ṫ = 1 − T − k(ρ) T
//! Ṡ = β (1 − S) − k(ρ) S,        ρ = −α T + S
//! ```
//!
//! `k` is either the arctan ramp `k = atan((ρ − ε)/a)/π + 1/2` or its
//! Heaviside limit. In the chart `x = T`, `y = S − α T − ε` the switching
//! manifold is the line `y = 0` and
//!
//! ```text
//! ẋ = 1 − x − k x
//! ẏ = β − βε − kε − α − (β + k) y − (αβ − α) x
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filippov::{DomainBox, PiecewiseSystem, Side};
use crate::ode::VectorField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WelanderError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("the arctan closure needs a > 0 (got a = {0}); use the Heaviside closure for a = 0")]
    SmoothnessRequired(f64),
    #[error("αβ − α = 0: the fold abscissae are undefined")]
    Degenerate,
}

fn default_alpha() -> f64 {
    0.8
}

fn default_beta() -> f64 {
    0.5
}

/// Model parameters. `a = 0` selects the Heaviside closure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WelanderParams {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub a: f64,
}

impl Default for WelanderParams {
    fn default() -> Self {
        Self { alpha: default_alpha(), beta: default_beta(), epsilon: 0.0, a: 0.0 }
    }
}

impl WelanderParams {
    pub fn nonsmooth(epsilon: f64) -> Self {
        Self { epsilon, ..Self::default() }
    }

    pub fn smooth(epsilon: f64, a: f64) -> Self {
        Self { epsilon, a, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), WelanderError> {
        let finite = [self.alpha, self.beta, self.epsilon, self.a].iter().all(|v| v.is_finite());
        if !finite {
            return Err(WelanderError::InvalidParams("non-finite value".into()));
        }
        if self.alpha <= 0.0 || self.beta <= 0.0 {
            return Err(WelanderError::InvalidParams(format!(
                "alpha and beta must be positive (alpha = {}, beta = {})",
                self.alpha, self.beta
            )));
        }
        if self.a < 0.0 {
            return Err(WelanderError::InvalidParams(format!("a must be nonnegative (a = {})", self.a)));
        }
        Ok(())
    }

    pub fn is_smooth(&self) -> bool {
        self.a > 0.0
    }
}

/// Surface temperature and salinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsState {
    pub t: f64,
    pub s: f64,
}

/// Shifted chart: `x = T`, `y = S − αT − ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XyState {
    pub x: f64,
    pub y: f64,
}

impl TsState {
    pub fn rho(&self, p: &WelanderParams) -> f64 {
        -p.alpha * self.t + self.s
    }

    pub fn to_xy(&self, p: &WelanderParams) -> XyState {
        XyState { x: self.t, y: self.s - p.alpha * self.t - p.epsilon }
    }
}

impl XyState {
    pub fn to_ts(&self, p: &WelanderParams) -> TsState {
        TsState { t: self.x, s: self.y + p.alpha * self.x + p.epsilon }
    }

    pub fn rho(&self, p: &WelanderParams) -> f64 {
        self.y + p.epsilon
    }
}

/// Arctan convection rate, strictly inside `(0, 1)`.
pub fn k_smooth(rho: f64, p: &WelanderParams) -> Result<f64, WelanderError> {
    if p.a <= 0.0 {
        return Err(WelanderError::SmoothnessRequired(p.a));
    }
    Ok(((rho - p.epsilon) / p.a).atan() / PI + 0.5)
}

/// Value of the Heaviside closure. On `ρ = ε` it is left undefined; the
/// Filippov multiplier resolves it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeavisideK {
    Zero,
    One,
    Undefined,
}

impl HeavisideK {
    pub fn value(self) -> Option<f64> {
        match self {
            HeavisideK::Zero => Some(0.0),
            HeavisideK::One => Some(1.0),
            HeavisideK::Undefined => None,
        }
    }
}

pub fn k_heaviside(rho: f64, p: &WelanderParams) -> HeavisideK {
    if rho > p.epsilon {
        HeavisideK::One
    } else if rho < p.epsilon {
        HeavisideK::Zero
    } else {
        HeavisideK::Undefined
    }
}

pub fn vector_field_ts(st: TsState, p: &WelanderParams, k: f64) -> (f64, f64) {
    (1.0 - st.t - k * st.t, p.beta * (1.0 - st.s) - k * st.s)
}

/// `ẏ` on the manifold `y = 0` for a given `k`.
pub fn normal_speed(x: f64, k: f64, p: &WelanderParams) -> f64 {
    p.beta - p.beta * p.epsilon - k * p.epsilon - p.alpha - (p.alpha * p.beta - p.alpha) * x
}

pub fn vector_field_xy(st: XyState, p: &WelanderParams, k: f64) -> (f64, f64) {
    (1.0 - st.x - k * st.x, normal_speed(st.x, k, p) - (p.beta + k) * st.y)
}

/// `dS/dλ` on `y = 0`: the only `k`-dependence left is `−kε`.
pub fn ds_dlambda(p: &WelanderParams) -> f64 {
    -p.epsilon
}

/// Fold abscissae on `y = 0`: `(x₋, x₊)` where `f⁻` (k = 0) and `f⁺` (k = 1)
/// are tangent.
pub fn sliding_boundaries(p: &WelanderParams) -> Result<(f64, f64), WelanderError> {
    let slope = p.alpha * p.beta - p.alpha;
    if slope == 0.0 {
        return Err(WelanderError::Degenerate);
    }
    let at = |k: f64| (p.beta - p.beta * p.epsilon - k * p.epsilon - p.alpha) / slope;
    Ok((at(0.0), at(1.0)))
}

/// Closed forms of [`sliding_boundaries`] for α = 4/5, β = 1/2.
pub fn sliding_boundaries_default(epsilon: f64) -> (f64, f64) {
    (0.75 + 1.25 * epsilon, 0.75 + 3.75 * epsilon)
}

/// Equilibrium of the sliding flow: `ẏ = 0` on `y = 0` together with
/// `x = 1/(1 + k)`, for `k ∈ [0, 1]`.
///
/// Eliminating `x` leaves the quadratic
/// `−ε k² + (β − βε − α − ε) k + (β − βε − α) − (αβ − α) = 0`.
pub fn pseudoequilibrium(p: &WelanderParams) -> Option<(f64, f64)> {
    let c0 = p.beta - p.beta * p.epsilon - p.alpha - (p.alpha * p.beta - p.alpha);
    let c1 = p.beta - p.beta * p.epsilon - p.alpha - p.epsilon;
    let c2 = -p.epsilon;
    let mut roots = Vec::with_capacity(2);
    if c2 == 0.0 {
        if c1 != 0.0 {
            roots.push(-c0 / c1);
        }
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            let q = -0.5 * (c1 + disc.sqrt().copysign(c1));
            if q != 0.0 {
                roots.push(q / c2);
                roots.push(c0 / q);
            }
        }
    }
    roots
        .into_iter()
        .filter(|k| (0.0..=1.0).contains(k))
        .min_by(|a, b| (a - 1.0 / 3.0).abs().total_cmp(&(b - 1.0 / 3.0).abs()))
        .map(|k| (1.0 / (1.0 + k), k))
}

/// Equilibria of the `k = 0` and `k = 1` fields in `(T, S)`.
pub fn virtual_equilibria(p: &WelanderParams) -> [TsState; 2] {
    let eq = |k: f64| TsState { t: 1.0 / (1.0 + k), s: p.beta / (p.beta + k) };
    [eq(0.0), eq(1.0)]
}

fn default_domain() -> DomainBox {
    DomainBox::new(vec![-10.0, -10.0], vec![10.0, 10.0])
}

/// Heaviside model in the `(x, y)` chart as a Filippov system with `h = y`.
#[derive(Debug, Clone, PartialEq)]
pub struct WelanderFilippov {
    pub params: WelanderParams,
    domain: DomainBox,
}

impl WelanderFilippov {
    pub fn new(params: WelanderParams) -> Result<Self, WelanderError> {
        params.validate()?;
        Ok(Self { params, domain: default_domain() })
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        self.domain = domain;
        self
    }

    fn f(&self, x: &[f64], k: f64) -> Vec<f64> {
        let (dx, dy) = vector_field_xy(XyState { x: x[0], y: x[1] }, &self.params, k);
        vec![dx, dy]
    }
}

impl PiecewiseSystem for WelanderFilippov {
    fn dim(&self) -> usize {
        2
    }
    fn domain(&self) -> &DomainBox {
        &self.domain
    }
    fn f_plus(&self, x: &[f64]) -> Vec<f64> {
        self.f(x, 1.0)
    }
    fn f_minus(&self, x: &[f64]) -> Vec<f64> {
        self.f(x, 0.0)
    }
    fn h(&self, x: &[f64]) -> f64 {
        x[1]
    }
    fn grad_h(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0, 1.0]
    }

    fn second_lie_derivative(&self, side: Side, x: &[f64]) -> Option<f64> {
        let k = if side == Side::Plus { 1.0 } else { 0.0 };
        let p = &self.params;
        let f = self.f(x, k);
        // ∇(ẏ) = (−(αβ − α), −(β + k))
        Some(-(p.alpha * p.beta - p.alpha) * f[0] - (p.beta + k) * f[1])
    }
}

/// Heaviside model in the `(T, S)` chart with `h = −αT + S − ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct WelanderFilippovTs {
    pub params: WelanderParams,
    domain: DomainBox,
}

impl WelanderFilippovTs {
    pub fn new(params: WelanderParams) -> Result<Self, WelanderError> {
        params.validate()?;
        Ok(Self { params, domain: default_domain() })
    }

    fn f(&self, x: &[f64], k: f64) -> Vec<f64> {
        let (dt, ds) = vector_field_ts(TsState { t: x[0], s: x[1] }, &self.params, k);
        vec![dt, ds]
    }
}

impl PiecewiseSystem for WelanderFilippovTs {
    fn dim(&self) -> usize {
        2
    }
    fn domain(&self) -> &DomainBox {
        &self.domain
    }
    fn f_plus(&self, x: &[f64]) -> Vec<f64> {
        self.f(x, 1.0)
    }
    fn f_minus(&self, x: &[f64]) -> Vec<f64> {
        self.f(x, 0.0)
    }
    fn h(&self, x: &[f64]) -> f64 {
        -self.params.alpha * x[0] + x[1] - self.params.epsilon
    }
    fn grad_h(&self, _x: &[f64]) -> Vec<f64> {
        vec![-self.params.alpha, 1.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Ts,
    Xy,
}

/// The arctan model as a smooth vector field in either chart.
#[derive(Debug, Clone, PartialEq)]
pub struct WelanderSmooth {
    pub params: WelanderParams,
    pub chart: Chart,
}

impl WelanderSmooth {
    pub fn new(params: WelanderParams, chart: Chart) -> Result<Self, WelanderError> {
        params.validate()?;
        if !params.is_smooth() {
            return Err(WelanderError::SmoothnessRequired(params.a));
        }
        Ok(Self { params, chart })
    }

    pub fn field(&self, x: &[f64]) -> [f64; 2] {
        let p = &self.params;
        match self.chart {
            Chart::Ts => {
                let st = TsState { t: x[0], s: x[1] };
                let k = ((st.rho(p) - p.epsilon) / p.a).atan() / PI + 0.5;
                let (a, b) = vector_field_ts(st, p, k);
                [a, b]
            }
            Chart::Xy => {
                let st = XyState { x: x[0], y: x[1] };
                let k = (st.y / p.a).atan() / PI + 0.5;
                let (a, b) = vector_field_xy(st, p, k);
                [a, b]
            }
        }
    }
}

impl VectorField for WelanderSmooth {
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, String> {
        Ok(self.field(x).to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::{brent, RootOptions};

    fn p(eps: f64) -> WelanderParams {
        WelanderParams::nonsmooth(eps)
    }

    #[test]
    fn k_smooth_values() {
        let q = WelanderParams::smooth(0.1, 0.02);
        assert_eq!(k_smooth(0.1, &q).unwrap(), 0.5);
        assert!((k_smooth(0.12, &q).unwrap() - 0.75).abs() < 1e-15);
        assert!((k_smooth(0.1 + 1e6 * 0.02, &q).unwrap() - 1.0).abs() < 1e-5);
        assert!(matches!(k_smooth(0.0, &p(0.1)), Err(WelanderError::SmoothnessRequired(_))));
    }

    #[test]
    fn heaviside_values() {
        let q = p(0.05);
        assert_eq!(k_heaviside(0.15, &q), HeavisideK::One);
        assert_eq!(k_heaviside(-0.05, &q), HeavisideK::Zero);
        assert_eq!(k_heaviside(0.05, &q), HeavisideK::Undefined);
        assert_eq!(HeavisideK::Undefined.value(), None);
    }

    #[test]
    fn ts_field_examples() {
        let q = p(0.0);
        assert_eq!(vector_field_ts(TsState { t: 1.0, s: 1.0 }, &q, 0.0), (0.0, 0.0));
        let (a, b) = vector_field_ts(TsState { t: 0.5, s: 1.0 / 3.0 }, &q, 1.0);
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
        assert_eq!(vector_field_ts(TsState { t: 0.0, s: 0.0 }, &q, 0.0), (1.0, 0.5));
    }

    #[test]
    fn chart_change_examples() {
        let q = p(0.0);
        let xy = TsState { t: 1.0, s: 1.0 }.to_xy(&q);
        assert_eq!(xy.x, 1.0);
        assert!((xy.y - 0.2).abs() < 1e-15);
        let q = p(0.07);
        let o = TsState { t: 0.0, s: 0.07 }.to_xy(&q);
        assert_eq!((o.x, o.y), (0.0, 0.0));
    }

    #[test]
    fn xy_field_at_relevant_point() {
        let (dx, dy) = vector_field_xy(XyState { x: 0.75, y: 0.0 }, &p(0.0), 1.0 / 3.0);
        assert!(dx.abs() < 1e-15 && dy.abs() < 1e-15);
        let e = 0.05;
        let (_, dy) = vector_field_xy(XyState { x: 0.75 + 15.0 * e / 4.0, y: 0.0 }, &p(e), 1.0);
        assert!(dy.abs() < 1e-15);
    }

    #[test]
    fn boundaries_examples() {
        let (lo, hi) = sliding_boundaries(&p(0.05)).unwrap();
        assert!((lo - 0.8125).abs() < 1e-15 && (hi - 0.9375).abs() < 1e-15);
        let (lo, hi) = sliding_boundaries(&p(0.0)).unwrap();
        assert!((lo - 0.75).abs() < 1e-15 && (hi - 0.75).abs() < 1e-15);
        let (lo, hi) = sliding_boundaries(&p(-0.04)).unwrap();
        assert!((lo - 0.70).abs() < 1e-15 && (hi - 0.60).abs() < 1e-15);
        let bad = WelanderParams { beta: 1.0, ..p(0.0) };
        assert_eq!(sliding_boundaries(&bad), Err(WelanderError::Degenerate));
    }

    #[test]
    fn general_boundaries_match_closed_forms() {
        for i in -10..=10 {
            let e = i as f64 * 0.013;
            let (a, b) = sliding_boundaries(&p(e)).unwrap();
            let (c, d) = sliding_boundaries_default(e);
            assert!((a - c).abs() < 1e-14 && (b - d).abs() < 1e-14);
        }
    }

    #[test]
    fn pseudoequilibrium_at_bifurcation() {
        let (x, k) = pseudoequilibrium(&p(0.0)).unwrap();
        assert!((x - 0.75).abs() < 1e-15 && (k - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pseudoequilibrium_matches_scalar_oracle() {
        for eps in [0.01, -0.01, 0.03, -0.05] {
            let q = p(eps);
            // eliminate x = 1/(1+k) and bracket on [0, 1]
            let g = |k: f64| Ok::<_, String>(normal_speed(1.0 / (1.0 + k), k, &q));
            let k_oracle = brent(g, 0.0, 1.0, RootOptions::default()).unwrap();
            let (x, k) = pseudoequilibrium(&q).unwrap();
            assert!((k - k_oracle).abs() < 1e-12, "eps {eps}: {k} vs {k_oracle}");
            assert!((x - 1.0 / (1.0 + k_oracle)).abs() < 1e-12);
        }
        assert!(pseudoequilibrium(&p(10.0)).is_none());
    }

    #[test]
    fn virtual_equilibria_lie_on_the_wrong_side() {
        for eps in [-0.04, 0.0, 0.04] {
            let q = p(eps);
            let [e0, e1] = virtual_equilibria(&q);
            assert_eq!((e0.t, e0.s), (1.0, 1.0));
            // k = 0 applies where ρ < ε, but its equilibrium has ρ > ε
            assert!(e0.rho(&q) > q.epsilon);
            // k = 1 applies where ρ > ε, but its equilibrium has ρ < ε
            assert!(e1.rho(&q) < q.epsilon);
        }
    }

    #[test]
    fn params_validation() {
        assert!(WelanderParams { a: -1.0, ..Default::default() }.validate().is_err());
        assert!(WelanderParams { alpha: 0.0, ..Default::default() }.validate().is_err());
        assert!(WelanderSmooth::new(p(0.0), Chart::Xy).is_err());
    }

    #[test]
    fn params_defaults_from_toml() {
        let q: WelanderParams = toml::from_str("epsilon = -0.04").unwrap();
        assert_eq!(q.alpha, 0.8);
        assert_eq!(q.beta, 0.5);
        assert!(toml::from_str::<WelanderParams>("gamma = 1.0").is_err());
    }
}
