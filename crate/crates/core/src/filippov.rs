//! Piecewise-smooth systems and the Filippov sliding calculus.
//!
//! A system is two smooth fields `f⁺`, `f⁻` separated by the zero set of a
//! scalar switching function `h`. On `h = 0` the field is closed by
//! `f(x; λ) = λ f⁺(x) + (1 − λ) f⁻(x)`; a solution slides wherever some
//! `λ* ∈ [0, 1]` makes `f(x; λ*)` tangent to the manifold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roots::{brent, RootError, RootOptions};

/// `|h(x)| ≤ MANIFOLD_TOL · (1 + |x|)` counts as on the manifold.
pub const MANIFOLD_TOL: f64 = 1e-9;
/// `|f·∇h| ≤ TANGENCY_TOL · (1 + |f|)` counts as tangent.
pub const TANGENCY_TOL: f64 = 1e-8;
/// Tangencies closer than this are merged.
pub const TANGENCY_MERGE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilippovError {
    #[error("state {state:?} lies outside the domain box")]
    OutsideDomain { state: Vec<f64> },
    #[error("state is not on the switching manifold (h = {h:e})")]
    OffManifold { h: f64 },
    #[error("both fields are tangent to the manifold at {state:?}")]
    DegenerateContact { state: Vec<f64> },
    #[error("no sliding solution at {state:?}")]
    NotInSlidingRegion { state: Vec<f64> },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Root(#[from] RootError),
}

/// Axis-aligned box of admissible states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box bounds must have equal length");
        Self { lo, hi }
    }

    pub fn unbounded(dim: usize) -> Self {
        Self { lo: vec![f64::NEG_INFINITY; dim], hi: vec![f64::INFINITY; dim] }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lo.len()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v >= *l && *v <= *h)
    }
}

/// Which smooth field a label refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// A piecewise-smooth vector field with a single regular switching manifold.
///
/// `f_plus` applies where `h > 0`, `f_minus` where `h < 0`. Implementors
/// override [`combine`](Self::combine) only for non-convex λ-dependence,
/// and must then also return `false` from
/// [`lambda_is_affine`](Self::lambda_is_affine).
pub trait PiecewiseSystem: Send + Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> &DomainBox;
    fn f_plus(&self, x: &[f64]) -> Vec<f64>;
    fn f_minus(&self, x: &[f64]) -> Vec<f64>;
    fn h(&self, x: &[f64]) -> f64;
    fn grad_h(&self, x: &[f64]) -> Vec<f64>;

    fn combine(&self, x: &[f64], lam: f64) -> Vec<f64> {
        let fp = self.f_plus(x);
        let fm = self.f_minus(x);
        fp.iter().zip(&fm).map(|(p, m)| lam * p + (1.0 - lam) * m).collect()
    }

    fn lambda_is_affine(&self) -> bool {
        true
    }

    /// Analytic `L_f² h` for the field on `side`, if known.
    fn second_lie_derivative(&self, _side: Side, _x: &[f64]) -> Option<f64> {
        None
    }

    fn field(&self, side: Side, x: &[f64]) -> Vec<f64> {
        match side {
            Side::Plus => self.f_plus(x),
            Side::Minus => self.f_minus(x),
        }
    }
}

impl<S: PiecewiseSystem + ?Sized> PiecewiseSystem for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn domain(&self) -> &DomainBox {
        (**self).domain()
    }
    fn f_plus(&self, x: &[f64]) -> Vec<f64> {
        (**self).f_plus(x)
    }
    fn f_minus(&self, x: &[f64]) -> Vec<f64> {
        (**self).f_minus(x)
    }
    fn h(&self, x: &[f64]) -> f64 {
        (**self).h(x)
    }
    fn grad_h(&self, x: &[f64]) -> Vec<f64> {
        (**self).grad_h(x)
    }
    fn combine(&self, x: &[f64], lam: f64) -> Vec<f64> {
        (**self).combine(x, lam)
    }
    fn lambda_is_affine(&self) -> bool {
        (**self).lambda_is_affine()
    }
    fn second_lie_derivative(&self, side: Side, x: &[f64]) -> Option<f64> {
        (**self).second_lie_derivative(side, x)
    }
}

type FieldFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type ScalarFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A [`PiecewiseSystem`] assembled from closures.
pub struct FnSystem {
    dim: usize,
    domain: DomainBox,
    f_plus: FieldFn,
    f_minus: FieldFn,
    h: ScalarFn,
    grad_h: FieldFn,
}

impl FnSystem {
    pub fn new<FP, FM, H, G>(domain: DomainBox, f_plus: FP, f_minus: FM, h: H, grad_h: G) -> Self
    where
        FP: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        FM: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        H: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            dim: domain.lo.len(),
            domain,
            f_plus: Box::new(f_plus),
            f_minus: Box::new(f_minus),
            h: Box::new(h),
            grad_h: Box::new(grad_h),
        }
    }
}

impl PiecewiseSystem for FnSystem {
    fn dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> &DomainBox {
        &self.domain
    }
    fn f_plus(&self, x: &[f64]) -> Vec<f64> {
        (self.f_plus)(x)
    }
    fn f_minus(&self, x: &[f64]) -> Vec<f64> {
        (self.f_minus)(x)
    }
    fn h(&self, x: &[f64]) -> f64 {
        (self.h)(x)
    }
    fn grad_h(&self, x: &[f64]) -> Vec<f64> {
        (self.grad_h)(x)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn on_manifold<S: PiecewiseSystem + ?Sized>(sys: &S, x: &[f64]) -> bool {
    sys.h(x).abs() <= MANIFOLD_TOL * (1.0 + norm(x))
}

fn is_tangent(s: f64, f: &[f64]) -> bool {
    s.abs() <= TANGENCY_TOL * (1.0 + norm(f))
}

fn check_state<S: PiecewiseSystem + ?Sized>(sys: &S, x: &[f64]) -> Result<(), FilippovError> {
    if x.len() != sys.dim() {
        return Err(FilippovError::Dimension { expected: sys.dim(), got: x.len() });
    }
    if !sys.domain().contains(x) {
        return Err(FilippovError::OutsideDomain { state: x.to_vec() });
    }
    Ok(())
}

fn check_manifold<S: PiecewiseSystem + ?Sized>(sys: &S, x: &[f64]) -> Result<(), FilippovError> {
    check_state(sys, x)?;
    if !on_manifold(sys, x) {
        return Err(FilippovError::OffManifold { h: sys.h(x) });
    }
    Ok(())
}

/// `f(x; λ)`, the closed field at multiplier `lam`.
pub fn eval_field<S: PiecewiseSystem + ?Sized>(
    sys: &S,
    x: &[f64],
    lam: f64,
) -> Result<Vec<f64>, FilippovError> {
    check_state(sys, x)?;
    Ok(sys.combine(x, lam))
}

/// Normal component `S(λ) = f(x; λ)·∇h(x)`.
pub fn normal_component<S: PiecewiseSystem + ?Sized>(sys: &S, x: &[f64], lam: f64) -> f64 {
    dot(&sys.combine(x, lam), &sys.grad_h(x))
}

/// The convex-combination multiplier without range or manifold checks.
///
/// Used for sliding integration where stage points sit a hair off `h = 0`.
pub(crate) fn raw_lambda<S: PiecewiseSystem + ?Sized>(sys: &S, x: &[f64]) -> Option<f64> {
    let g = sys.grad_h(x);
    let sp = dot(&sys.f_plus(x), &g);
    let sm = dot(&sys.f_minus(x), &g);
    let den = sm - sp;
    if den == 0.0 {
        None
    } else {
        Some(sm / den)
    }
}

/// Solves `S(λ) = 0` for `λ ∈ [0, 1]`.
///
/// Returns `Ok(None)` when no multiplier in range exists (including the case
/// where `S` does not depend on `λ` and is nonzero). Both one-sided normal
/// components vanishing is reported as [`FilippovError::DegenerateContact`].
pub fn sliding_lambda<S: PiecewiseSystem + ?Sized>(
    sys: &S,
    x: &[f64],
) -> Result<Option<f64>, FilippovError> {
    check_manifold(sys, x)?;
    let g = sys.grad_h(x);
    let fp = sys.f_plus(x);
    let fm = sys.f_minus(x);
    let sp = dot(&fp, &g);
    let sm = dot(&fm, &g);
    if is_tangent(sp, &fp) && is_tangent(sm, &fm) {
        return Err(FilippovError::DegenerateContact { state: x.to_vec() });
    }
    if sys.lambda_is_affine() {
        let den = sm - sp;
        if den.abs() <= f64::EPSILON * (sp.abs() + sm.abs()) {
            return Ok(None);
        }
        let lam = sm / den;
        Ok((0.0..=1.0).contains(&lam).then_some(lam))
    } else {
        bracketed_lambda(sys, x)
    }
}

/// Root-finding path for `S(λ) = 0` on `[0, 1]`; valid for any λ-dependence.
pub fn bracketed_lambda<S: PiecewiseSystem + ?Sized>(
    sys: &S,
    x: &[f64],
) -> Result<Option<f64>, FilippovError> {
    let s0 = normal_component(sys, x, 0.0);
    let s1 = normal_component(sys, x, 1.0);
    if s0 == 0.0 {
        return Ok(Some(0.0));
    }
    if s1 == 0.0 {
        return Ok(Some(1.0));
    }
    if s0.signum() == s1.signum() {
        return Ok(None);
    }
    let lam = brent(
        |l| Ok::<_, std::convert::Infallible>(normal_component(sys, x, l)),
        0.0,
        1.0,
        RootOptions::default(),
    )?;
    Ok(Some(lam))
}

/// The sliding vector field `f(x; λ*)`, tangent to the manifold.
pub fn sliding_flow<S: PiecewiseSystem + ?Sized>(
    sys: &S,
    x: &[f64],
) -> Result<Vec<f64>, FilippovError> {
    match sliding_lambda(sys, x)? {
        Some(lam) => Ok(sys.combine(x, lam)),
        None => Err(FilippovError::NotInSlidingRegion { state: x.to_vec() }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryKind {
    Crossing,
    StableSliding,
    UnstableSliding,
    Tangency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryClassification {
    pub kind: BoundaryKind,
    pub lambda_star: Option<f64>,
    pub s_plus: f64,
    pub s_minus: f64,
    pub ds_dlambda: f64,
    pub tangent_plus: bool,
    pub tangent_minus: bool,
}

/// `dS/dλ` at `lam`. Constant in `lam` for the convex combination.
pub fn ds_dlambda<S: PiecewiseSystem + ?Sized>(sys: &S, x: &[f64], lam: f64) -> f64 {
    if sys.lambda_is_affine() {
        let g = sys.grad_h(x);
        dot(&sys.f_plus(x), &g) - dot(&sys.f_minus(x), &g)
    } else {
        let d = 1e-6;
        let (lo, hi) = ((lam - d).max(0.0), (lam + d).min(1.0));
        (normal_component(sys, x, hi) - normal_component(sys, x, lo)) / (hi - lo)
    }
}

/// Classifies a manifold point as crossing, sliding (with stability) or tangency.
pub fn classify_boundary<S: PiecewiseSystem + ?Sized>(
    sys: &S,
    x: &[f64],
) -> Result<BoundaryClassification, FilippovError> {
    check_manifold(sys, x)?;
    let g = sys.grad_h(x);
    let fp = sys.f_plus(x);
    let fm = sys.f_minus(x);
    let s_plus = dot(&fp, &g);
    let s_minus = dot(&fm, &g);
    let tangent_plus = is_tangent(s_plus, &fp);
    let tangent_minus = is_tangent(s_minus, &fm);
    let mut out = BoundaryClassification {
        kind: BoundaryKind::Tangency,
        lambda_star: None,
        s_plus,
        s_minus,
        ds_dlambda: 0.0,
        tangent_plus,
        tangent_minus,
    };
    if tangent_plus || tangent_minus {
        out.ds_dlambda = ds_dlambda(sys, x, if tangent_plus { 1.0 } else { 0.0 });
        if !(tangent_plus && tangent_minus) {
            out.lambda_star = Some(if tangent_plus { 1.0 } else { 0.0 });
        }
        return Ok(out);
    }
    if s_plus * s_minus > 0.0 {
        out.kind = BoundaryKind::Crossing;
        out.ds_dlambda = ds_dlambda(sys, x, 0.5);
        return Ok(out);
    }
    let lam = if sys.lambda_is_affine() {
        s_minus / (s_minus - s_plus)
    } else {
        bracketed_lambda(sys, x)?.ok_or(FilippovError::NotInSlidingRegion { state: x.to_vec() })?
    };
    out.lambda_star = Some(lam);
    out.ds_dlambda = ds_dlambda(sys, x, lam);
    out.kind = if out.ds_dlambda < 0.0 { BoundaryKind::StableSliding } else { BoundaryKind::UnstableSliding };
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Visibility {
    Visible,
    Invisible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangencyPoint {
    pub location: Vec<f64>,
    pub side: Side,
    pub visibility: Visibility,
    /// `L_f² h` at the tangency; its sign decides visibility.
    pub curvature: f64,
}

/// `L_f² h = ∇(f·∇h)·f`, analytic when the system provides it, otherwise a
/// central difference of `f·∇h` along the flow direction.
pub fn second_lie_derivative<S: PiecewiseSystem + ?Sized>(sys: &S, side: Side, x: &[f64]) -> f64 {
    if let Some(v) = sys.second_lie_derivative(side, x) {
        return v;
    }
    let f = sys.field(side, x);
    let scale = norm(&f).max(f64::MIN_POSITIVE);
    let d = 1e-5 * (1.0 + norm(x)) / scale;
    let s_at = |t: f64| {
        let p: Vec<f64> = x.iter().zip(&f).map(|(xi, fi)| xi + t * fi).collect();
        dot(&sys.field(side, &p), &sys.grad_h(&p))
    };
    (s_at(d) - s_at(-d)) / (2.0 * d)
}

fn visibility(side: Side, curvature: f64) -> Visibility {
    // a tangent trajectory is visible when it bends back into its own region
    let bends_into_own = match side {
        Side::Plus => curvature > 0.0,
        Side::Minus => curvature < 0.0,
    };
    if bends_into_own {
        Visibility::Visible
    } else {
        Visibility::Invisible
    }
}

/// Seeds per box edge used by [`find_tangencies`].
pub const TANGENCY_SEEDS: usize = 64;

/// Locates the fold points of a planar system inside `bbox`.
///
/// The manifold is traced as a graph over each coordinate axis in turn
/// (`TANGENCY_SEEDS` seeds per edge, `h = 0` solved transversally at each),
/// and sign changes of `f^σ·∇h` between neighbouring seeds are refined with
/// Brent's method along the traced curve. Seeds where the transverse solve
/// fails are skipped.
pub fn find_tangencies<S: PiecewiseSystem + ?Sized>(
    sys: &S,
    bbox: &DomainBox,
) -> Result<Vec<TangencyPoint>, FilippovError> {
    if sys.dim() != 2 {
        return Err(FilippovError::Dimension { expected: 2, got: sys.dim() });
    }
    let mut found: Vec<TangencyPoint> = Vec::new();
    for axis in 0..2 {
        let other = 1 - axis;
        let (lo, hi) = (bbox.lo[axis], bbox.hi[axis]);
        let (olo, ohi) = (bbox.lo[other], bbox.hi[other]);
        if !(lo.is_finite() && hi.is_finite() && olo.is_finite() && ohi.is_finite()) {
            continue;
        }
        // point on {h = 0} with the given coordinate along `axis`
        let lift = |u: f64| -> Option<Vec<f64>> {
            let mut p = vec![0.0; 2];
            p[axis] = u;
            let hv = |v: f64| {
                let mut q = p.clone();
                q[other] = v;
                Ok::<_, std::convert::Infallible>(sys.h(&q))
            };
            let v = brent(hv, olo, ohi, RootOptions::default()).ok()?;
            p[other] = v;
            Some(p)
        };
        for side in [Side::Plus, Side::Minus] {
            let normal = |u: f64| -> Option<f64> {
                let p = lift(u)?;
                Some(dot(&sys.field(side, &p), &sys.grad_h(&p)))
            };
            let n = TANGENCY_SEEDS;
            let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
            let vals: Vec<Option<f64>> = grid.iter().map(|&u| normal(u)).collect();
            let mut roots = Vec::new();
            for i in 0..n {
                match (vals[i], vals[i + 1]) {
                    (Some(a), _) if a == 0.0 => roots.push(grid[i]),
                    (Some(a), Some(b)) if a * b < 0.0 => {
                        let r = brent(
                            |u| normal(u).ok_or("manifold not traceable"),
                            grid[i],
                            grid[i + 1],
                            RootOptions::default(),
                        );
                        if let Ok(r) = r {
                            roots.push(r);
                        }
                    }
                    _ => {}
                }
            }
            if vals[n] == Some(0.0) {
                roots.push(grid[n]);
            }
            for u in roots {
                let Some(p) = lift(u) else { continue };
                if found
                    .iter()
                    .any(|t| t.side == side && norm(&[t.location[0] - p[0], t.location[1] - p[1]]) < TANGENCY_MERGE)
                {
                    continue;
                }
                let curvature = second_lie_derivative(sys, side, &p);
                found.push(TangencyPoint { visibility: visibility(side, curvature), location: p, side, curvature });
            }
        }
    }
    found.sort_by(|a, b| a.location[0].total_cmp(&b.location[0]).then(a.location[1].total_cmp(&b.location[1])));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ẋ = ±1 on either side of the line y = 0, with a constant drift in x.
    fn switching_line(up: f64, down: f64) -> FnSystem {
        FnSystem::new(
            DomainBox::new(vec![-10.0, -10.0], vec![10.0, 10.0]),
            move |_| vec![1.0, up],
            move |_| vec![1.0, down],
            |x| x[1],
            |_| vec![0.0, 1.0],
        )
    }

    #[test]
    fn endpoints_reproduce_the_smooth_fields() {
        let s = switching_line(-2.0, 3.0);
        assert_eq!(eval_field(&s, &[0.0, 0.0], 1.0).unwrap(), vec![1.0, -2.0]);
        assert_eq!(eval_field(&s, &[0.0, 0.0], 0.0).unwrap(), vec![1.0, 3.0]);
    }

    #[test]
    fn outside_domain_is_an_error() {
        let s = switching_line(-1.0, 1.0);
        assert!(matches!(eval_field(&s, &[20.0, 0.0], 0.5), Err(FilippovError::OutsideDomain { .. })));
    }

    #[test]
    fn attracting_line_slides_stably() {
        let s = switching_line(-2.0, 3.0);
        let c = classify_boundary(&s, &[0.0, 0.0]).unwrap();
        assert_eq!(c.kind, BoundaryKind::StableSliding);
        assert!((c.lambda_star.unwrap() - 0.6).abs() < 1e-15);
        let v = sliding_flow(&s, &[0.0, 0.0]).unwrap();
        assert!(v[1].abs() < 1e-15);
    }

    #[test]
    fn repelling_line_is_unstable() {
        let s = switching_line(2.0, -3.0);
        assert_eq!(classify_boundary(&s, &[0.0, 0.0]).unwrap().kind, BoundaryKind::UnstableSliding);
    }

    #[test]
    fn transversal_flow_crosses() {
        let s = switching_line(1.0, 2.0);
        let c = classify_boundary(&s, &[0.0, 0.0]).unwrap();
        assert_eq!(c.kind, BoundaryKind::Crossing);
        assert_eq!(sliding_lambda(&s, &[0.0, 0.0]).unwrap(), None);
        assert!(matches!(sliding_flow(&s, &[0.0, 0.0]), Err(FilippovError::NotInSlidingRegion { .. })));
    }

    #[test]
    fn off_manifold_rejected() {
        let s = switching_line(1.0, 2.0);
        assert!(matches!(sliding_lambda(&s, &[0.0, 0.1]), Err(FilippovError::OffManifold { .. })));
    }

    #[test]
    fn both_tangent_is_degenerate() {
        let s = switching_line(0.0, 0.0);
        assert!(matches!(sliding_lambda(&s, &[0.0, 0.0]), Err(FilippovError::DegenerateContact { .. })));
        let c = classify_boundary(&s, &[0.0, 0.0]).unwrap();
        assert_eq!(c.kind, BoundaryKind::Tangency);
        assert!(c.tangent_plus && c.tangent_minus);
    }

    #[test]
    fn bracketed_path_agrees_with_closed_form() {
        let s = switching_line(-2.0, 3.0);
        let a = sliding_lambda(&s, &[1.0, 0.0]).unwrap().unwrap();
        let b = bracketed_lambda(&s, &[1.0, 0.0]).unwrap().unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn parabola_folds_are_found_and_classified() {
        // f⁺ = (1, x), f⁻ = (1, -x): fold of f⁺ at the origin is visible
        // (curves upward into h > 0); f⁻ also folds there, also visible.
        let s = FnSystem::new(
            DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]),
            |x| vec![1.0, x[0] - 0.3],
            |x| vec![1.0, -(x[0] + 0.2)],
            |x| x[1],
            |_| vec![0.0, 1.0],
        );
        let t = find_tangencies(&s, &DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0])).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].side, Side::Minus);
        assert!((t[0].location[0] + 0.2).abs() < 1e-12);
        assert_eq!(t[0].visibility, Visibility::Visible);
        assert_eq!(t[1].side, Side::Plus);
        assert!((t[1].location[0] - 0.3).abs() < 1e-12);
        assert_eq!(t[1].visibility, Visibility::Visible);
    }
}
