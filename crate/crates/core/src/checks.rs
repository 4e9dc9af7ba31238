//! Invariant checks shared by the acceptance harness and the property tests.
//!
//! Every check takes its (random) inputs explicitly and returns `Err` with a
//! description of the first violation. Inputs outside a check's stated
//! domain are the caller's responsibility.

use std::f64::consts::PI;

use crate::blowup::{
    blowup_field, fast_jacobian, fd_coefficient, phi, phi_inv, smooth_equilibrium, xk_to_xy, xy_to_xk,
    BlowUpSystem, LocalExpansion, BASE_POINT,
};
use crate::cli::{self, Command};
use crate::config::{LinearSystem, RunConfig};
use crate::filippov::{
    self, classify_boundary, eval_field, sliding_flow, sliding_lambda, BoundaryKind, FilippovError, PiecewiseSystem,
    Side,
};
use crate::integrator::{integrate, EventKind, HybridOptions, IntegrationError, Mode, Trajectory};
use crate::linalg::{self, Mat2};
use crate::ode::{self, IntegrationOptions, Reversed, VectorField};
use crate::scan::{self, Budget, ScanPoint};
use crate::welander::{
    self, k_heaviside, k_smooth, normal_speed, sliding_boundaries_default, vector_field_ts, vector_field_xy,
    virtual_equilibria, Chart, TsState, WelanderFilippov, WelanderParams, WelanderSmooth,
};

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Tight tolerances for reference integrations.
pub fn tight() -> IntegrationOptions {
    IntegrationOptions { rtol: 1e-12, atol: 1e-14, ..IntegrationOptions::default() }
}

fn welander(eps: f64) -> Result<WelanderFilippov, String> {
    WelanderFilippov::new(WelanderParams::nonsmooth(eps)).map_err(text)
}

// ---------------------------------------------------------------- filippov

/// `f(x; 0) = f⁻` and `f(x; 1) = f⁺` bit for bit.
pub fn endpoint_consistency<S: PiecewiseSystem>(sys: &S, x: &[f64]) -> Check {
    let f0 = eval_field(sys, x, 0.0).map_err(text)?;
    let f1 = eval_field(sys, x, 1.0).map_err(text)?;
    ensure(f0 == sys.f_minus(x), || format!("f(x; 0) = {f0:?} differs from f⁻ at {x:?}"))?;
    ensure(f1 == sys.f_plus(x), || format!("f(x; 1) = {f1:?} differs from f⁺ at {x:?}"))
}

/// Wherever a multiplier exists, the sliding field is tangent to the manifold.
pub fn sliding_tangency<S: PiecewiseSystem>(sys: &S, x: &[f64]) -> Check {
    match sliding_lambda(sys, x) {
        Ok(Some(_)) => {
            let f = sliding_flow(sys, x).map_err(text)?;
            let s = filippov::dot(&f, &sys.grad_h(x));
            let scale = norm(&sys.f_plus(x)) + norm(&sys.f_minus(x));
            ensure(s.abs() <= 1e-10 * scale, || format!("sliding field has normal component {s:e} at {x:?}"))
        }
        Ok(None) | Err(FilippovError::DegenerateContact { .. }) => Ok(()),
        Err(e) => Err(e.to_string()),
    }
}

/// For `ε ≠ 0`: `Crossing` exactly when the multiplier leaves `[0, 1]`, and a
/// multiplier is reported exactly for the non-crossing kinds.
pub fn classification_partition(eps: f64, x: f64) -> Check {
    let sys = welander(eps)?;
    let c = classify_boundary(&sys, &[x, 0.0]).map_err(text)?;
    if c.kind == BoundaryKind::Tangency {
        return ensure(c.tangent_plus || c.tangent_minus, || format!("tangency at x = {x} without a tangent side"));
    }
    let lam = c.s_minus / (c.s_minus - c.s_plus);
    let inside = (0.0..=1.0).contains(&lam);
    ensure((c.kind == BoundaryKind::Crossing) == !inside, || {
        format!("x = {x}, eps = {eps}: kind {:?} with multiplier {lam}", c.kind)
    })?;
    ensure(c.lambda_star.is_some() == (c.kind != BoundaryKind::Crossing), || {
        format!("x = {x}, eps = {eps}: kind {:?} with lambda_star {:?}", c.kind, c.lambda_star)
    })
}

/// The sliding set is `(3/4 + 5ε/4, 3/4 + 15ε/4)`, stable for `ε > 0`, and the
/// reversed interval, unstable, for `ε < 0`; labels may only disagree within
/// `1e−8` of an endpoint, and tangency labels only near an endpoint.
pub fn sliding_interval_law(eps: f64, x: f64) -> Check {
    let sys = welander(eps)?;
    let (lo, hi) = if eps > 0.0 {
        (0.75 + 5.0 * eps / 4.0, 0.75 + 15.0 * eps / 4.0)
    } else {
        (0.75 + 15.0 * eps / 4.0, 0.75 + 5.0 * eps / 4.0)
    };
    let (xm, xp) = sliding_boundaries_default(eps);
    ensure((xm.min(xp) - lo).abs() <= 1e-12 && (xm.max(xp) - hi).abs() <= 1e-12, || {
        format!("fold abscissae ({xm}, {xp}) disagree with ({lo}, {hi}) at eps = {eps}")
    })?;
    let kind = classify_boundary(&sys, &[x, 0.0]).map_err(text)?.kind;
    let sliding = if eps > 0.0 { BoundaryKind::StableSliding } else { BoundaryKind::UnstableSliding };
    let tol = 1e-8;
    let ok = match kind {
        k if k == sliding => x > lo - tol && x < hi + tol,
        BoundaryKind::Crossing => x <= lo + tol || x >= hi - tol,
        BoundaryKind::Tangency => (x - lo).abs().min((x - hi).abs()) <= 1e-6,
        _ => false,
    };
    ensure(ok, || format!("x = {x} labelled {kind:?} for eps = {eps}, sliding set ({lo}, {hi})"))
}

/// The generic `dS/dλ` equals `−ε` up to the rounding of the sums that form
/// the two normal components; the closed form is exactly `−ε`.
pub fn ds_dlambda_is_minus_eps(eps: f64, x: f64, lam: f64) -> Check {
    let p = WelanderParams::nonsmooth(eps);
    ensure(welander::ds_dlambda(&p) == -eps, || format!("closed form dS/dλ differs from −ε at eps = {eps}"))?;
    let sys = welander(eps)?;
    let pt = [x, 0.0];
    let d = filippov::ds_dlambda(&sys, &pt, lam);
    // forward error of two five-term sums and their difference
    let terms = |k: f64| {
        p.beta.abs() + (p.beta * p.epsilon).abs() + (k * p.epsilon).abs() + p.alpha.abs()
            + ((p.alpha * p.beta - p.alpha) * x).abs()
    };
    let scale = terms(1.0) + terms(0.0);
    ensure((d + eps).abs() <= 8.0 * f64::EPSILON * scale, || {
        format!("dS/dλ = {d:e} vs −ε = {:e} at x = {x}", -eps)
    })
}

/// At `ε = 0` the phase curves through `y = 0` have slope
/// `dy/dx = S_k(x) / (1 − x − kx)`; it changes sign from + to − at the
/// `k = 1` fold (a maximum) and from − to + at the `k = 0` fold (a minimum).
pub fn fold_extrema_at_zero(h: f64) -> Check {
    let p = WelanderParams::nonsmooth(0.0);
    let slope = |x: f64, k: f64| normal_speed(x, k, &p) / (1.0 - x - k * x);
    let (l, r) = (0.75 - h, 0.75 + h);
    ensure(slope(l, 1.0) > 0.0 && slope(r, 1.0) < 0.0, || {
        format!("k = 1 fold is not a maximum: slopes {} and {} at ±{h}", slope(l, 1.0), slope(r, 1.0))
    })?;
    ensure(slope(l, 0.0) < 0.0 && slope(r, 0.0) > 0.0, || {
        format!("k = 0 fold is not a minimum: slopes {} and {} at ±{h}", slope(l, 0.0), slope(r, 0.0))
    })
}

// -------------------------------------------------------------- integrator

/// Integrates the Heaviside model, keeping the partial trajectory when the
/// chatter guard fires.
pub fn welander_trajectory(eps: f64, x0: [f64; 2], t_end: f64) -> Result<(WelanderFilippov, Trajectory), String> {
    let sys = welander(eps)?;
    let traj = match integrate(&sys, &x0, (0.0, t_end), &HybridOptions::default()) {
        Ok(t) => t,
        Err(IntegrationError::ZenoSuspected { partial, .. }) => *partial,
        Err(e) => return Err(e.to_string()),
    };
    Ok((sys, traj))
}

fn honest(mode: Mode, h: f64, tol: f64) -> bool {
    match mode {
        Mode::SmoothPlus => h >= -tol,
        Mode::SmoothMinus => h <= tol,
        Mode::Sliding => h.abs() <= tol,
    }
}

/// Every sample satisfies its segment's sign condition on `h`.
pub fn mode_honesty<S: PiecewiseSystem>(sys: &S, traj: &Trajectory) -> Check {
    for (t, x, mode) in traj.samples() {
        let h = sys.h(x);
        ensure(honest(mode, h, filippov::MANIFOLD_TOL * (1.0 + norm(x))), || {
            format!("sample at t = {t} in {mode:?} has h = {h:e}")
        })?;
    }
    Ok(())
}

/// Every manifold event lies on `h = 0` to `1e−9 (1 + |x|)`.
pub fn event_localisation<S: PiecewiseSystem>(sys: &S, traj: &Trajectory) -> Check {
    for e in traj.events().filter(|e| !matches!(e.kind, EventKind::TimeLimit | EventKind::DomainExit)) {
        let h = sys.h(&e.x);
        ensure(h.abs() <= 1e-9 * (1.0 + norm(&e.x)), || format!("{:?} at t = {} has h = {h:e}", e.kind, e.t))?;
    }
    Ok(())
}

/// One side of a piecewise system as a smooth field.
pub struct SideField<'a, S> {
    pub sys: &'a S,
    pub side: Side,
}

impl<S: PiecewiseSystem> VectorField for SideField<'_, S> {
    fn dim(&self) -> usize {
        self.sys.dim()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, String> {
        Ok(self.sys.field(self.side, x))
    }
}

/// Integrating backward from the end of each smooth segment (over at most
/// `window` time units) recovers the earlier sample within `1e−6`.
pub fn reversibility<S: PiecewiseSystem>(sys: &S, traj: &Trajectory, window: f64) -> Check {
    for seg in &traj.segments {
        let side = match seg.mode {
            Mode::SmoothPlus => Side::Plus,
            Mode::SmoothMinus => Side::Minus,
            Mode::Sliding => continue,
        };
        let (t_end, x_end) = seg.samples.last().expect("segments are nonempty");
        let Some((t0, x0)) = seg.samples.iter().find(|(t, _)| *t >= t_end - window) else { continue };
        if t_end - t0 < 1e-6 {
            continue;
        }
        let back = Reversed(SideField { sys, side });
        let sol = ode::integrate(&back, x_end, 0.0, t_end - t0, &tight()).map_err(text)?;
        let (_, x_back) = sol.last().expect("nonempty solution");
        let err = dist(x_back, x0);
        ensure(err <= 1e-6, || format!("{:?} segment [{t0}, {t_end}] returns with error {err:e}", seg.mode))?;
    }
    Ok(())
}

/// A relay system with a sliding line `y = 0` that ends at a fold.
///
/// With `mirror = false`: `f⁺ = (1, −1 + b(x − x_e))`, `f⁻ = (1, 1)`, and the
/// solution starting above the line reaches it, slides, and leaves upward at
/// `x = x_e + 1/b` with `λ* = 1`. `mirror = true` swaps the roles.
pub fn relay_system(b: f64, xe: f64, mirror: bool) -> LinearSystem {
    let steer = [[0.0, 0.0], [b, 0.0]];
    let flat = [[0.0, 0.0], [0.0, 0.0]];
    let (a_plus, b_plus, a_minus, b_minus) = if mirror {
        (flat, [1.0, -1.0], [[0.0, 0.0], [-b, 0.0]], [1.0, 1.0 + b * xe])
    } else {
        (steer, [1.0, -1.0 - b * xe], flat, [1.0, 1.0])
    };
    LinearSystem {
        a_plus,
        b_plus,
        a_minus,
        b_minus,
        normal: [0.0, 1.0],
        offset: 0.0,
        window: filippov::DomainBox::new(vec![-100.0, -100.0], vec![100.0, 100.0]),
    }
}

/// At every `SlideExitLambda1` the next segment is `SmoothPlus` with `f⁺`
/// pointing into `h > 0` (mirrored for `λ = 0`); at least one exit occurs.
pub fn slide_exit(b: f64, xe: f64, lead: f64, y0: f64, mirror: bool) -> Check {
    let sys = relay_system(b, xe, mirror).to_system();
    let x0 = [xe - 1.5 - lead, if mirror { -y0 } else { y0 }];
    let traj = integrate(&sys, &x0, (0.0, 10.0), &HybridOptions::default()).map_err(text)?;
    let mut exits = 0;
    for (i, seg) in traj.segments.iter().enumerate() {
        let Some(e) = &seg.exit_event else { continue };
        let (want, side, sign) = match e.kind {
            EventKind::SlideExitLambda1 => (Mode::SmoothPlus, Side::Plus, 1.0),
            EventKind::SlideExitLambda0 => (Mode::SmoothMinus, Side::Minus, -1.0),
            _ => continue,
        };
        exits += 1;
        let next = traj.segments.get(i + 1).ok_or("trajectory ends at a slide exit")?;
        ensure(next.mode == want, || format!("{:?} followed by {:?}", e.kind, next.mode))?;
        let s = filippov::dot(&sys.field(side, &e.x), &sys.grad_h(&e.x));
        ensure(sign * s >= -filippov::TANGENCY_TOL, || format!("{:?} with normal component {s:e}", e.kind))?;
        let after = next.samples.get(1).or(next.samples.first()).expect("nonempty");
        ensure(sign * sys.h(&after.1) >= 0.0, || format!("solution after {:?} is on the wrong side", e.kind))?;
    }
    ensure(exits > 0, || format!("no slide exit for b = {b}, x_e = {xe}, mirror = {mirror}"))
}

/// Endpoint errors of the smooth arctan model at successively halved
/// tolerances, against a tight reference.
pub fn endpoint_errors(eps: f64, a: f64, x0: [f64; 2], tols: &[f64]) -> Result<Vec<f64>, String> {
    let sys = WelanderSmooth::new(WelanderParams::smooth(eps, a), Chart::Xy).map_err(text)?;
    let t1 = 5.0;
    let reference = ode::solve_at(&sys, &x0, 0.0, &[t1], &IntegrationOptions { rtol: 1e-13, atol: 1e-15, ..tight() })
        .map_err(text)?;
    tols.iter()
        .map(|&tol| {
            // uncapped steps, so the error controller alone picks them
            let opts =
                IntegrationOptions { rtol: tol, atol: tol * 1e-2, h_max: f64::INFINITY, ..IntegrationOptions::default() };
            let x = ode::solve_at(&sys, &x0, 0.0, &[t1], &opts).map_err(text)?;
            Ok(dist(&x[0], &reference[0]))
        })
        .collect()
}

/// Least-squares slope of `log(err)` against `log(tol)`.
pub fn loglog_slope(tols: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = tols.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// With error-per-step control on the fifth-order solution the global error
/// is proportional to the tolerance, so halving the tolerance should halve
/// the endpoint error: the fitted log–log slope must lie in `[0.7, 1.3]`.
/// Sixteen halvings keep step-selection noise well below the trend.
pub fn convergence_order(eps: f64, a: f64, x0: [f64; 2]) -> Check {
    let tols: Vec<f64> = (0..16).map(|j| 1e-5 / f64::powi(2.0, j)).collect();
    let errs = endpoint_errors(eps, a, x0, &tols)?;
    let slope = loglog_slope(&tols, &errs);
    ensure((0.7..=1.3).contains(&slope), || format!("error slope {slope:.3} from errors {errs:?}"))
}

// ---------------------------------------------------------------- welander

/// `k_smooth → k_heaviside` with the arctan tail bound `2a / (π|ρ − ε|)`.
pub fn heaviside_limit(rho: f64, eps: f64) -> Check {
    for a in [1e-2, 1e-4, 1e-6] {
        let p = WelanderParams::smooth(eps, a);
        let ks = k_smooth(rho, &p).map_err(text)?;
        let kh = k_heaviside(rho, &p).value().ok_or("ρ = ε has no Heaviside value")?;
        let bound = 2.0 * a / (PI * (rho - eps).abs());
        ensure((ks - kh).abs() < bound, || format!("a = {a}: |{ks} − {kh}| ≥ {bound:e}"))?;
    }
    Ok(())
}

/// Integrating the smooth model in `(T, S)` and mapping agrees with mapping
/// and integrating in `(x, y)` within `1e−8` at `t = 1, …, 10`.
pub fn chart_commutation(eps: f64, a: f64, ts0: TsState) -> Check {
    let p = WelanderParams::smooth(eps, a);
    let ts_sys = WelanderSmooth::new(p, Chart::Ts).map_err(text)?;
    let xy_sys = WelanderSmooth::new(p, Chart::Xy).map_err(text)?;
    let times: Vec<f64> = (1..=10).map(f64::from).collect();
    let xy0 = ts0.to_xy(&p);
    let a_run = ode::solve_at(&ts_sys, &[ts0.t, ts0.s], 0.0, &times, &tight()).map_err(text)?;
    let b_run = ode::solve_at(&xy_sys, &[xy0.x, xy0.y], 0.0, &times, &tight()).map_err(text)?;
    for ((t, u), v) in times.iter().zip(&a_run).zip(&b_run) {
        let mapped = TsState { t: u[0], s: u[1] }.to_xy(&p);
        let err = dist(&[mapped.x, mapped.y], v);
        ensure(err <= 1e-8, || format!("charts disagree by {err:e} at t = {t}"))?;
    }
    Ok(())
}

/// `(T, S) → (x, y) → (T, S)` is the identity to `1e−12`.
pub fn chart_round_trip(ts: TsState, eps: f64) -> Check {
    let p = WelanderParams::nonsmooth(eps);
    let back = ts.to_xy(&p).to_ts(&p);
    let err = dist(&[back.t, back.s], &[ts.t, ts.s]);
    ensure(err <= 1e-12 * (1.0 + ts.t.abs().max(ts.s.abs())), || format!("round trip of {ts:?} off by {err:e}"))
}

/// The `(x, y)` field is the push-forward `(Ṫ, Ṡ − αṪ)` of the `(T, S)` field.
pub fn field_push_forward(ts: TsState, eps: f64, k: f64) -> Check {
    let p = WelanderParams::nonsmooth(eps);
    let (dt, ds) = vector_field_ts(ts, &p, k);
    let (dx, dy) = vector_field_xy(ts.to_xy(&p), &p, k);
    let err = dist(&[dx, dy], &[dt, ds - p.alpha * dt]);
    ensure(err <= 1e-12 * (1.0 + dt.abs() + ds.abs()), || format!("push-forward off by {err:e} at {ts:?}"))
}

/// The `k = 1` equilibrium lies where `h < 0` and the `k = 0` one where
/// `h > 0`, i.e. neither is an equilibrium of the Heaviside model.
pub fn virtual_equilibria_wrong_side(eps: f64) -> Check {
    let p = WelanderParams::nonsmooth(eps);
    let [e0, e1] = virtual_equilibria(&p);
    let (h0, h1) = (e0.rho(&p) - eps, e1.rho(&p) - eps);
    ensure(h0 > 0.0, || format!("k = 0 equilibrium {e0:?} has h = {h0} ≤ 0 at eps = {eps}: it is real"))?;
    ensure(h1 < 0.0, || format!("k = 1 equilibrium {e1:?} has h = {h1} ≥ 0 at eps = {eps}: it is real"))
}

/// Validation accepts exactly positive `α, β` and nonnegative `a`.
pub fn params_validation(alpha: f64, beta: f64, a: f64) -> Check {
    let p = WelanderParams { alpha, beta, epsilon: 0.0, a };
    let expect = alpha > 0.0 && beta > 0.0 && a >= 0.0;
    ensure(p.validate().is_ok() == expect, || format!("validate({p:?}) = {:?}", p.validate()))?;
    let d: WelanderParams = toml::from_str("").map_err(text)?;
    ensure(d.alpha == 0.8 && d.beta == 0.5, || format!("defaults {d:?}"))
}

// ------------------------------------------------------------------ blowup

/// `Φ⁻¹ ∘ Φ` is the identity to `1e−12` for `|z| ≤ 10`, and `Φ ∘ Φ⁻¹` on `k`.
pub fn phi_round_trip(z: f64, k: f64) -> Check {
    let back = phi_inv(phi(z)).map_err(text)?;
    ensure((back - z).abs() <= 1e-12 * z.abs().max(1.0), || format!("Φ⁻¹(Φ({z})) = {back}"))?;
    let again = phi(phi_inv(k).map_err(text)?);
    ensure((again - k).abs() <= 1e-12, || format!("Φ(Φ⁻¹({k})) = {again}"))
}

/// `blowup_field` is the push-forward of the smooth `(x, y)` field under
/// `k = Φ(y/a)`, with `Φ′(z) = 1 / (π(1 + z²))`.
pub fn blowup_push_forward(x: f64, z: f64, eps: f64, a: f64) -> Check {
    let p = WelanderParams::smooth(eps, a);
    let y = a * z;
    let [_, k] = xy_to_xk([x, y], a);
    let xy = WelanderSmooth::new(p, Chart::Xy).map_err(text)?.field(&[x, y]);
    let want = [xy[0], xy[1] / (a * PI * (1.0 + z * z))];
    let got = blowup_field(x, k, &p).map_err(text)?;
    let err = dist(&got, &want);
    ensure(err <= 1e-9 * (1.0 + norm(&want)), || format!("push-forward off by {err:e} at (x, z) = ({x}, {z})"))
}

/// Blown-up trajectories mapped through `y = aΦ⁻¹(k)` match smooth `(x, y)`
/// trajectories within `1e−6` on `t ∈ [0, 10]`.
pub fn chart_conjugacy(eps: f64, a: f64, x0: f64, z0: f64) -> Check {
    let p = WelanderParams::smooth(eps, a);
    let smooth = WelanderSmooth::new(p, Chart::Xy).map_err(text)?;
    let blown = BlowUpSystem::new(p).map_err(text)?;
    let times: Vec<f64> = (1..=40).map(|i| 0.25 * f64::from(i)).collect();
    let y0 = a * z0;
    let xk0 = xy_to_xk([x0, y0], a);
    let u = ode::solve_at(&smooth, &[x0, y0], 0.0, &times, &tight()).map_err(text)?;
    let v = ode::solve_at(&blown, &xk0, 0.0, &times, &tight()).map_err(text)?;
    for ((t, xy), xk) in times.iter().zip(&u).zip(&v) {
        let back = xk_to_xy([xk[0], xk[1]], a).map_err(text)?;
        let err = dist(&back, xy);
        ensure(err <= 1e-6, || format!("charts disagree by {err:e} at t = {t}"))?;
    }
    Ok(())
}

/// Every printed Taylor coefficient matches the finite-difference oracle to
/// `1e−6` relative, for steps scaled by `step_scale`.
pub fn coefficient_oracle(step_scale: f64) -> Check {
    for c in LocalExpansion::new().coefficients() {
        let oracle = fd_coefficient(c.component, &c.monomial, step_scale);
        let rel = (oracle - c.value).abs() / c.value.abs();
        ensure(rel <= 1e-6, || format!("{} = {} vs oracle {oracle} (rel {rel:e})", c.name, c.value))?;
    }
    Ok(())
}

fn mat_err(a: &Mat2, b: &Mat2) -> f64 {
    (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (a[i][j] - b[i][j]).abs()).fold(0.0, f64::max)
}

/// Error of the printed Jacobian against the numeric one, along the ray
/// `s·(a, ε)` for `s = 1, 1/2, 1/4, 1/8`, evaluated at the base point or at
/// the smooth equilibrium.
pub fn jacobian_errors(a: f64, eps: f64, at_equilibrium: bool) -> Result<Vec<(f64, f64)>, String> {
    let exp = LocalExpansion::new();
    (0..4)
        .map(|j| {
            let s = f64::powi(0.5, j);
            let p = WelanderParams::smooth(s * eps, s * a);
            let point = if at_equilibrium { smooth_equilibrium(&p).map_err(text)? } else { BASE_POINT };
            let num = fast_jacobian(point, &p).map_err(text)?;
            Ok((s * (a + eps.abs()), mat_err(&exp.jacobian(s * a, s * eps), &num)))
        })
        .collect()
}

/// At the base point the printed Jacobian is a true second-order
/// truncation: `error / (|a| + |ε|)²` stays below 10.
pub fn jacobian_consistency_base(a: f64, eps: f64) -> Check {
    for (r, e) in jacobian_errors(a, eps, false)? {
        ensure(e / (r * r) <= 10.0, || format!("error {e:e} at |a| + |ε| = {r:e}"))?;
    }
    Ok(())
}

/// At the smooth equilibrium the remainder is first order: `error /
/// (|a| + |ε|)` stays below 10.
pub fn jacobian_consistency_equilibrium(a: f64, eps: f64) -> Check {
    for (r, e) in jacobian_errors(a, eps, true)? {
        ensure(e / r <= 10.0, || format!("error {e:e} at |a| + |ε| = {r:e}"))?;
    }
    Ok(())
}

/// Complex eigenvalues of the equilibrium come as a conjugate pair with real
/// part `trace/2`, and every eigenvalue solves `λ² − tr λ + det = 0`.
pub fn eigen_symmetry(a: f64, eps: f64) -> Check {
    let p = WelanderParams::smooth(eps, a);
    let j = fast_jacobian(smooth_equilibrium(&p).map_err(text)?, &p).map_err(text)?;
    let (tr, det) = (linalg::trace(&j), linalg::det(&j));
    let e = linalg::eigenvalues(&j);
    let scale = 1.0 + tr.abs() + det.abs().sqrt();
    if tr * tr - 4.0 * det < 0.0 {
        ensure(e.im[0] == -e.im[1] && e.re[0] == e.re[1], || format!("not a conjugate pair: {e:?}"))?;
        ensure((e.re[0] - 0.5 * tr).abs() <= 1e-10 * scale, || format!("Re λ = {} vs tr/2 = {}", e.re[0], tr / 2.0))?;
    }
    for i in 0..2 {
        let (re, im) = (e.re[i], e.im[i]);
        let res_re = re * re - im * im - tr * re + det;
        let res_im = 2.0 * re * im - tr * im;
        ensure(res_re.abs().max(res_im.abs()) <= 1e-10 * scale * scale, || {
            format!("λ = {re} + {im}i misses the characteristic polynomial")
        })?;
    }
    Ok(())
}

/// Along `ε = t·ρ_H·a` the smooth equilibrium approaches `(3/4, 1/3)`:
/// distances decrease over `a = 1e−2, 1e−3, 1e−4` and end below `1e−3`.
pub fn equilibrium_limit(t: f64) -> Check {
    let rho = LocalExpansion::new().hopf_slope();
    let mut last = f64::INFINITY;
    for a in [1e-2, 1e-3, 1e-4] {
        let e = smooth_equilibrium(&WelanderParams::smooth(t * rho * a, a)).map_err(text)?;
        let d = dist(&e, &BASE_POINT);
        ensure(d < last, || format!("distance {d:e} at a = {a} did not decrease from {last:e}"))?;
        last = d;
    }
    ensure(last < 1e-3, || format!("distance {last:e} at a = 1e−4"))
}

// -------------------------------------------------------------------- scan

/// Nonsmooth and smooth classifications agree on steady versus oscillatory
/// behaviour when `|ε − ε*(a)| > 5a`.
pub fn regime_consistency(eps: f64, a: f64, eps_star: f64, budget: &Budget) -> Check {
    if (eps - eps_star).abs() <= 5.0 * a {
        return Ok(());
    }
    let ns = scan::nonsmooth_point(eps, budget);
    let sm = scan::smooth_point(a, eps, budget);
    ensure(ns.attractor.oscillates() == sm.attractor.oscillates(), || {
        format!(
            "eps = {eps}, a = {a} (eps* = {eps_star:.3e}): nonsmooth {:?}, smooth {:?}",
            ns.attractor, sm.attractor
        )
    })
}

/// Structural invariants of one scan point.
pub fn scan_point_invariants(p: &ScanPoint) -> Check {
    ensure((p.a == 0.0) == (p.regime == scan::Regime::NonsmoothFilippov), || format!("regime {:?} at a = {}", p.regime, p.a))?;
    ensure(p.orbit_amplitude.is_some() == (p.attractor == scan::Attractor::PeriodicOrbit), || {
        format!("amplitude {:?} with attractor {:?}", p.orbit_amplitude, p.attractor)
    })?;
    if let Some((lo, hi)) = p.slide_interval {
        ensure(lo <= hi, || format!("slide interval ({lo}, {hi}) out of order"))?;
        let width = 2.5 * p.eps.abs();
        ensure(((hi - lo) - width).abs() <= 1e-12, || format!("slide width {} vs {width} at eps = {}", hi - lo, p.eps))?;
    }
    Ok(())
}

/// Two runs of a nonsmooth scan give identical CSV bytes, points come out
/// sorted by `(a, ε)` without duplicates, and each point is well formed.
pub fn scan_determinism(grid: &[f64], budget: &Budget) -> Check {
    let render = || {
        let d = scan::scan_nonsmooth(grid, budget);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).map(|_| (d, buf)).map_err(text)
    };
    let (d, first) = render()?;
    let (_, second) = render()?;
    ensure(first == second, || "scan output differs between identical runs".into())?;
    for w in d.points.windows(2) {
        let ordered = (w[0].a, w[0].eps) < (w[1].a, w[1].eps);
        ensure(ordered, || format!("points out of order: {} then {}", w[0].eps, w[1].eps))?;
    }
    d.points.iter().try_for_each(scan_point_invariants)
}

// --------------------------------------------------------------------- cli

/// Running a command twice from the same config gives identical bytes.
pub fn cli_determinism(cmd: Command, cfg: &RunConfig) -> Check {
    let run = || cli::execute(cmd, cfg, &mut Vec::new()).map(|p| p.bytes).map_err(text);
    let first = run()?;
    ensure(first == run()?, || format!("{} output differs between identical runs", cmd.name()))
}

/// Which failure an [`exit_code_contract`] case provokes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Config,
    Numerics,
    Io,
}

/// Provokes a failure of the given kind through the full argument path and
/// checks the exit code, and that `--stdout` data is clean.
pub fn exit_code_contract(kind: FailureKind, tag: u64) -> Check {
    let dir = std::env::temp_dir().join(format!("fusedfocus-check-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(text)?;
    let no_env = |_: &str| None;
    let cfg_path = dir.join("run.toml");
    let (body, extra, expect): (&str, Vec<String>, i32) = match kind {
        FailureKind::Config => {
            let bad = ["epsilon = 0.1", "[params]\nalpha = -1.0", "schema = 2", "[simulate]\nt_span = [1.0, 0.0]"];
            (bad[(tag % bad.len() as u64) as usize], vec![], 1)
        }
        FailureKind::Numerics => ("[simulate.integration.ode]\nmax_evals = 5", vec![], 2),
        FailureKind::Io => {
            let blocker = dir.join("not-a-dir");
            std::fs::write(&blocker, b"x").map_err(text)?;
            ("", vec!["--out".into(), blocker.display().to_string()], 3)
        }
    };
    std::fs::write(&cfg_path, body).map_err(text)?;
    let mut args = vec!["fusedfocus".to_string(), "simulate".into(), "--config".into(), cfg_path.display().to_string()];
    args.extend(extra);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::main_with(args, &no_env, &mut out, &mut err);
    let clean = {
        let args = ["fusedfocus", "sliding", "--stdout", "--format", "json"];
        let (mut o, mut e) = (Vec::new(), Vec::new());
        cli::main_with(args, &no_env, &mut o, &mut e) == 0 && serde_json::from_slice::<serde_json::Value>(&o).is_ok()
    };
    let _ = std::fs::remove_dir_all(&dir);
    ensure(code == expect, || {
        format!("{kind:?} case exited with {code}, expected {expect}: {}", String::from_utf8_lossy(&err).trim())
    })?;
    ensure(out.is_empty(), || "data written to stdout without --stdout".into())?;
    ensure(clean, || "--stdout output is not clean JSON".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relay_exits_both_ways() {
        slide_exit(1.0, 0.0, 0.5, 0.5, false).unwrap();
        slide_exit(1.0, 0.0, 0.5, 0.5, true).unwrap();
    }

    #[test]
    fn virtual_equilibria_inside_the_band() {
        for eps in [-0.06, -0.02, 0.0, 0.1, 0.19] {
            virtual_equilibria_wrong_side(eps).unwrap();
        }
    }

    #[test]
    fn k1_equilibrium_is_real_below_minus_one_fifteenth() {
        assert!(virtual_equilibria_wrong_side(-0.1).is_err());
        assert!(virtual_equilibria_wrong_side(-0.07).is_err());
    }

    #[test]
    fn fold_extrema() {
        fold_extrema_at_zero(1e-3).unwrap();
    }
}
