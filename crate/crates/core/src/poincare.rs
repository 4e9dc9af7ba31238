//! Return maps on planar sections and limit-cycle location.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filippov::{norm, PiecewiseSystem};
use crate::integrator::{integrate_with_section, HybridOptions, Section, SectionHit, SectionWatch};
use crate::ode::{field_fn, IntegrationOptions, OdeError, Stepper, VectorField};
use crate::roots::{brent, RootError, RootOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoincareError {
    #[error("no return to the section within t = {t_max}")]
    NoReturn { t_max: f64, hits: Vec<SectionHit> },
    #[error("integration failed at t = {t}: {reason}")]
    Flow { t: f64, reason: String, hits: Vec<SectionHit> },
    #[error("P(s) − s does not change sign on [{lo}, {hi}]: {reason}")]
    BracketInvalid { lo: f64, hi: f64, reason: String },
    #[error("fixed-point iteration did not converge (best s = {best}, residual {residual:e})")]
    NotConverged { best: f64, residual: f64 },
}

/// Passages through a section, in time order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Passages {
    pub hits: Vec<SectionHit>,
    /// Solution samples up to the last hit (empty unless requested).
    pub samples: Vec<(f64, Vec<f64>)>,
}

/// Anything that can be flowed forward until it passes through a section.
pub trait Flow: Sync {
    /// Integrates from `x0` (at `t = 0`) until `max_hits` oriented passages
    /// have occurred. Fewer passages before `t_max` is a `NoReturn` error.
    fn passages(
        &self,
        x0: &[f64],
        section: &Section,
        t_max: f64,
        max_hits: usize,
        keep_samples: bool,
    ) -> Result<Passages, PoincareError>;
}

/// A smooth vector field integrated with the adaptive Runge–Kutta pair.
#[derive(Debug, Clone)]
pub struct SmoothFlow<F> {
    pub field: F,
    pub opts: IntegrationOptions,
}

impl<F: VectorField> SmoothFlow<F> {
    pub fn new(field: F) -> Self {
        Self { field, opts: IntegrationOptions::default() }
    }
}

impl<F: VectorField> Flow for SmoothFlow<F> {
    fn passages(
        &self,
        x0: &[f64],
        section: &Section,
        t_max: f64,
        max_hits: usize,
        keep_samples: bool,
    ) -> Result<Passages, PoincareError> {
        let f = field_fn(&self.field);
        let mut stepper = Stepper::new(self.opts);
        let mut watch = SectionWatch { section, max_hits, hits: Vec::new() };
        let mut samples = Vec::new();
        let (mut t, mut x) = (0.0, x0.to_vec());
        if keep_samples {
            samples.push((t, x.clone()));
        }
        let fail = |e: OdeError, t: f64, hits: &[SectionHit]| PoincareError::Flow {
            t,
            reason: e.to_string(),
            hits: hits.to_vec(),
        };
        while t < t_max {
            let step = stepper.step(&f, &x, t, t_max).map_err(|e| fail(e, t, &watch.hits))?;
            // a step landing on the section needs the velocity there to count it
            let v_end = if section.g(&step.x1).abs() <= 1e-12 * (1.0 + norm(&step.x1)) {
                Some(f(&step.x1).map_err(|r| fail(OdeError::Field { state: step.x1.clone(), reason: r }, t, &watch.hits))?)
            } else {
                None
            };
            let hit = watch.check(&mut stepper, &f, &step, v_end.as_deref()).map_err(|e| fail(e, t, &watch.hits))?;
            if let Some(h) = hit {
                if watch.done() {
                    if keep_samples {
                        samples.push((h.t, h.x.clone()));
                    }
                    return Ok(Passages { hits: watch.hits, samples });
                }
            }
            t = step.t1();
            x = step.x1;
            if keep_samples {
                samples.push((t, x.clone()));
            }
        }
        Err(PoincareError::NoReturn { t_max, hits: watch.hits })
    }
}

/// A Filippov system integrated with the event-driven hybrid integrator.
#[derive(Debug, Clone)]
pub struct HybridFlow<S> {
    pub sys: S,
    pub opts: HybridOptions,
}

impl<S: PiecewiseSystem> HybridFlow<S> {
    pub fn new(sys: S) -> Self {
        Self { sys, opts: HybridOptions::default() }
    }
}

impl<S: PiecewiseSystem> Flow for HybridFlow<S> {
    fn passages(
        &self,
        x0: &[f64],
        section: &Section,
        t_max: f64,
        max_hits: usize,
        keep_samples: bool,
    ) -> Result<Passages, PoincareError> {
        let opts = HybridOptions { record_samples: keep_samples, ..self.opts };
        let traj = integrate_with_section(&self.sys, x0, (0.0, t_max), &opts, Some((section, max_hits))).map_err(|e| {
            let hits = e.partial().map(|p| p.hits.clone()).unwrap_or_default();
            let t = e.partial().and_then(|p| p.final_state()).map_or(0.0, |(t, _)| t);
            PoincareError::Flow { t, reason: e.to_string(), hits }
        })?;
        if traj.hits.len() < max_hits {
            return Err(PoincareError::NoReturn { t_max, hits: traj.hits });
        }
        let samples = if keep_samples { traj.samples().map(|(t, x, _)| (t, x.to_vec())).collect() } else { Vec::new() };
        Ok(Passages { hits: traj.hits, samples })
    }
}

/// Section parameter of the next oriented return from `section.lift(s)`.
pub fn poincare_map<F: Flow + ?Sized>(flow: &F, section: &Section, s: f64, t_max: f64) -> Result<f64, PoincareError> {
    let p = flow.passages(&section.lift(s), section, t_max, 1, false)?;
    Ok(section.param(&p.hits[0].x))
}

/// Successive section parameters `s, P(s), P²(s), …` (`n` returns), from a
/// single integration.
pub fn return_sequence<F: Flow + ?Sized>(
    flow: &F,
    section: &Section,
    s: f64,
    n: usize,
    t_max: f64,
) -> Result<Vec<f64>, PoincareError> {
    let p = flow.passages(&section.lift(s), section, t_max, n, false)?;
    Ok(std::iter::once(s).chain(p.hits.iter().map(|h| section.param(&h.x))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub section_point: Vec<f64>,
    pub period: f64,
    /// One full cycle, starting and ending on the section.
    pub samples: Vec<(f64, Vec<f64>)>,
    /// Peak-to-peak range of `x[amplitude_axis]` over the cycle.
    pub amplitude: f64,
    pub stability: Stability,
    /// `|dP/ds|` at the fixed point.
    pub floquet_estimate: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CycleOptions {
    pub t_max: f64,
    pub orbit_tol: f64,
    pub floquet_margin: f64,
    /// Half-width of the centred difference for `dP/ds`, relative to `1 + |s|`.
    pub fd_step: f64,
    pub amplitude_axis: usize,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self { t_max: 200.0, orbit_tol: 1e-8, floquet_margin: 0.05, fd_step: 1e-5, amplitude_axis: 0 }
    }
}

/// Locates a fixed point of the return map inside `bracket` and measures the
/// resulting cycle.
pub fn find_limit_cycle<F: Flow + ?Sized>(
    flow: &F,
    section: &Section,
    bracket: [f64; 2],
    opts: &CycleOptions,
) -> Result<PeriodicOrbit, PoincareError> {
    let [lo, hi] = bracket;
    let invalid = |reason: String| PoincareError::BracketInvalid { lo, hi, reason };
    let disp = |s: f64| poincare_map(flow, section, s, opts.t_max).map(|p| p - s);
    let d_lo = disp(lo).map_err(|e| invalid(format!("at s = {lo}: {e}")))?;
    let d_hi = disp(hi).map_err(|e| invalid(format!("at s = {hi}: {e}")))?;
    if d_lo * d_hi > 0.0 {
        return Err(invalid(format!("P(s) − s = {d_lo:e} and {d_hi:e}")));
    }

    let root_opts = RootOptions { x_tol: 1e-13, f_tol: 0.1 * opts.orbit_tol, max_iter: 100 };
    let s_star = match brent(disp, lo, hi, root_opts) {
        Ok(s) => s,
        Err(RootError::NotConverged { best, .. }) => {
            let residual = disp(best).map(f64::abs).unwrap_or(f64::INFINITY);
            return Err(PoincareError::NotConverged { best, residual });
        }
        Err(RootError::Evaluation(reason)) => return Err(invalid(reason)),
        Err(e) => return Err(invalid(e.to_string())),
    };

    let cycle = flow.passages(&section.lift(s_star), section, opts.t_max, 1, true)?;
    let end = &cycle.hits[0];
    let residual = (section.param(&end.x) - s_star).abs();
    if residual > opts.orbit_tol {
        return Err(PoincareError::NotConverged { best: s_star, residual });
    }

    let ds = opts.fd_step * (1.0 + s_star.abs());
    let p_plus = poincare_map(flow, section, s_star + ds, opts.t_max)?;
    let p_minus = poincare_map(flow, section, s_star - ds, opts.t_max)?;
    let floquet_estimate = ((p_plus - p_minus) / (2.0 * ds)).abs();
    let stability = if floquet_estimate < 1.0 - opts.floquet_margin {
        Stability::Stable
    } else if floquet_estimate > 1.0 + opts.floquet_margin {
        Stability::Unstable
    } else {
        Stability::Undetermined
    };

    let axis = opts.amplitude_axis;
    let (mn, mx) = cycle
        .samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), (_, x)| (mn.min(x[axis]), mx.max(x[axis])));
    Ok(PeriodicOrbit {
        section_point: section.lift(s_star),
        period: end.t,
        samples: cycle.samples,
        amplitude: mx - mn,
        stability,
        floquet_estimate,
        residual,
    })
}
