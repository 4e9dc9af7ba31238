//! Event-driven integration of piecewise-smooth systems.
//!
//! Smooth segments are advanced with the adaptive Dormand–Prince pair.
//! Every sign change of `h` inside an accepted step is localised by
//! re-integrating a partial step, the event state is projected onto
//! `h = 0`, and the boundary classification decides whether the solution
//! crosses, slides or grazes. Sliding segments follow `f(x; λ*(x))` with a
//! projection back onto the manifold after every step and end when `λ*`
//! leaves `[0, 1]`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filippov::{dot, norm, raw_lambda, DomainBox, PiecewiseSystem, Side};
use crate::ode::{IntegrationOptions, OdeError, Step, Stepper};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    SmoothPlus,
    SmoothMinus,
    Sliding,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::SmoothPlus => "smooth_plus",
            Mode::SmoothMinus => "smooth_minus",
            Mode::Sliding => "sliding",
        }
    }

    fn side(self) -> Option<Side> {
        match self {
            Mode::SmoothPlus => Some(Side::Plus),
            Mode::SmoothMinus => Some(Side::Minus),
            Mode::Sliding => None,
        }
    }

    fn smooth(side: Side) -> Self {
        match side {
            Side::Plus => Mode::SmoothPlus,
            Side::Minus => Mode::SmoothMinus,
        }
    }
}

/// `CrossingIn` enters `h > 0`; `CrossingOut` leaves it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    CrossingIn,
    CrossingOut,
    SlideEntry,
    SlideExitLambda0,
    SlideExitLambda1,
    TangencyGraze,
    TimeLimit,
    DomainExit,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::CrossingIn => "crossing_in",
            EventKind::CrossingOut => "crossing_out",
            EventKind::SlideEntry => "slide_entry",
            EventKind::SlideExitLambda0 => "slide_exit_lambda0",
            EventKind::SlideExitLambda1 => "slide_exit_lambda1",
            EventKind::TangencyGraze => "tangency_graze",
            EventKind::TimeLimit => "time_limit",
            EventKind::DomainExit => "domain_exit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySegment {
    pub mode: Mode,
    pub samples: Vec<(f64, Vec<f64>)>,
    pub entry_event: Option<Event>,
    pub exit_event: Option<Event>,
}

impl TrajectorySegment {
    fn new(mode: Mode, t: f64, x: Vec<f64>, entry: Option<Event>) -> Self {
        Self { mode, samples: vec![(t, x)], entry_event: entry, exit_event: None }
    }

    fn push(&mut self, t: f64, x: Vec<f64>) {
        if let Some((tl, _)) = self.samples.last() {
            if t <= *tl {
                return;
            }
        }
        self.samples.push((t, x));
    }
}

/// A point where the solution passed through a Poincaré section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionHit {
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub segments: Vec<TrajectorySegment>,
    pub hits: Vec<SectionHit>,
    pub evals: u64,
}

impl Trajectory {
    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.segments.iter().filter_map(|s| s.exit_event.as_ref())
    }

    pub fn final_state(&self) -> Option<(f64, &[f64])> {
        self.segments.last().and_then(|s| s.samples.last()).map(|(t, x)| (*t, x.as_slice()))
    }

    pub fn final_mode(&self) -> Option<Mode> {
        self.segments.last().map(|s| s.mode)
    }

    /// All samples in time order as `(t, x, mode)`.
    pub fn samples(&self) -> impl Iterator<Item = (f64, &[f64], Mode)> {
        self.segments.iter().flat_map(|s| s.samples.iter().map(move |(t, x)| (*t, x.as_slice(), s.mode)))
    }
}

#[derive(Debug, Error)]
pub enum IntegrationError {
    #[error("more than {limit} events within one time unit near t = {t}; Zeno behaviour suspected")]
    ZenoSuspected { t: f64, limit: usize, partial: Box<Trajectory> },
    #[error("initial state {0:?} is outside the domain")]
    InitialOutsideDomain(Vec<f64>),
    #[error("integration failed at t = {t}: {source}")]
    Ode { t: f64, source: OdeError, partial: Box<Trajectory> },
}

impl IntegrationError {
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            IntegrationError::ZenoSuspected { partial, .. } | IntegrationError::Ode { partial, .. } => Some(partial),
            IntegrationError::InitialOutsideDomain(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HybridOptions {
    pub ode: IntegrationOptions,
    /// Events allowed per unit of time before Zeno behaviour is declared.
    pub max_events_per_unit: usize,
    /// Tolerance for the projection onto `h = 0` during sliding.
    pub projection_tol: f64,
    /// Keep every accepted step (otherwise only segment endpoints).
    pub record_samples: bool,
}

impl Default for HybridOptions {
    fn default() -> Self {
        Self { ode: IntegrationOptions::default(), max_events_per_unit: 10_000, projection_tol: 1e-10, record_samples: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Increasing,
    Decreasing,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Increasing => 1.0,
            Orientation::Decreasing => -1.0,
        }
    }
}

/// A planar Poincaré section `{x[axis] = value}` crossed in a given direction,
/// parameterised by the other coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub axis: usize,
    pub value: f64,
    pub orientation: Orientation,
}

impl Section {
    pub fn new(axis: usize, value: f64, orientation: Orientation) -> Self {
        assert!(axis < 2, "planar sections only");
        Self { axis, value, orientation }
    }

    /// Signed distance, positive on the side the orientation points to.
    pub fn g(&self, x: &[f64]) -> f64 {
        self.orientation.sign() * (x[self.axis] - self.value)
    }

    pub fn param(&self, x: &[f64]) -> f64 {
        x[1 - self.axis]
    }

    pub fn lift(&self, s: f64) -> Vec<f64> {
        let mut p = vec![0.0; 2];
        p[self.axis] = self.value;
        p[1 - self.axis] = s;
        p
    }

    fn flux(&self, v: &[f64]) -> f64 {
        self.orientation.sign() * v[self.axis]
    }
}

/// Section bookkeeping shared by the smooth and hybrid integrators.
pub(crate) struct SectionWatch<'a> {
    pub section: &'a Section,
    pub max_hits: usize,
    pub hits: Vec<SectionHit>,
}

impl<'a> SectionWatch<'a> {
    pub fn done(&self) -> bool {
        self.hits.len() >= self.max_hits
    }

    /// Checks a step `(x0 → x1)`. Returns the hit, localised inside the step
    /// when the crossing is interior.
    pub fn check<F>(
        &mut self,
        stepper: &mut Stepper,
        f: &F,
        step: &Step,
        end_is_event: Option<&[f64]>,
    ) -> Result<Option<SectionHit>, OdeError>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, String>,
    {
        let s = self.section;
        let g0 = s.g(&step.x0);
        let g1 = s.g(&step.x1);
        if g0 >= 0.0 {
            return Ok(None);
        }
        let tol = 1e-12 * (1.0 + norm(&step.x1));
        let hit = if g1 > tol {
            let (theta, x) = stepper.locate(f, step, |x| s.g(x))?;
            Some(SectionHit { t: step.t0 + theta * step.h, x })
        } else if g1.abs() <= tol {
            // ended on the section at an event: count it only if the flow
            // after the event moves to the positive side
            match end_is_event {
                Some(v) if s.flux(v) > 0.0 => Some(SectionHit { t: step.t1(), x: step.x1.clone() }),
                _ => None,
            }
        } else {
            None
        };
        // a hit recorded at an event can reappear at θ ≈ 0 of the next step
        let repeat = |h: &SectionHit| self.hits.last().is_some_and(|l| h.t - l.t <= 1e-9 * (1.0 + h.t.abs()));
        let hit = hit.filter(|h| !repeat(h));
        if let Some(h) = &hit {
            self.hits.push(h.clone());
        }
        Ok(hit)
    }
}

fn project<S: PiecewiseSystem + ?Sized>(sys: &S, x: &mut [f64], tol: f64) {
    for _ in 0..4 {
        let hv = sys.h(x);
        if hv.abs() <= tol * (1.0 + norm(x)) {
            return;
        }
        let g = sys.grad_h(x);
        let gg = dot(&g, &g);
        if gg == 0.0 {
            return;
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= hv * gi / gg;
        }
    }
}

/// Chooses the mode that continues from a manifold point.
///
/// `arrived_from` is the smooth side the solution came from, if any. The
/// rule only looks at the signs of the one-sided normal components:
/// a field that points away from the manifold into its own region takes
/// the solution there; two fields pointing into the manifold give sliding.
fn decide<S: PiecewiseSystem + ?Sized>(sys: &S, x: &[f64], arrived_from: Option<Side>) -> (Mode, EventKind) {
    let g = sys.grad_h(x);
    let sp = dot(&sys.f_plus(x), &g);
    let sm = dot(&sys.f_minus(x), &g);
    let plus_leaves = sp > 0.0; // f⁺ points into h > 0
    let minus_leaves = sm < 0.0; // f⁻ points into h < 0
    match arrived_from {
        Some(Side::Plus) => {
            if minus_leaves {
                (Mode::SmoothMinus, EventKind::CrossingOut)
            } else if !plus_leaves && sm > 0.0 && sp < 0.0 {
                (Mode::Sliding, EventKind::SlideEntry)
            } else if plus_leaves {
                (Mode::SmoothPlus, EventKind::TangencyGraze)
            } else {
                // both normal components vanish: pass through
                (Mode::SmoothMinus, EventKind::TangencyGraze)
            }
        }
        Some(Side::Minus) => {
            if plus_leaves {
                (Mode::SmoothPlus, EventKind::CrossingIn)
            } else if !minus_leaves && sp < 0.0 && sm > 0.0 {
                (Mode::Sliding, EventKind::SlideEntry)
            } else if minus_leaves {
                (Mode::SmoothMinus, EventKind::TangencyGraze)
            } else {
                (Mode::SmoothPlus, EventKind::TangencyGraze)
            }
        }
        None => {
            if sp < 0.0 && sm > 0.0 {
                (Mode::Sliding, EventKind::SlideEntry)
            } else if plus_leaves {
                // crossing upwards, or a repelling sliding point (resolved upwards)
                (Mode::SmoothPlus, EventKind::CrossingIn)
            } else if minus_leaves {
                (Mode::SmoothMinus, EventKind::CrossingOut)
            } else {
                (Mode::SmoothPlus, EventKind::TangencyGraze)
            }
        }
    }
}

fn initial_mode<S: PiecewiseSystem + ?Sized>(sys: &S, x: &[f64]) -> Mode {
    let hv = sys.h(x);
    if hv.abs() <= crate::filippov::MANIFOLD_TOL * (1.0 + norm(x)) {
        decide(sys, x, None).0
    } else if hv > 0.0 {
        Mode::SmoothPlus
    } else {
        Mode::SmoothMinus
    }
}

struct ChatterGuard {
    times: VecDeque<f64>,
    limit: usize,
}

impl ChatterGuard {
    fn record(&mut self, t: f64) -> bool {
        self.times.push_back(t);
        while let Some(&front) = self.times.front() {
            if t - front > 1.0 {
                self.times.pop_front();
            } else {
                break;
            }
        }
        self.times.len() > self.limit
    }
}

/// Integrates a piecewise-smooth system over `t_span`.
pub fn integrate<S: PiecewiseSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    t_span: (f64, f64),
    opts: &HybridOptions,
) -> Result<Trajectory, IntegrationError> {
    integrate_with_section(sys, x0, t_span, opts, None)
}

/// As [`integrate`], additionally recording passages through `section` and
/// stopping after `max_hits` of them.
pub fn integrate_with_section<S: PiecewiseSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    t_span: (f64, f64),
    opts: &HybridOptions,
    section: Option<(&Section, usize)>,
) -> Result<Trajectory, IntegrationError> {
    Hybrid::new(sys, opts, section).run(x0, t_span)
}

struct Hybrid<'a, S: PiecewiseSystem + ?Sized> {
    sys: &'a S,
    opts: &'a HybridOptions,
    stepper: Stepper,
    watch: Option<SectionWatch<'a>>,
    guard: ChatterGuard,
    traj: Trajectory,
}

enum Outcome {
    Continue,
    Stop,
}

impl<'a, S: PiecewiseSystem + ?Sized> Hybrid<'a, S> {
    fn new(sys: &'a S, opts: &'a HybridOptions, section: Option<(&'a Section, usize)>) -> Self {
        Self {
            sys,
            opts,
            stepper: Stepper::new(opts.ode),
            watch: section.map(|(section, max_hits)| SectionWatch { section, max_hits, hits: Vec::new() }),
            guard: ChatterGuard { times: VecDeque::new(), limit: opts.max_events_per_unit },
            traj: Trajectory::default(),
        }
    }

    fn domain(&self) -> &DomainBox {
        self.sys.domain()
    }

    fn finish(mut self) -> Trajectory {
        if let Some(w) = self.watch.take() {
            self.traj.hits = w.hits;
        }
        self.traj.evals = self.stepper.evals;
        self.traj
    }

    fn current(&mut self) -> &mut TrajectorySegment {
        self.traj.segments.last_mut().expect("segment exists")
    }

    fn run(mut self, x0: &[f64], (t0, t1): (f64, f64)) -> Result<Trajectory, IntegrationError> {
        if !self.domain().contains(x0) {
            return Err(IntegrationError::InitialOutsideDomain(x0.to_vec()));
        }
        if !(t1 > t0) {
            return Err(self.fail_ref(t0, OdeError::EmptySpan { t0, t1 }));
        }
        let mut x = x0.to_vec();
        let mut mode = initial_mode(self.sys, &x);
        if mode == Mode::Sliding {
            project(self.sys, &mut x, self.opts.projection_tol);
        }
        self.traj.segments.push(TrajectorySegment::new(mode, t0, x.clone(), None));
        let mut t = t0;
        loop {
            if t1 - t <= 1e-14 * t1.abs().max(1.0) {
                let ev = Event { kind: EventKind::TimeLimit, t, x: x.clone() };
                let seg = self.current();
                seg.push(t, x.clone());
                seg.exit_event = Some(ev);
                break;
            }
            let res = match mode {
                Mode::Sliding => self.slide_step(&mut t, &mut x, &mut mode, t1),
                _ => self.smooth_step(&mut t, &mut x, &mut mode, t1),
            };
            match res {
                Ok(Outcome::Continue) => {}
                Ok(Outcome::Stop) => {
                    // keep the end state even when samples are not recorded
                    self.current().push(t, x.clone());
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(self.finish())
    }

    fn switch(&mut self, t: f64, x: &[f64], kind: EventKind, new_mode: Mode) -> Result<(), IntegrationError> {
        let ev = Event { kind, t, x: x.to_vec() };
        {
            let seg = self.current();
            seg.push(t, x.to_vec());
            seg.exit_event = Some(ev.clone());
        }
        self.traj.segments.push(TrajectorySegment::new(new_mode, t, x.to_vec(), Some(ev)));
        if self.guard.record(t) {
            let limit = self.opts.max_events_per_unit;
            let partial = Box::new(std::mem::take(&mut self.traj));
            return Err(IntegrationError::ZenoSuspected { t, limit, partial });
        }
        Ok(())
    }

    fn domain_exit(&mut self, t: f64, x: &[f64]) -> Outcome {
        let ev = Event { kind: EventKind::DomainExit, t, x: x.to_vec() };
        let seg = self.current();
        seg.push(t, x.to_vec());
        seg.exit_event = Some(ev);
        Outcome::Stop
    }

    fn record(&mut self, t: f64, x: &[f64]) {
        if self.opts.record_samples {
            self.current().push(t, x.to_vec());
        }
    }

    fn watch_step<F>(&mut self, f: &F, step: &Step, event_velocity: Option<&[f64]>) -> Result<bool, OdeError>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, String>,
    {
        let Some(w) = self.watch.as_mut() else { return Ok(false) };
        w.check(&mut self.stepper, f, step, event_velocity)?;
        Ok(w.done())
    }

    fn smooth_step(&mut self, t: &mut f64, x: &mut Vec<f64>, mode: &mut Mode, t1: f64) -> Result<Outcome, IntegrationError> {
        let side = mode.side().expect("smooth mode");
        let sigma = if side == Side::Plus { 1.0 } else { -1.0 };
        let sys = self.sys;
        let domain = sys.domain().clone();
        let f = move |p: &[f64]| -> Result<Vec<f64>, String> {
            if domain.contains(p) {
                Ok(sys.field(side, p))
            } else {
                Err("outside domain".into())
            }
        };
        // leaving the manifold into our own region: a step that ends on the
        // far side skipped a whole excursion, so shorten it
        let leaving = sigma * sys.h(x) <= 0.0 && sigma * dot(&sys.field(side, x), &sys.grad_h(x)) > 0.0;
        let mut limit = t1;
        let mut shrinks = 0;
        let step = loop {
            let step = match self.stepper.step(&f, x, *t, limit) {
                Ok(s) => s,
                Err(OdeError::Field { .. }) => return Ok(self.domain_exit(*t, &x.clone())),
                Err(e) => return Err(self.fail_ref(*t, e)),
            };
            if !leaving || sigma * sys.h(&step.x1) >= 0.0 || shrinks >= 60 {
                break step;
            }
            limit = *t + 0.5 * step.h;
            shrinks += 1;
        };
        let h_end = sigma * sys.h(&step.x1);
        if h_end >= 0.0 {
            if !self.domain().contains(&step.x1) {
                return Ok(self.domain_exit(*t, &x.clone()));
            }
            *t = step.t1();
            *x = step.x1.clone();
            self.record(*t, x);
            let stop = self.watch_step(&f, &step, None).map_err(|e| self.fail_ref(*t, e))?;
            return Ok(if stop { Outcome::Stop } else { Outcome::Continue });
        }
        // the step crossed h = 0
        let h_start = sigma * sys.h(&step.x0);
        let (theta, mut xe) = if h_start > 0.0 {
            self.stepper.locate(&f, &step, |p| sys.h(p)).map_err(|e| self.fail_ref(*t, e))?
        } else {
            // started on the manifold and went straight through
            (0.0, step.x0.clone())
        };
        project(sys, &mut xe, self.opts.projection_tol);
        let te = step.t0 + theta * step.h;
        let (mut new_mode, mut kind) = decide(sys, &xe, Some(side));
        if theta == 0.0 && new_mode == *mode {
            // the decision disagrees with the numerics at a near-tangency;
            // take the opposite region
            new_mode = Mode::smooth(if side == Side::Plus { Side::Minus } else { Side::Plus });
            kind = if side == Side::Plus { EventKind::CrossingOut } else { EventKind::CrossingIn };
        }
        let partial = Step { t0: step.t0, x0: step.x0.clone(), h: theta * step.h, x1: xe.clone() };
        if theta > 0.0 {
            let v = match new_mode {
                Mode::Sliding => Some(vec![0.0; xe.len()]),
                m => Some(sys.field(m.side().unwrap(), &xe)),
            };
            let stop = self.watch_step(&f, &partial, v.as_deref()).map_err(|e| self.fail_ref(te, e))?;
            self.switch(te, &xe, kind, new_mode)?;
            *t = te;
            *x = xe;
            *mode = new_mode;
            return Ok(if stop { Outcome::Stop } else { Outcome::Continue });
        }
        self.switch(te, &xe, kind, new_mode)?;
        *t = te;
        *x = xe;
        *mode = new_mode;
        Ok(Outcome::Continue)
    }

    fn slide_step(&mut self, t: &mut f64, x: &mut Vec<f64>, mode: &mut Mode, t1: f64) -> Result<Outcome, IntegrationError> {
        let sys = self.sys;
        let domain = sys.domain().clone();
        let f = move |p: &[f64]| -> Result<Vec<f64>, String> {
            if !domain.contains(p) {
                return Err("outside domain".into());
            }
            let lam = raw_lambda(sys, p).ok_or_else(|| "sliding multiplier undefined".to_string())?;
            Ok(sys.combine(p, lam))
        };
        // positive margins inside a stable sliding region; the first to vanish
        // names the exit (λ* = 1 when f⁺ turns tangent, λ* = 0 for f⁻)
        let margins = |p: &[f64]| {
            let g = sys.grad_h(p);
            (-dot(&sys.f_plus(p), &g), dot(&sys.f_minus(p), &g))
        };
        let exit_of = |(mp, mm): (f64, f64)| {
            if mp <= mm {
                (Mode::SmoothPlus, EventKind::SlideExitLambda1)
            } else {
                (Mode::SmoothMinus, EventKind::SlideExitLambda0)
            }
        };
        let m0 = margins(x);
        if m0.0 <= 0.0 || m0.1 <= 0.0 {
            let (new_mode, kind) = exit_of(m0);
            self.switch(*t, &x.clone(), kind, new_mode)?;
            *mode = new_mode;
            return Ok(Outcome::Continue);
        }
        let mut step = match self.stepper.step(&f, x, *t, t1) {
            Ok(s) => s,
            Err(OdeError::Field { .. }) => return Ok(self.domain_exit(*t, &x.clone())),
            Err(e) => return Err(self.fail_ref(*t, e)),
        };
        project(sys, &mut step.x1, self.opts.projection_tol);
        let m1 = margins(&step.x1);
        if m1.0 > 0.0 && m1.1 > 0.0 {
            if !self.domain().contains(&step.x1) {
                return Ok(self.domain_exit(*t, &x.clone()));
            }
            *t = step.t1();
            *x = step.x1.clone();
            self.record(*t, x);
            let stop = self.watch_step(&f, &step, None).map_err(|e| self.fail_ref(*t, e))?;
            return Ok(if stop { Outcome::Stop } else { Outcome::Continue });
        }
        let proj_tol = self.opts.projection_tol;
        let g = |p: &[f64]| {
            let mut q = p.to_vec();
            project(sys, &mut q, proj_tol);
            let (a, b) = margins(&q);
            a.min(b)
        };
        let (theta, mut xe) = self.stepper.locate(&f, &step, g).map_err(|e| self.fail_ref(*t, e))?;
        project(sys, &mut xe, proj_tol);
        let te = step.t0 + theta * step.h;
        let (new_mode, kind) = exit_of(margins(&xe));
        self.switch(te, &xe, kind, new_mode)?;
        *t = te;
        *x = xe;
        *mode = new_mode;
        Ok(Outcome::Continue)
    }

    fn fail_ref(&mut self, t: f64, source: OdeError) -> IntegrationError {
        let traj = std::mem::take(&mut self.traj);
        let mut partial = traj;
        partial.evals = self.stepper.evals;
        if let OdeError::StepUnderflow { .. } = source {
            return IntegrationError::ZenoSuspected { t, limit: self.opts.max_events_per_unit, partial: Box::new(partial) };
        }
        IntegrationError::Ode { t, source, partial: Box::new(partial) }
    }
}
