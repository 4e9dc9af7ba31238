//! Smooth autonomous ODEs and the adaptive Dormand–Prince 5(4) stepper.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roots::{brent, RootError, RootOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("vector field evaluation failed at {state:?}: {reason}")]
    Field { state: Vec<f64>, reason: String },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("evaluation budget of {max_evals} right-hand sides exhausted at t = {t}")]
    BudgetExhausted { max_evals: u64, t: f64 },
    #[error("event localisation failed: {0}")]
    Event(#[from] RootError),
    #[error("invalid time span [{t0}, {t1}]")]
    EmptySpan { t0: f64, t1: f64 },
}

/// An autonomous vector field `ẋ = f(x)`.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, String>;
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, String> {
        (**self).eval(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    /// Events are refined to this width in time.
    pub event_time_tol: f64,
    pub max_evals: u64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            h_init: 1e-3,
            h_max: 0.5,
            h_min: 1e-14,
            event_time_tol: 1e-12,
            max_evals: 50_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive step-size controller with an evaluation counter.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub opts: IntegrationOptions,
    pub h: f64,
    pub evals: u64,
}

/// An accepted step.
#[derive(Debug, Clone)]
pub struct Step {
    pub t0: f64,
    pub x0: Vec<f64>,
    pub h: f64,
    pub x1: Vec<f64>,
}

impl Step {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }
}

impl Stepper {
    pub fn new(opts: IntegrationOptions) -> Self {
        Self { h: opts.h_init, opts, evals: 0 }
    }

    fn call<F>(&mut self, f: &F, x: &[f64], t: f64) -> Result<Vec<f64>, OdeError>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, String>,
    {
        self.evals += 1;
        if self.evals > self.opts.max_evals {
            return Err(OdeError::BudgetExhausted { max_evals: self.opts.max_evals, t });
        }
        f(x).map_err(|reason| OdeError::Field { state: x.to_vec(), reason })
    }

    /// One Dormand–Prince step of size `h` without error control.
    /// Returns the 5th-order solution and the embedded error estimate.
    pub fn rk_step<F>(&mut self, f: &F, x: &[f64], t: f64, h: f64) -> Result<(Vec<f64>, Vec<f64>), OdeError>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, String>,
    {
        let n = x.len();
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        let mut stage = vec![0.0; n];
        for s in 0..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = x[i] + h * acc;
            }
            let ks = self.call(f, &stage, t + C[s] * h)?;
            k.push(ks);
        }
        // stage 7 is evaluated at the 5th-order solution
        let x5 = stage;
        let err = (0..n)
            .map(|i| h * (0..7).map(|s| (B5[s] - B4[s]) * k[s][i]).sum::<f64>())
            .collect();
        Ok((x5, err))
    }

    fn error_norm(&self, x0: &[f64], x1: &[f64], err: &[f64]) -> f64 {
        let n = x0.len().max(1) as f64;
        let sum: f64 = x0
            .iter()
            .zip(x1)
            .zip(err)
            .map(|((a, b), e)| {
                let sc = self.opts.atol + self.opts.rtol * a.abs().max(b.abs());
                (e / sc).powi(2)
            })
            .sum();
        (sum / n).sqrt()
    }

    /// Takes one accepted adaptive step, never overshooting `t_limit`.
    pub fn step<F>(&mut self, f: &F, x: &[f64], t: f64, t_limit: f64) -> Result<Step, OdeError>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, String>,
    {
        loop {
            let remaining = t_limit - t;
            let mut h = self.h.min(self.opts.h_max);
            let clipped = h >= remaining;
            if clipped {
                h = remaining;
            }
            if h < self.opts.h_min && !clipped {
                return Err(OdeError::StepUnderflow { t, h });
            }
            let trial = self.rk_step(f, x, t, h);
            let (x1, err) = match trial {
                Ok(v) => v,
                // a stage left the field's domain: retry smaller
                Err(OdeError::Field { .. }) if h > self.opts.h_min * 4.0 => {
                    self.h = 0.25 * h;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let en = self.error_norm(x, &x1, &err);
            if en.is_finite() && en <= 1.0 {
                let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                if !clipped || fac < 1.0 {
                    self.h = h * fac;
                }
                return Ok(Step { t0: t, x0: x.to_vec(), h, x1 });
            }
            let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            self.h = h * fac;
            if self.h < self.opts.h_min {
                return Err(OdeError::StepUnderflow { t, h: self.h });
            }
        }
    }

    /// State reached from `step.x0` after time `theta * step.h`.
    pub fn partial<F>(&mut self, f: &F, step: &Step, theta: f64) -> Result<Vec<f64>, OdeError>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, String>,
    {
        if theta <= 0.0 {
            return Ok(step.x0.clone());
        }
        if theta >= 1.0 {
            return Ok(step.x1.clone());
        }
        Ok(self.rk_step(f, &step.x0, step.t0, theta * step.h)?.0)
    }

    /// Locates the first zero of `g` inside an accepted step, given that
    /// `g(x0)` and `g(x1)` have opposite signs. Returns `(theta, state)`.
    pub fn locate<F, G>(&mut self, f: &F, step: &Step, g: G) -> Result<(f64, Vec<f64>), OdeError>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, String>,
        G: Fn(&[f64]) -> f64,
    {
        let x_tol = (self.opts.event_time_tol / step.h.abs().max(f64::MIN_POSITIVE)).min(1e-3);
        let mut failure = None;
        let theta = brent(
            |th| match self.partial(f, step, th) {
                Ok(x) => Ok(g(&x)),
                Err(e) => {
                    failure = Some(e);
                    Err("step evaluation failed")
                }
            },
            0.0,
            1.0,
            RootOptions { x_tol, f_tol: 0.0, max_iter: 200 },
        );
        let theta = match (theta, failure) {
            (_, Some(e)) => return Err(e),
            (r, None) => r?,
        };
        let x = self.partial(f, step, theta)?;
        Ok((theta, x))
    }
}

pub fn field_fn<'a, F: VectorField + ?Sized>(f: &'a F) -> impl Fn(&[f64]) -> Result<Vec<f64>, String> + 'a {
    move |x: &[f64]| f.eval(x)
}

/// `−f`: integrating it forward runs `f` backward in time.
#[derive(Debug, Clone)]
pub struct Reversed<F>(pub F);

impl<F: VectorField> VectorField for Reversed<F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, String> {
        Ok(self.0.eval(x)?.into_iter().map(|v| -v).collect())
    }
}

/// Dense record of an integration: every accepted step endpoint.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Solution {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub evals: u64,
}

impl Solution {
    pub fn last(&self) -> Option<(f64, &[f64])> {
        self.t.last().map(|&t| (t, self.x.last().unwrap().as_slice()))
    }
}

/// Integrates `f` from `x0` over `[t0, t1]`, recording every accepted step.
pub fn integrate<F: VectorField + ?Sized>(
    f: &F,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<Solution, OdeError> {
    if !(t1 > t0) {
        return Err(OdeError::EmptySpan { t0, t1 });
    }
    let rhs = field_fn(f);
    let mut st = Stepper::new(*opts);
    let mut sol = Solution { t: vec![t0], x: vec![x0.to_vec()], evals: 0 };
    let (mut t, mut x) = (t0, x0.to_vec());
    while t < t1 {
        let step = st.step(&rhs, &x, t, t1)?;
        t = step.t1();
        if t1 - t < 1e-14 * t1.abs().max(1.0) {
            t = t1;
        }
        x = step.x1;
        sol.t.push(t);
        sol.x.push(x.clone());
    }
    sol.evals = st.evals;
    Ok(sol)
}

/// Integrates `f` and returns the state at each requested time, hitting the
/// times exactly. `times` must be nondecreasing and start at or after `t0`.
pub fn solve_at<F: VectorField + ?Sized>(
    f: &F,
    x0: &[f64],
    t0: f64,
    times: &[f64],
    opts: &IntegrationOptions,
) -> Result<Vec<Vec<f64>>, OdeError> {
    let rhs = field_fn(f);
    let mut st = Stepper::new(*opts);
    let (mut t, mut x) = (t0, x0.to_vec());
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < t {
            return Err(OdeError::EmptySpan { t0: t, t1: target });
        }
        while target - t > 1e-14 * target.abs().max(1.0) {
            let step = st.step(&rhs, &x, t, target)?;
            t = step.t1();
            x = step.x1;
        }
        t = target;
        out.push(x.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl VectorField for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, x: &[f64]) -> Result<Vec<f64>, String> {
            Ok(vec![x[1], -x[0]])
        }
    }

    struct Decay;
    impl VectorField for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, x: &[f64]) -> Result<Vec<f64>, String> {
            Ok(vec![-x[0]])
        }
    }

    #[test]
    fn harmonic_oscillator_period() {
        let x = solve_at(&Oscillator, &[1.0, 0.0], 0.0, &[std::f64::consts::TAU], &IntegrationOptions::default())
            .unwrap();
        assert!((x[0][0] - 1.0).abs() < 1e-8 && x[0][1].abs() < 1e-8);
    }

    #[test]
    fn exponential_decay() {
        let sol = integrate(&Decay, &[1.0], 0.0, 3.0, &IntegrationOptions::default()).unwrap();
        let (t, x) = sol.last().unwrap();
        assert_eq!(t, 3.0);
        assert!((x[0] - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn tolerance_controls_error() {
        let err = |rtol: f64| {
            let opts = IntegrationOptions { rtol, atol: rtol * 1e-2, ..Default::default() };
            let x = solve_at(&Oscillator, &[1.0, 0.0], 0.0, &[20.0], &opts).unwrap();
            (x[0][0] - 20f64.cos()).abs()
        };
        assert!(err(1e-10) < err(1e-6));
    }

    #[test]
    fn locate_zero_crossing() {
        let rhs = field_fn(&Oscillator);
        let mut st = Stepper::new(IntegrationOptions::default());
        let x0 = vec![1.3f64.cos(), -1.3f64.sin()];
        let x1 = st.rk_step(&rhs, &x0, 0.0, 0.5).unwrap().0;
        let step = Step { t0: 0.0, x0, h: 0.5, x1 };
        let (theta, x) = st.locate(&rhs, &step, |x| x[0]).unwrap();
        assert!((theta * 0.5 - (std::f64::consts::FRAC_PI_2 - 1.3)).abs() < 1e-6);
        assert!(x[0].abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let opts = IntegrationOptions { max_evals: 50, ..Default::default() };
        let err = integrate(&Oscillator, &[1.0, 0.0], 0.0, 100.0, &opts).unwrap_err();
        assert!(matches!(err, OdeError::BudgetExhausted { .. }));
    }

    #[test]
    fn empty_span_rejected() {
        assert!(matches!(
            integrate(&Decay, &[1.0], 1.0, 1.0, &IntegrationOptions::default()),
            Err(OdeError::EmptySpan { .. })
        ));
    }
}
