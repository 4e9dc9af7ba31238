//! Scalar and planar root finding.
//!
//! Everything that needs a zero of a scalar function goes through
//! [`brent`]; the sliding-multiplier solver, event localisation and the
//! displacement-map fixed point all share it.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("root finder did not converge after {iterations} iterations (best {best})")]
    NotConverged { iterations: usize, best: f64 },
    #[error("function evaluation failed: {0}")]
    Evaluation(String),
}

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    pub x_tol: f64,
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { x_tol: 1e-14, f_tol: 0.0, max_iter: 200 }
    }
}

/// Brent's method on a bracketing interval.
///
/// The closure may fail; failures are reported as [`RootError::Evaluation`].
pub fn brent<F, E>(mut f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<f64, RootError>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: std::fmt::Display,
{
    let mut eval = |x: f64| f(x).map_err(|e| RootError::Evaluation(e.to_string()));
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (eval(a)?, eval(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..opts.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * opts.x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 || fb.abs() <= opts.f_tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = eval(b)?;
    }
    Err(RootError::NotConverged { iterations: opts.max_iter, best: b })
}

/// Damped Newton iteration for a map R² → R².
///
/// `f` returns `None` outside its domain; the damping halves the step until
/// the residual decreases and the iterate stays inside the domain.
pub fn newton2<F, J>(
    f: F,
    jac: J,
    mut x: [f64; 2],
    tol: f64,
    max_iter: usize,
) -> Result<[f64; 2], RootError>
where
    F: Fn([f64; 2]) -> Option<[f64; 2]>,
    J: Fn([f64; 2]) -> Option<[[f64; 2]; 2]>,
{
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);
    let mut fx = f(x).ok_or_else(|| RootError::Evaluation("initial point outside domain".into()))?;
    for _ in 0..max_iter {
        if norm(fx) <= tol {
            return Ok(x);
        }
        let j = jac(x).ok_or_else(|| RootError::Evaluation("jacobian outside domain".into()))?;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(RootError::Evaluation("singular jacobian".into()));
        }
        let dx = [
            (j[1][1] * fx[0] - j[0][1] * fx[1]) / det,
            (-j[1][0] * fx[0] + j[0][0] * fx[1]) / det,
        ];
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-10 {
            let trial = [x[0] - step * dx[0], x[1] - step * dx[1]];
            if let Some(ft) = f(trial) {
                if norm(ft) < norm(fx) || norm(ft) <= tol {
                    x = trial;
                    fx = ft;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm(fx) <= tol {
        Ok(x)
    } else {
        Err(RootError::NotConverged { iterations: max_iter, best: norm(fx) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(x: f64) -> Result<f64, std::convert::Infallible> {
        Ok(x)
    }

    #[test]
    fn brent_finds_cube_root() {
        let r = brent(|x| ok(x * x * x - 2.0), 0.0, 2.0, RootOptions::default()).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn brent_rejects_missing_bracket() {
        let err = brent(|x| ok(x * x + 1.0), -1.0, 1.0, RootOptions::default()).unwrap_err();
        assert!(matches!(err, RootError::NoBracket { .. }));
    }

    #[test]
    fn brent_endpoint_root() {
        let r = brent(|x| ok(x - 1.0), 1.0, 3.0, RootOptions::default()).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn newton2_circle_line() {
        let f = |v: [f64; 2]| Some([v[0] * v[0] + v[1] * v[1] - 1.0, v[0] - v[1]]);
        let j = |v: [f64; 2]| Some([[2.0 * v[0], 2.0 * v[1]], [1.0, -1.0]]);
        let r = newton2(f, j, [1.0, 0.2], 1e-14, 50).unwrap();
        let s = 0.5f64.sqrt();
        assert!((r[0] - s).abs() < 1e-12 && (r[1] - s).abs() < 1e-12);
    }
}
