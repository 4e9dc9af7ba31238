//! Simulation and bifurcation analysis of piecewise-smooth (Filippov)
//! systems, built around Welander's ocean convection model.
//!
//! * [`filippov`]: sliding calculus (multiplier, sliding flow, boundary
//!   classification, fold points).
//! * [`ode`], [`integrator`], [`poincare`]: adaptive Runge–Kutta, event-driven
//!   hybrid integration, return maps and limit cycles.
//! * [`welander`]: the smooth (arctan) and nonsmooth (Heaviside) model in
//!   both coordinate charts.
//! * [`blowup`]: the `(x, k)` chart, its fast–slow structure and the local
//!   Hopf analysis near the fused focus.
//! * [`scan`]: parameter sweeps assembling bifurcation diagrams.
//! * [`config`], [`output`], [`cli`]: TOML run configurations, CSV/JSON/SVG
//!   writers and the command-line front end.
//! * [`checks`], [`acceptance`]: invariant checks and the acceptance
//!   criteria, runnable through `fusedfocus verify`.

pub mod acceptance;
pub mod blowup;
pub mod checks;
pub mod cli;
pub mod config;
pub mod filippov;
pub mod integrator;
pub mod linalg;
pub mod ode;
pub mod output;
pub mod poincare;
pub mod roots;
pub mod scan;
pub mod welander;
