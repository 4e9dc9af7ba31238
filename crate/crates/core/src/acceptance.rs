//! The ten acceptance criteria, each timed against its runtime limit, and
//! the seeded invariant harness behind criterion 10.
//!
//! A criterion passes only if its check holds *and* it finishes within its
//! limit. Nothing here is tuned to pass: criteria 7 and 8 test a zero-trace
//! line the model does not have, and the harness includes an invariant that
//! is false at the parameter value where it is stated.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blowup::{local_expansion, smooth_equilibrium, verify_hopf_numerically, HopfOptions, LocalExpansion};
use crate::checks::{self, FailureKind};
use crate::cli::Command;
use crate::config::{Format, RunConfig, SystemKind};
use crate::filippov::{classify_boundary, ds_dlambda, find_tangencies, BoundaryKind, DomainBox, Side};
use crate::integrator::{integrate, EventKind, HybridOptions, IntegrationError, Mode, Orientation, Section};
use crate::poincare::{find_limit_cycle, CycleOptions, HybridFlow};
use crate::scan::{Budget, SEEDS};
use crate::welander::{pseudoequilibrium, TsState, WelanderFilippov, WelanderParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub limit_seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {} ({:.2} s, limit {} s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.limit_seconds,
            self.detail
        )
    }
}

fn timed(id: u8, name: &'static str, limit_seconds: f64, body: impl FnOnce() -> Result<String, String>) -> CriterionResult {
    let start = Instant::now();
    let outcome = body();
    let seconds = start.elapsed().as_secs_f64();
    let (ok, mut detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if seconds > limit_seconds {
        detail = format!("{detail}; exceeded the runtime limit");
    }
    CriterionResult { id, name, passed: ok && seconds <= limit_seconds, detail, seconds, limit_seconds }
}

fn text<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

const EPS_GRID: [f64; 10] = [-0.05, -0.04, -0.03, -0.02, -0.01, 0.01, 0.02, 0.03, 0.04, 0.05];

/// Fold abscissae from the generic tangency search match `3/4 + 15ε/4`
/// (`k = 1`) and `3/4 + 5ε/4` (`k = 0`) within `1e−8`.
pub fn criterion_1() -> CriterionResult {
    timed(1, "sliding boundaries", 1.0, || {
        let mut worst = 0.0f64;
        for eps in EPS_GRID {
            let sys = WelanderFilippov::new(WelanderParams::nonsmooth(eps)).map_err(text)?;
            let window = DomainBox::new(vec![0.0, -1.0], vec![1.5, 1.0]);
            let folds = find_tangencies(&sys, &window).map_err(text)?;
            for (side, want) in [(Side::Plus, 0.75 + 15.0 * eps / 4.0), (Side::Minus, 0.75 + 5.0 * eps / 4.0)] {
                let found: Vec<f64> = folds.iter().filter(|t| t.side == side).map(|t| t.location[0]).collect();
                let [x] = found[..] else {
                    return Err(format!("eps = {eps}: expected one {side:?} fold, found {found:?}"));
                };
                worst = worst.max((x - want).abs());
                if (x - want).abs() > 1e-8 {
                    return Err(format!("eps = {eps}: {side:?} fold at {x}, expected {want}"));
                }
            }
        }
        Ok(format!("20 folds, worst deviation {worst:.1e}"))
    })
}

/// Generic `dS/dλ` equals `−ε`, and stability of the sliding segment flips
/// with the sign of `ε`.
pub fn criterion_2() -> CriterionResult {
    timed(2, "sliding stability", 1.0, || {
        let mut worst = 0.0f64;
        for eps in EPS_GRID {
            let p = WelanderParams::nonsmooth(eps);
            let sys = WelanderFilippov::new(p).map_err(text)?;
            for i in 0..=20 {
                let x = 0.5 + 0.025 * f64::from(i);
                checks::ds_dlambda_is_minus_eps(eps, x, 0.5)?;
                worst = worst.max((ds_dlambda(&sys, &[x, 0.0], 0.5) + eps).abs());
            }
            let mid = 0.75 + 2.5 * eps;
            let kind = classify_boundary(&sys, &[mid, 0.0]).map_err(text)?.kind;
            let want = if eps > 0.0 { BoundaryKind::StableSliding } else { BoundaryKind::UnstableSliding };
            if kind != want {
                return Err(format!("eps = {eps}: midpoint {mid} classified {kind:?}"));
            }
        }
        Ok(format!("|dS/dλ + ε| ≤ {worst:.1e} (rounding); stable for ε > 0, unstable for ε < 0"))
    })
}

/// Distances `|x − 3/4|` of successive upward crossings at `ε = 0`.
pub fn focus_crossings(x0: [f64; 2], t_end: f64) -> Result<Vec<f64>, String> {
    let sys = WelanderFilippov::new(WelanderParams::nonsmooth(0.0)).map_err(text)?;
    let opts = HybridOptions { record_samples: false, ..HybridOptions::default() };
    let traj = match integrate(&sys, &x0, (0.0, t_end), &opts) {
        Ok(t) => t,
        Err(IntegrationError::ZenoSuspected { partial, .. }) => *partial,
        Err(e) => return Err(e.to_string()),
    };
    Ok(traj.events().filter(|e| e.kind == EventKind::CrossingIn).map(|e| (e.x[0] - 0.75).abs()).collect())
}

/// Sliding capture for `ε > 0`, contraction onto the fused focus at `ε = 0`,
/// and a stable crossing cycle for `ε < 0`.
pub fn criterion_3() -> CriterionResult {
    timed(3, "fused-focus regimes", 30.0, || {
        let sys = WelanderFilippov::new(WelanderParams::nonsmooth(0.04)).map_err(text)?;
        for seed in SEEDS {
            let traj = integrate(&sys, &seed, (0.0, 200.0), &HybridOptions::default()).map_err(text)?;
            let (_, x) = traj.final_state().ok_or("empty trajectory")?;
            let kind = classify_boundary(&sys, x).map(|c| c.kind);
            if traj.final_mode() != Some(Mode::Sliding) || kind != Ok(BoundaryKind::StableSliding) {
                return Err(format!("eps = 0.04, seed {seed:?}: ends in {:?} ({kind:?})", traj.final_mode()));
            }
        }
        let d = focus_crossings([0.9, 0.05], 50.0)?;
        if d.len() < 11 {
            return Err(format!("eps = 0: only {} upward crossings", d.len()));
        }
        let worst = d.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        if worst >= 1.0 {
            return Err(format!("eps = 0: crossing distances do not contract (max ratio {worst})"));
        }
        let sys = WelanderFilippov::new(WelanderParams::nonsmooth(-0.04)).map_err(text)?;
        let flow = HybridFlow::new(&sys);
        let section = Section::new(1, 0.0, Orientation::Increasing);
        let orbit = find_limit_cycle(&flow, &section, [0.77, 0.9], &CycleOptions::default()).map_err(text)?;
        if !(orbit.residual <= 1e-8 && orbit.floquet_estimate < 1.0) {
            return Err(format!("eps = −0.04: residual {:e}, multiplier {}", orbit.residual, orbit.floquet_estimate));
        }
        Ok(format!(
            "sliding capture from {} seeds; {} contracting crossings (max ratio {worst:.4}); cycle s* = {:.6}, |P(s)−s| = {:.1e}, multiplier {:.3}",
            SEEDS.len(),
            d.len(),
            orbit.section_point[0],
            orbit.residual,
            orbit.floquet_estimate
        ))
    })
}

/// At `ε = 0` the pseudoequilibrium is `(x, k) = (3/4, 1/3)`.
pub fn criterion_4() -> CriterionResult {
    timed(4, "pseudoequilibrium", 1.0, || {
        let (x, k) = pseudoequilibrium(&WelanderParams::nonsmooth(0.0)).ok_or("no pseudoequilibrium at eps = 0")?;
        // at ε = 0 the normal speed vanishes at x = 3/4 for any k, and ẋ = 0 gives k = 1/x − 1
        let err = (x - 0.75).abs().max((k - 1.0 / 3.0).abs());
        if err > 1e-10 {
            return Err(format!("({x}, {k}) is {err:e} from (3/4, 1/3)"));
        }
        Ok(format!("({x}, {k}), error {err:.1e}"))
    })
}

/// Every printed coefficient agrees with the Richardson oracle to `1e−6`.
pub fn criterion_5() -> CriterionResult {
    timed(5, "Taylor-coefficient oracle", 5.0, || {
        local_expansion().map_err(text)?;
        let checks = LocalExpansion::new().verify(1e-6).map_err(text)?;
        let worst = checks.iter().map(|c| c.rel_err).fold(0.0, f64::max);
        Ok(format!("{} coefficients, worst relative error {worst:.1e}", checks.len()))
    })
}

/// Smooth and blown-up trajectories agree within `1e−6` on `[0, 10]`.
pub fn criterion_6() -> CriterionResult {
    timed(6, "chart conjugacy", 30.0, || {
        let starts = [[0.8, 0.02], [0.7, -0.01], [0.76, 0.001]];
        let mut n = 0;
        for a in [1e-2, 1e-3] {
            for eps in [0.02, -0.02] {
                for [x0, y0] in starts {
                    checks::chart_conjugacy(eps, a, x0, y0 / a).map_err(|e| format!("a = {a}, eps = {eps}: {e}"))?;
                    n += 1;
                }
            }
        }
        Ok(format!("{n} trajectory pairs within 1e-6"))
    })
}

/// The numeric crossing `ε*(a)` lies within 10% of `ρ_H a` for
/// `a = 0.02, 0.01, 0.005` and shrinks monotonically.
pub fn criterion_7() -> CriterionResult {
    timed(7, "Hopf line limit", 120.0, || {
        let rho = LocalExpansion::new().hopf_slope();
        let opts = HopfOptions { measure_amplitude: false, ..HopfOptions::default() };
        let mut found = Vec::new();
        for a in [0.02, 0.01, 0.005] {
            let r = verify_hopf_numerically(a, [-0.1, 0.02], &opts).map_err(|e| format!("a = {a}: {e}"))?;
            if (r.ratio - rho).abs() > 0.1 * rho.abs() {
                return Err(format!("a = {a}: eps*/a = {:.4}, rho_H = {rho:.4}", r.ratio));
            }
            found.push(r.eps_star.abs());
        }
        if found.windows(2).any(|w| w[1] >= w[0]) {
            return Err(format!("|eps*| not decreasing: {found:?}"));
        }
        Ok(format!("|eps*| = {found:?}"))
    })
}

/// Orbit amplitude grows like `(ε* − ε)^{1/2}` below the crossing at `a = 0.01`.
pub fn criterion_8() -> CriterionResult {
    timed(8, "supercriticality", 120.0, || {
        let r = verify_hopf_numerically(0.01, [-0.1, 0.02], &HopfOptions::default()).map_err(|e| format!("a = 0.01: {e}"))?;
        let slope = r.amplitude_slope.ok_or("no amplitude fit")?;
        if (slope - 0.5).abs() > 0.1 {
            return Err(format!("log-log slope {slope:.3}"));
        }
        Ok(format!("eps* = {:.5}, log-log slope {slope:.3}", r.eps_star))
    })
}

/// The distance from the smooth equilibrium to the pseudoequilibrium
/// shrinks tenfold per decade of `a`.
pub fn criterion_9() -> CriterionResult {
    timed(9, "equilibrium perturbation", 10.0, || {
        let mut notes = Vec::new();
        for eps in [0.02, -0.02] {
            let (px, pk) = pseudoequilibrium(&WelanderParams::nonsmooth(eps)).ok_or("no pseudoequilibrium")?;
            let d: Vec<f64> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&a| {
                    smooth_equilibrium(&WelanderParams::smooth(eps, a))
                        .map(|e| (e[0] - px).hypot(e[1] - pk))
                        .map_err(text)
                })
                .collect::<Result<_, _>>()?;
            let ratios = [d[0] / d[1], d[1] / d[2]];
            if ratios.iter().any(|r| !(5.0..=20.0).contains(r)) {
                return Err(format!("eps = {eps}: distances {d:?}, ratios {ratios:?}"));
            }
            notes.push(format!("eps = {eps}: ratios {:.3}, {:.3}", ratios[0], ratios[1]));
        }
        Ok(notes.join("; "))
    })
}

/// Outcome of one invariant over its random cases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub cases: usize,
    pub failure: Option<String>,
    pub seconds: f64,
}

type CaseFn = fn(&mut ChaCha8Rng, usize) -> checks::Check;

struct Invariant {
    module: &'static str,
    name: &'static str,
    case: CaseFn,
    /// Inputs do not vary; one case decides it.
    fixed: bool,
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn signed_eps(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let e = rng.gen_range(lo..hi);
    if rng.gen_bool(0.5) {
        e
    } else {
        -e
    }
}

fn random_linear(rng: &mut ChaCha8Rng) -> crate::config::LinearSystem {
    let mut m = || [[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)], [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]];
    let (a_plus, a_minus) = (m(), m());
    let mut v = || [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
    let (b_plus, b_minus) = (v(), v());
    let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    crate::config::LinearSystem {
        a_plus,
        b_plus,
        a_minus,
        b_minus,
        normal: [angle.cos(), angle.sin()],
        offset: rng.gen_range(-1.0..1.0),
        window: DomainBox::new(vec![-10.0, -10.0], vec![10.0, 10.0]),
    }
}

fn welander_point(rng: &mut ChaCha8Rng) -> [f64; 2] {
    [rng.gen_range(0.4..1.1), rng.gen_range(-0.2..0.2)]
}

fn scan_check_budget() -> Budget {
    Budget { max_evals: 2_000_000, t_final: 30.0 }
}

fn invariants() -> Vec<Invariant> {
    let inv = |module, name, case: CaseFn| Invariant { module, name, case, fixed: false };
    vec![
        inv("filippov", "endpoint consistency", |r, i| {
            if i % 2 == 0 {
                let sys = WelanderFilippov::new(WelanderParams::nonsmooth(r.gen_range(-0.1..0.1))).map_err(text)?;
                checks::endpoint_consistency(&sys, &[r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0)])
            } else {
                let sys = random_linear(r).to_system();
                checks::endpoint_consistency(&sys, &[r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0)])
            }
        }),
        inv("filippov", "sliding tangency", |r, i| {
            if i % 2 == 0 {
                let sys = WelanderFilippov::new(WelanderParams::nonsmooth(r.gen_range(-0.1..0.1))).map_err(text)?;
                checks::sliding_tangency(&sys, &[r.gen_range(0.4..1.2), 0.0])
            } else {
                let lin = random_linear(r);
                let (c, d, u) = (lin.normal, lin.offset, r.gen_range(-3.0..3.0));
                let p = [c[0] * d - u * c[1], c[1] * d + u * c[0]];
                checks::sliding_tangency(&lin.to_system(), &p)
            }
        }),
        inv("filippov", "classification partition", |r, _| {
            checks::classification_partition(signed_eps(r, 1e-3, 0.1), r.gen_range(0.4..1.2))
        }),
        inv("filippov", "sliding-interval law", |r, _| {
            let eps = signed_eps(r, 1e-3, 0.1);
            let x = if r.gen_bool(0.5) {
                r.gen_range(0.4..1.2)
            } else {
                let end = if r.gen_bool(0.5) { 0.75 + 1.25 * eps } else { 0.75 + 3.75 * eps };
                end + r.gen_range(-1e-6..1e-6)
            };
            checks::sliding_interval_law(eps, x)
        }),
        inv("filippov", "dS/dλ = −ε", |r, _| {
            checks::ds_dlambda_is_minus_eps(r.gen_range(-0.1..0.1), r.gen_range(0.0..2.0), r.gen_range(0.0..=1.0))
        }),
        inv("filippov", "fold extrema at ε = 0", |r, _| checks::fold_extrema_at_zero(log_uniform(r, 1e-4, 0.05))),
        inv("integrator", "mode honesty", |r, _| {
            let (sys, traj) = checks::welander_trajectory(r.gen_range(-0.05..0.05), welander_point(r), 20.0)?;
            checks::mode_honesty(&sys, &traj)
        }),
        inv("integrator", "event localisation", |r, _| {
            let (sys, traj) = checks::welander_trajectory(r.gen_range(-0.05..0.05), welander_point(r), 20.0)?;
            checks::event_localisation(&sys, &traj)
        }),
        inv("integrator", "reversibility", |r, _| {
            let (sys, traj) = checks::welander_trajectory(r.gen_range(-0.05..0.05), welander_point(r), 10.0)?;
            checks::reversibility(&sys, &traj, 5.0)
        }),
        inv("integrator", "slide exit", |r, _| {
            checks::slide_exit(
                r.gen_range(0.5..3.0),
                r.gen_range(-2.0..2.0),
                r.gen_range(0.0..2.0),
                r.gen_range(0.05..1.0),
                r.gen_bool(0.5),
            )
        }),
        inv("integrator", "convergence order", |r, _| {
            checks::convergence_order(r.gen_range(-0.05..0.05), r.gen_range(0.01..0.1), [
                r.gen_range(0.6..0.9),
                r.gen_range(-0.05..0.05),
            ])
        }),
        inv("welander", "Heaviside limit", |r, _| {
            let eps = r.gen_range(-0.1..0.1);
            checks::heaviside_limit(eps + signed_eps(r, 1e-3, 1.0), eps)
        }),
        inv("welander", "chart commutation", |r, _| {
            let eps = r.gen_range(-0.05..0.05);
            let t = r.gen_range(0.4..1.1);
            let ts = TsState { t, s: 0.8 * t + eps + r.gen_range(-0.2..0.2) };
            checks::chart_commutation(eps, log_uniform(r, 1e-3, 0.1), ts)
        }),
        inv("welander", "chart round trip", |r, _| {
            checks::chart_round_trip(TsState { t: r.gen_range(-10.0..10.0), s: r.gen_range(-10.0..10.0) }, r.gen_range(-0.1..0.1))
        }),
        inv("welander", "field push-forward", |r, _| {
            let ts = TsState { t: r.gen_range(-2.0..2.0), s: r.gen_range(-2.0..2.0) };
            checks::field_push_forward(ts, r.gen_range(-0.1..0.1), r.gen_range(0.0..=1.0))
        }),
        Invariant {
            module: "welander",
            name: "virtual equilibria at ε = −0.1",
            case: |_, _| checks::virtual_equilibria_wrong_side(-0.1),
            fixed: true,
        },
        inv("welander", "parameter validation", |r, _| {
            checks::params_validation(r.gen_range(-1.0..2.0), r.gen_range(-1.0..2.0), r.gen_range(-0.1..0.1))
        }),
        inv("blowup", "Φ round trip", |r, _| checks::phi_round_trip(r.gen_range(-10.0..10.0), r.gen_range(0.01..0.99))),
        inv("blowup", "field push-forward", |r, _| {
            checks::blowup_push_forward(
                r.gen_range(0.4..1.1),
                r.gen_range(-10.0..10.0),
                r.gen_range(-0.05..0.05),
                log_uniform(r, 1e-4, 0.1),
            )
        }),
        inv("blowup", "chart conjugacy", |r, _| {
            checks::chart_conjugacy(
                r.gen_range(-0.05..0.05),
                log_uniform(r, 1e-3, 1e-2),
                r.gen_range(0.6..0.9),
                r.gen_range(-5.0..5.0),
            )
        }),
        inv("blowup", "coefficient oracle", |r, _| checks::coefficient_oracle(r.gen_range(0.5..2.0))),
        inv("blowup", "Jacobian consistency at the base point", |r, _| {
            checks::jacobian_consistency_base(log_uniform(r, 1e-3, 1e-2), signed_eps(r, 1e-3, 1e-2))
        }),
        inv("blowup", "Jacobian consistency at the equilibrium", |r, _| {
            checks::jacobian_consistency_equilibrium(log_uniform(r, 1e-3, 1e-2), signed_eps(r, 1e-3, 1e-2))
        }),
        inv("blowup", "eigenvalue symmetry", |r, _| {
            checks::eigen_symmetry(log_uniform(r, 1e-4, 0.05), r.gen_range(-0.05..0.05))
        }),
        inv("blowup", "equilibrium limit", |r, _| checks::equilibrium_limit(r.gen_range(0.0..=1.0))),
        inv("scan", "regime consistency", |r, i| {
            let a = log_uniform(r, 1e-5, 1e-4);
            // the first case sits between the smooth crossing and ε = 0
            let eps = if i == 0 { -a } else { r.gen_range(-0.05..0.05) };
            let opts = HopfOptions { measure_amplitude: false, grid: 60, ..HopfOptions::default() };
            let eps_star = verify_hopf_numerically(a, [-20.0 * a, 0.0], &opts).map_err(text)?.eps_star;
            checks::regime_consistency(eps, a, eps_star, &Budget { max_evals: 4_000_000, t_final: 200.0 })
        }),
        inv("scan", "diagram determinism", |r, _| {
            let grid: Vec<f64> = (0..3).map(|_| r.gen_range(-0.05..0.05)).collect();
            checks::scan_determinism(&grid, &scan_check_budget())
        }),
        inv("cli", "byte determinism", |r, i| {
            let mut cfg = RunConfig::default();
            cfg.params.epsilon = r.gen_range(-0.05..0.05);
            cfg.output.format = [Format::Csv, Format::Json, Format::Svg][r.gen_range(0..3)];
            let cmd = match i % 3 {
                0 => Command::Sliding,
                1 => {
                    cfg.simulate.t_span = [0.0, 5.0];
                    cfg.simulate.initial = vec![welander_point(r)];
                    Command::Simulate
                }
                _ => {
                    cfg.system = SystemKind::WelanderSmooth;
                    cfg.params.a = log_uniform(r, 1e-3, 0.05);
                    cfg.blowup.points = 21;
                    cfg.blowup.numeric = false;
                    Command::Blowup
                }
            };
            checks::cli_determinism(cmd, &cfg)
        }),
        inv("cli", "exit-code contract", |r, i| {
            let kind = [FailureKind::Config, FailureKind::Numerics, FailureKind::Io][i % 3];
            checks::exit_code_contract(kind, r.gen())
        }),
    ]
}

/// Runs every invariant on `cases` seeded random inputs, stopping each at
/// its first failure.
pub fn run_invariants(seed: u64, cases: usize) -> Vec<InvariantOutcome> {
    invariants()
        .into_iter()
        .enumerate()
        .map(|(k, inv)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let n = if inv.fixed { 1 } else { cases };
            let start = Instant::now();
            let mut failure = None;
            let mut ran = 0;
            for i in 0..n {
                ran += 1;
                if let Err(e) = (inv.case)(&mut rng, i) {
                    failure = Some(format!("case {i}: {e}"));
                    break;
                }
            }
            InvariantOutcome {
                module: inv.module,
                name: inv.name,
                cases: ran,
                failure,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

/// All module invariants hold on at least `cases` random inputs each.
pub fn criterion_10(seed: u64, cases: usize) -> CriterionResult {
    timed(10, "invariant suites", 120.0, || {
        let outcomes = run_invariants(seed, cases);
        let failed: Vec<String> = outcomes
            .iter()
            .filter_map(|o| o.failure.as_ref().map(|f| format!("{} / {}: {f}", o.module, o.name)))
            .collect();
        if failed.is_empty() {
            Ok(format!("{} invariants, {cases} cases each (seed {seed})", outcomes.len()))
        } else {
            Err(format!("{} of {} invariants failed: {}", failed.len(), outcomes.len(), failed.join(" | ")))
        }
    })
}

pub fn run_all(seed: u64, cases: usize) -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(seed, cases),
    ]
}
