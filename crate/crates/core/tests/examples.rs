use approx::assert_abs_diff_eq;
use fusedfocus::blowup::{smooth_equilibrium, verify_hopf_numerically, HopfOptions, LocalExpansion};
use fusedfocus::filippov::{
    classify_boundary, eval_field, find_tangencies, sliding_flow, sliding_lambda, BoundaryKind, DomainBox,
    PiecewiseSystem, Side, Visibility,
};
use fusedfocus::integrator::{integrate, EventKind, IntegrationError, HybridOptions, Mode, Orientation, Section};
use fusedfocus::poincare::{find_limit_cycle, poincare_map, CycleOptions, HybridFlow, PoincareError, Stability};
use fusedfocus::scan::{nonsmooth_point, scan_nonsmooth, smooth_point, Attractor, Budget};
use fusedfocus::welander::{pseudoequilibrium, WelanderFilippov, WelanderParams};

fn welander(eps: f64) -> WelanderFilippov {
    WelanderFilippov::new(WelanderParams::nonsmooth(eps)).unwrap()
}

fn upward() -> Section {
    Section::new(1, 0.0, Orientation::Increasing)
}

#[test]
fn normal_speed_vanishes_at_the_hand_computed_multiplier() {
    // S(λ) = 0.01 − 0.1λ at x = 0.9 for ε = 0.1
    let sys = welander(0.1);
    let x = [0.9, 0.0];
    assert_abs_diff_eq!(eval_field(&sys, &x, 0.1).unwrap()[1], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(sliding_lambda(&sys, &x).unwrap().unwrap(), 0.1, epsilon = 1e-14);
    let f = sliding_flow(&sys, &x).unwrap();
    assert_abs_diff_eq!(f[0], 0.01, epsilon = 1e-14);
    assert_abs_diff_eq!(f[1], 0.0, epsilon = 1e-15);
    assert_eq!(eval_field(&sys, &x, 0.0).unwrap(), sys.f_minus(&x));
    assert_eq!(eval_field(&sys, &x, 1.0).unwrap(), sys.f_plus(&x));
}

#[test]
fn no_multiplier_outside_the_sliding_set() {
    assert_eq!(sliding_lambda(&welander(0.1), &[0.8, 0.0]).unwrap(), None);
    for x in [0.5, 0.7, 0.8, 1.0] {
        assert_eq!(sliding_lambda(&welander(0.0), &[x, 0.0]).unwrap(), None);
    }
}

#[test]
fn boundary_classification_examples() {
    assert_eq!(classify_boundary(&welander(0.05), &[0.85, 0.0]).unwrap().kind, BoundaryKind::StableSliding);
    assert_eq!(classify_boundary(&welander(-0.05), &[0.65, 0.0]).unwrap().kind, BoundaryKind::UnstableSliding);
    assert_eq!(classify_boundary(&welander(0.1), &[0.5, 0.0]).unwrap().kind, BoundaryKind::Crossing);
}

fn folds(eps: f64) -> Vec<(Side, f64, Visibility)> {
    let window = DomainBox::new(vec![0.0, -1.0], vec![1.5, 1.0]);
    let mut v: Vec<_> = find_tangencies(&welander(eps), &window)
        .unwrap()
        .into_iter()
        .map(|t| (t.side, t.location[0], t.visibility))
        .collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1));
    v
}

#[test]
fn double_tangency_is_invisible_for_positive_eps() {
    let f = folds(0.05);
    assert_eq!(f.len(), 2);
    assert_eq!((f[0].0, f[0].2), (Side::Minus, Visibility::Invisible));
    assert_eq!((f[1].0, f[1].2), (Side::Plus, Visibility::Invisible));
    assert_abs_diff_eq!(f[0].1, 0.8125, epsilon = 1e-8);
    assert_abs_diff_eq!(f[1].1, 0.9375, epsilon = 1e-8);
}

#[test]
fn tangencies_coincide_at_zero() {
    for (_, x, _) in folds(0.0) {
        assert_abs_diff_eq!(x, 0.75, epsilon = 1e-8);
    }
}

#[test]
fn tangencies_for_negative_eps() {
    let xs: Vec<f64> = folds(-0.04).iter().map(|f| f.1).collect();
    assert_eq!(xs.len(), 2);
    assert_abs_diff_eq!(xs[0], 0.6, epsilon = 1e-8);
    assert_abs_diff_eq!(xs[1], 0.7, epsilon = 1e-8);
}

#[test]
fn stable_sliding_captures_the_trajectory() {
    let sys = welander(0.04);
    let traj = integrate(&sys, &[0.5, 0.2], (0.0, 200.0), &HybridOptions::default()).unwrap();
    assert_eq!(traj.final_mode(), Some(Mode::Sliding));
    let last = traj.segments.last().unwrap();
    assert!(last.samples.iter().all(|(_, x)| x[0] > 0.8 && x[0] < 0.9));
    assert_eq!(last.exit_event.as_ref().map(|e| e.kind), Some(EventKind::TimeLimit));
}

/// Crossings accumulate at the fused focus in finite time, so the chatter
/// guard ends the run; the partial trajectory carries the crossings.
#[test]
fn fused_focus_attracts() {
    let sys = welander(0.0);
    let opts = HybridOptions { record_samples: false, ..HybridOptions::default() };
    let traj = match integrate(&sys, &[0.8, 0.01], (0.0, 30.0), &opts) {
        Ok(t) => t,
        Err(IntegrationError::ZenoSuspected { partial, .. }) => *partial,
        Err(e) => panic!("{e}"),
    };
    let d: Vec<f64> =
        traj.events().filter(|e| e.kind == EventKind::CrossingIn).map(|e| (e.x[0] - 0.75).abs()).collect();
    assert!(d.len() >= 10);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{:?}", &d[..10]);
}

#[test]
fn crossings_converge_onto_a_cycle() {
    let sys = welander(-0.04);
    let opts = HybridOptions { record_samples: false, ..HybridOptions::default() };
    let traj = integrate(&sys, &[0.65, 0.001], (0.0, 100.0), &opts).unwrap();
    let xs: Vec<f64> = traj.events().filter(|e| e.kind == EventKind::CrossingIn).map(|e| e.x[0]).collect();
    let gaps: Vec<f64> = xs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(gaps.last().unwrap() < &1e-10 && gaps[0] > 1e-3, "{gaps:?}");
}

#[test]
fn return_map_expands_inside_the_cycle() {
    let sys = welander(-0.04);
    let s = 0.78;
    assert!(poincare_map(&HybridFlow::new(&sys), &upward(), s, 100.0).unwrap() > s);
}

#[test]
fn no_return_into_stable_sliding() {
    let sys = welander(0.04);
    match poincare_map(&HybridFlow::new(&sys), &upward(), 0.95, 100.0) {
        Err(PoincareError::NoReturn { .. }) => {}
        Ok(s) => assert!((0.8..=0.9).contains(&s), "returned to {s}"),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn cycle_amplitude_grows_below_the_fused_focus() {
    let orbit = |eps: f64| {
        let sys = welander(eps);
        let lo = 0.75 + 1.25 * eps.abs() + 1e-3;
        find_limit_cycle(&HybridFlow::new(&sys), &upward(), [lo, 0.9], &CycleOptions::default()).unwrap()
    };
    let (small, large) = (orbit(-0.01), orbit(-0.04));
    assert_eq!(large.stability, Stability::Stable);
    assert!(small.amplitude > 0.0 && small.amplitude < large.amplitude);
    assert!(small.residual <= 1e-8 && large.residual <= 1e-8);
}

#[test]
fn no_cycle_with_stable_sliding() {
    let sys = welander(0.04);
    let r = find_limit_cycle(&HybridFlow::new(&sys), &upward(), [0.77, 0.95], &CycleOptions::default());
    assert!(matches!(r, Err(PoincareError::BracketInvalid { .. })), "{r:?}");
}

#[test]
fn printed_trace_slope() {
    let e = LocalExpansion::new();
    assert_abs_diff_eq!(e.hopf_slope(), -1.6786, epsilon = 1e-4);
    assert_abs_diff_eq!(e.hopf_line(0.01), -0.016786, epsilon = 1e-6);
    assert_eq!(e.trace(0.0, 0.0), 0.0);
    let eps = e.hopf_line(0.01);
    assert_abs_diff_eq!(e.trace(0.01, eps), 0.0, epsilon = 1e-15);
    assert!(e.discriminant(0.01, eps) < 0.0);
}

#[test]
fn trace_zero_line_at_the_equilibrium() {
    let rho = -26.0 * std::f64::consts::PI / 9.0 + 1.0 / 3f64.sqrt();
    assert_abs_diff_eq!(LocalExpansion::new().equilibrium_hopf_slope(), rho, epsilon = 1e-12);
}

/// The crossing exists at small `a`, approaches the corrected line, and the
/// cycles born there grow like the square root of the distance.
#[test]
fn supercritical_hopf_on_the_corrected_line() {
    let rho = LocalExpansion::new().equilibrium_hopf_slope();
    let mut ratios = Vec::new();
    for a in [0.002, 0.001] {
        let r = verify_hopf_numerically(a, [-20.0 * a, 0.0], &HopfOptions::default()).unwrap();
        let slope = r.amplitude_slope.unwrap();
        assert!((slope - 0.5).abs() <= 0.1, "a = {a}: slope {slope}");
        assert!(r.supercritical && r.transversality != 0.0);
        ratios.push(r.ratio);
    }
    assert!((ratios[1] - rho).abs() < (ratios[0] - rho).abs(), "{ratios:?}");
    assert!((ratios[1] - rho).abs() <= 0.1 * rho.abs(), "{ratios:?}");
}

#[test]
fn jacobian_mismatch_at_the_equilibrium_is_first_order() {
    let errs = fusedfocus::checks::jacobian_errors(5e-3, 5e-3, true).unwrap();
    let second: Vec<f64> = errs.iter().map(|(r, e)| e / (r * r)).collect();
    assert!(second.windows(2).all(|w| w[1] > 1.8 * w[0]), "{second:?}");
}

#[test]
fn equilibrium_tracks_the_pseudoequilibrium() {
    let (px, pk) = pseudoequilibrium(&WelanderParams::nonsmooth(0.02)).unwrap();
    let e = smooth_equilibrium(&WelanderParams::smooth(0.02, 1e-3)).unwrap();
    assert!((e[0] - px).hypot(e[1] - pk) < 1e-2);
    let e = smooth_equilibrium(&WelanderParams::smooth(0.0, 1e-3)).unwrap();
    assert!((e[0] - 0.75).hypot(e[1] - 1.0 / 3.0) < 1e-2);
}

#[test]
fn slide_widths_are_five_halves_eps() {
    let grid = [0.01, 0.02, 0.03, 0.04, 0.05];
    let d = scan_nonsmooth(&grid, &Budget { max_evals: 2_000_000, t_final: 50.0 });
    for p in &d.points {
        let (lo, hi) = p.slide_interval.unwrap();
        assert_abs_diff_eq!(hi - lo, 2.5 * p.eps, epsilon = 1e-15);
    }
}

#[test]
fn nonsmooth_amplitude_grows_as_eps_decreases() {
    let budget = Budget::default();
    let amps: Vec<f64> =
        [-0.005, -0.01, -0.02, -0.04].iter().map(|&e| nonsmooth_point(e, &budget).orbit_amplitude.unwrap()).collect();
    assert!(amps.windows(2).all(|w| w[1] > w[0]), "{amps:?}");
}

#[test]
fn smooth_equilibrium_is_stable_right_of_the_crossing() {
    let p = smooth_point(0.01, 0.02, &Budget::default());
    assert_eq!(p.attractor, Attractor::EquilibriumPoint);
    assert!(p.eigen_real.unwrap() < 0.0);
}
