use fusedfocus::blowup::{verify_hopf_numerically, HopfOptions};
use fusedfocus::checks;
use fusedfocus::scan::{self, Attractor, Budget};
use proptest::prelude::*;

fn smooth_crossing(a: f64) -> f64 {
    let opts = HopfOptions { measure_amplitude: false, grid: 60, ..HopfOptions::default() };
    verify_hopf_numerically(a, [-20.0 * a, 0.0], &opts).unwrap().eps_star
}

fn budget() -> Budget {
    Budget { max_evals: 4_000_000, t_final: 200.0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Outside both bifurcation neighbourhoods, the smooth one near `ε*(a)`
    /// and the nonsmooth one at `ε = 0`, the two models agree.
    #[test]
    fn models_agree_away_from_both_bifurcations(
        log_a in (1e-5f64).ln()..(1e-4f64).ln(),
        eps in -0.05..0.05f64,
    ) {
        let a = log_a.exp();
        let eps_star = smooth_crossing(a);
        prop_assume!(eps.abs() > 5.0 * a && (eps - eps_star).abs() > 5.0 * a);
        checks::regime_consistency(eps, a, eps_star, &budget()).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn scans_are_deterministic(grid in prop::collection::vec(-0.05..0.05f64, 1..4)) {
        checks::scan_determinism(&grid, &Budget { max_evals: 2_000_000, t_final: 30.0 }).map_err(TestCaseError::fail)?;
    }
}

/// Between `ε*(a)` and `0` the smooth equilibrium is still stable while the
/// nonsmooth model already oscillates, although `|ε − ε*| > 5a` there.
#[test]
fn models_disagree_between_the_two_bifurcations() {
    let a = 5e-5;
    let eps_star = smooth_crossing(a);
    let eps = -a;
    assert!((eps - eps_star).abs() > 5.0 * a);
    assert_eq!(scan::nonsmooth_point(eps, &budget()).attractor, Attractor::PeriodicOrbit);
    assert_eq!(scan::smooth_point(a, eps, &budget()).attractor, Attractor::EquilibriumPoint);
    assert!(checks::regime_consistency(eps, a, eps_star, &budget()).is_err());
}
