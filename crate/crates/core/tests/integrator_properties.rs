use fusedfocus::checks;
use proptest::prelude::*;

fn start() -> impl Strategy<Value = [f64; 2]> {
    (0.4..1.1f64, -0.2..0.2f64).prop_map(|(x, y)| [x, y])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn samples_respect_their_mode(eps in -0.05..0.05f64, x0 in start()) {
        let (sys, traj) = checks::welander_trajectory(eps, x0, 20.0).map_err(TestCaseError::fail)?;
        checks::mode_honesty(&sys, &traj).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn events_sit_on_the_manifold(eps in -0.05..0.05f64, x0 in start()) {
        let (sys, traj) = checks::welander_trajectory(eps, x0, 20.0).map_err(TestCaseError::fail)?;
        checks::event_localisation(&sys, &traj).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn smooth_stretches_run_backwards(eps in -0.05..0.05f64, x0 in start()) {
        let (sys, traj) = checks::welander_trajectory(eps, x0, 10.0).map_err(TestCaseError::fail)?;
        checks::reversibility(&sys, &traj, 5.0).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn sliding_ends_where_the_multiplier_leaves(
        b in 0.5..3.0f64,
        xe in -2.0..2.0f64,
        lead in 0.0..2.0f64,
        y0 in 0.05..1.0f64,
        mirror in any::<bool>(),
    ) {
        checks::slide_exit(b, xe, lead, y0, mirror).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn error_tracks_the_tolerance(eps in -0.05..0.05f64, a in 0.01..0.1f64, x in 0.6..0.9f64, y in -0.05..0.05f64) {
        checks::convergence_order(eps, a, [x, y]).map_err(TestCaseError::fail)?;
    }
}
