use fusedfocus::checks;
use proptest::prelude::*;

fn log_range(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn signed(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi, any::<bool>()).prop_map(|(e, neg)| if neg { -e } else { e })
}

proptest! {
    #[test]
    fn phi_pair_inverts(z in -10.0..10.0f64, k in 0.01..0.99f64) {
        checks::phi_round_trip(z, k).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn blown_up_field_is_the_push_forward(
        x in 0.4..1.1f64,
        z in -10.0..10.0f64,
        eps in -0.05..0.05f64,
        a in log_range(1e-4, 0.1),
    ) {
        checks::blowup_push_forward(x, z, eps, a).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn jacobian_matches_at_the_base_point(a in log_range(1e-3, 1e-2), eps in signed(1e-3, 1e-2)) {
        checks::jacobian_consistency_base(a, eps).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn jacobian_matches_at_the_equilibrium(a in log_range(1e-3, 1e-2), eps in signed(1e-3, 1e-2)) {
        checks::jacobian_consistency_equilibrium(a, eps).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn complex_pair_has_half_trace_real_part(a in log_range(1e-4, 0.05), eps in -0.05..0.05f64) {
        checks::eigen_symmetry(a, eps).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn equilibrium_tends_to_the_relevant_point(t in 0.0..=1.0f64) {
        checks::equilibrium_limit(t).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coefficients_match_the_oracle(step_scale in 0.5..2.0f64) {
        checks::coefficient_oracle(step_scale).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn blown_up_trajectories_are_conjugate(
        eps in -0.05..0.05f64,
        a in log_range(1e-3, 1e-2),
        x0 in 0.6..0.9f64,
        z0 in -5.0..5.0f64,
    ) {
        checks::chart_conjugacy(eps, a, x0, z0).map_err(TestCaseError::fail)?;
    }
}
