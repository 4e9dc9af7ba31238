use fusedfocus::checks;
use fusedfocus::welander::TsState;
use proptest::prelude::*;

proptest! {
    #[test]
    fn arctan_closure_tends_to_the_step(eps in -0.1..0.1f64, d in 1e-3..1.0f64, above in any::<bool>()) {
        let rho = if above { eps + d } else { eps - d };
        checks::heaviside_limit(rho, eps).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn chart_change_round_trips(t in -10.0..10.0f64, s in -10.0..10.0f64, eps in -0.1..0.1f64) {
        checks::chart_round_trip(TsState { t, s }, eps).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn chart_change_carries_the_field(t in -2.0..2.0f64, s in -2.0..2.0f64, eps in -0.1..0.1f64, k in 0.0..=1.0f64) {
        checks::field_push_forward(TsState { t, s }, eps, k).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn parameters_are_validated(alpha in -1.0..2.0f64, beta in -1.0..2.0f64, a in -0.1..0.1f64) {
        checks::params_validation(alpha, beta, a).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn virtual_equilibria_are_virtual_inside_the_band(eps in (-1.0 / 15.0 + 1e-9)..(0.2 - 1e-9)) {
        checks::virtual_equilibria_wrong_side(eps).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn integration_commutes_with_the_chart_change(
        eps in -0.05..0.05f64,
        t in 0.4..1.1f64,
        ds in -0.2..0.2f64,
        log_a in (1e-3f64).ln()..(0.1f64).ln(),
    ) {
        let ts = TsState { t, s: 0.8 * t + eps + ds };
        checks::chart_commutation(eps, log_a.exp(), ts).map_err(TestCaseError::fail)?;
    }
}

/// Below `ε = −1/15` the `k = 1` equilibrium lies in its own region.
#[test]
fn k1_equilibrium_is_real_at_minus_one_tenth() {
    let err = checks::virtual_equilibria_wrong_side(-0.1).unwrap_err();
    assert!(err.contains("k = 1"), "{err}");
}
