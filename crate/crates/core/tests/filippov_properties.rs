use fusedfocus::checks;
use fusedfocus::config::LinearSystem;
use fusedfocus::filippov::DomainBox;
use fusedfocus::welander::{WelanderFilippov, WelanderParams};
use proptest::prelude::*;

fn eps_off_zero() -> impl Strategy<Value = f64> {
    (1e-3..0.1f64, any::<bool>()).prop_map(|(e, neg)| if neg { -e } else { e })
}

fn matrix() -> impl Strategy<Value = [[f64; 2]; 2]> {
    prop::array::uniform2(prop::array::uniform2(-3.0..3.0f64))
}

prop_compose! {
    fn linear_system()(
        a_plus in matrix(),
        b_plus in prop::array::uniform2(-3.0..3.0f64),
        a_minus in matrix(),
        b_minus in prop::array::uniform2(-3.0..3.0f64),
        angle in 0.0..std::f64::consts::TAU,
        offset in -1.0..1.0f64,
    ) -> LinearSystem {
        LinearSystem {
            a_plus,
            b_plus,
            a_minus,
            b_minus,
            normal: [angle.cos(), angle.sin()],
            offset,
            window: DomainBox::new(vec![-10.0, -10.0], vec![10.0, 10.0]),
        }
    }
}

proptest! {
    #[test]
    fn endpoints_are_exact_for_welander(eps in -0.1..0.1f64, x in -5.0..5.0f64, y in -5.0..5.0f64) {
        let sys = WelanderFilippov::new(WelanderParams::nonsmooth(eps)).unwrap();
        checks::endpoint_consistency(&sys, &[x, y]).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn endpoints_are_exact_for_linear_systems(lin in linear_system(), x in -5.0..5.0f64, y in -5.0..5.0f64) {
        checks::endpoint_consistency(&lin.to_system(), &[x, y]).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn welander_sliding_field_is_tangent(eps in -0.1..0.1f64, x in 0.4..1.2f64) {
        let sys = WelanderFilippov::new(WelanderParams::nonsmooth(eps)).unwrap();
        checks::sliding_tangency(&sys, &[x, 0.0]).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn linear_sliding_field_is_tangent(lin in linear_system(), u in -3.0..3.0f64) {
        let (c, d) = (lin.normal, lin.offset);
        let p = [c[0] * d - u * c[1], c[1] * d + u * c[0]];
        checks::sliding_tangency(&lin.to_system(), &p).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn crossing_iff_multiplier_outside_unit_interval(eps in eps_off_zero(), x in 0.4..1.2f64) {
        checks::classification_partition(eps, x).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn sliding_set_is_the_closed_form_interval(eps in eps_off_zero(), x in 0.4..1.2f64) {
        checks::sliding_interval_law(eps, x).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn sliding_set_near_its_endpoints(eps in eps_off_zero(), upper in any::<bool>(), d in -1e-6..1e-6f64) {
        let end = if upper { 0.75 + 3.75 * eps } else { 0.75 + 1.25 * eps };
        checks::sliding_interval_law(eps, end + d).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn ds_dlambda_is_minus_eps(eps in -0.1..0.1f64, x in 0.0..2.0f64, lam in 0.0..=1.0f64) {
        checks::ds_dlambda_is_minus_eps(eps, x, lam).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn folds_are_extrema_at_zero(log_h in (1e-4f64).ln()..(0.05f64).ln()) {
        checks::fold_extrema_at_zero(log_h.exp()).map_err(TestCaseError::fail)?;
    }
}
