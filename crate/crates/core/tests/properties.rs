mod common;

use hammerstein_core::criteria::{index_one, index_zero, Mode};
use hammerstein_core::scenarios::example3;
use hammerstein_core::{Verdict, Weight};
use proptest::prelude::*;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn greens_kernel_is_symmetric(tp in tuple_strategy(), t in 0.0..=1.0f64, s in 0.0..=1.0f64) {
        kernel_symmetry(tp, t, s)?;
    }

    #[test]
    fn greens_kernel_below_envelope(tp in tuple_strategy(), t in 0.0..=1.0f64, s in 0.0..=1.0f64) {
        kernel_envelope(tp, t, s)?;
    }

    #[test]
    fn greens_kernel_cone_inequality(tp in tuple_strategy(), ut in 0.0..=1.0f64, s in 0.0..=1.0f64) {
        kernel_cone(tp, ut, s)?;
    }

    #[test]
    fn kernel_s_parts_partition(nonlocal in any::<bool>(), u in 0.0..1.0f64, t in 0.0..=1.0f64, s in 0.0..=1.0f64) {
        pm_partition(&assembled(nonlocal, u), t, s)?;
    }

    #[test]
    fn kernel_s_part_integrals(nonlocal in any::<bool>(), u in 0.0..1.0f64, t in 0.0..=1.0f64, linear in any::<bool>()) {
        let g = if linear { Weight::Linear } else { Weight::One };
        part_integrals(&assembled(nonlocal, u), &g, t)?;
    }

    #[test]
    fn measures_resolvent_preserves_order(
        m in prop::array::uniform4(0.0..0.45f64),
        p in prop::array::uniform2(0.0..10.0f64),
        dp in prop::array::uniform2(0.0..10.0f64),
    ) {
        resolvent_order(m, p, dp)?;
    }

    #[test]
    fn measures_n_mu_comparison(
        m in prop::array::uniform4(0.0..3.0f64),
        p in prop::array::uniform2(0.0..10.0f64),
        extra in prop::array::uniform2(0.0..5.0f64),
    ) {
        n_mu_comparison(m, p, extra)?;
    }

    #[test]
    fn solver_t_maps_cone_into_cone(
        which in 0usize..3,
        kappa in 0.01..5.0f64,
        coeffs in prop::collection::vec(-1.0..1.0f64, 1..6),
    ) {
        t_maps_cone(which, kappa, &coeffs)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn solver_s_and_t_share_fixed_points(uw in 0.0..1.0f64, ua in 0.0..1.0f64) {
        s_t_agreement(uw, ua)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simplified_index_conditions_imply_full(lambda in 0.01..1.5f64, rho in 0.02..4.0f64) {
        let an = example3(lambda).analyze().unwrap();
        for (simple, full) in [
            (index_one(&an, rho, Mode::Simplified).unwrap(), index_one(&an, rho, Mode::Full).unwrap()),
            (index_zero(&an, rho, Mode::Simplified).unwrap(), index_zero(&an, rho, Mode::Full).unwrap()),
        ] {
            if simple.verdict == Verdict::Holds {
                prop_assert_eq!(full.verdict, Verdict::Holds);
            }
        }
    }

    #[test]
    fn index_one_monotone_under_shrinking_f(lambda in 0.01..1.0f64, theta in 0.05..1.0f64, rho in 0.1..4.0f64) {
        let big = example3(lambda).analyze().unwrap();
        let small = example3(lambda).with_f(big.f().scaled(theta)).analyze().unwrap();
        if index_one(&big, rho, Mode::Full).unwrap().verdict == Verdict::Holds {
            prop_assert_eq!(index_one(&small, rho, Mode::Full).unwrap().verdict, Verdict::Holds);
        }
        if index_zero(&small, rho, Mode::Full).unwrap().verdict == Verdict::Holds {
            prop_assert_eq!(index_zero(&big, rho, Mode::Full).unwrap().verdict, Verdict::Holds);
        }
    }
}
