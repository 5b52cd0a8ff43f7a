mod support;

use proptest::prelude::*;
use spdecrit_core::{
    expand, gain_per_step, scaling_exponent, Classification, DimExpr, Rational, ScalingError,
};
use support::{bundled, q};

fn grid(step: i64, max_num: i64) -> Vec<Rational> {
    (0..=max_num).map(|k| q(k, step)).collect()
}

#[test]
fn sqg_exponent_expression() {
    let e = scaling_exponent(&bundled("sqg")).unwrap();
    assert_eq!(e.symbolic.to_string(), "-2 + 2gamma - alpha");
}

#[test]
fn sqg_grid_scaling_equals_gain() {
    let base = bundled("sqg");
    for gamma in grid(4, 6) {
        for alpha in grid(4, 4) {
            let spec = base
                .with_param("gamma", &gamma)
                .and_then(|s| s.with_param("alpha", &alpha))
                .unwrap();
            let oracle = &gamma * q(2, 1) - q(2, 1) - &alpha;
            let e = scaling_exponent(&spec).unwrap();
            assert_eq!(e.bound, DimExpr::constant(oracle.clone()), "gamma {gamma} alpha {alpha}");
            let report = expand(&spec, 4).unwrap();
            let gain = gain_per_step(&report).unwrap();
            assert_eq!(gain, e.bound, "gamma {gamma} alpha {alpha}");
            let sign = oracle.cmp(&q(0, 1));
            let want = match sign {
                std::cmp::Ordering::Greater => Classification::Subcritical,
                std::cmp::Ordering::Equal => Classification::Critical,
                std::cmp::Ordering::Less => Classification::Supercritical,
            };
            assert_eq!(report.classification, Some(want));
        }
    }
}

#[test]
fn single_term_specs_scaling_equals_gain_on_grid() {
    for name in ["navier_stokes", "kpz", "phi4", "sqg"] {
        let base = bundled(name);
        for gamma in grid(4, 12).into_iter().skip(1) {
            for alpha in grid(4, 4) {
                let spec = base
                    .with_param("gamma", &gamma)
                    .and_then(|s| s.with_param("alpha", &alpha))
                    .unwrap();
                let e = scaling_exponent(&spec).unwrap();
                let report = expand(&spec, 5).unwrap();
                assert_eq!(gain_per_step(&report).unwrap(), e.bound, "{name} {gamma} {alpha}");
            }
        }
    }
}

#[test]
fn known_values_of_the_exponent() {
    let nse = scaling_exponent(&bundled("navier_stokes")).unwrap();
    assert_eq!(nse.bound, DimExpr::new(q(2, 1), q(-1, 2)));
    let phi4 = scaling_exponent(&bundled("phi4")).unwrap();
    assert_eq!(phi4.bound, DimExpr::new(q(4, 1), q(-1, 1)));
    let kpz = scaling_exponent(&bundled("kpz")).unwrap();
    assert_eq!(kpz.bound, DimExpr::constant(q(1, 2)));
}

#[test]
fn yang_mills_terms_scale_separately() {
    let err = scaling_exponent(&bundled("yang_mills")).unwrap_err();
    let ScalingError::MultiTerm { per_term } = &err else { panic!("{err}") };
    let bounds: Vec<String> = per_term.iter().map(|e| e.bound.to_string()).collect();
    assert_eq!(bounds, ["2 - d/2", "4 - d"]);
    assert_eq!(err.min_at(4), Some(q(0, 1)));
}

#[test]
fn yang_mills_classification_agrees_with_per_term_minimum() {
    let spec = bundled("yang_mills");
    let err = scaling_exponent(&spec).unwrap_err();
    for d in 1..=6 {
        let min = err.min_at(d).unwrap();
        let report = expand(&spec.with_dimension(d), 4).unwrap();
        let want = match min.cmp(&q(0, 1)) {
            std::cmp::Ordering::Greater => Classification::Subcritical,
            std::cmp::Ordering::Equal => Classification::Critical,
            std::cmp::Ordering::Less => Classification::Supercritical,
        };
        assert_eq!(report.classification, Some(want), "d = {d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_parameters_scaling_equals_gain(
        which in 0usize..4,
        g_num in 1i64..16,
        a_num in 0i64..8,
        d in 1i64..6,
        aux in proptest::option::of(0i64..4),
    ) {
        let name = ["navier_stokes", "kpz", "phi4", "sqg"][which];
        let mut spec = bundled(name)
            .with_param("gamma", &q(g_num, 4))
            .and_then(|s| s.with_param("alpha", &q(a_num, 4)))
            .unwrap()
            .with_dimension(d);
        if let Some(extra) = aux {
            spec.z1_diffusion_order = Some(q(g_num, 4) + q(extra, 4));
        }
        let e = scaling_exponent(&spec).unwrap();
        let report = expand(&spec, 5).unwrap();
        prop_assert_eq!(gain_per_step(&report).unwrap(), e.bound);
    }
}
