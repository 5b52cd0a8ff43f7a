mod support;

use spdecrit_core::expansion::leaf_count;
use spdecrit_core::{
    classify, classify_at, expand, gain_per_step, renormalization_flags, Classification, DimExpr,
};
use support::{bundled, q};

fn aff(c0: (i64, i64), cd: (i64, i64)) -> DimExpr {
    DimExpr::new(q(c0.0, c0.1), q(cd.0, cd.1))
}

#[test]
fn navier_stokes_golden_table() {
    let report = expand(&bundled("navier_stokes"), 4).unwrap();
    let got: Vec<(DimExpr, DimExpr)> =
        report.rows.iter().map(|r| (r.forcing.sup.clone(), r.object.sup.clone())).collect();
    let want = vec![
        (aff((-1, 1), (-1, 2)), aff((1, 1), (-1, 2))),
        (aff((1, 1), (-1, 1)), aff((3, 1), (-1, 1))),
        (aff((3, 1), (-3, 2)), aff((5, 1), (-3, 2))),
        (aff((5, 1), (-2, 1)), aff((7, 1), (-2, 1))),
    ];
    assert_eq!(got, want);
    let text: Vec<String> = report.rows.iter().map(|r| r.object.sup.to_string()).collect();
    assert_eq!(text, ["1 - d/2", "3 - d", "5 - 3d/2", "7 - 2d"]);
}

#[test]
fn navier_stokes_terms_match_the_expansion() {
    let report = expand(&bundled("navier_stokes"), 4).unwrap();
    let terms: Vec<&str> = report.rows.iter().map(|r| r.terms[0].as_str()).collect();
    assert_eq!(
        terms,
        [
            "xi",
            "P_L div(z1 (x) z1)",
            "P_L div(z2 (x) z1 + z1 (x) z2)",
            "P_L div(z2 (x) z2 + z3 (x) z1 + z1 (x) z3)",
        ]
    );
}

#[test]
fn navier_stokes_level_four_keeps_three_tied_terms() {
    let report = expand(&bundled("navier_stokes"), 4).unwrap();
    let row = &report.rows[3];
    assert_eq!(row.products.len(), 3);
    for p in &row.products {
        assert_eq!(p.homogeneity.sup, aff((5, 1), (-2, 1)));
    }
}

#[test]
fn navier_stokes_remainders() {
    let report = expand(&bundled("navier_stokes"), 4).unwrap();
    assert_eq!(report.rows[0].remainder.sup, aff((3, 1), (-1, 1)));
    assert_eq!(report.rows[1].remainder.sup, aff((5, 1), (-3, 2)));
    assert_eq!(report.rows[3].remainder.sup, aff((9, 1), (-5, 2)));
}

#[test]
fn navier_stokes_gain_and_classification() {
    let spec = bundled("navier_stokes");
    let report = expand(&spec, 4).unwrap();
    assert_eq!(gain_per_step(&report).unwrap(), aff((2, 1), (-1, 2)));
    assert_eq!(classify_at(&spec, 3).unwrap(), Classification::Subcritical);
    assert_eq!(classify_at(&spec, 4).unwrap(), Classification::Critical);
    assert_eq!(classify_at(&spec, 5).unwrap(), Classification::Supercritical);
    assert_eq!(
        classify(&spec).unwrap(),
        Classification::ConditionOnDim(vec![aff((2, 1), (-1, 2))])
    );
}

#[test]
fn navier_stokes_stops_once_objects_are_functions() {
    let report = expand(&bundled("navier_stokes").with_dimension(3), 8).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert!(report.stopped);
    assert_eq!(report.rows[1].object.sup, DimExpr::zero());
}

#[test]
fn navier_stokes_renormalization_in_three_dimensions() {
    let report = expand(&bundled("navier_stokes").with_dimension(3), 4).unwrap();
    let labels: Vec<String> =
        renormalization_flags(&report, 3).iter().map(|p| p.product_label()).collect();
    assert!(labels.contains(&"z1 (x) z1".to_string()), "{labels:?}");
    assert!(labels.contains(&"z2 (x) z1".to_string()), "{labels:?}");
    assert_eq!(report.rows[1].renorm, ["P_L div(z1 (x) z1)"]);
}

#[test]
fn smooth_linear_solution_needs_no_renormalization() {
    let mut spec = bundled("phi4").with_dimension(1);
    spec.noise.kind = spdecrit_core::NoiseKind::SpatialWhite;
    spec.diffusion_order = q(5, 2);
    let report = expand(&spec, 4).unwrap();
    assert_eq!(report.rows[0].object.sup, DimExpr::constant(q(2, 1)));
    assert!(renormalization_flags(&report, 1).is_empty());
    assert!(report.renormalization.is_empty());
}

#[test]
fn kpz_derivative_bound_and_gain() {
    let report = expand(&bundled("kpz"), 4).unwrap();
    assert_eq!(report.rows[0].forcing.sup, DimExpr::constant(q(-3, 2)));
    assert_eq!(report.rows[0].object.sup, DimExpr::constant(q(1, 2)));
    let factor = &report.rows[1].products[0].factors[0];
    assert_eq!(factor.label(), "D z1");
    assert_eq!(factor.regularity, DimExpr::constant(q(-1, 2)));
    assert_eq!(report.rows[1].forcing.sup, DimExpr::constant(q(-1, 1)));
    assert_eq!(report.rows[1].object.sup, DimExpr::constant(q(1, 1)));
    assert_eq!(gain_per_step(&report).unwrap(), DimExpr::constant(q(1, 2)));
    assert_eq!(report.classification, Some(Classification::Subcritical));
}

#[test]
fn phi4_gain() {
    let spec = bundled("phi4");
    let report = expand(&spec, 4).unwrap();
    assert_eq!(report.rows[0].object.sup, aff((1, 1), (-1, 2)));
    assert_eq!(report.rows[1].forcing.sup, aff((3, 1), (-3, 2)));
    assert_eq!(report.rows[1].object.sup, aff((5, 1), (-3, 2)));
    assert_eq!(gain_per_step(&report).unwrap(), aff((4, 1), (-1, 1)));
    for d in 1..=6 {
        let want = match d {
            1..=3 => Classification::Subcritical,
            4 => Classification::Critical,
            _ => Classification::Supercritical,
        };
        assert_eq!(classify_at(&spec, d).unwrap(), want, "d = {d}");
    }
}

#[test]
fn phi4_higher_powers() {
    // u^n with n = 5: gain (n-1)(1 - d/2) + 2.
    let spec = bundled("phi4").with_param("n", &q(5, 1)).unwrap();
    let report = expand(&spec, 3).unwrap();
    assert_eq!(gain_per_step(&report).unwrap(), aff((6, 1), (-2, 1)));
}

#[test]
fn yang_mills_is_critical_in_four_dimensions() {
    let spec = bundled("yang_mills");
    assert_eq!(classify_at(&spec, 4).unwrap(), Classification::Critical);
    assert_eq!(classify_at(&spec, 3).unwrap(), Classification::Subcritical);
    assert_eq!(classify_at(&spec, 5).unwrap(), Classification::Supercritical);
    let report = expand(&spec, 4).unwrap();
    assert!(report.scaling.is_none());
    assert!(report.warnings.iter().any(|w| w.starts_with("E_MULTI_TERM")));
    // At level three the cubic and Burgers terms tie.
    let terms: Vec<usize> = report.rows[2].products.iter().map(|p| p.term).collect();
    assert!(terms.contains(&0) && terms.contains(&1), "{terms:?}");
}

#[test]
fn single_level_falls_back_to_scaling() {
    let report = expand(&bundled("navier_stokes"), 1).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert!(gain_per_step(&report).is_err());
    assert_eq!(
        report.classification,
        Some(Classification::ConditionOnDim(vec![aff((2, 1), (-1, 2))]))
    );
    let report = expand(&bundled("kpz"), 1).unwrap();
    assert_eq!(report.classification, Some(Classification::Subcritical));
}

#[test]
fn levels_out_of_range_are_rejected() {
    let spec = bundled("kpz");
    assert!(expand(&spec, 0).is_err());
    assert!(expand(&spec, 33).is_err());
    assert!(expand(&spec, 32).is_ok());
}

#[test]
fn lift_lowers_each_object_by_its_leaf_count() {
    let base = bundled("navier_stokes");
    let delta = q(1, 8);
    let mut lifted = base.clone();
    lifted.noise.lift_alpha = delta.clone();
    let a = expand(&base, 6).unwrap();
    let b = expand(&lifted, 6).unwrap();
    assert_eq!(a.rows.len(), b.rows.len());
    for (level, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
        let leaves = leaf_count(&a, level + 1) as i64;
        assert_eq!(leaves, level as i64 + 1);
        let drop = &ra.object.sup - &rb.object.sup;
        assert_eq!(drop, DimExpr::constant(&delta * q(leaves, 1)));
    }
}

#[test]
fn expansion_is_deterministic() {
    for name in support::BUNDLED {
        let spec = bundled(name);
        let a = expand(&spec, 6).unwrap();
        let b = expand(&spec, 6).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn supercritical_gain_stays_constant() {
    let report = expand(&bundled("navier_stokes").with_dimension(5), 6).unwrap();
    assert_eq!(report.rows.len(), 6);
    assert_eq!(gain_per_step(&report).unwrap(), DimExpr::constant(q(-1, 2)));
}
