mod support;

use proptest::prelude::*;
use spdecrit_core::dsl::UnknownRank;
use spdecrit_core::{
    format_spec, parse_spec, parse_spec_bytes, validate_spec, Dimension, NoiseKind, ParseError,
};
use support::{bundled, q, specs_dir, BUNDLED};

#[test]
fn bundled_specs_round_trip() {
    for name in BUNDLED {
        let spec = bundled(name);
        assert!(validate_spec(&spec).is_empty(), "{name}");
        let text = format_spec(&spec);
        assert_eq!(parse_spec(&text).unwrap(), spec, "{name}");
        assert_eq!(format_spec(&parse_spec(&text).unwrap()), text, "{name}");
    }
}

#[test]
fn sqg_rationals_are_exact() {
    let spec = bundled("sqg");
    assert_eq!(spec.diffusion_order, q(1, 2));
    assert_eq!(spec.noise.lift_alpha, q(1, 4));
    assert_eq!(spec.noise.kind, NoiseKind::SpatialWhite);
    assert_eq!(spec.dimension, Dimension::Concrete(2));
    let raw = std::fs::read_to_string(specs_dir().join("sqg.spde")).unwrap();
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .collect::<String>()
            .split_whitespace()
            .collect::<String>()
    };
    assert_eq!(strip(&format_spec(&spec)), strip(&raw));
}

#[test]
fn navier_stokes_fields() {
    let spec = bundled("navier_stokes");
    assert_eq!(spec.unknown_rank, UnknownRank::Vector);
    assert_eq!(spec.dimension, Dimension::Symbolic);
    assert_eq!(spec.nonlinear_terms.len(), 1);
    assert_eq!(spec.nonlinear_terms[0].outer_derivative_order, q(1, 1));
}

#[test]
fn yang_mills_has_two_terms() {
    let spec = bundled("yang_mills");
    let degrees: Vec<u32> = spec.nonlinear_terms.iter().map(|t| t.degree).collect();
    assert_eq!(degrees, [2, 3]);
}

fn spec_strategy() -> impl Strategy<Value = String> {
    (
        prop_oneof![Just("d".to_string()), (1i64..6).prop_map(|d| d.to_string())],
        prop::bool::ANY,
        (1i64..9, 1i64..5),
        prop::option::of(0i64..4),
        prop::bool::ANY,
        (0i64..5, 1i64..5),
        prop::collection::vec((2u32..5, prop::collection::vec(0i64..3, 4), 0i64..3, 0u8..4), 1..3),
    )
        .prop_map(|(dim, vector, (gn, gd), aux, stwn, (an, ad), terms)| {
            let mut s = String::from("equation gen {\n");
            s += &format!("  dimension {dim};\n");
            s += &format!("  unknown u : {};\n", if vector { "vector" } else { "scalar" });
            s += &format!("  diffusion order {gn}/{gd};\n");
            if let Some(extra) = aux {
                // An integer at least gn/gd.
                s += &format!("  aux_z1 order {};\n", gn + extra);
            }
            let kind = if stwn { "stwn" } else { "spatial_white" };
            s += &format!("  noise {kind} lift {an}/{ad};\n");
            for (deg, inner, outer, proj) in terms {
                s += &format!("  nonlinear {{ degree {deg}; ");
                let list: Vec<String> = inner[..deg as usize].iter().map(|k| k.to_string()).collect();
                s += &format!("inner_deriv {}; ", list.join(", "));
                s += &format!("outer_deriv {outer}; ");
                if proj & 1 == 1 {
                    s += "projector leray; ";
                }
                if proj & 2 == 2 {
                    s += "projector riesz; ";
                }
                s += "}\n";
            }
            s += "}\n";
            s
        })
}

proptest! {
    #[test]
    fn generated_specs_round_trip(text in spec_strategy()) {
        let spec = parse_spec(&text).unwrap();
        let printed = format_spec(&spec);
        prop_assert_eq!(parse_spec(&printed).unwrap(), spec);
    }

    #[test]
    fn parsing_arbitrary_bytes_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        let _ = parse_spec_bytes(&bytes);
    }

    #[test]
    fn parsing_arbitrary_text_never_panics(text in "\\PC{0,200}") {
        match parse_spec(&text) {
            Ok(spec) => prop_assert!(validate_spec(&spec).is_empty()),
            Err(ParseError::Syntax { line, column, .. }) => prop_assert!(line >= 1 && column >= 1),
            Err(ParseError::Semantic(d)) => prop_assert!(!d.is_empty()),
        }
    }

    #[test]
    fn mutated_specs_never_panic(text in spec_strategy(), cut in 0usize..400, junk in "[{};:,/ a-z0-9-]{0,4}") {
        let cut = cut.min(text.len());
        let mutated = format!("{}{}{}", &text[..cut], junk, &text[cut..]);
        let _ = parse_spec(&mutated);
    }
}
