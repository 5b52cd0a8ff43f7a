#![allow(dead_code)]

use std::path::PathBuf;

use spdecrit_core::{parse_spec, Rational, SpdeSpec};

pub fn specs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

pub fn bundled(name: &str) -> SpdeSpec {
    let path = specs_dir().join(format!("{name}.spde"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_spec(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub const BUNDLED: [&str; 5] = ["navier_stokes", "kpz", "phi4", "sqg", "yang_mills"];

pub fn q(p: i64, d: i64) -> Rational {
    spdecrit_core::rat(p, d)
}
