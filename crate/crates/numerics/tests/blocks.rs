use proptest::prelude::*;
use spdecrit_numerics::blocks::{ensemble_holder_exponent, last_complete_block};
use spdecrit_numerics::heat::trig_field;
use spdecrit_numerics::{
    bony_decompose, estimate_holder_exponent, littlewood_paley_blocks, synthetic_field, PeriodicField,
};

/// Hölder exponent from increments: slope of `log2 max_x |f(x+h) - f(x)|`
/// against `log2 h` over shifts of `2^lo .. 2^hi` cells.
fn increment_exponent(f: &PeriodicField, lo: u32, hi: u32) -> f64 {
    let v = f.values();
    let n = v.len();
    let (xs, ys): (Vec<f64>, Vec<f64>) = (lo..=hi)
        .map(|k| {
            let s = 1usize << k;
            let osc = (0..n).map(|i| (v[(i + s) % n] - v[i]).abs()).fold(0.0, f64::max);
            (k as f64, osc.log2())
        })
        .unzip();
    spdecrit_numerics::blocks::fit_slope(&xs, &ys)
}

#[test]
fn synthetic_half_field_block_fit_agrees_with_increments() {
    let grid = [1 << 14];
    let mut block = Vec::new();
    let mut incr = Vec::new();
    for seed in 0..8 {
        let f = synthetic_field(&grid, 0.5, seed).unwrap();
        block.push(estimate_holder_exponent(&f).unwrap());
        incr.push(increment_exponent(&f, 2, 8));
    }
    let mb = block.iter().sum::<f64>() / 8.0;
    let mi = incr.iter().sum::<f64>() / 8.0;
    assert!((mb - 0.5).abs() < 0.1, "block fit {mb}");
    assert!((mi - 0.5).abs() < 0.1, "increment fit {mi}");
    assert!((mb - mi).abs() < 0.1, "{mb} vs {mi}");
}

#[test]
fn ensemble_tracks_prescribed_exponents() {
    for beta in [0.25, 0.5, 0.75] {
        let (mean, _) = ensemble_holder_exponent(16, 3, |s| synthetic_field(&[4096], beta, s)).unwrap();
        assert!((mean - beta).abs() < 0.1, "beta {beta}: {mean}");
    }
}

#[test]
fn pure_mode_four_sits_in_block_two() {
    let f = trig_field(&[64], 0.0, &[(vec![4], 1.0, 0.0)]).unwrap();
    for b in littlewood_paley_blocks(&f).unwrap() {
        if b.j == 2 {
            assert!((b.sup - 1.0).abs() < 1e-12);
        } else {
            assert!(b.sup < 1e-12, "block {}: {}", b.j, b.sup);
        }
    }
}

#[test]
fn two_dimensional_blocks_reconstruct() {
    let f = synthetic_field(&[32, 64], 0.3, 5).unwrap();
    let blocks = littlewood_paley_blocks(&f).unwrap();
    let mut sum = vec![0.0; f.len()];
    for b in &blocks {
        for (s, v) in sum.iter_mut().zip(b.field.values()) {
            *s += v;
        }
    }
    let err = sum.iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-12 * f.sup_norm());
}

#[test]
fn bony_with_constant_factor() {
    let c = PeriodicField::new(vec![64], vec![2.0; 64]).unwrap();
    let g = synthetic_field(&[64], 0.5, 1).unwrap();
    let parts = bony_decompose(&c, &g).unwrap();
    // A constant lives in the bottom block, so c ≺ g carries everything
    // from block 1 up, and g ≺ c vanishes.
    assert_eq!(parts.para_gf.sup_norm(), 0.0);
    let prod = c.zip_map(&g, |a, b| a * b).unwrap();
    let err = parts.sum().zip_map(&prod, |a, b| a - b).unwrap().sup_norm();
    assert!(err <= 1e-12 * prod.sup_norm());
}

fn random_smooth(shape: &[usize], seed: u64) -> PeriodicField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(Vec<i64>, f64, f64)> = (1..=12)
        .map(|k| {
            let m: Vec<i64> = shape.iter().map(|_| rng.random_range(-k..=k)).collect();
            (m, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .collect();
    trig_field(shape, rng.random_range(-1.0..1.0), &modes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bony_parts_sum_to_the_product(seed in any::<u64>(), two_d in any::<bool>()) {
        let shape: Vec<usize> = if two_d { vec![32, 32] } else { vec![256] };
        let f = random_smooth(&shape, seed);
        let g = random_smooth(&shape, seed.wrapping_add(1));
        let parts = bony_decompose(&f, &g).unwrap();
        let prod = f.zip_map(&g, |a, b| a * b).unwrap();
        let err = parts.sum().zip_map(&prod, |a, b| a - b).unwrap().sup_norm();
        prop_assert!(err <= 1e-10 * prod.sup_norm().max(f64::MIN_POSITIVE), "{}", err);
    }
}

#[test]
fn resonant_part_of_rough_fields_grows_under_refinement() {
    let sup = |n: usize| {
        let f = synthetic_field(&[n], -0.25, 11).unwrap();
        let g = synthetic_field(&[n], -0.25, 12).unwrap();
        bony_decompose(&f, &g).unwrap().resonant.sup_norm()
    };
    let (coarse, fine) = (sup(1024), sup(4096));
    assert!(fine / coarse > 1.2, "{coarse} -> {fine}");
}

#[test]
fn resonant_part_of_smooth_fields_settles() {
    let sup = |n: usize| {
        let f = synthetic_field(&[n], 0.75, 11).unwrap();
        let g = synthetic_field(&[n], 0.75, 12).unwrap();
        bony_decompose(&f, &g).unwrap().resonant.sup_norm()
    };
    let (coarse, fine) = (sup(1024), sup(4096));
    assert!((fine / coarse - 1.0).abs() < 0.05, "{coarse} -> {fine}");
}

#[test]
fn coarse_grids_cannot_be_fitted() {
    assert!(last_complete_block(&[16]) < 5);
    let f = synthetic_field(&[16], 0.5, 0).unwrap();
    let err = estimate_holder_exponent(&f).unwrap_err();
    assert_eq!(err.code(), "E_RESOLUTION");
}
