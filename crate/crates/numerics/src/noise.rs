//! Gaussian white noise on the torus and the linear stochastic heat flow it
//! drives, sampled mode by mode.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::field::{check_shape, conjugate_index, wavevector, wavevector_norms, PeriodicField, Trajectory};
use crate::{NumericsError, Result};

/// Independent stream `stream` derived from `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed of the `index`-th member of an ensemble rooted at `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    rng_for(seed, index).random()
}

/// Draws Hermitian-symmetric coefficients with `E|c_m|² = 1` for every mode.
/// Self-conjugate modes (zero, Nyquist) are real standard Gaussians.
fn white_coefficients(shape: &[usize], rng: &mut impl Rng, out: &mut [Complex64]) {
    let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
    for flat in 0..out.len() {
        let conj = conjugate_index(shape, flat);
        if flat == conj {
            out[flat] = Complex64::new(rng.sample(StandardNormal), 0.0);
        } else if flat < conj {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let c = Complex64::new(re * sqrt_half, im * sqrt_half);
            out[flat] = c;
            out[conj] = c.conj();
        }
    }
}

/// One sample of spatial white noise projected on the grid's modes.
pub fn sample_spatial_white(shape: &[usize], seed: u64) -> Result<PeriodicField> {
    check_shape(shape)?;
    let mut coeffs = vec![Complex64::default(); shape.iter().product()];
    white_coefficients(shape, &mut rng_for(seed, 0), &mut coeffs);
    PeriodicField::from_spectral(shape, &coeffs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Z1Params {
    pub shape: Vec<usize>,
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    /// Order of the dissipation `(-Δ)^{order/2}`, i.e. symbol `|m|^order`.
    pub order: f64,
    /// Noise intensity; 0 gives the zero solution.
    pub amplitude: f64,
}

impl Z1Params {
    pub fn heat(shape: &[usize], dt: f64, steps: usize, seed: u64) -> Self {
        Self { shape: shape.to_vec(), dt, steps, seed, order: 2.0, amplitude: 1.0 }
    }
}

/// Solves `∂_t z = -(-Δ)^{order/2} z + ξ`, `z(0) = 0`, exactly on each Fourier
/// mode: an Ornstein–Uhlenbeck process with stationary variance
/// `1 / (2|m|^order)`; the mean mode is a Brownian motion.
pub fn solve_z1_mild(p: &Z1Params) -> Result<Trajectory> {
    solve_z1_inner(p, true)
}

/// Final state only, for ensembles that do not need the path.
pub fn z1_final(p: &Z1Params) -> Result<PeriodicField> {
    let traj = solve_z1_inner(p, false)?;
    Ok(traj.fields.into_iter().last().expect("one field"))
}

fn solve_z1_inner(p: &Z1Params, keep_path: bool) -> Result<Trajectory> {
    check_shape(&p.shape)?;
    if !(p.dt > 0.0) || !(p.order > 0.0) || !p.amplitude.is_finite() {
        return Err(NumericsError::Param(format!(
            "need dt > 0 and order > 0, got dt = {}, order = {}",
            p.dt, p.order
        )));
    }
    let norms = wavevector_norms(&p.shape);
    let decay: Vec<f64> = norms.iter().map(|&k| (-k.powf(p.order) * p.dt).exp()).collect();
    let kick: Vec<f64> = norms
        .iter()
        .map(|&k| {
            let lambda = k.powf(p.order);
            let var = if lambda == 0.0 { p.dt } else { -(-2.0 * lambda * p.dt).exp_m1() / (2.0 * lambda) };
            p.amplitude * var.sqrt()
        })
        .collect();

    let n = norms.len();
    let mut rng = rng_for(p.seed, 0);
    let mut coeffs = vec![Complex64::default(); n];
    let mut eta = vec![Complex64::default(); n];
    let mut fields = vec![PeriodicField::zeros(&p.shape)?];
    let plan = crate::field::FftPlan::new(&p.shape);
    for _ in 0..p.steps {
        white_coefficients(&p.shape, &mut rng, &mut eta);
        for m in 0..n {
            coeffs[m] = coeffs[m] * decay[m] + eta[m] * kick[m];
        }
        if keep_path {
            fields.push(PeriodicField::new(p.shape.clone(), plan.inverse(&coeffs))?);
        }
    }
    if !keep_path {
        fields = vec![PeriodicField::new(p.shape.clone(), plan.inverse(&coeffs))?];
        return Ok(Trajectory { dt: p.dt, times: vec![p.steps as f64 * p.dt], fields });
    }
    Trajectory::new(p.dt, fields)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Phase of mode `m` depends on `(seed, m)` only, so a coarse field is the
/// Fourier truncation of a fine one with the same seed.
fn mode_phase(seed: u64, m: &[i64]) -> f64 {
    let key = m.iter().fold(splitmix64(seed), |h, &k| splitmix64(h ^ (k as u64)));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.random::<f64>() * std::f64::consts::TAU
}

/// Random-phase field with `|c_m| = |m|^{-β - d/2}`, a model of a
/// distribution of Hölder regularity `β`. The mean and all self-conjugate
/// modes are zero.
pub fn synthetic_field(shape: &[usize], beta: f64, seed: u64) -> Result<PeriodicField> {
    check_shape(shape)?;
    let d = shape.len() as f64;
    let n: usize = shape.iter().product();
    let mut coeffs = vec![Complex64::default(); n];
    for flat in 0..n {
        let conj = conjugate_index(shape, flat);
        if flat == conj {
            continue;
        }
        let m = wavevector(shape, flat);
        // The canonical member of {m, -m} has its first nonzero entry positive.
        let canonical = m.iter().find(|&&k| k != 0).is_some_and(|&k| k > 0);
        if !canonical {
            continue;
        }
        // Skip modes touching the Nyquist line; they would alias with -m.
        if m.iter().zip(shape).any(|(&k, &len)| k.unsigned_abs() as usize * 2 == len) {
            continue;
        }
        let norm = m.iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt();
        let c = Complex64::from_polar(norm.powf(-beta - d / 2.0), mode_phase(seed, &m));
        coeffs[flat] = c;
        coeffs[conj] = c.conj();
    }
    PeriodicField::from_spectral(shape, &coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_seeds_equal_fields() {
        let a = sample_spatial_white(&[64], 3).unwrap();
        let b = sample_spatial_white(&[64], 3).unwrap();
        let c = sample_spatial_white(&[64], 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn white_noise_is_real_and_hermitian() {
        let f = sample_spatial_white(&[16, 8], 1).unwrap();
        let c = f.spectral();
        for flat in 0..c.len() {
            let conj = conjugate_index(&[16, 8], flat);
            assert!((c[flat] - c[conj].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_amplitude_gives_zero_path() {
        let mut p = Z1Params::heat(&[32], 0.01, 20, 5);
        p.amplitude = 0.0;
        let traj = solve_z1_mild(&p).unwrap();
        assert_eq!(traj.fields.len(), 21);
        assert!(traj.fields.iter().all(|f| f.sup_norm() == 0.0));
    }

    #[test]
    fn synthetic_coarse_is_truncation_of_fine() {
        let coarse = synthetic_field(&[64], 0.25, 9).unwrap().spectral();
        let fine = synthetic_field(&[256], 0.25, 9).unwrap().spectral();
        for i in 1..31 {
            assert!((coarse[i] - fine[i]).norm() < 1e-12, "mode {i}");
        }
    }
}
