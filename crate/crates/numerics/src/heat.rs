//! The heat equation with odd-power damping, `∂_t u + u^n = Δu` on `T^d`, and
//! the diagnostics used to test uniqueness of its weak solutions.
//!
//! The scheme is a Lie splitting: an explicit damping step in value space,
//! then the exact semigroup of the second-order finite-difference Laplacian,
//! applied per Fourier mode. That semigroup has a positive kernel of unit
//! mass, so under the step-size guard the scheme is monotone and contracts
//! `L¹` distances.

use std::f64::consts::PI;

use crate::field::{grid_point, wavevector, FftPlan, PeriodicField, Trajectory};
use crate::{NumericsError, Result};

const BLOWUP: f64 = 1e6;

/// Symbol of `-Δ_h`: `Σ_axes (4/h²) sin²(k h / 2)` with `h = 2π/N`.
pub fn laplacian_symbol(shape: &[usize]) -> Vec<f64> {
    (0..shape.iter().product::<usize>())
        .map(|f| {
            wavevector(shape, f)
                .iter()
                .zip(shape)
                .map(|(&k, &n)| {
                    let h = 2.0 * PI / n as f64;
                    let s = (k as f64 * h / 2.0).sin();
                    4.0 * s * s / (h * h)
                })
                .sum()
        })
        .collect()
}

fn check_power(n: u32) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(NumericsError::Param(format!("damping power must be odd and >= 3, got {n}")));
    }
    Ok(())
}

/// `u^n` for small positive `n`, without `powi` rounding differences.
fn pow_odd(u: f64, n: u32) -> f64 {
    (1..n).fold(u, |acc, _| acc * u)
}

/// Integrates from `u_in` for `steps` steps of size `dt`.
pub fn solve_damped_heat(u_in: &PeriodicField, n: u32, dt: f64, steps: usize) -> Result<Trajectory> {
    check_power(n)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(NumericsError::Param(format!("dt must be positive, got {dt}")));
    }
    let guard = dt * u_in.sup_norm().powi(n as i32 - 1);
    if !(guard < 0.5) {
        return Err(NumericsError::Stability(guard));
    }
    let shape = u_in.shape().to_vec();
    let plan = FftPlan::new(&shape);
    let decay: Vec<f64> = laplacian_symbol(&shape).iter().map(|&l| (-l * dt).exp()).collect();
    let mut fields = Vec::with_capacity(steps + 1);
    fields.push(u_in.clone());
    let mut u = u_in.values().to_vec();
    for step in 1..=steps {
        for v in u.iter_mut() {
            *v -= dt * pow_odd(*v, n);
        }
        let mut c = plan.forward(&u);
        for (ck, &e) in c.iter_mut().zip(&decay) {
            *ck *= e;
        }
        u = plan.inverse(&c);
        if u.iter().any(|v| !(v.abs() <= BLOWUP)) {
            return Err(NumericsError::Blowup(step));
        }
        fields.push(PeriodicField::new(shape.clone(), u.clone())?);
    }
    Trajectory::new(dt, fields)
}

/// A smooth test function `ψ(t, x)` with its time derivative and Laplacian.
pub trait TestFunction: Sync {
    fn value(&self, t: f64, x: &[f64]) -> f64;
    fn time_derivative(&self, t: f64, x: &[f64]) -> f64;
    fn laplacian(&self, t: f64, x: &[f64]) -> f64;
}

/// `ψ(t, x) = χ(t/τ) φ(x)`: a bump cutoff in time, vanishing for `t ≥ τ`,
/// times a trigonometric polynomial.
#[derive(Debug, Clone)]
pub struct SeparableTest {
    pub tau: f64,
    pub constant: f64,
    /// `(m, a, b)` contributes `a cos(m·x) + b sin(m·x)`.
    pub modes: Vec<(Vec<i64>, f64, f64)>,
}

impl SeparableTest {
    /// The cutoff is `exp(1 - 1/(1 - s²))` for `|s| < 1` with `s = t/τ`.
    fn cutoff(&self, t: f64) -> (f64, f64) {
        let s = t / self.tau;
        if s.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let q = 1.0 - s * s;
        let chi = (1.0 - 1.0 / q).exp();
        let dchi = -chi * 2.0 * s / (self.tau * q * q);
        (chi, dchi)
    }

    fn space(&self, x: &[f64]) -> (f64, f64) {
        let mut phi = self.constant;
        let mut lap = 0.0;
        for (m, a, b) in &self.modes {
            let arg: f64 = m.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
            let k2: f64 = m.iter().map(|&k| (k * k) as f64).sum();
            let v = a * arg.cos() + b * arg.sin();
            phi += v;
            lap -= k2 * v;
        }
        (phi, lap)
    }
}

impl TestFunction for SeparableTest {
    fn value(&self, t: f64, x: &[f64]) -> f64 {
        self.cutoff(t).0 * self.space(x).0
    }

    fn time_derivative(&self, t: f64, x: &[f64]) -> f64 {
        self.cutoff(t).1 * self.space(x).0
    }

    fn laplacian(&self, t: f64, x: &[f64]) -> f64 {
        self.cutoff(t).0 * self.space(x).1
    }
}

/// The zero test function.
pub struct Zero;

impl TestFunction for Zero {
    fn value(&self, _: f64, _: &[f64]) -> f64 {
        0.0
    }
    fn time_derivative(&self, _: f64, _: &[f64]) -> f64 {
        0.0
    }
    fn laplacian(&self, _: f64, _: &[f64]) -> f64 {
        0.0
    }
}

/// Absolute defect of the weak formulation of `∂_t u + sign·u^n = Δu`:
///
/// `-∫ u(0)ψ(0) - ∫∫ u ∂_tψ + sign ∫∫ u^n ψ - ∫∫ u Δψ`,
///
/// trapezoid rule in time, grid sum in space. `ψ` must vanish at the final time.
pub fn weak_residual_signed(traj: &Trajectory, n: u32, sign: f64, psi: &dyn TestFunction) -> f64 {
    let shape = traj.shape();
    let cell = traj.fields[0].cell_volume();
    let points: Vec<Vec<f64>> = (0..traj.fields[0].len()).map(|f| grid_point(shape, f)).collect();
    let mut total = 0.0;
    let last = traj.fields.len() - 1;
    for (k, (field, &t)) in traj.fields.iter().zip(&traj.times).enumerate() {
        let w = if k == 0 || k == last { 0.5 * traj.dt } else { traj.dt };
        let mut slice = 0.0;
        for (u, x) in field.values().iter().zip(&points) {
            let integrand = -u * psi.time_derivative(t, x) + sign * pow_odd(*u, n) * psi.value(t, x)
                - u * psi.laplacian(t, x);
            slice += integrand;
        }
        total += w * slice * cell;
    }
    let t0 = traj.times[0];
    let initial: f64 = traj.fields[0]
        .values()
        .iter()
        .zip(&points)
        .map(|(u, x)| u * psi.value(t0, x))
        .sum::<f64>()
        * cell;
    (total - initial).abs()
}

/// Weak-form defect of the damped equation `∂_t u + u^n = Δu`.
pub fn weak_residual(traj: &Trajectory, n: u32, psi: &dyn TestFunction) -> f64 {
    weak_residual_signed(traj, n, 1.0, psi)
}

/// `max |u1^n - u2^n - w Σ_{l<n} u1^{n-1-l} u2^l|` with `w = u1 - u2`.
pub fn power_difference_residual(u1: &PeriodicField, u2: &PeriodicField, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(NumericsError::Param("power must be positive".into()));
    }
    let diff = u1.zip_map(u2, |a, b| {
        let lhs = pow_odd(a, n) - pow_odd(b, n);
        let sum: f64 = (0..n).map(|l| a.powi((n - 1 - l) as i32) * b.powi(l as i32)).sum();
        lhs - (a - b) * sum
    })?;
    Ok(diff.sup_norm())
}

/// `‖u1(t_k) - u2(t_k)‖_{L¹(T^d)}` at every common sample time.
pub fn l1_contraction_curve(traj1: &Trajectory, traj2: &Trajectory) -> Result<Vec<f64>> {
    if traj1.fields.len() != traj2.fields.len() {
        return Err(NumericsError::Shape(format!(
            "{} vs {} samples",
            traj1.fields.len(),
            traj2.fields.len()
        )));
    }
    let tmax = traj1.times.last().copied().unwrap_or(0.0).abs().max(1.0);
    if traj1.times.iter().zip(&traj2.times).any(|(a, b)| (a - b).abs() > 1e-9 * tmax) {
        return Err(NumericsError::Shape("sample times differ".into()));
    }
    traj1
        .fields
        .iter()
        .zip(&traj2.fields)
        .map(|(a, b)| Ok(a.zip_map(b, |x, y| x - y)?.l1_norm()))
        .collect()
}

/// Exact solution of `u' = -u^n`, `u(0) = c`.
pub fn damped_ode_exact(c: f64, n: u32, t: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let p = (n - 1) as f64;
    c * (1.0 + p * c.abs().powf(p) * t).powf(-1.0 / p)
}

/// Coefficients for a smooth real field from a list of modes: used to build
/// initial data.
pub fn trig_field(shape: &[usize], constant: f64, modes: &[(Vec<i64>, f64, f64)]) -> Result<PeriodicField> {
    PeriodicField::from_fn(shape, |x| {
        constant
            + modes
                .iter()
                .map(|(m, a, b)| {
                    let arg: f64 = m.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                    a * arg.cos() + b * arg.sin()
                })
                .sum::<f64>()
    })
}
