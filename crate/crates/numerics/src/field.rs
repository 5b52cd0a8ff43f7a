//! Real fields on the torus `T^d = [0, 2π)^d`, `d ∈ {1, 2}`, sampled on a
//! uniform power-of-two grid, and their Fourier coefficients.
//!
//! Coefficients are normalized so that `u(x) = Σ_m c_m e^{i m·x}`, hence
//! `mean(u²) = Σ |c_m|²`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{NumericsError, Result};

/// Signed wavenumber of FFT index `i` on an `n`-point axis; the Nyquist
/// index maps to `+n/2`.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

pub fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() || shape.len() > 2 {
        return Err(NumericsError::Shape(format!("dimension must be 1 or 2, got {}", shape.len())));
    }
    for &n in shape {
        if n == 0 || !n.is_power_of_two() {
            return Err(NumericsError::Shape(format!("grid size {n} is not a power of two")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl PeriodicField {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_shape(&shape)?;
        let len: usize = shape.iter().product();
        if values.len() != len {
            return Err(NumericsError::Shape(format!("{} values for shape {shape:?}", values.len())));
        }
        Ok(Self { shape, values })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Self::new(shape.to_vec(), vec![0.0; shape.iter().product()])
    }

    /// Samples `f` at grid points `x_j = 2πj/N`.
    pub fn from_fn(shape: &[usize], f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        check_shape(shape)?;
        let values = (0..shape.iter().product::<usize>())
            .map(|flat| f(&grid_point(shape, flat)))
            .collect();
        Self::new(shape.to_vec(), values)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Volume of one grid cell, `(2π)^d / N`.
    pub fn cell_volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim() as i32) / self.len() as f64
    }

    pub fn spectral(&self) -> Vec<Complex64> {
        FftPlan::new(&self.shape).forward(&self.values)
    }

    pub fn from_spectral(shape: &[usize], coeffs: &[Complex64]) -> Result<Self> {
        check_shape(shape)?;
        let values = FftPlan::new(shape).inverse(coeffs);
        Self::new(shape.to_vec(), values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(∫ |u|^q)^{1/q}` over the torus.
    pub fn lq_norm(&self, q: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(q)).sum();
        (s * self.cell_volume()).powf(1.0 / q)
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.cell_volume()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.cell_volume()
    }

    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.len() as f64
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.shape == other.shape {
            Ok(())
        } else {
            Err(NumericsError::Shape(format!("{:?} vs {:?}", self.shape, other.shape)))
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { shape: self.shape.clone(), values })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { shape: self.shape.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

/// Physical coordinates of flat grid index `flat` (row-major).
pub fn grid_point(shape: &[usize], flat: usize) -> Vec<f64> {
    mode_index(shape, flat)
        .iter()
        .zip(shape)
        .map(|(&i, &n)| 2.0 * PI * i as f64 / n as f64)
        .collect()
}

/// Per-axis indices of a row-major flat index.
pub fn mode_index(shape: &[usize], flat: usize) -> Vec<usize> {
    let mut out = vec![0; shape.len()];
    let mut rest = flat;
    for axis in (0..shape.len()).rev() {
        out[axis] = rest % shape[axis];
        rest /= shape[axis];
    }
    out
}

/// Signed wavevector of a flat spectral index.
pub fn wavevector(shape: &[usize], flat: usize) -> Vec<i64> {
    mode_index(shape, flat).iter().zip(shape).map(|(&i, &n)| wavenumber(i, n)).collect()
}

/// Flat index of the mode `-m`.
pub fn conjugate_index(shape: &[usize], flat: usize) -> usize {
    let idx = mode_index(shape, flat);
    idx.iter()
        .zip(shape)
        .fold(0, |acc, (&i, &n)| acc * n + (n - i) % n)
}

/// Euclidean norm `|m|` of the wavevector at each flat index.
pub fn wavevector_norms(shape: &[usize]) -> Vec<f64> {
    (0..shape.iter().product::<usize>())
        .map(|f| wavevector(shape, f).iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt())
        .collect()
}

/// Forward and inverse transforms for one grid shape.
pub struct FftPlan {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl FftPlan {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            shape: shape.to_vec(),
            forward: shape.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        match self.shape.as_slice() {
            [_] => plans[0].process(data),
            [rows, cols] => {
                // Rows are contiguous; columns go through a transpose buffer.
                plans[1].process(data);
                let mut col = vec![Complex64::default(); *rows];
                for c in 0..*cols {
                    for r in 0..*rows {
                        col[r] = data[r * cols + c];
                    }
                    plans[0].process(&mut col);
                    for r in 0..*rows {
                        data[r * cols + c] = col[r];
                    }
                }
            }
            _ => unreachable!("shape checked on construction"),
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        let scale = 1.0 / values.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    /// Synthesis `u(x) = Σ c_m e^{i m·x}`, keeping the real part.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut data = coeffs.to_vec();
        self.transform(&mut data, &self.inverse);
        data.iter().map(|c| c.re).collect()
    }
}

/// A uniformly sampled time series of fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub fields: Vec<PeriodicField>,
}

impl Trajectory {
    pub fn new(dt: f64, fields: Vec<PeriodicField>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(NumericsError::Param(format!("dt must be positive, got {dt}")));
        }
        let Some(first) = fields.first() else {
            return Err(NumericsError::Param("a trajectory needs at least one field".into()));
        };
        for f in &fields {
            first.same_shape(f)?;
        }
        let times = (0..fields.len()).map(|k| k as f64 * dt).collect();
        Ok(Self { dt, times, fields })
    }

    pub fn steps(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn shape(&self) -> &[usize] {
        self.fields[0].shape()
    }

    pub fn last(&self) -> &PeriodicField {
        self.fields.last().expect("non-empty")
    }

    /// Every `stride`-th field, keeping the start.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(NumericsError::Param("stride must be positive".into()));
        }
        let fields = self.fields.iter().step_by(stride).cloned().collect();
        Self::new(self.dt * stride as f64, fields)
    }

    /// `(Σ_k dt ∫ |u_k|^q)^{1/q}`, rectangle rule on the sample times.
    pub fn lq_norm(&self, q: f64) -> f64 {
        let s: f64 = self.fields.iter().map(|f| f.lq_norm(q).powf(q)).sum();
        (s * self.dt).powf(1.0 / q)
    }
}
