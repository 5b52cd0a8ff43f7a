//! Backward Steklov averages `v_h(t) = (1/h) ∫_{t-h}^t ṽ(s) ds`, with `ṽ` the
//! extension of `v` by zero before the first sample.

use crate::field::{PeriodicField, Trajectory};
use crate::{NumericsError, Result};

/// Rectangle rule on the sample grid: with `h = m·dt`,
/// `v_h(t_k) = (1/m) Σ_{i=k-m}^{k-1} ṽ_i`.
pub fn steklov_average(series: &Trajectory, h: f64) -> Result<Trajectory> {
    let m = (h / series.dt).round();
    if !(m >= 1.0) || (m * series.dt - h).abs() > 1e-9 * h {
        return Err(NumericsError::Param(format!(
            "h = {h} must be a positive multiple of dt = {}",
            series.dt
        )));
    }
    let m = m as usize;
    let len = series.fields[0].len();
    let shape = series.shape().to_vec();
    let mut window = vec![0.0; len];
    let mut out = Vec::with_capacity(series.fields.len());
    for k in 0..series.fields.len() {
        if k >= 1 {
            for (w, v) in window.iter_mut().zip(series.fields[k - 1].values()) {
                *w += v;
            }
        }
        if k > m {
            for (w, v) in window.iter_mut().zip(series.fields[k - 1 - m].values()) {
                *w -= v;
            }
        }
        let values = window.iter().map(|w| w / m as f64).collect();
        out.push(PeriodicField::new(shape.clone(), values)?);
    }
    Trajectory::new(series.dt, out)
}

/// `‖a - b‖_{L^q(I × T^d)}` on matching trajectories.
pub fn lq_distance(a: &Trajectory, b: &Trajectory, q: f64) -> Result<f64> {
    if a.fields.len() != b.fields.len() {
        return Err(NumericsError::Shape("trajectories differ in length".into()));
    }
    let fields = a
        .fields
        .iter()
        .zip(&b.fields)
        .map(|(x, y)| x.zip_map(y, |p, r| p - r))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory::new(a.dt, fields)?.lq_norm(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_ramps_then_holds() {
        let c = 2.5;
        let fields = (0..11).map(|_| PeriodicField::new(vec![4], vec![c; 4]).unwrap()).collect();
        let series = Trajectory::new(0.1, fields).unwrap();
        let avg = steklov_average(&series, 0.4).unwrap();
        for (k, f) in avg.fields.iter().enumerate() {
            let t = k as f64 * 0.1;
            let want = if t >= 0.4 - 1e-12 { c } else { t / 0.4 * c };
            assert!((f.values()[0] - want).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn h_must_be_a_multiple_of_dt() {
        let fields = (0..5).map(|_| PeriodicField::zeros(&[4]).unwrap()).collect();
        let series = Trajectory::new(0.1, fields).unwrap();
        assert!(steklov_average(&series, 0.15).is_err());
        assert!(steklov_average(&series, 0.0).is_err());
    }
}
