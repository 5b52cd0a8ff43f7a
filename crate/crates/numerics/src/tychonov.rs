//! Tychonov's nonzero solution of the heat equation on the line with zero
//! initial data, `u(t, x) = Σ_k g^{(k)}(t) x^{2k} / (2k)!` with
//! `g(t) = exp(-t^{-α})` for `t > 0` and `g = 0` otherwise.
//!
//! For integer `α`, `g^{(k)}(t) = P_k(1/t) g(t)` where `P_0 = 1` and
//! `P_{k+1}(s) = -s² P_k'(s) + α s^{α+1} P_k(s)`; the `P_k` have integer
//! coefficients and are kept exactly.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::{NumericsError, Result};

const OVERFLOW_LN: f64 = 690.775_527_898_213_7; // ln(1e300)

#[derive(Debug, Clone, PartialEq)]
pub struct TychonovSeries {
    pub alpha: u32,
    /// `poly_table[k][i]` is the coefficient of `s^i` in `P_k`.
    pub poly_table: Vec<Vec<BigInt>>,
}

/// `(sign, ln|x|)` of a big integer, accurate to double precision.
fn big_ln(x: &BigInt) -> (i8, f64) {
    let sign = match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => return (0, f64::NEG_INFINITY),
        Sign::Plus => 1,
    };
    let mag = x.magnitude();
    let shift = mag.bits().saturating_sub(64);
    let top = (mag >> shift).to_f64().expect("64-bit value");
    (sign, top.ln() + shift as f64 * std::f64::consts::LN_2)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Neumaier-compensated sum.
fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

impl TychonovSeries {
    /// Builds `P_0, ..., P_{max_k}`.
    pub fn new(alpha: u32, max_k: usize) -> Result<Self> {
        if alpha < 2 {
            return Err(NumericsError::Param(format!("alpha must be an integer >= 2, got {alpha}")));
        }
        let shift = alpha as usize + 1;
        let mut table = vec![vec![BigInt::from(1)]];
        for _ in 0..max_k {
            let p = table.last().expect("P_0");
            let mut next = vec![BigInt::zero(); p.len() + shift];
            for (i, c) in p.iter().enumerate() {
                if i > 0 {
                    next[i + 1] -= c * BigInt::from(i);
                }
                next[i + shift] += c * BigInt::from(alpha);
            }
            while next.len() > 1 && next.last().is_some_and(|c| c.is_zero()) {
                next.pop();
            }
            table.push(next);
        }
        Ok(Self { alpha, poly_table: table })
    }

    pub fn max_k(&self) -> usize {
        self.poly_table.len() - 1
    }

    pub fn degree(&self, k: usize) -> usize {
        self.poly_table[k].len() - 1
    }

    fn need(&self, k: usize) -> Result<()> {
        if k > self.max_k() {
            return Err(NumericsError::Param(format!(
                "series built to k = {}, asked for {k}",
                self.max_k()
            )));
        }
        Ok(())
    }

    /// `(sign, ln|g^{(k)}(t)|)` for `t > 0`, with `P_k(1/t)` evaluated exactly
    /// at the binary value of `t`.
    fn ln_g_derivative(&self, k: usize, t: f64) -> (i8, f64) {
        let tr = BigRational::from_float(t).expect("finite t");
        // s = 1/t = q/p with t = p/q.
        let (p, q) = (tr.numer().clone(), tr.denom().clone());
        let poly = &self.poly_table[k];
        let deg = poly.len() - 1;
        // P(q/p) · p^deg = Σ c_i q^i p^{deg-i}, by Horner in q with powers of p.
        let mut acc = poly[deg].clone();
        let mut p_pow = BigInt::from(1);
        for i in (0..deg).rev() {
            p_pow *= &p;
            acc = acc * &q + &poly[i] * &p_pow;
        }
        let (sign, ln_num) = big_ln(&acc);
        let (_, ln_p) = big_ln(&p);
        let ln_poly = ln_num - deg as f64 * ln_p;
        (sign, ln_poly - t.powi(-(self.alpha as i32)))
    }

    /// `g^{(k)}(t)`.
    pub fn g_derivative(&self, k: usize, t: f64) -> Result<f64> {
        self.need(k)?;
        if !(t > 0.0) {
            return Ok(0.0);
        }
        let (sign, ln) = self.ln_g_derivative(k, t);
        if ln > OVERFLOW_LN {
            return Err(NumericsError::Overflow(k));
        }
        Ok(sign as f64 * ln.exp())
    }

    fn term(&self, k_deriv: usize, t: f64, x: f64, power: usize) -> Result<f64> {
        if power > 0 && x == 0.0 {
            return Ok(0.0);
        }
        let (sign, ln_g) = self.ln_g_derivative(k_deriv, t);
        if sign == 0 {
            return Ok(0.0);
        }
        let ln_x = if power == 0 { 0.0 } else { power as f64 * x.abs().ln() };
        let ln = ln_g + ln_x - ln_factorial(power);
        if ln > OVERFLOW_LN {
            return Err(NumericsError::Overflow(k_deriv));
        }
        let xsign = if power % 2 == 1 && x < 0.0 { -1.0 } else { 1.0 };
        Ok(sign as f64 * xsign * ln.exp())
    }

    /// Truncation `u_K(t, x) = Σ_{k ≤ K} g^{(k)}(t) x^{2k} / (2k)!`.
    pub fn eval(&self, t: f64, x: f64, big_k: usize) -> Result<f64> {
        self.need(big_k)?;
        if !(t > 0.0) {
            return Ok(0.0);
        }
        let terms = (0..=big_k).map(|k| self.term(k, t, x, 2 * k)).collect::<Result<Vec<_>>>()?;
        Ok(compensated_sum(terms))
    }

    /// `∂_t u_K` term by term.
    pub fn time_derivative(&self, t: f64, x: f64, big_k: usize) -> Result<f64> {
        self.need(big_k + 1)?;
        if !(t > 0.0) {
            return Ok(0.0);
        }
        let terms = (0..=big_k).map(|k| self.term(k + 1, t, x, 2 * k)).collect::<Result<Vec<_>>>()?;
        Ok(compensated_sum(terms))
    }

    /// `∂_t u_K - ∂_xx u_K = g^{(K+1)}(t) x^{2K} / (2K)!`, by telescoping.
    pub fn analytic_residual(&self, t: f64, x: f64, big_k: usize) -> Result<f64> {
        self.need(big_k + 1)?;
        if !(t > 0.0) {
            return Ok(0.0);
        }
        self.term(big_k + 1, t, x, 2 * big_k)
    }

    /// `∂_t u_K - ∂_xx u_K` by eighth-order centered differences with step `h`.
    pub fn fd_residual(&self, t: f64, x: f64, big_k: usize, h: f64) -> Result<f64> {
        const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        const D2: [f64; 4] = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
        const D2_CENTER: f64 = -205.0 / 72.0;
        let mut dt_terms = Vec::with_capacity(8);
        let mut dxx_terms = Vec::with_capacity(9);
        dxx_terms.push(D2_CENTER * self.eval(t, x, big_k)?);
        for (j, (c1, c2)) in D1.iter().zip(&D2).enumerate() {
            let o = (j + 1) as f64 * h;
            dt_terms.push(c1 * (self.eval(t + o, x, big_k)? - self.eval(t - o, x, big_k)?));
            dxx_terms.push(c2 * (self.eval(t, x + o, big_k)? + self.eval(t, x - o, big_k)?));
        }
        Ok(compensated_sum(dt_terms) / h - compensated_sum(dxx_terms) / (h * h))
    }
}

/// Closed rectangle `[t0, t1] × [x0, x1]` sampled on an `nt × nx` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
    pub nt: usize,
    pub nx: usize,
}

impl Region {
    pub fn new(t0: f64, t1: f64, x0: f64, x1: f64) -> Self {
        Self { t0, t1, x0, x1, nt: 11, nx: 21 }
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let lerp = |a: f64, b: f64, i: usize, n: usize| {
            if n <= 1 {
                a
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.nt * self.nx);
        for i in 0..self.nt {
            for j in 0..self.nx {
                out.push((lerp(self.t0, self.t1, i, self.nt), lerp(self.x0, self.x1, j, self.nx)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub terms: usize,
    pub max_analytic: f64,
    pub max_fd: f64,
    /// Largest gap between the two residuals.
    pub max_disagreement: f64,
    /// `max |∂_t u_K|` over the region, the scale for relative comparisons.
    pub scale: f64,
}

impl ResidualReport {
    pub fn relative_disagreement(&self) -> f64 {
        if self.scale > 0.0 {
            self.max_disagreement / self.scale
        } else {
            self.max_disagreement
        }
    }
}

/// Maximum truncation residual over a region, computed both in closed form
/// and by finite differences.
pub fn tychonov_residual(series: &TychonovSeries, big_k: usize, region: &Region) -> Result<ResidualReport> {
    if region.t0 <= 0.0 {
        return Err(NumericsError::Param("region must stay away from t = 0".into()));
    }
    let h = (region.t0 / 20.0).min(1e-2);
    let mut report = ResidualReport { terms: big_k, max_analytic: 0.0, max_fd: 0.0, max_disagreement: 0.0, scale: 0.0 };
    for (t, x) in region.points() {
        let a = series.analytic_residual(t, x, big_k)?;
        let f = series.fd_residual(t, x, big_k, h)?;
        report.max_analytic = report.max_analytic.max(a.abs());
        report.max_fd = report.max_fd.max(f.abs());
        report.max_disagreement = report.max_disagreement.max((a - f).abs());
        report.scale = report.scale.max(series.time_derivative(t, x, big_k)?.abs());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_polynomials() {
        let s = TychonovSeries::new(2, 2).unwrap();
        // g' = 2 s^3 g; g'' = (-6 s^4 + 4 s^6) g.
        assert_eq!(s.poly_table[1], vec![0.into(), 0.into(), 0.into(), BigInt::from(2)]);
        let p2: Vec<i64> = s.poly_table[2].iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(p2, [0, 0, 0, 0, -6, 0, 4]);
    }

    #[test]
    fn degree_bound() {
        let s = TychonovSeries::new(3, 12).unwrap();
        for k in 0..12 {
            assert!(s.degree(k + 1) <= s.degree(k) + 4);
        }
    }

    #[test]
    fn value_at_origin() {
        let s = TychonovSeries::new(2, 30).unwrap();
        let v = s.eval(1.0, 0.0, 30).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(s.eval(0.0, 0.7, 30).unwrap(), 0.0);
        assert_eq!(s.eval(-1.0, 0.7, 30).unwrap(), 0.0);
    }

    #[test]
    fn residual_vanishes_on_the_axis() {
        let s = TychonovSeries::new(2, 31).unwrap();
        assert_eq!(s.analytic_residual(0.7, 0.0, 30).unwrap(), 0.0);
    }

    #[test]
    fn needs_alpha_at_least_two() {
        assert!(TychonovSeries::new(1, 4).is_err());
    }
}
