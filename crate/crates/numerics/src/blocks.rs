//! Sharp Littlewood–Paley blocks, a block-decay Hölder exponent estimate and
//! Bony's paraproduct decomposition.
//!
//! `Δ_{-1}` keeps `|m| ≤ 1`, `Δ_0` keeps `1 < |m| < 2` and `Δ_j`, `j ≥ 1`,
//! keeps `2^j ≤ |m| < 2^{j+1}`. Blocks past the grid's last complete annulus
//! are kept (flagged incomplete) so that the blocks always sum to the field.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::field::{wavevector, FftPlan, PeriodicField};
use crate::{NumericsError, Result};

#[derive(Debug, Clone)]
pub struct LpBlock {
    pub j: i32,
    pub field: PeriodicField,
    pub sup: f64,
    /// The whole annulus is resolved by the grid.
    pub complete: bool,
}

/// Block index of a wavevector with squared norm `r2`.
pub fn block_index(r2: u64) -> i32 {
    if r2 <= 1 {
        return -1;
    }
    if r2 < 4 {
        return 0;
    }
    // Largest j with 4^j <= r2.
    let mut j = 1;
    while 4u64.saturating_pow(j as u32 + 1) <= r2 {
        j += 1;
    }
    j
}

fn block_ids(shape: &[usize]) -> Vec<i32> {
    (0..shape.iter().product::<usize>())
        .map(|f| {
            let r2: i64 = wavevector(shape, f).iter().map(|k| k * k).sum();
            block_index(r2 as u64)
        })
        .collect()
}

/// Largest `j` whose annulus `|m| < 2^{j+1}` fits below the Nyquist frequency.
pub fn last_complete_block(shape: &[usize]) -> i32 {
    let nyquist = shape.iter().min().copied().unwrap_or(1) / 2;
    let mut j = -1;
    while (1usize << (j + 2)) <= nyquist {
        j += 1;
    }
    j
}

pub fn littlewood_paley_blocks(f: &PeriodicField) -> Result<Vec<LpBlock>> {
    let plan = FftPlan::new(f.shape());
    let coeffs = plan.forward(f.values());
    let ids = block_ids(f.shape());
    let top = *ids.iter().max().unwrap_or(&-1);
    let complete_to = last_complete_block(f.shape());
    let mut out = Vec::new();
    for j in -1..=top {
        let masked: Vec<Complex64> = coeffs
            .iter()
            .zip(&ids)
            .map(|(&c, &id)| if id == j { c } else { Complex64::default() })
            .collect();
        let field = PeriodicField::new(f.shape().to_vec(), plan.inverse(&masked))?;
        let sup = field.sup_norm();
        out.push(LpBlock { j, field, sup, complete: j <= complete_to });
    }
    Ok(out)
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of `-log2 ‖Δ_j f‖_∞` over `j ∈ [2, J-2]`, `J` the last complete
/// block: a `C^β` field has `‖Δ_j f‖_∞ ≲ 2^{-jβ}`.
pub fn estimate_holder_exponent(f: &PeriodicField) -> Result<f64> {
    let big_j = last_complete_block(f.shape());
    if big_j - 2 < 3 {
        return Err(NumericsError::Resolution(format!(
            "grid {:?} resolves blocks up to j = {big_j}; the fit window [2, J-2] needs two blocks",
            f.shape()
        )));
    }
    let blocks = littlewood_paley_blocks(f)?;
    let window: Vec<&LpBlock> = blocks.iter().filter(|b| b.j >= 2 && b.j <= big_j - 2).collect();
    if window.iter().any(|b| !(b.sup > 0.0)) {
        return Err(NumericsError::Resolution("a block in the fit window vanishes".into()));
    }
    let xs: Vec<f64> = window.iter().map(|b| b.j as f64).collect();
    let ys: Vec<f64> = window.iter().map(|b| -b.sup.log2()).collect();
    Ok(fit_slope(&xs, &ys))
}

/// Mean exponent over `count` samples drawn in parallel; sample `i` gets
/// stream `i` of `seed`.
pub fn ensemble_holder_exponent<F>(count: usize, seed: u64, sample: F) -> Result<(f64, Vec<f64>)>
where
    F: Fn(u64) -> Result<PeriodicField> + Sync,
{
    if count == 0 {
        return Err(NumericsError::Param("ensemble needs at least one sample".into()));
    }
    let estimates: Vec<f64> = (0..count as u64)
        .into_par_iter()
        .map(|i| sample(crate::noise::derive_seed(seed, i)).and_then(|f| estimate_holder_exponent(&f)))
        .collect::<Result<_>>()?;
    let mean = estimates.iter().sum::<f64>() / count as f64;
    Ok((mean, estimates))
}

#[derive(Debug, Clone)]
pub struct BonyParts {
    /// `f ≺ g`: low frequencies of `f` against high frequencies of `g`.
    pub para_fg: PeriodicField,
    /// `g ≺ f`.
    pub para_gf: PeriodicField,
    /// `f ∘ g`: comparable frequencies.
    pub resonant: PeriodicField,
}

impl BonyParts {
    pub fn sum(&self) -> PeriodicField {
        let s = self.para_fg.zip_map(&self.para_gf, |a, b| a + b).expect("same shape");
        s.zip_map(&self.resonant, |a, b| a + b).expect("same shape")
    }
}

/// `fg = f≺g + g≺f + f∘g` with `f≺g = Σ_{i ≤ j-2} Δ_i f Δ_j g` and
/// `f∘g = Σ_{|i-j| ≤ 1} Δ_i f Δ_j g`.
pub fn bony_decompose(f: &PeriodicField, g: &PeriodicField) -> Result<BonyParts> {
    f.same_shape(g)?;
    let bf = littlewood_paley_blocks(f)?;
    let bg = littlewood_paley_blocks(g)?;
    let n = f.len();
    let mut para_fg = vec![0.0; n];
    let mut para_gf = vec![0.0; n];
    let mut resonant = vec![0.0; n];
    // Running low-pass sums S_{j-1} = Σ_{i ≤ j-2} Δ_i.
    let mut low_f = vec![0.0; n];
    let mut low_g = vec![0.0; n];
    for (idx, (df, dg)) in bf.iter().zip(&bg).enumerate() {
        if idx >= 2 {
            let (lf, lg) = (&bf[idx - 2].field, &bg[idx - 2].field);
            for x in 0..n {
                low_f[x] += lf.values()[x];
                low_g[x] += lg.values()[x];
            }
        }
        let (vf, vg) = (df.field.values(), dg.field.values());
        for x in 0..n {
            para_fg[x] += low_f[x] * vg[x];
            para_gf[x] += low_g[x] * vf[x];
            let mut near = vf[x] * vg[x];
            if idx >= 1 {
                near += vf[x] * bg[idx - 1].field.values()[x] + bf[idx - 1].field.values()[x] * vg[x];
            }
            resonant[x] += near;
        }
    }
    let shape = f.shape().to_vec();
    Ok(BonyParts {
        para_fg: PeriodicField::new(shape.clone(), para_fg)?,
        para_gf: PeriodicField::new(shape.clone(), para_gf)?,
        resonant: PeriodicField::new(shape, resonant)?,
    })
}
