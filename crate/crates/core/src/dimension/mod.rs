//! Riesz energies, Frostman-type Hausdorff estimates and Fourier decay
//! estimates.

pub(crate) mod energy;

pub use energy::{
    energy_direct, energy_fourier, riesz_constant, uniform_interval_hat, EnergyMethod,
    EnergyReport, EnergySpec,
};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cantor::CantorMeasure;
use crate::error::{Error, Result};
use crate::fourier::{decay_fit, DecayReport};

const DIM_TOL: f64 = 1e-3;

/// Least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Largest mass carried by two adjacent level-`j` cells, for `j = 1..=J`,
/// paired with `ln N_j`. An interval of length between `1/N_{j+1}` and
/// `1/N_j` meets at most two such cells.
pub fn two_cell_masses(cm: &CantorMeasure) -> Result<Vec<(f64, f64)>> {
    let p = cm.params();
    (1..=cm.depth())
        .map(|j| {
            let offs = cm.offsets(j)?;
            let adjacent = offs.windows(2).any(|w| w[1] == w[0] + 1);
            let cells = if adjacent { 2.0 } else { 1.0 };
            Ok(((p.scale(j) as f64).ln(), cells / p.count(j) as f64))
        })
        .collect()
}

/// Bisection for the largest `s` in `[0, 1]` such that the two-cell bounds
/// `m_j N_j^s` show no growth across scales (nonpositive fitted log-slope).
pub fn frostman_exponent(scales: &[(f64, f64)]) -> Result<f64> {
    if scales.len() < 2 {
        return Err(Error::TooFewSamples {
            got: scales.len(),
            need: 2,
        });
    }
    let xs: Vec<f64> = scales.iter().map(|p| p.0).collect();
    let feasible = |s: f64| {
        let ys: Vec<f64> = scales.iter().map(|&(ln_n, m)| m.ln() + s * ln_n).collect();
        ols_slope(&xs, &ys) <= 0.0
    };
    if feasible(1.0) {
        return Ok(1.0);
    }
    let (mut a, mut b) = (0.0, 1.0);
    while b - a > DIM_TOL {
        let m = 0.5 * (a + b);
        if feasible(m) {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Hausdorff dimension estimate of a constructed measure from the two-cell
/// mass bounds at every construction scale.
pub fn hausdorff_dim_estimate(cm: &CantorMeasure) -> Result<f64> {
    frostman_exponent(&two_cell_masses(cm)?)
}

/// Box-counting dimension of a finite point set on the line: fitted slope of
/// `ln #boxes` against `-ln width`.
pub fn box_counting_dim(points: &[f64], widths: &[f64]) -> Result<f64> {
    if widths.len() < 2 || points.is_empty() {
        return Err(Error::TooFewSamples {
            got: widths.len().min(points.len()),
            need: 2,
        });
    }
    let xs: Vec<f64> = widths.iter().map(|w| -w.ln()).collect();
    let ys: Vec<f64> = widths
        .iter()
        .map(|&w| {
            let mut cells: Vec<i64> = points.iter().map(|p| (p / w).floor() as i64).collect();
            cells.sort_unstable();
            cells.dedup();
            (cells.len() as f64).ln()
        })
        .collect();
    Ok(ols_slope(&xs, &ys))
}

/// Fourier dimension estimate from the decay of `|transform|` on the sample
/// frequencies inside `window`: the fitted exponent, capped at `dim`.
pub fn fourier_dim_estimate<F>(
    transform: F,
    grid: &[f64],
    window: (f64, f64),
    log_correct: Option<f64>,
    dim: usize,
) -> Result<(f64, DecayReport)>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let samples: Vec<(f64, f64)> = grid
        .par_iter()
        .filter(|x| x.abs() >= window.0 && x.abs() <= window.1)
        .map(|&xi| (xi, transform(xi).norm()))
        .collect();
    let report = decay_fit(&samples, window, dim as f64, log_correct)?;
    Ok((report.fitted_beta.min(dim as f64), report))
}

/// Fourier dimension estimate for the product set `R Y = {r y}` of a finite
/// dilation set with the support of a measure on `Y`. The Fourier dimension
/// of a set is a supremum over the measures it carries, so the estimate is
/// the best over the dilates `r Y` and the uniform mixture of them.
pub fn product_set_fourier_dim<F>(
    dilations: &[f64],
    transform: F,
    grid: &[f64],
    window: (f64, f64),
    log_correct: Option<f64>,
) -> Result<f64>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    if dilations.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let w = 1.0 / dilations.len() as f64;
    let mix = |xi: f64| -> Complex64 { dilations.iter().map(|&r| transform(r * xi) * w).sum() };
    let mut best = fourier_dim_estimate(mix, grid, window, log_correct, 1)?.0;
    for &r in dilations {
        let (d, _) = fourier_dim_estimate(|xi| transform(r * xi), grid, window, log_correct, 1)?;
        best = best.max(d);
    }
    Ok(best)
}

/// Integer frequencies `lo..=hi`.
pub fn integer_grid(lo: u64, hi: u64) -> Vec<f64> {
    (lo..=hi).map(|k| k as f64).collect()
}
