use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{cis_neg, fourier_atoms, AtomMeasure};

/// Decay envelope `g(x) = (1 + x)^(-1/2) + sup_{t >= 1} |nu^(t x)|`, with the
/// supremum taken over a log-spaced grid of `t` in `[1, t_max]`.
#[derive(Debug, Clone)]
pub struct EnvelopeG {
    nu: AtomMeasure<f64>,
    t_max: f64,
    per_decade: usize,
    ts: Vec<f64>,
}

impl EnvelopeG {
    pub fn new(nu: AtomMeasure<f64>, t_max: f64, per_decade: usize) -> Result<Self> {
        if !(t_max >= 1.0 && t_max.is_finite()) || per_decade == 0 {
            return Err(Error::InvalidArgument(format!(
                "envelope grid needs t_max >= 1 and a positive density, got {t_max}, {per_decade}"
            )));
        }
        let steps = (t_max.log10() * per_decade as f64 - 1e-9).ceil().max(0.0) as usize;
        let ts = (0..=steps)
            .map(|i| 10f64.powf(i as f64 / per_decade as f64).min(t_max))
            .collect();
        Ok(Self {
            nu,
            t_max,
            per_decade,
            ts,
        })
    }

    pub fn nu(&self) -> &AtomMeasure<f64> {
        &self.nu
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn per_decade(&self) -> usize {
        self.per_decade
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.ts
    }

    fn tail_sup(&self, x: f64) -> f64 {
        self.ts
            .iter()
            .map(|&t| fourier_atoms(&self.nu, t * x).norm())
            .fold(0.0, f64::max)
    }

    /// Envelope at a single point, without monotonization.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::InvalidArgument(format!("envelope at negative x = {x}")));
        }
        Ok((1.0 + x).powf(-0.5) + self.tail_sup(x))
    }

    /// Envelope on a set of points, monotonized so the output is
    /// nonincreasing in `x`. Results are returned in input order.
    pub fn eval_grid(&self, xs: &[f64]) -> Result<Vec<f64>> {
        if let Some(&x) = xs.iter().find(|&&x| !(x >= 0.0)) {
            return Err(Error::InvalidArgument(format!("envelope at negative x = {x}")));
        }
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let sups: Vec<f64> = order.par_iter().map(|&i| self.tail_sup(xs[i])).collect();
        let mut out = vec![0.0; xs.len()];
        let mut run = 0.0f64;
        for (pos, &i) in order.iter().enumerate().rev() {
            run = run.max(sups[pos]);
            out[i] = (1.0 + xs[i]).powf(-0.5) + run;
        }
        Ok(out)
    }
}

/// Smallest `K` with `|(phi nu)^(x)| <= K g(x/2)` on the scan points `xs`,
/// where `phi nu` carries weight `w / y` at each atom `y` of `nu`.
pub fn phi_envelope(env: &EnvelopeG, xs: &[f64]) -> Result<f64> {
    let nu = env.nu();
    if let Some(a) = nu.atoms().iter().find(|a| a.position.abs() < 1e-9) {
        return Err(Error::SupportContainsZero {
            position: a.position,
        });
    }
    let halves: Vec<f64> = xs.iter().map(|x| x.abs() / 2.0).collect();
    let g = env.eval_grid(&halves)?;
    let ratios: Vec<f64> = xs
        .par_iter()
        .zip(g.par_iter())
        .map(|(&x, &gx)| {
            let v: Complex64 = nu
                .atoms()
                .iter()
                .map(|a| cis_neg(a.position * x) * (a.weight / a.position))
                .sum();
            v.norm() / gx
        })
        .collect();
    Ok(ratios.into_iter().fold(0.0, f64::max))
}
