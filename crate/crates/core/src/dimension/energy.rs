use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::measure::{AtomMeasure, Point};
use crate::quad::simpson;

/// Pairs farther apart than this many cell widths use the point kernel.
const FAR_FIELD_CELLS: f64 = 64.0;
const TAIL_FRACTION_LIMIT: f64 = 0.1;

fn default_step() -> f64 {
    1.0 / 32.0
}

/// Riesz energy exponent and the numerical settings for both evaluation
/// routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySpec {
    pub s: f64,
    pub d: usize,
    pub cutoff: f64,
    #[serde(default)]
    pub mollify_eps: f64,
    /// Quadrature spacing on the frequency side.
    #[serde(default = "default_step")]
    pub step: f64,
}

impl EnergySpec {
    pub fn new(s: f64, d: usize, cutoff: f64) -> Self {
        Self {
            s,
            d,
            cutoff,
            mollify_eps: 0.0,
            step: default_step(),
        }
    }

    pub fn with_mollify(mut self, eps: f64) -> Self {
        self.mollify_eps = eps;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d == 1 || self.d == 2) || !(self.s > 0.0 && self.s < self.d as f64) {
            return Err(Error::InvalidExponent { s: self.s, d: self.d });
        }
        if !(self.cutoff > 0.0) || !(self.step > 0.0) || !(self.mollify_eps >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff {}, step {} and mollify_eps {} must be positive",
                self.cutoff, self.step, self.mollify_eps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMethod {
    Direct,
    Fourier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub method: EnergyMethod,
    pub s: f64,
    pub value: f64,
    pub tail_fraction: Option<f64>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub coincidence_mass: f64,
    #[serde(skip)]
    pub tail_slope: Option<f64>,
}

/// `c(d, s) = pi^(s - d/2) Gamma((d - s)/2) / Gamma(s/2)`, the constant with
/// `I_s(mu) = c(d, s) int |mu^(xi)|^2 |xi|^(s - d) dxi`.
pub fn riesz_constant(d: usize, s: f64) -> f64 {
    let d = d as f64;
    PI.powf(s - d / 2.0) * gamma((d - s) / 2.0) / gamma(s / 2.0)
}

// mean of |x - y|^(-s) over x, y uniform on cells of width h whose centers are delta apart
fn cell_kernel(delta: f64, h: f64, s: f64) -> f64 {
    let delta = delta.abs();
    if delta >= FAR_FIELD_CELLS * h {
        return delta.powf(-s);
    }
    let f = |u: f64| u.abs().powf(2.0 - s) / ((1.0 - s) * (2.0 - s));
    (f(delta + h) - 2.0 * f(delta) + f(delta - h)) / (h * h)
}

/// `sum_{x, y} w_x w_y K(x - y)`.
///
/// With `mollify_eps = 0` the kernel is `|x - y|^(-s)` and coincident pairs
/// are left out; their total weight is returned as `coincidence_mass` and
/// flagged in `warnings`. With `mollify_eps = h > 0`, in one dimension each
/// atom is spread uniformly over a cell of width `h` and the kernel is the
/// exact cell-pair average; in two dimensions the distance is clamped below
/// at `h`.
pub fn energy_direct<P: Point>(m: &AtomMeasure<P>, spec: &EnergySpec) -> Result<EnergyReport> {
    spec.validate()?;
    if spec.d != P::DIM {
        return Err(Error::InvalidArgument(format!(
            "spec dimension {} but measure dimension {}",
            spec.d,
            P::DIM
        )));
    }
    let atoms = m.atoms();
    let (s, h) = (spec.s, spec.mollify_eps);
    let rows: Vec<(f64, f64)> = (0..atoms.len())
        .into_par_iter()
        .map(|i| {
            let (x, wx) = (atoms[i].position, atoms[i].weight);
            let mut acc = 0.0;
            let mut coincident = 0.0;
            for (k, a) in atoms[i..].iter().enumerate() {
                let r = x.dist(a.position);
                let mult = if k == 0 { 1.0 } else { 2.0 };
                let w = mult * wx * a.weight;
                if h > 0.0 {
                    acc += w * if P::DIM == 1 {
                        cell_kernel(r, h, s)
                    } else {
                        r.max(h).powf(-s)
                    };
                } else if r == 0.0 {
                    coincident += w;
                } else {
                    acc += w * r.powf(-s);
                }
            }
            (acc, coincident)
        })
        .collect();
    let value: f64 = rows.iter().map(|r| r.0).sum();
    let coincidence_mass: f64 = rows.iter().map(|r| r.1).sum();
    let mut warnings = Vec::new();
    if coincidence_mass > 0.0 {
        warnings.push(format!(
            "coincident atom pairs with total weight {coincidence_mass} excluded"
        ));
    }
    Ok(EnergyReport {
        method: EnergyMethod::Direct,
        s,
        value,
        tail_fraction: None,
        warnings,
        coincidence_mass,
        tail_slope: None,
    })
}

/// Radial profile `rho -> int_{|xi| = rho} |T(xi)|^2 dsigma / rho^(d-1)`:
/// the sum over both signs in one dimension, the angular integral in two.
pub(crate) fn shell<P: Point, F: Fn(P) -> Complex64 + Sync>(transform: &F, rho: f64, arc: f64) -> f64 {
    if P::DIM == 1 {
        transform(P::from_coords(&[rho])).norm_sqr() + transform(P::from_coords(&[-rho])).norm_sqr()
    } else {
        let n = ((TAU * rho / arc).ceil() as usize).max(16);
        let sum: f64 = (0..n)
            .map(|k| {
                let th = TAU * k as f64 / n as f64;
                transform(P::from_coords(&[rho * th.cos(), rho * th.sin()])).norm_sqr()
            })
            .sum();
        sum * TAU / n as f64
    }
}

/// `c(d, s) int_{|xi| <= cutoff} |T(xi)|^2 |xi|^(s - d) dxi`, with the last
/// decade of the radial integral reported as a tail diagnostic.
pub fn energy_fourier<P, F>(transform: F, spec: &EnergySpec) -> Result<EnergyReport>
where
    P: Point,
    F: Fn(P) -> Complex64 + Sync,
{
    spec.validate()?;
    if spec.d != P::DIM {
        return Err(Error::InvalidArgument(format!(
            "spec dimension {} but transform dimension {}",
            spec.d,
            P::DIM
        )));
    }
    let (s, c, h) = (spec.s, spec.cutoff, spec.step);
    let radial = |rho: f64| shell::<P, F>(&transform, rho, h) * rho.powf(s - 1.0);

    // [0, low] with rho = u^(1/s) to absorb the rho^(s-1) singularity
    let low = 1f64.min(c / 100.0);
    let near = simpson(
        |u| {
            if u == 0.0 {
                0.0
            } else {
                shell::<P, F>(&transform, low * u.powf(1.0 / s), h)
            }
        },
        0.0,
        1.0,
        64,
    ) * low.powf(s)
        / s;
    let piece = |a: f64, b: f64| -> f64 {
        if b <= a {
            return 0.0;
        }
        let half = ((b - a) / (2.0 * h)).ceil().max(1.0) as usize;
        let m = 2 * half;
        let dx = (b - a) / m as f64;
        let vals: Vec<f64> = (0..=m).into_par_iter().map(|i| radial(a + i as f64 * dx)).collect();
        let mut acc = vals[0] + vals[m];
        for (i, v) in vals.iter().enumerate().take(m).skip(1) {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * v;
        }
        acc * dx / 3.0
    };
    let mid = piece(low, c / 100.0);
    let prev = piece((c / 100.0).max(low), c / 10.0);
    let last = piece((c / 10.0).max(low), c);
    let total = near + mid + prev + last;
    let k = riesz_constant(spec.d, s);
    let value = k * total;
    let tail_fraction = if total > 0.0 { last / total } else { 0.0 };
    let slope = if last > 0.0 && prev > 0.0 {
        (last / prev).log10()
    } else if last > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    if tail_fraction > TAIL_FRACTION_LIMIT && slope >= -1.0 {
        return Err(Error::NonconvergentTail {
            tail_fraction,
            slope,
        });
    }
    Ok(EnergyReport {
        method: EnergyMethod::Fourier,
        s,
        value,
        tail_fraction: Some(tail_fraction),
        warnings: Vec::new(),
        coincidence_mass: 0.0,
        tail_slope: Some(slope),
    })
}

/// Transform of the uniform probability measure on `[lo, hi]`.
pub fn uniform_interval_hat(lo: f64, hi: f64, xi: f64) -> Complex64 {
    let len = hi - lo;
    crate::measure::cis_neg(xi * lo) * crate::measure::unit_box_hat(xi * len)
}
