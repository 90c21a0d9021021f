//! Desk checks for sumsets `R Y + Z`: outer cover measures, an `L^2`
//! density proxy for convolutions, convolution energies and a pipeline that
//! runs them from set descriptions.

mod cover;
mod shape;

pub use cover::{
    box_dim_points, coarsen, cover_schedule, hit_cells, product_points, sumset_cover_measure,
    CoverSchedule, SumsetSpec, STABLE_CHANGE,
};
pub use shape::Shape;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimension::{energy::shell, energy_fourier, ols_slope, EnergyReport, EnergySpec};
use crate::error::{Error, Result};
use crate::fourier::decay_fit;
use crate::measure::{AtomMeasure, GridMeasure, Point};
use crate::quad::simpson_nodes;

/// The fitted per-step shrink factor of the increments must stay below this
/// for the `L^2` proxy to count as convergent.
pub const L2_RATIO_LIMIT: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Report {
    pub cutoffs: Vec<f64>,
    /// `P(c) = int_{|xi| <= c} |mu^ nu^|^2`
    pub values: Vec<f64>,
    pub increments: Vec<f64>,
    /// Ratio of each increment to the one before it.
    pub ratios: Vec<f64>,
    /// `exp` of the fitted slope of `ln increment` against the step index.
    pub rate: f64,
    pub converges: bool,
}

fn radial_integral<P, F>(profile: &F, a: f64, b: f64, step: f64) -> f64
where
    P: Point,
    F: Fn(P) -> Complex64 + Sync,
{
    if b <= a {
        return 0.0;
    }
    let half = ((b - a) / (2.0 * step)).ceil().max(1.0) as usize;
    let terms: Vec<f64> = simpson_nodes(a, b, half)
        .into_par_iter()
        .map(|(rho, w)| w * shell::<P, F>(profile, rho, step) * rho.powi(P::DIM as i32 - 1))
        .collect();
    terms.iter().sum()
}

/// Partial integrals of `|mu^ nu^|^2` over the balls `|xi| <= c` for each
/// cutoff, with a geometric-decay test on the increments as a proxy for
/// `mu * nu` having an `L^2` density.
pub fn l2_density_check<P, F, G>(mu_hat: F, nu_hat: G, cutoffs: &[f64], step: f64) -> Result<L2Report>
where
    P: Point,
    F: Fn(P) -> Complex64 + Sync,
    G: Fn(P) -> Complex64 + Sync,
{
    if cutoffs.is_empty() || cutoffs.windows(2).any(|w| w[1] <= w[0]) || !(cutoffs[0] > 0.0) {
        return Err(Error::InvalidArgument("cutoff schedule must be positive and increasing".into()));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step {step} must be positive")));
    }
    let product = |xi: P| mu_hat(xi) * nu_hat(xi);
    let mut values = Vec::with_capacity(cutoffs.len());
    let mut increments = Vec::with_capacity(cutoffs.len());
    let mut prev = 0.0;
    let mut total = 0.0;
    for &c in cutoffs {
        let inc = radial_integral::<P, _>(&product, prev, c, step);
        total += inc;
        values.push(total);
        increments.push(inc);
        prev = c;
    }
    let ratios: Vec<f64> = increments
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 })
        .collect();
    let rate = geometric_rate(&increments);
    Ok(L2Report {
        cutoffs: cutoffs.to_vec(),
        values,
        increments,
        ratios,
        rate,
        converges: rate < L2_RATIO_LIMIT,
    })
}

// zero tails count as convergent; a single step cannot show a rate
fn geometric_rate(increments: &[f64]) -> f64 {
    if increments.len() < 2 {
        return f64::INFINITY;
    }
    if increments.last() == Some(&0.0) {
        return 0.0;
    }
    let (ks, logs): (Vec<f64>, Vec<f64>) = increments
        .iter()
        .enumerate()
        .filter(|p| *p.1 > 0.0)
        .map(|(k, v)| (k as f64, v.ln()))
        .unzip();
    if ks.len() < 2 {
        return f64::INFINITY;
    }
    ols_slope(&ks, &logs).exp()
}

/// `s`-energy of `mu * nu` from the product of the transforms.
pub fn convolution_energy<P, F, G>(mu_hat: F, nu_hat: G, spec: &EnergySpec) -> Result<EnergyReport>
where
    P: Point,
    F: Fn(P) -> Complex64 + Sync,
    G: Fn(P) -> Complex64 + Sync,
{
    energy_fourier(|xi: P| mu_hat(xi) * nu_hat(xi), spec)
}

/// Transform of the pushforward of `mu_R x mu_Y` under `(r, y) -> r y`.
#[derive(Debug, Clone)]
pub enum ProductHat {
    /// `sum_y w_y R^(xi . y)` for atomic `Y`.
    OverY { r: Shape, y: Vec<([f64; 2], f64)> },
    /// `sum_r w_r Y^(r xi)` with `R` atomic or discretized.
    OverR { r: AtomMeasure<f64>, y: Shape },
}

impl ProductHat {
    pub fn new(r: &Shape, y: &Shape, rule_points: usize) -> Result<Self> {
        Ok(match y.atoms() {
            Some(atoms) => ProductHat::OverY { r: r.clone(), y: atoms },
            None => ProductHat::OverR {
                r: r.scalar_atoms(rule_points)?,
                y: y.clone(),
            },
        })
    }

    pub fn eval(&self, xi: [f64; 2]) -> Complex64 {
        match self {
            ProductHat::OverY { r, y } => y
                .iter()
                .map(|(p, w)| r.hat([xi[0] * p[0] + xi[1] * p[1], 0.0]) * w)
                .sum(),
            ProductHat::OverR { r, y } => r
                .atoms()
                .iter()
                .map(|a| y.hat([a.position * xi[0], a.position * xi[1]]) * a.weight)
                .sum(),
        }
    }
}

fn as_plane<P: Point>(xi: P) -> [f64; 2] {
    let c = xi.coords();
    [c[0], if c.len() > 1 { c[1] } else { 0.0 }]
}

/// Decay exponent of a transform from `max |T|` over shells `|xi| = rho`
/// at log-spaced radii in `window`, fitted up to the dimension `d`.
pub fn shell_decay_exponent<F>(hat: F, d: usize, window: (f64, f64), samples: usize) -> Result<f64>
where
    F: Fn([f64; 2]) -> Complex64 + Sync,
{
    let angles = if d == 1 { 2 } else { 64 };
    let pts: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let rho = window.0 * (window.1 / window.0).powf(i as f64 / (samples - 1).max(1) as f64);
            let sup = (0..angles)
                .map(|k| {
                    let th = std::f64::consts::TAU * k as f64 / angles as f64;
                    hat([rho * th.cos(), if d == 1 { 0.0 } else { rho * th.sin() }]).norm()
                })
                .fold(0.0, f64::max);
            (rho, sup)
        })
        .collect();
    Ok(decay_fit(&pts, window, d as f64, None)?.fitted_beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum PipelineMode {
    /// Positive Lebesgue measure: `L^2` proxy plus cover stabilization.
    Lebesgue,
    /// Hausdorff dimension at least `s`: finite energy of the convolution.
    HausdorffS { s: f64 },
}

fn default_step() -> f64 {
    1.0 / 32.0
}

fn default_rule_points() -> usize {
    256
}

fn default_samples() -> usize {
    256
}

fn default_cutoffs() -> Vec<f64> {
    (4..=10).map(|k| 2f64.powi(k)).collect()
}

fn default_deltas() -> Vec<f64> {
    (6..=11).map(|k| 2f64.powi(-k)).collect()
}

fn default_cover_floor() -> f64 {
    0.1
}

fn default_energy_cutoff() -> f64 {
    1024.0
}

fn default_window() -> (f64, f64) {
    (16.0, 1024.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: PipelineMode,
    /// Cutoff schedule for the `L^2` proxy.
    #[serde(default = "default_cutoffs")]
    pub cutoffs: Vec<f64>,
    /// Resolutions for the cover schedule and the box-counting exponents.
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default = "default_cover_floor")]
    pub cover_floor: f64,
    #[serde(default = "default_energy_cutoff")]
    pub energy_cutoff: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    /// Frequency window for the Fourier decay exponents.
    #[serde(default = "default_window")]
    pub window: (f64, f64),
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Midpoint atoms used when a continuum dilation set must be discretized.
    #[serde(default = "default_rule_points")]
    pub rule_points: usize,
}

impl PipelineConfig {
    /// Cutoffs `16, 32, ..., 1024`, resolutions `2^-6 .. 2^-11`, window
    /// `[16, 1024]`.
    pub fn new(mode: PipelineMode) -> Self {
        Self {
            mode,
            cutoffs: default_cutoffs(),
            deltas: default_deltas(),
            cover_floor: default_cover_floor(),
            energy_cutoff: default_energy_cutoff(),
            step: default_step(),
            window: default_window(),
            samples: default_samples(),
            rule_points: default_rule_points(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `L^2` proxy converges and the cover stabilizes above the floor.
    PositiveLebesgue,
    /// `L^2` proxy converges but the cover does not stabilize.
    Inconclusive,
    NotL2,
    /// Finite convolution energy at the requested exponent.
    DimensionAtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub fourier_ry: f64,
    pub fourier_z: f64,
    pub box_ry: f64,
    pub box_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingBound {
    /// Which factor supplies the Fourier decay: `ry` or `z`.
    pub fourier_on: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub mode: PipelineMode,
    pub d: usize,
    pub verdict: Verdict,
    pub exponents: Exponents,
    pub orderings: Vec<OrderingBound>,
    /// `min(d, max over orderings)`
    pub predicted: f64,
    pub l2: Option<L2Report>,
    pub cover: Option<CoverSchedule>,
    pub energy: Option<EnergyReport>,
}

/// Build the product measure on `R Y` and the natural measure on `Z`, fit
/// the exponents of both orderings, and run the check selected by `mode`.
///
/// Both orderings bound the same integral of `|mu^ nu^|^2` against a power
/// of `|xi|`, so one evaluation serves both; the orderings differ only in
/// which exponents they predict.
pub fn theorem_pipeline(r: &Shape, y: &Shape, z: &Shape, d: usize, cfg: &PipelineConfig) -> Result<PipelineReport> {
    let finest = cfg.deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let sets = SumsetSpec::new(r.clone(), y.clone(), z.clone(), finest, d);
    sets.validate()?;
    let mu = ProductHat::new(r, y, cfg.rule_points)?;

    let ry_points = product_points(&r.net(finest), &y.net(finest), finest);
    let exponents = Exponents {
        fourier_ry: shell_decay_exponent(|xi| mu.eval(xi), d, cfg.window, cfg.samples)?,
        fourier_z: shell_decay_exponent(|xi| z.hat(xi), d, cfg.window, cfg.samples)?,
        box_ry: box_dim_points(&ry_points, &cfg.deltas)?,
        box_z: box_dim_points(&z.net(finest), &cfg.deltas)?,
    };
    let orderings = vec![
        OrderingBound {
            fourier_on: "ry".into(),
            value: exponents.fourier_ry + exponents.box_z,
        },
        OrderingBound {
            fourier_on: "z".into(),
            value: exponents.box_ry + exponents.fourier_z,
        },
    ];
    let predicted = orderings.iter().map(|o| o.value).fold(0.0, f64::max).min(d as f64);

    let (verdict, l2, cover, energy) = match cfg.mode {
        PipelineMode::Lebesgue => {
            let l2 = if d == 1 {
                l2_density_check(|xi: f64| mu.eval([xi, 0.0]), |xi: f64| z.hat([xi, 0.0]), &cfg.cutoffs, cfg.step)?
            } else {
                l2_density_check(|xi: [f64; 2]| mu.eval(xi), |xi: [f64; 2]| z.hat(xi), &cfg.cutoffs, cfg.step)?
            };
            let cover = cover_schedule(&sets, &cfg.deltas, cfg.cover_floor)?;
            let verdict = match (l2.converges, cover.stabilized) {
                (false, _) => Verdict::NotL2,
                (true, true) => Verdict::PositiveLebesgue,
                (true, false) => Verdict::Inconclusive,
            };
            (verdict, Some(l2), Some(cover), None)
        }
        PipelineMode::HausdorffS { s } => {
            let spec = EnergySpec::new(s, d, cfg.energy_cutoff).with_step(cfg.step);
            let energy = if d == 1 {
                convolution_energy(|xi: f64| mu.eval([xi, 0.0]), |xi: f64| z.hat([xi, 0.0]), &spec)?
            } else {
                convolution_energy(|xi: [f64; 2]| mu.eval(as_plane(xi)), |xi: [f64; 2]| z.hat(xi), &spec)?
            };
            (Verdict::DimensionAtLeast, None, None, Some(energy))
        }
    };
    Ok(PipelineReport {
        mode: cfg.mode,
        d,
        verdict,
        exponents,
        orderings,
        predicted,
        l2,
        cover,
        energy,
    })
}

/// Planar sets with `R Y + Z` of dimension `1 + dim Z`: `Y` a radial segment
/// `{t u : t in [1/2, 1]}` along `u = (1, 0)`, `R = [1, 2]`, and `Z` the
/// base-4 Cantor set with digits `{0, 3}` (dimension `1/2`) on the vertical
/// axis, refined to cells of width `4^-depth`.
pub fn cone_fixture(depth: usize) -> Result<(Shape, Shape, Shape)> {
    let r = Shape::Interval { lo: 1.0, hi: 2.0 };
    let y = Shape::Segment {
        from: [0.5, 0.0],
        to: [1.0, 0.0],
    };
    let z = Shape::PlaneGrid {
        grid: GridMeasure::self_similar(4, &[0, 3], depth)?,
        origin: [0.0, 0.0],
        dir: [0.0, 1.0],
    };
    Ok((r, y, z))
}
