use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dimension::uniform_interval_hat;
use crate::error::{Error, Result};
use crate::measure::{cis_neg, fourier_atoms, AtomMeasure, GridMeasure};

/// A compact set in the line or plane together with its natural probability
/// measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// `[lo, hi]` with normalized Lebesgue measure.
    Interval { lo: f64, hi: f64 },
    /// The planar segment from `from` to `to` with normalized arc length.
    Segment { from: [f64; 2], to: [f64; 2] },
    /// `count` equally spaced atoms of equal weight from `lo` to `hi`.
    Net { lo: f64, hi: f64, count: usize },
    Atoms { measure: AtomMeasure<f64> },
    PlaneAtoms { measure: AtomMeasure<[f64; 2]> },
    /// Step measure of a grid on `[1, 2]`.
    Grid { grid: GridMeasure },
    /// A grid measure carried into the plane by `x -> origin + (x - 1) dir`.
    PlaneGrid {
        grid: GridMeasure,
        origin: [f64; 2],
        dir: [f64; 2],
    },
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

// points lo, lo + h, ..., hi with h <= delta/2
fn line_net(lo: f64, hi: f64, delta: f64) -> Vec<f64> {
    let len = hi - lo;
    if len <= 0.0 {
        return vec![lo];
    }
    let k = (2.0 * (len / delta).ceil()).max(1.0) as usize;
    (0..=k).map(|i| lo + len * i as f64 / k as f64).collect()
}

fn net_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

// (1/n) sum_{k<n} exp(-2 pi i k t), via the Dirichlet kernel after
// reducing t mod 1
fn dirichlet_mean(t: f64, n: usize) -> Complex64 {
    let t0 = t - t.round();
    if t0 == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let n_f = n as f64;
    let ratio = (std::f64::consts::PI * t0 * n_f).sin() / (n_f * (std::f64::consts::PI * t0).sin());
    cis_neg(0.5 * t0 * (n_f - 1.0)) * ratio
}

fn grid_net(g: &GridMeasure, delta: f64) -> Vec<f64> {
    let w = g.cell_width();
    let k = ((2.0 * w / delta).ceil().max(1.0)) as usize;
    g.endpoints()
        .flat_map(|a| (0..=k).map(move |i| a + w * i as f64 / k as f64))
        .collect()
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Interval { .. } | Shape::Net { .. } | Shape::Atoms { .. } | Shape::Grid { .. } => 1,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Shape::Interval { lo, hi } if !(finite(&[*lo, *hi]) && lo <= hi) => {
                Err(Error::InvalidInterval { lo: *lo, hi: *hi })
            }
            Shape::Net { lo, hi, count } if !(finite(&[*lo, *hi]) && lo <= hi && *count > 0) => {
                Err(Error::InvalidArgument(format!("net of {count} points on [{lo}, {hi}]")))
            }
            Shape::Segment { from, to } if !finite(&[from[0], from[1], to[0], to[1]]) => {
                Err(Error::InvalidArgument("segment endpoints must be finite".into()))
            }
            Shape::PlaneGrid { origin, dir, .. }
                if !finite(&[origin[0], origin[1], dir[0], dir[1]]) =>
            {
                Err(Error::InvalidArgument("grid placement must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// Hull diameter; zero for a single point.
    pub fn diameter(&self) -> f64 {
        match self {
            Shape::Interval { lo, hi } => hi - lo,
            Shape::Net { lo, hi, count } => {
                if *count > 1 {
                    hi - lo
                } else {
                    0.0
                }
            }
            Shape::Segment { from, to } => ((to[0] - from[0]).powi(2) + (to[1] - from[1]).powi(2)).sqrt(),
            Shape::Atoms { measure } => measure.diameter(),
            Shape::PlaneAtoms { measure } => measure.diameter(),
            Shape::Grid { grid } => grid_span(grid),
            Shape::PlaneGrid { grid, dir, .. } => grid_span(grid) * dot(*dir, *dir).sqrt(),
        }
    }

    /// Representative points: atoms as given, continua by endpoints plus nets
    /// with spacing at most `delta / 2`. One-dimensional points carry a zero
    /// second coordinate.
    pub fn net(&self, delta: f64) -> Vec<[f64; 2]> {
        let on_line = |xs: Vec<f64>| xs.into_iter().map(|x| [x, 0.0]).collect();
        match self {
            Shape::Interval { lo, hi } => on_line(line_net(*lo, *hi, delta)),
            Shape::Net { lo, hi, count } => on_line(net_points(*lo, *hi, *count)),
            Shape::Atoms { measure } => on_line(measure.atoms().iter().map(|a| a.position).collect()),
            Shape::Grid { grid } => on_line(grid_net(grid, delta)),
            Shape::Segment { from, to } => {
                let len = self.diameter();
                line_net(0.0, len.max(f64::MIN_POSITIVE), delta)
                    .into_iter()
                    .map(|t| {
                        let u = if len > 0.0 { t / len } else { 0.0 };
                        [from[0] + u * (to[0] - from[0]), from[1] + u * (to[1] - from[1])]
                    })
                    .collect()
            }
            Shape::PlaneAtoms { measure } => measure.atoms().iter().map(|a| a.position).collect(),
            Shape::PlaneGrid { grid, origin, dir } => {
                let scale = dot(*dir, *dir).sqrt().max(f64::MIN_POSITIVE);
                grid_net(grid, delta / scale)
                    .into_iter()
                    .map(|x| [origin[0] + (x - 1.0) * dir[0], origin[1] + (x - 1.0) * dir[1]])
                    .collect()
            }
        }
    }

    /// Transform of the natural measure; one-dimensional shapes read `xi[0]`.
    pub fn hat(&self, xi: [f64; 2]) -> Complex64 {
        match self {
            Shape::Interval { lo, hi } => uniform_interval_hat(*lo, *hi, xi[0]),
            Shape::Net { lo, hi, count } => {
                let h = if *count > 1 { (hi - lo) / (*count - 1) as f64 } else { 0.0 };
                cis_neg(xi[0] * lo) * dirichlet_mean(xi[0] * h, *count)
            }
            Shape::Atoms { measure } => fourier_atoms(measure, xi[0]),
            Shape::Grid { grid } => grid.fourier(xi[0]),
            Shape::Segment { from, to } => {
                let along = [to[0] - from[0], to[1] - from[1]];
                cis_neg(dot(xi, *from)) * uniform_interval_hat(0.0, 1.0, dot(xi, along))
            }
            Shape::PlaneAtoms { measure } => fourier_atoms(measure, xi),
            Shape::PlaneGrid { grid, origin, dir } => {
                let shift = [origin[0] - dir[0], origin[1] - dir[1]];
                cis_neg(dot(xi, shift)) * grid.fourier(dot(xi, *dir))
            }
        }
    }

    /// Atomic measure when the shape is already atomic.
    pub fn atoms(&self) -> Option<Vec<([f64; 2], f64)>> {
        match self {
            Shape::Net { lo, hi, count } => {
                let w = 1.0 / *count as f64;
                Some(net_points(*lo, *hi, *count).into_iter().map(|x| ([x, 0.0], w)).collect())
            }
            Shape::Atoms { measure } => Some(measure.atoms().iter().map(|a| ([a.position, 0.0], a.weight)).collect()),
            Shape::PlaneAtoms { measure } => Some(measure.atoms().iter().map(|a| (a.position, a.weight)).collect()),
            _ => None,
        }
    }

    /// Atomic approximation of a one-dimensional shape: atoms as given, grids
    /// at their cell midpoints, intervals at `rule_points` midpoints.
    pub fn scalar_atoms(&self, rule_points: usize) -> Result<AtomMeasure<f64>> {
        match self {
            Shape::Atoms { measure } => Ok(measure.clone()),
            Shape::Net { lo, hi, count } => AtomMeasure::uniform(&net_points(*lo, *hi, *count), 1.0),
            Shape::Grid { grid } => Ok(grid.discretize()),
            Shape::Interval { lo, hi } => {
                let n = rule_points.max(1);
                let pts: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect();
                AtomMeasure::uniform(&pts, 1.0)
            }
            _ => Err(Error::InvalidArgument("dilation set must lie on the line".into())),
        }
    }
}

fn grid_span(g: &GridMeasure) -> f64 {
    let first = g.offsets()[0];
    let last = *g.offsets().last().unwrap();
    (last + 1 - first) as f64 * g.cell_width()
}
