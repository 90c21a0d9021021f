use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::shape::Shape;
use crate::dimension::ols_slope;
use crate::error::{Error, Result};

/// Sub-lattice factor used when thinning the point cloud of `R Y`.
const THIN: f64 = 4.0;
const CHUNK: usize = 64;

/// The sets `R`, `Y`, `Z` of a sumset `R Y + Z` and the cover resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumsetSpec {
    pub r: Shape,
    pub y: Shape,
    pub z: Shape,
    pub delta: f64,
    pub d: usize,
}

impl SumsetSpec {
    pub fn new(r: Shape, y: Shape, z: Shape, delta: f64, d: usize) -> Self {
        Self { r, y, z, delta, d }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta {} must be positive", self.delta)));
        }
        if !(self.d == 1 || self.d == 2) {
            return Err(Error::InvalidArgument(format!("dimension {} not in {{1, 2}}", self.d)));
        }
        if self.r.dim() != 1 {
            return Err(Error::InvalidArgument("dilation set must lie on the line".into()));
        }
        for s in [&self.y, &self.z] {
            s.validate()?;
            if s.dim() != self.d {
                return Err(Error::InvalidArgument(format!(
                    "set of dimension {} in a {}-dimensional sumset",
                    s.dim(),
                    self.d
                )));
            }
        }
        self.r.validate()
    }

    /// Smallest hull diameter among the inputs that are not single points.
    pub fn feature_size(&self) -> Option<f64> {
        [&self.r, &self.y, &self.z]
            .iter()
            .map(|s| s.diameter())
            .filter(|&d| d > 0.0)
            .min_by(f64::total_cmp)
    }

    fn check_resolution(&self, delta: f64) -> Result<()> {
        match self.feature_size() {
            Some(feature) if delta > feature => Err(Error::ResolutionTooCoarse { delta, feature }),
            _ => Ok(()),
        }
    }
}

type Key = (i64, i64);

fn key(p: [f64; 2], inv: f64) -> Key {
    ((p[0] * inv).floor() as i64, (p[1] * inv).floor() as i64)
}

fn sort_dedup<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Point cloud `{r y}` thinned to one representative per cell of width
/// `delta / 4`, the smallest point in each cell being kept.
pub fn product_points(r: &[[f64; 2]], y: &[[f64; 2]], delta: f64) -> Vec<[f64; 2]> {
    let inv = THIN / delta;
    let thin = |mut pts: Vec<(Key, [f64; 2])>| {
        pts.sort_unstable_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1[0].total_cmp(&b.1[0]))
                .then(a.1[1].total_cmp(&b.1[1]))
        });
        pts.dedup_by_key(|p| p.0);
        pts
    };
    let parts: Vec<Vec<(Key, [f64; 2])>> = r
        .par_chunks(CHUNK)
        .map(|rs| {
            let pts = rs
                .iter()
                .flat_map(|rv| {
                    y.iter().map(move |yv| {
                        let p = [rv[0] * yv[0], rv[0] * yv[1]];
                        (key(p, inv), p)
                    })
                })
                .collect();
            thin(pts)
        })
        .collect();
    thin(parts.into_iter().flatten().collect())
        .into_iter()
        .map(|p| p.1)
        .collect()
}

/// Cells of width `delta` hit by `q + z` for `q` in `ry`, `z` in `z`.
pub fn hit_cells(ry: &[[f64; 2]], z: &[[f64; 2]], delta: f64) -> Vec<Key> {
    let inv = 1.0 / delta;
    let parts: Vec<Vec<Key>> = ry
        .par_chunks(CHUNK)
        .map(|qs| {
            sort_dedup(
                qs.iter()
                    .flat_map(|q| z.iter().map(move |zv| key([q[0] + zv[0], q[1] + zv[1]], inv)))
                    .collect(),
            )
        })
        .collect();
    sort_dedup(parts.into_iter().flatten().collect())
}

/// Coarsen cells of width `delta` to cells of width `factor * delta`.
pub fn coarsen(cells: &[Key], factor: i64) -> Vec<Key> {
    sort_dedup(
        cells
            .iter()
            .map(|&(a, b)| (a.div_euclid(factor), b.div_euclid(factor)))
            .collect(),
    )
}

/// Outer-measure proxy for `R Y + Z` at resolution `delta`: the number of
/// `delta`-cells hit by the representative points, times `delta^d`.
pub fn sumset_cover_measure(spec: &SumsetSpec) -> Result<f64> {
    spec.validate()?;
    spec.check_resolution(spec.delta)?;
    let cells = sumset_cells(spec, spec.delta);
    Ok(cells.len() as f64 * spec.delta.powi(spec.d as i32))
}

fn sumset_cells(spec: &SumsetSpec, delta: f64) -> Vec<Key> {
    let ry = product_points(&spec.r.net(delta), &spec.y.net(delta), delta);
    hit_cells(&ry, &spec.z.net(delta), delta)
}

/// Cover measures over a schedule of resolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSchedule {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    /// `|v_{k+1} / v_k - 1|` between consecutive resolutions.
    pub changes: Vec<f64>,
    /// Fitted slope of `ln value` against `ln delta`.
    pub loglog_slope: f64,
    pub floor: f64,
    pub stabilized: bool,
}

/// Largest relative change between consecutive resolutions still counted as
/// stable.
pub const STABLE_CHANGE: f64 = 0.1;

/// Cover measures for every `delta` in the schedule, all read off one cell
/// set at the finest resolution so that the values are nonincreasing as the
/// resolution refines. Each `delta` must be an integer multiple of the
/// finest one. `stabilized` holds when every change is below
/// [`STABLE_CHANGE`] and every value exceeds `floor`.
pub fn cover_schedule(sets: &SumsetSpec, deltas: &[f64], floor: f64) -> Result<CoverSchedule> {
    if deltas.len() < 2 {
        return Err(Error::TooFewSamples {
            got: deltas.len(),
            need: 2,
        });
    }
    let finest = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let mut spec = sets.clone();
    spec.delta = finest;
    spec.validate()?;
    let coarsest = deltas.iter().copied().fold(0.0, f64::max);
    spec.check_resolution(coarsest)?;
    let factors = deltas
        .iter()
        .map(|&dl| {
            let f = (dl / finest).round();
            if (dl / finest - f).abs() > 1e-9 * f {
                Err(Error::InvalidArgument(format!(
                    "resolution {dl} is not a multiple of {finest}"
                )))
            } else {
                Ok(f as i64)
            }
        })
        .collect::<Result<Vec<i64>>>()?;
    let cells = sumset_cells(&spec, finest);
    let values: Vec<f64> = deltas
        .iter()
        .zip(&factors)
        .map(|(&dl, &f)| {
            let n = if f == 1 { cells.len() } else { coarsen(&cells, f).len() };
            n as f64 * dl.powi(spec.d as i32)
        })
        .collect();
    let changes: Vec<f64> = values.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).collect();
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let stabilized = changes.iter().all(|&c| c < STABLE_CHANGE) && values.iter().all(|&v| v > floor);
    Ok(CoverSchedule {
        deltas: deltas.to_vec(),
        loglog_slope: ols_slope(&xs, &ys),
        values,
        changes,
        floor,
        stabilized,
    })
}

/// Box-counting dimension of a point cloud: slope of `ln #cells` against
/// `-ln delta`, with the coarser counts coarsened from the finest.
pub fn box_dim_points(points: &[[f64; 2]], deltas: &[f64]) -> Result<f64> {
    if deltas.len() < 2 || points.is_empty() {
        return Err(Error::TooFewSamples {
            got: deltas.len().min(points.len()),
            need: 2,
        });
    }
    let finest = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let cells = hit_cells(points, &[[0.0, 0.0]], finest);
    let xs: Vec<f64> = deltas.iter().map(|d| -d.ln()).collect();
    let ys: Vec<f64> = deltas
        .iter()
        .map(|&dl| {
            let f = (dl / finest).round() as i64;
            (coarsen(&cells, f.max(1)).len() as f64).ln()
        })
        .collect();
    Ok(ols_slope(&xs, &ys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{AtomMeasure, GridMeasure};
    use proptest::prelude::*;

    fn atoms(pts: &[f64]) -> Shape {
        Shape::Atoms {
            measure: AtomMeasure::uniform(pts, 1.0).unwrap(),
        }
    }

    fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(|k| 2f64.powi(-k)).collect()
    }

    #[test]
    fn interval_sum() {
        for k in 5..10 {
            let delta = 2f64.powi(-k);
            let spec = SumsetSpec::new(
                Shape::Interval { lo: 1.0, hi: 2.0 },
                atoms(&[1.0]),
                Shape::Interval { lo: 0.0, hi: 1.0 },
                delta,
                1,
            );
            let m = sumset_cover_measure(&spec).unwrap();
            assert!((m - 2.0).abs() <= 2.0 * delta, "{delta}: {m}");
        }
    }

    #[test]
    fn finite_set() {
        let delta = 1.0 / 64.0;
        let spec = SumsetSpec::new(atoms(&[0.1, 0.5, 0.9]), atoms(&[1.0]), atoms(&[0.0]), delta, 1);
        assert_eq!(sumset_cover_measure(&spec).unwrap(), 3.0 * delta);
    }

    #[test]
    fn coarse_resolution_rejected() {
        let spec = SumsetSpec::new(
            Shape::Interval { lo: 1.0, hi: 1.25 },
            atoms(&[1.0]),
            atoms(&[0.0]),
            0.5,
            1,
        );
        assert_eq!(
            sumset_cover_measure(&spec).unwrap_err(),
            Error::ResolutionTooCoarse {
                delta: 0.5,
                feature: 0.25
            }
        );
    }

    #[test]
    fn schedule_values_match_direct_calls_on_intervals() {
        let sets = SumsetSpec::new(
            Shape::Interval { lo: 1.0, hi: 2.0 },
            Shape::Interval { lo: 0.5, hi: 1.0 },
            Shape::Interval { lo: 0.0, hi: 0.25 },
            0.0,
            1,
        );
        let deltas = dyadic(4, 9);
        let sched = cover_schedule(&sets, &deltas, 0.5).unwrap();
        assert!(sched.stabilized);
        for (&dl, &v) in deltas.iter().zip(&sched.values) {
            let mut s = sets.clone();
            s.delta = dl;
            let direct = sumset_cover_measure(&s).unwrap();
            // [0.5, 2.25] has length 1.75
            assert!((direct - 1.75).abs() <= 2.0 * dl && (v - 1.75).abs() <= 2.0 * dl);
        }
    }

    #[test]
    fn independent_calls_nonincreasing() {
        let sets = SumsetSpec::new(
            Shape::Grid {
                grid: GridMeasure::self_similar(4, &[0, 3], 4).unwrap(),
            },
            atoms(&[1.0]),
            Shape::Grid {
                grid: GridMeasure::self_similar(4, &[1, 2], 4).unwrap(),
            },
            0.0,
            1,
        );
        let mut last = f64::INFINITY;
        for dl in dyadic(2, 10) {
            let mut s = sets.clone();
            s.delta = dl;
            let v = sumset_cover_measure(&s).unwrap();
            assert!(v <= last * (1.0 + 1e-12), "{dl}: {v} > {last}");
            last = v;
        }
    }

    #[test]
    fn planar_square() {
        let delta = 1.0 / 128.0;
        let sets = SumsetSpec::new(
            atoms(&[1.0]),
            Shape::Segment {
                from: [0.0, 0.0],
                to: [1.0, 0.0],
            },
            Shape::Segment {
                from: [0.0, 0.0],
                to: [0.0, 1.0],
            },
            delta,
            2,
        );
        let m = sumset_cover_measure(&sets).unwrap();
        assert!((m - 1.0).abs() <= 4.0 * delta, "{m}");
        let sched = cover_schedule(&sets, &dyadic(5, 9), 0.5).unwrap();
        assert!(sched.loglog_slope.abs() < 0.05);
    }

    #[test]
    fn box_dimension_of_cantor_net() {
        let z = Shape::Grid {
            grid: GridMeasure::self_similar(4, &[0, 3], 6).unwrap(),
        };
        let d = box_dim_points(&z.net(1.0 / 4096.0), &dyadic(2, 12)).unwrap();
        assert!((d - 0.5).abs() < 0.05, "{d}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn dirac_translate_is_product_set(pts in prop::collection::vec(0.0f64..1.0, 2..6), k in 3i32..8) {
            let delta = 2f64.powi(-k);
            let r = atoms(&[1.0, 1.5]);
            let y = Shape::Interval { lo: 0.0, hi: 0.5 };
            let with_zero = SumsetSpec::new(r.clone(), y.clone(), atoms(&[0.0]), delta, 1);
            // product set alone: cells of the thinned cloud r y
            let ry = product_points(&r.net(delta), &y.net(delta), delta);
            let alone = hit_cells(&ry, &[[0.0, 0.0]], delta).len() as f64 * delta;
            prop_assert_eq!(sumset_cover_measure(&with_zero).unwrap(), alone);
            // translating by a finite set never shrinks the cover
            let z = atoms(&pts);
            let spec = SumsetSpec::new(r, y, z, delta, 1);
            if let Ok(v) = sumset_cover_measure(&spec) {
                prop_assert!(v >= alone);
            }
        }
    }
}
