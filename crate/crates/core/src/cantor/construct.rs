use num_rational::BigRational;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::terms::{threshold_for_count, LevelView};
use super::ConstructionParams;
use crate::error::{Error, Result};
use crate::fourier::{phi_envelope, EnvelopeG};
use crate::measure::{AtomMeasure, GridMeasure};
use crate::rng::{derive_key, stream};

const FROSTMAN_TAG: u64 = 0x46_52_4f_53;

/// `count` independent uniform `t`-subsets of `[n]`, sorted ascending. Set `i`
/// is drawn from stream `i` of `key`.
pub fn random_digit_sets(t: u64, n: u64, count: usize, key: u64) -> Result<Vec<Vec<u64>>> {
    if t > n || t == 0 {
        return Err(Error::InvalidKeepCount { t, n });
    }
    Ok((0..count)
        .map(|i| {
            let mut rng = stream(key, i as u64);
            let mut set: Vec<u64> = sample(&mut rng, n as usize, t as usize)
                .into_iter()
                .map(|b| b as u64)
                .collect();
            set.sort_unstable();
            set
        })
        .collect())
}

/// Offsets of `A_{j+1}` against `N_{j+1}`.
pub fn child_offsets(offsets: &[u64], digit_sets: &[Vec<u64>], branch: u64) -> Vec<u64> {
    offsets
        .iter()
        .zip(digit_sets)
        .flat_map(|(&m, set)| set.iter().map(move |&b| m * branch + b))
        .collect()
}

/// Worst observed deviation-to-threshold ratios for one level. A level is
/// accepted when both are at most 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub level: usize,
    #[serde(rename = "max_slack_X")]
    pub max_slack_x: f64,
    #[serde(rename = "max_slack_Y")]
    pub max_slack_y: Option<f64>,
    pub attempts: u32,
}

impl Certificate {
    pub fn accepted(&self) -> bool {
        self.max_slack_x <= 1.0 && self.max_slack_y.map_or(true, |s| s <= 1.0)
    }
}

/// A failed level check: the worst frequency and its slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rejection {
    pub level: usize,
    pub xi: f64,
    pub slack: f64,
}

/// Frequency-dependent data for the product-measure bound: `g(|xi|)`,
/// `g(|xi|/2)` on the check grid and the constant `K_phi`.
#[derive(Debug, Clone)]
pub struct ProductBound {
    nu: AtomMeasure<f64>,
    g: Vec<f64>,
    g_half: Vec<f64>,
    k_phi: f64,
}

impl ProductBound {
    pub fn new(nu: &AtomMeasure<f64>, params: &ConstructionParams) -> Result<Self> {
        let env = EnvelopeG::new(nu.clone(), params.g_t_max, params.g_per_decade)?;
        let grid = params.check_grid();
        let halves: Vec<f64> = grid.iter().map(|x| x / 2.0).collect();
        let mut scan = Vec::with_capacity(grid.len() + 1);
        scan.push(0.0);
        scan.extend_from_slice(&grid);
        Ok(Self {
            nu: nu.clone(),
            g: env.eval_grid(&grid)?,
            g_half: env.eval_grid(&halves)?,
            k_phi: phi_envelope(&env, &scan)?,
        })
    }

    pub fn nu(&self) -> &AtomMeasure<f64> {
        &self.nu
    }

    pub fn k_phi(&self) -> f64 {
        self.k_phi
    }

    /// `min{g(|xi|), (1/pi)(N_{j+1}/|xi|) g(|xi|/2) K_phi}` at grid index `k - 1`.
    fn term_bound(&self, idx: usize, xi: f64, next_scale: f64) -> f64 {
        let decay = next_scale / (std::f64::consts::PI * xi.abs()) * self.g_half[idx] * self.k_phi;
        self.g[idx].min(decay)
    }
}

/// Check level `j` against the Hoeffding bounds on the grid `d0 k`,
/// `1 <= k <= k_max`.
pub fn verify_level(
    j: usize,
    offsets: &[u64],
    digit_sets: &[Vec<u64>],
    bound: Option<&ProductBound>,
    params: &ConstructionParams,
) -> Result<std::result::Result<Certificate, Rejection>> {
    let view = LevelView::new(j, offsets, digit_sets, params)?;
    let count = offsets.len() as u64;
    let next = view.next_scale();
    let slacks: Vec<(f64, f64)> = (1..=params.k_max)
        .into_par_iter()
        .map(|k| {
            let xi = params.d0 * k as f64;
            let u = 2.0 * threshold_for_count(count, xi, params.zeta0);
            let sx = view.x_mean(xi).norm() / (u * 1f64.min(next / xi));
            let sy = bound.map_or(0.0, |b| {
                view.y_mean(xi, &b.nu).norm() / (u * b.term_bound(k as usize - 1, xi, next))
            });
            (sx, sy)
        })
        .collect();
    let mut worst = (0usize, 0.0f64);
    let (mut max_x, mut max_y) = (0.0f64, 0.0f64);
    for (i, &(sx, sy)) in slacks.iter().enumerate() {
        max_x = max_x.max(sx);
        max_y = max_y.max(sy);
        if sx.max(sy) > worst.1 {
            worst = (i, sx.max(sy));
        }
    }
    let cert = Certificate {
        level: j,
        max_slack_x: max_x,
        max_slack_y: bound.map(|_| max_y),
        attempts: 1,
    };
    if cert.accepted() {
        Ok(Ok(cert))
    } else {
        Ok(Err(Rejection {
            level: j,
            xi: params.d0 * (worst.0 + 1) as f64,
            slack: worst.1,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelRecord {
    pub n: u64,
    pub t: u64,
    pub digit_sets: Vec<Vec<u64>>,
}

/// A finished construction: parameters, the chosen digit sets for every
/// level, and one certificate per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCantor")]
pub struct CantorMeasure {
    params: ConstructionParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    nu: Option<AtomMeasure<f64>>,
    levels: Vec<LevelRecord>,
    certificates: Vec<Certificate>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCantor {
    params: ConstructionParams,
    #[serde(default)]
    nu: Option<AtomMeasure<f64>>,
    levels: Vec<LevelRecord>,
    certificates: Vec<Certificate>,
}

impl TryFrom<RawCantor> for CantorMeasure {
    type Error = Error;

    fn try_from(r: RawCantor) -> Result<Self> {
        CantorMeasure::from_parts(r.params, r.nu, r.levels, r.certificates)
    }
}

impl CantorMeasure {
    /// Assemble and check structural invariants (sizes, digit ranges).
    /// Certificates are not re-verified here; see [`verify_measure`].
    pub fn from_parts(
        params: ConstructionParams,
        nu: Option<AtomMeasure<f64>>,
        levels: Vec<LevelRecord>,
        certificates: Vec<Certificate>,
    ) -> Result<Self> {
        params.validate()?;
        if levels.len() != params.depth || certificates.len() != params.depth {
            return Err(Error::InvalidParams(format!(
                "depth {} but {} levels and {} certificates",
                params.depth,
                levels.len(),
                certificates.len()
            )));
        }
        let mut count = 1usize;
        for (j, lv) in levels.iter().enumerate() {
            if lv.n != params.branch[j] || lv.t != params.keep[j] {
                return Err(Error::InvalidParams(format!("level {j} counts disagree with params")));
            }
            if lv.digit_sets.len() != count {
                return Err(Error::InvalidParams(format!(
                    "level {j} has {} digit sets, expected {count}",
                    lv.digit_sets.len()
                )));
            }
            for set in &lv.digit_sets {
                let sorted = set.windows(2).all(|w| w[0] < w[1]);
                if set.len() as u64 != lv.t || !sorted || set.iter().any(|&b| b >= lv.n) {
                    return Err(Error::InvalidParams(format!(
                        "level {j} digit set {set:?} is not a sorted {}-subset of [{}]",
                        lv.t, lv.n
                    )));
                }
            }
            if certificates[j].level != j {
                return Err(Error::InvalidParams(format!("certificate {j} is out of order")));
            }
            count *= lv.t as usize;
        }
        Ok(Self {
            params,
            nu,
            levels,
            certificates,
        })
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    pub fn nu(&self) -> Option<&AtomMeasure<f64>> {
        self.nu.as_ref()
    }

    pub fn levels(&self) -> &[LevelRecord] {
        &self.levels
    }

    pub fn certificates(&self) -> &[Certificate] {
        &self.certificates
    }

    pub fn depth(&self) -> usize {
        self.params.depth
    }

    /// Offsets of `A_j` against `N_j`.
    pub fn offsets(&self, j: usize) -> Result<Vec<u64>> {
        if j > self.depth() {
            return Err(Error::DepthExceeded {
                requested: j,
                depth: self.depth(),
            });
        }
        let mut offs = vec![0u64];
        for lv in &self.levels[..j] {
            offs = child_offsets(&offs, &lv.digit_sets, lv.n);
        }
        Ok(offs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("construction serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParams(e.to_string()))
    }
}

/// Build levels `1..=depth`, drawing digit sets and retrying each level until
/// it passes [`verify_level`].
pub fn construct(params: &ConstructionParams, nu: Option<&AtomMeasure<f64>>) -> Result<CantorMeasure> {
    build(params, nu, |j, attempt, count| {
        let key = derive_key(params.seed, &[j as u64, attempt as u64]);
        random_digit_sets(params.keep[j], params.branch[j], count, key)
    })
}

fn build<F>(params: &ConstructionParams, nu: Option<&AtomMeasure<f64>>, draw: F) -> Result<CantorMeasure>
where
    F: Fn(usize, u32, usize) -> Result<Vec<Vec<u64>>>,
{
    params.validate()?;
    let bound = nu.map(|nu| ProductBound::new(nu, params)).transpose()?;
    let mut offsets = vec![0u64];
    let mut levels = Vec::with_capacity(params.depth);
    let mut certificates = Vec::with_capacity(params.depth);
    for j in 0..params.depth {
        let (n, t) = (params.branch[j], params.keep[j]);
        let mut accepted = None;
        for attempt in 0..params.retry_cap {
            let sets = draw(j, attempt, offsets.len())?;
            if let Ok(mut cert) = verify_level(j, &offsets, &sets, bound.as_ref(), params)? {
                cert.attempts = attempt + 1;
                accepted = Some((sets, cert));
                break;
            }
        }
        let Some((sets, cert)) = accepted else {
            return Err(Error::RetryExhausted {
                level: j,
                attempts: params.retry_cap,
            });
        };
        offsets = child_offsets(&offsets, &sets, n);
        levels.push(LevelRecord {
            n,
            t,
            digit_sets: sets,
        });
        certificates.push(cert);
    }
    CantorMeasure::from_parts(params.clone(), nu.cloned(), levels, certificates)
}

/// `mu_j` as a step measure.
pub fn level_measure(cm: &CantorMeasure, j: usize) -> Result<GridMeasure> {
    let offsets = cm.offsets(j)?;
    GridMeasure::new(j, cm.params().scale(j), offsets)
}

/// Result of re-running every level check from the stored digit sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub levels: Vec<LevelCheck>,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCheck {
    pub level: usize,
    #[serde(rename = "max_slack_X")]
    pub max_slack_x: f64,
    #[serde(rename = "max_slack_Y")]
    pub max_slack_y: Option<f64>,
    pub accepted: bool,
    pub matches_stored: bool,
}

/// Recompute every certificate. A level counts as a violation when its bound
/// fails or the recomputed slacks differ from the stored ones.
pub fn verify_measure(cm: &CantorMeasure) -> Result<VerifyReport> {
    let params = cm.params();
    let bound = cm.nu().map(|nu| ProductBound::new(nu, params)).transpose()?;
    let mut offsets = vec![0u64];
    let mut levels = Vec::with_capacity(cm.depth());
    for (j, lv) in cm.levels().iter().enumerate() {
        let check = match verify_level(j, &offsets, &lv.digit_sets, bound.as_ref(), params)? {
            Ok(c) => (c.max_slack_x, c.max_slack_y, true),
            Err(r) => (r.slack, None, false),
        };
        let stored = &cm.certificates()[j];
        let matches_stored = check.2
            && check.0.to_bits() == stored.max_slack_x.to_bits()
            && check.1.map(f64::to_bits) == stored.max_slack_y.map(f64::to_bits);
        levels.push(LevelCheck {
            level: j,
            max_slack_x: check.0,
            max_slack_y: check.1,
            accepted: check.2,
            matches_stored,
        });
        offsets = child_offsets(&offsets, &lv.digit_sets, lv.n);
    }
    let violations = levels
        .iter()
        .filter(|l| !(l.accepted && l.matches_stored))
        .count();
    Ok(VerifyReport { levels, violations })
}

/// Largest sampled value of `mu_J(I) / |I|^alpha`.
///
/// Lengths are log-uniform between `1/N_J` and 1. Half the centers are
/// uniform on `[1, 2]`; the other half are uniform points of the support.
pub fn frostman_ratio(cm: &CantorMeasure, num_samples: usize, seed: u64) -> Result<f64> {
    let depth = cm.depth();
    let mu = level_measure(cm, depth)?;
    let alpha = cm.params().alpha;
    let ln_scale = (mu.scale_den() as f64).ln();
    let mut rng = stream(derive_key(seed, &[FROSTMAN_TAG]), 0);
    let mut best = 0.0f64;
    for i in 0..num_samples {
        let len = (-ln_scale * rng.gen::<f64>()).exp();
        let center = if i % 2 == 0 {
            1.0 + rng.gen::<f64>()
        } else {
            let m = mu.offsets()[rng.gen_range(0..mu.offsets().len())];
            mu.endpoint(m) + rng.gen::<f64>() * mu.cell_width()
        };
        let mass = mu.measure_of_interval(center - len / 2.0, center + len / 2.0)?;
        best = best.max(mass / len.powf(alpha));
    }
    Ok(best)
}

/// `mu_J(I) / |I|^alpha` for the level-`j` ancestor cell with offset `m`,
/// computed in exact arithmetic before the final division.
pub fn ancestor_ratio(cm: &CantorMeasure, j: usize, m: u64) -> Result<(BigRational, f64)> {
    let mu = level_measure(cm, cm.depth())?;
    let mass = mu.ancestor_mass(m, cm.params().scale(j))?;
    let len = 1.0 / cm.params().scale(j) as f64;
    let ratio = num_traits::ToPrimitive::to_f64(&mass).unwrap_or(f64::NAN) / len.powf(cm.params().alpha);
    Ok((mass, ratio))
}
