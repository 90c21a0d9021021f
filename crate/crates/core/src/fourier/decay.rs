use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 32;
const BETA_TOL: f64 = 1e-3;

/// `ln^(1/2)(4 zeta0 (1 + xi^2))`
pub fn log_factor(xi: f64, zeta0: f64) -> f64 {
    (4.0 * zeta0 * (1.0 + xi * xi)).ln().sqrt()
}

/// Power-law envelope `C (1 + |xi|)^(-beta/2)` fitted to transform moduli.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub window: (f64, f64),
    #[serde(rename = "fitted_C")]
    pub fitted_c: f64,
    pub fitted_beta: f64,
    pub n_samples: usize,
    #[serde(skip)]
    pub grid: Vec<f64>,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl DecayReport {
    pub fn envelope(&self, xi: f64) -> f64 {
        self.fitted_c * (1.0 + xi.abs()).powf(-self.fitted_beta / 2.0)
    }
}

/// Fit the largest `beta` in `[0, max_beta]` for which the running-maximum
/// envelope of the samples, multiplied by `(1 + |xi|)^(beta/2)`, peaks in the
/// lower half of the window (split at the geometric midpoint).
///
/// With `zeta0` set, each modulus is first divided by [`log_factor`].
pub fn decay_fit(
    samples: &[(f64, f64)],
    window: (f64, f64),
    max_beta: f64,
    zeta0: Option<f64>,
) -> Result<DecayReport> {
    let (lo, hi) = window;
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("window [{lo}, {hi}] is empty")));
    }
    let mut pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(xi, v)| (xi.abs(), v.abs()))
        .filter(|&(x, _)| x >= lo && x <= hi)
        .map(|(x, v)| match zeta0 {
            Some(z) => (x, v / log_factor(x, z)),
            None => (x, v),
        })
        .collect();
    if pts.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: pts.len(),
            need: MIN_SAMPLES,
        });
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut env: Vec<f64> = pts.iter().map(|p| p.1).collect();
    for i in (0..env.len().saturating_sub(1)).rev() {
        env[i] = env[i].max(env[i + 1]);
    }
    let split = ((1.0 + lo) * (1.0 + hi)).sqrt() - 1.0;
    let cut = pts.partition_point(|p| p.0 <= split).clamp(1, pts.len() - 1);

    let feasible = |beta: f64| {
        let weighted = |i: usize| env[i] * (1.0 + pts[i].0).powf(beta / 2.0);
        let lower = (0..cut).map(weighted).fold(0.0, f64::max);
        let upper = (cut..pts.len()).map(weighted).fold(0.0, f64::max);
        upper <= lower * (1.0 + 1e-12)
    };

    let beta = if feasible(max_beta) {
        max_beta
    } else {
        let (mut a, mut b) = (0.0, max_beta);
        while b - a > BETA_TOL / 4.0 {
            let m = 0.5 * (a + b);
            if feasible(m) {
                a = m;
            } else {
                b = m;
            }
        }
        a
    };
    let fitted_c = pts
        .iter()
        .map(|&(x, v)| v * (1.0 + x).powf(beta / 2.0))
        .fold(0.0, f64::max);
    Ok(DecayReport {
        window,
        fitted_c,
        fitted_beta: beta,
        n_samples: pts.len(),
        grid: pts.iter().map(|p| p.0).collect(),
        values: pts.iter().map(|p| p.1).collect(),
    })
}
