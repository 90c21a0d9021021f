use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Terms summed explicitly when bounding the check-grid series.
pub const ZETA_PARTIAL_TERMS: u64 = 1_000_000;
pub const DEFAULT_RETRY_CAP: u32 = 64;
pub const DEFAULT_G_T_MAX: f64 = 1e3;
pub const DEFAULT_G_PER_DECADE: usize = 64;

/// Upper bound for `sum_{k in Z} 2 / (1 + d0^2 k^2)`: the terms with
/// `|k| <= terms` summed directly, plus `4 / (d0^2 terms)` for the rest.
pub fn grid_series_bound(d0: f64, terms: u64) -> f64 {
    let partial: f64 = (1..=terms)
        .rev()
        .map(|k| {
            let x = d0 * k as f64;
            4.0 / (1.0 + x * x)
        })
        .sum::<f64>()
        + 2.0;
    partial + 4.0 / (d0 * d0 * terms as f64)
}

/// Smallest certified constant: one plus the series bound.
pub fn default_zeta0(d0: f64) -> f64 {
    1.0 + grid_series_bound(d0, ZETA_PARTIAL_TERMS)
}

pub fn default_k_max(final_scale: u64) -> u64 {
    4096u64.max(final_scale.saturating_mul(4))
}

/// Branching and keep counts with `n_j = n_star` and
/// `t_j = clamp(round(N_j^alpha / T_{j-1}), 1, n_j)`.
pub fn default_sequences(alpha: f64, n_star: u64, depth: usize) -> Result<(Vec<u64>, Vec<u64>)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParams(format!("alpha {alpha} not in (0, 1]")));
    }
    if n_star < 2 {
        return Err(Error::InvalidParams(format!("n_star {n_star} < 2")));
    }
    let branch = vec![n_star; depth];
    let mut keep = Vec::with_capacity(depth);
    let mut big_t = 1.0f64;
    for j in 1..=depth {
        let big_n = (n_star as f64).powi(j as i32);
        let target = big_n.powf(alpha) / big_t;
        let t = (target.round() as u64).clamp(1, n_star);
        keep.push(t);
        big_t *= t as f64;
    }
    Ok((branch, keep))
}

/// `(min_j, max_j)` of `T_j / N_j^alpha` over `j = 0..=depth`.
pub fn ratio_bounds(alpha: f64, branch: &[u64], keep: &[u64]) -> (f64, f64) {
    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    let (mut big_n, mut big_t) = (1.0f64, 1.0f64);
    for (&n, &t) in branch.iter().zip(keep) {
        big_n *= n as f64;
        big_t *= t as f64;
        let r = big_t / big_n.powf(alpha);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

fn default_g_t_max() -> f64 {
    DEFAULT_G_T_MAX
}

fn default_g_per_decade() -> usize {
    DEFAULT_G_PER_DECADE
}

/// Everything that determines a construction. `branch[i]` and `keep[i]` are
/// the counts used to pass from level `i` to level `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionParams {
    pub alpha: f64,
    pub n_star: u64,
    pub branch: Vec<u64>,
    pub keep: Vec<u64>,
    pub depth: usize,
    pub zeta0: f64,
    pub d0: f64,
    pub k_max: u64,
    pub seed: u64,
    pub retry_cap: u32,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    #[serde(default = "default_g_t_max")]
    pub g_t_max: f64,
    #[serde(default = "default_g_per_decade")]
    pub g_per_decade: usize,
}

impl ConstructionParams {
    /// Parameters from the default sequences, `d0 = 1`, default `zeta0`,
    /// `k_max` and retry cap.
    pub fn new(alpha: f64, n_star: u64, depth: usize, seed: u64) -> Result<Self> {
        let (branch, keep) = default_sequences(alpha, n_star, depth)?;
        Self::from_sequences(alpha, n_star, branch, keep, 1.0, seed)
    }

    pub fn from_sequences(
        alpha: f64,
        n_star: u64,
        branch: Vec<u64>,
        keep: Vec<u64>,
        d0: f64,
        seed: u64,
    ) -> Result<Self> {
        let (ratio_lo, ratio_hi) = ratio_bounds(alpha, &branch, &keep);
        let final_scale = branch.iter().try_fold(1u64, |acc, &n| acc.checked_mul(n));
        let p = Self {
            alpha,
            n_star,
            depth: branch.len(),
            zeta0: default_zeta0(d0),
            d0,
            k_max: default_k_max(final_scale.unwrap_or(u64::MAX)),
            seed,
            retry_cap: DEFAULT_RETRY_CAP,
            ratio_lo,
            ratio_hi,
            g_t_max: DEFAULT_G_T_MAX,
            g_per_decade: DEFAULT_G_PER_DECADE,
            branch,
            keep,
        };
        p.validate()?;
        Ok(p)
    }

    /// Replace `d0` and recompute the default `zeta0` for it.
    pub fn with_d0(mut self, d0: f64) -> Result<Self> {
        self.d0 = d0;
        self.zeta0 = default_zeta0(d0);
        self.validate()?;
        Ok(self)
    }

    pub fn with_k_max(mut self, k_max: u64) -> Self {
        self.k_max = k_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha {} not in (0, 1]", self.alpha));
        }
        if self.n_star < 2 {
            return bad(format!("n_star {} < 2", self.n_star));
        }
        if self.branch.len() != self.depth || self.keep.len() != self.depth {
            return bad(format!(
                "depth {} but {} branch and {} keep entries",
                self.depth,
                self.branch.len(),
                self.keep.len()
            ));
        }
        for (&n, &t) in self.branch.iter().zip(&self.keep) {
            if n < 2 || n > self.n_star {
                return bad(format!("branch count {n} not in [2, {}]", self.n_star));
            }
            if t < 1 || t > n {
                return Err(Error::InvalidKeepCount { t, n });
            }
        }
        let mut scale = 1u64;
        for &n in &self.branch {
            scale = match scale.checked_mul(n) {
                Some(s) if s <= 1 << 52 => s,
                _ => return bad("final scale exceeds 2^52".into()),
            };
        }
        if !(self.d0 > 0.0 && self.d0.is_finite()) {
            return bad(format!("d0 {} must be positive", self.d0));
        }
        let series = grid_series_bound(self.d0, ZETA_PARTIAL_TERMS);
        if !(self.zeta0 > series) {
            return bad(format!(
                "zeta0 {} does not exceed the grid series bound {series}",
                self.zeta0
            ));
        }
        if self.k_max == 0 {
            return bad("k_max must be positive".into());
        }
        if self.retry_cap == 0 {
            return bad("retry_cap must be positive".into());
        }
        let (lo, hi) = ratio_bounds(self.alpha, &self.branch, &self.keep);
        let tol = 1e-12 * hi;
        if lo < self.ratio_lo - tol || hi > self.ratio_hi + tol {
            return bad(format!(
                "ratios T_j/N_j^alpha span [{lo}, {hi}], outside [{}, {}]",
                self.ratio_lo, self.ratio_hi
            ));
        }
        if !(self.g_t_max >= 1.0) || self.g_per_decade == 0 {
            return bad("envelope grid needs t_max >= 1 and points per decade > 0".into());
        }
        Ok(())
    }

    /// `N_j`
    pub fn scale(&self, j: usize) -> u64 {
        self.branch[..j].iter().product()
    }

    /// `T_j`
    pub fn count(&self, j: usize) -> u64 {
        self.keep[..j].iter().product()
    }

    /// Branch count `n_{j+1}` used below level `j`.
    pub fn branch_below(&self, j: usize) -> u64 {
        self.branch[j]
    }

    /// Keep count `t_{j+1}` used below level `j`.
    pub fn keep_below(&self, j: usize) -> u64 {
        self.keep[j]
    }

    /// Check frequencies `d0 k`, `k = 1..=k_max`.
    pub fn check_grid(&self) -> Vec<f64> {
        (1..=self.k_max).map(|k| self.d0 * k as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_refinement_when_alpha_is_one() {
        let (b, t) = default_sequences(1.0, 5, 6).unwrap();
        assert_eq!(b, t);
    }

    #[test]
    fn half_dimension_keeps_two_of_four() {
        let (b, t) = default_sequences(0.5, 4, 12).unwrap();
        assert!(b.iter().all(|&n| n == 4));
        assert!(t.iter().all(|&k| k == 2));
        // 2^j = (4^j)^(1/2) level by level
        let mut pow2 = 1u64;
        let mut pow4 = 1u64;
        for j in 0..12 {
            pow2 *= t[j];
            pow4 *= b[j];
            assert_eq!(pow2 * pow2, pow4);
        }
        assert_eq!(ratio_bounds(0.5, &b, &t), (1.0, 1.0));
    }

    #[test]
    fn middle_thirds_counts() {
        let alpha = 2f64.ln() / 3f64.ln();
        let (b, t) = default_sequences(alpha, 3, 10).unwrap();
        assert!(b.iter().all(|&n| n == 3));
        assert!(t.iter().all(|&k| k == 2));
        let (lo, hi) = ratio_bounds(alpha, &b, &t);
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratios_stay_within_branch_factor() {
        for &(alpha, n) in &[(0.3, 4u64), (0.6, 4), (0.77, 7), (0.1, 2)] {
            let (b, t) = default_sequences(alpha, n, 14).unwrap();
            let (lo, hi) = ratio_bounds(alpha, &b, &t);
            assert!(lo >= 1.0 / n as f64 && hi <= n as f64, "{alpha} {n}: {lo} {hi}");
        }
    }

    #[test]
    fn zeta0_for_unit_spacing() {
        // sum_k 2/(1+k^2) = 2 pi coth(pi)
        let exact = 2.0 * std::f64::consts::PI / std::f64::consts::PI.tanh();
        let bound = grid_series_bound(1.0, ZETA_PARTIAL_TERMS);
        assert!(bound > exact && bound - exact < 1e-5);
        let z = default_zeta0(1.0);
        assert!((z - 7.3066).abs() < 1e-3);
    }

    #[test]
    fn validation_rejects_small_zeta0() {
        let mut p = ConstructionParams::new(0.5, 4, 3, 1).unwrap();
        p.zeta0 = 2.0;
        assert!(matches!(p.validate(), Err(Error::InvalidParams(_))));
        let mut p = ConstructionParams::new(0.5, 4, 3, 1).unwrap();
        p.keep[1] = 5;
        assert_eq!(p.validate(), Err(Error::InvalidKeepCount { t: 5, n: 4 }));
    }

    #[test]
    fn scales_and_counts() {
        let p = ConstructionParams::new(0.5, 4, 9, 0).unwrap();
        assert_eq!(p.scale(9), 262_144);
        assert_eq!(p.count(9), 512);
        assert_eq!(p.k_max, 4 * 262_144);
        assert_eq!(p.scale(0), 1);
    }
}
