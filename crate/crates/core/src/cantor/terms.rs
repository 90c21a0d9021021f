use num_complex::Complex64;

use super::ConstructionParams;
use crate::error::{Error, Result};
use crate::measure::{cis_neg, unit_box_hat, AtomMeasure};

/// Children of one level: offsets of `A_j` against `N_j` with a digit set
/// per offset.
#[derive(Debug, Clone, Copy)]
pub struct LevelView<'a> {
    pub scale: u64,
    pub branch: u64,
    pub keep: u64,
    pub offsets: &'a [u64],
    pub digit_sets: &'a [Vec<u64>],
}

impl<'a> LevelView<'a> {
    pub fn new(
        j: usize,
        offsets: &'a [u64],
        digit_sets: &'a [Vec<u64>],
        params: &ConstructionParams,
    ) -> Result<Self> {
        let view = Self {
            scale: params.scale(j),
            branch: params.branch_below(j),
            keep: params.keep_below(j),
            offsets,
            digit_sets,
        };
        if offsets.len() != digit_sets.len() {
            return Err(Error::InvalidArgument(format!(
                "{} offsets but {} digit sets",
                offsets.len(),
                digit_sets.len()
            )));
        }
        for set in digit_sets {
            if set.len() as u64 != view.keep || set.iter().any(|&b| b >= view.branch) {
                return Err(Error::InvalidArgument(format!(
                    "digit set {set:?} is not a {}-subset of [{}]",
                    view.keep, view.branch
                )));
            }
        }
        Ok(view)
    }

    pub fn next_scale(&self) -> f64 {
        (self.scale * self.branch) as f64
    }

    /// `(1/T_j) sum_a e(-xi a) ((1/t) sum_{b in B_a} q_b - (1/n) sum_{b < n} q_b)`
    /// with `q_b = e(-xi b / N_{j+1})`; multiplying by the box factor
    /// `unit_box_hat(xi / N_{j+1})` gives `(1/T_j) sum_a X_a`.
    fn digit_sum(&self, xi: f64) -> Complex64 {
        let next = self.next_scale();
        let q: Vec<Complex64> = (0..self.branch).map(|b| cis_neg(xi * (b as f64 / next))).collect();
        let full = q.iter().sum::<Complex64>() / self.branch as f64;
        let inv_t = 1.0 / self.keep as f64;
        let n = self.scale as f64;
        let total: Complex64 = self
            .offsets
            .iter()
            .zip(self.digit_sets)
            .map(|(&m, set)| {
                let kept = set.iter().map(|&b| q[b as usize]).sum::<Complex64>() * inv_t;
                cis_neg(xi * (1.0 + m as f64 / n)) * (kept - full)
            })
            .sum();
        total / self.offsets.len() as f64
    }

    /// `(1/T_j) sum_a X_a(j, xi)`
    pub fn x_mean(&self, xi: f64) -> Complex64 {
        if xi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.digit_sum(xi) * unit_box_hat(xi / self.next_scale())
    }

    /// `(1/T_j) sum_a Y_a(j, xi)` for atomic `nu`.
    pub fn y_mean(&self, xi: f64, nu: &AtomMeasure<f64>) -> Complex64 {
        if xi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        nu.atoms()
            .iter()
            .map(|y| {
                let u = xi * y.position;
                self.digit_sum(u) * unit_box_hat(u / self.next_scale()) * y.weight
            })
            .sum()
    }
}

/// `I(a, b, j, xi) = int_0^1 e(-xi (a + b + x / N_{j+1})) dx`, where `b` is
/// already scaled to `[0, 1/N_j)`.
pub fn term_i(a: f64, b: f64, j: usize, xi: f64, params: &ConstructionParams) -> Complex64 {
    let next = params.scale(j + 1) as f64;
    cis_neg(xi * (a + b)) * unit_box_hat(xi / next)
}

/// `J(a, b, j, xi) = sum_y w_y I(a, b, j, y xi)` for atomic `nu`.
pub fn term_j(
    a: f64,
    b: f64,
    j: usize,
    xi: f64,
    nu: &AtomMeasure<f64>,
    params: &ConstructionParams,
) -> Complex64 {
    nu.atoms()
        .iter()
        .map(|y| term_i(a, b, j, xi * y.position, params) * y.weight)
        .sum()
}

/// `|(1/T_j) sum_a X_a(j, xi)|`
pub fn deviation_x(
    j: usize,
    offsets: &[u64],
    digit_sets: &[Vec<u64>],
    xi: f64,
    params: &ConstructionParams,
) -> Result<f64> {
    Ok(LevelView::new(j, offsets, digit_sets, params)?.x_mean(xi).norm())
}

/// `|(1/T_j) sum_a Y_a(j, xi)|`
pub fn deviation_y(
    j: usize,
    offsets: &[u64],
    digit_sets: &[Vec<u64>],
    xi: f64,
    nu: &AtomMeasure<f64>,
    params: &ConstructionParams,
) -> Result<f64> {
    Ok(LevelView::new(j, offsets, digit_sets, params)?
        .y_mean(xi, nu)
        .norm())
}

/// `u_{j, xi} = (ln(4 zeta0 (1 + xi^2)) / T_j)^(1/2)`.
///
/// For `T_j` independent mean-zero terms bounded by `c`, the complex Hoeffding
/// bound gives `P(|mean| >= c v) <= 4 exp(-T_j v^2 / 4)`, which equals
/// `1 / (zeta0 (1 + xi^2))` at `v = 2 u`.
pub fn hoeffding_threshold(j: usize, xi: f64, params: &ConstructionParams) -> f64 {
    threshold_for_count(params.count(j), xi, params.zeta0)
}

pub(crate) fn threshold_for_count(count: u64, xi: f64, zeta0: f64) -> f64 {
    ((4.0 * zeta0 * (1.0 + xi * xi)).ln() / count as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::GridMeasure;
    use crate::quad::simpson;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params() -> ConstructionParams {
        ConstructionParams::new(0.5, 4, 4, 7).unwrap()
    }

    // level 1 offsets {0, 2} against N = 4 with digit sets below each
    fn level1() -> (Vec<u64>, Vec<Vec<u64>>) {
        (vec![0, 2], vec![vec![1, 3], vec![0, 1]])
    }

    fn children(offsets: &[u64], sets: &[Vec<u64>], n: u64) -> Vec<u64> {
        offsets
            .iter()
            .zip(sets)
            .flat_map(|(&m, s)| s.iter().map(move |&b| m * n + b))
            .collect()
    }

    #[test]
    fn term_i_values() {
        let p = params();
        assert_eq!(term_i(1.3, 0.1, 2, 0.0, &p), Complex64::new(1.0, 0.0));
        // N_1 = 2, a = 1, b = 0, xi = 1
        let two = ConstructionParams::new(1.0, 2, 2, 0).unwrap();
        let v = term_i(1.0, 0.0, 0, 1.0, &two);
        let re = simpson(|x| (2.0 * PI * (1.0 + x / 2.0)).cos(), 0.0, 1.0, 500);
        let im = simpson(|x| -(2.0 * PI * (1.0 + x / 2.0)).sin(), 0.0, 1.0, 500);
        assert!((v - Complex64::new(re, im)).norm() < 1e-12);
        assert!((v - Complex64::new(0.0, -2.0 / PI)).norm() < 1e-15);
    }

    #[test]
    fn term_j_reductions() {
        let p = params();
        let nu = AtomMeasure::from_pairs([(1.0, 0.25), (1.5, 0.5)]).unwrap();
        assert!((term_j(1.2, 0.05, 1, 0.0, &nu, &p) - Complex64::new(0.75, 0.0)).norm() < 1e-15);
        let d1 = AtomMeasure::dirac(1.0, 1.0).unwrap();
        for &xi in &[0.3, -17.0, 912.5] {
            assert_eq!(term_j(1.25, 0.125, 1, xi, &d1, &p), term_i(1.25, 0.125, 1, xi, &p));
        }
    }

    #[test]
    fn deviations_vanish() {
        let p = params();
        let (offs, sets) = level1();
        assert_eq!(deviation_x(1, &offs, &sets, 0.0, &p).unwrap(), 0.0);
        let nu = AtomMeasure::from_pairs([(1.0, 0.5), (1.7, 0.5)]).unwrap();
        assert_eq!(deviation_y(1, &offs, &sets, 0.0, &nu, &p).unwrap(), 0.0);
        let full = ConstructionParams::new(1.0, 3, 3, 0).unwrap();
        let offs: Vec<u64> = (0..9).collect();
        let sets = vec![vec![0, 1, 2]; 9];
        for &xi in &[0.5, 3.0, 77.7, 1000.0] {
            assert!(deviation_x(2, &offs, &sets, xi, &full).unwrap() < 1e-15);
        }
    }

    #[test]
    fn unit_dirac_y_equals_x() {
        let p = params();
        let (offs, sets) = level1();
        let d1 = AtomMeasure::dirac(1.0, 1.0).unwrap();
        for &xi in &[0.7, 5.0, -40.25, 333.0] {
            let x = deviation_x(1, &offs, &sets, xi, &p).unwrap();
            let y = deviation_y(1, &offs, &sets, xi, &d1, &p).unwrap();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn threshold_formula() {
        let p = params();
        assert!((hoeffding_threshold(0, 0.0, &p) - (4.0 * p.zeta0).ln().sqrt()).abs() < 1e-15);
        for &xi in &[0.0, 1.0, 50.0, 4096.0] {
            let mut last = f64::INFINITY;
            for j in 0..=4 {
                let u = hoeffding_threshold(j, xi, &p);
                assert!(u <= last);
                last = u;
                let t = p.count(j) as f64;
                let v = 2.0 * u;
                let tail = 4.0 * (-0.25 * t * v * v).exp();
                let want = 1.0 / (p.zeta0 * (1.0 + xi * xi));
                assert!((tail - want).abs() < 1e-12);
                // at v = u the same bound is only 4 (4 zeta0 (1 + xi^2))^(-1/4)
                let weak = 4.0 * (-0.25 * t * u * u).exp();
                assert!((weak - 4.0 * (4.0 * want.recip()).powf(-0.25)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_malformed_sets() {
        let p = params();
        assert!(deviation_x(1, &[0, 2], &[vec![0, 4], vec![0, 1]], 1.0, &p).is_err());
        assert!(deviation_x(1, &[0, 2], &[vec![0]], 1.0, &p).is_err());
    }

    proptest! {
        #[test]
        fn term_i_bound(a in 1.0f64..2.0, b in 0.0f64..0.25, j in 0usize..4, xi in -5000.0f64..5000.0) {
            let p = params();
            let bound = 1f64.min(p.scale(j + 1) as f64 / xi.abs());
            prop_assert!(term_i(a, b, j, xi, &p).norm() <= bound * (1.0 + 1e-12));
        }

        #[test]
        fn x_terms_bounded(xi in -5000.0f64..5000.0, idx in 0usize..2) {
            let p = params();
            let (offs, sets) = level1();
            let view = LevelView::new(1, &offs[idx..=idx], &sets[idx..=idx], &p).unwrap();
            let bound = 2.0 * 1f64.min(p.scale(2) as f64 / xi.abs());
            prop_assert!(view.x_mean(xi).norm() <= bound * (1.0 + 1e-12));
        }

        #[test]
        fn x_matches_transform_difference(xi in -3000.0f64..3000.0) {
            let p = params();
            let (offs, sets) = level1();
            let before = GridMeasure::new(1, 4, offs.clone()).unwrap();
            let after = GridMeasure::new(2, 16, children(&offs, &sets, 4)).unwrap();
            let want = (after.fourier(xi) - before.fourier(xi)).norm();
            prop_assert!((deviation_x(1, &offs, &sets, xi, &p).unwrap() - want).abs() < 1e-10);
        }

        #[test]
        fn y_matches_product_difference(xi in -500.0f64..500.0, y in 1.0f64..2.0) {
            let p = params();
            let (offs, sets) = level1();
            let nu = AtomMeasure::from_pairs([(1.0, 0.5), (y, 0.5)]).unwrap();
            let before = GridMeasure::new(1, 4, offs.clone()).unwrap();
            let after = GridMeasure::new(2, 16, children(&offs, &sets, 4)).unwrap();
            let prod = |g: &GridMeasure| -> Complex64 {
                nu.atoms().iter().map(|a| g.fourier(a.position * xi) * a.weight).sum()
            };
            let want = (prod(&after) - prod(&before)).norm();
            prop_assert!((deviation_y(1, &offs, &sets, xi, &nu, &p).unwrap() - want).abs() < 1e-10);
        }

        #[test]
        fn term_j_bounded_by_envelope(a in 1.0f64..2.0, b in 0.0f64..0.25, xi in 0.0f64..50.0) {
            let p = params();
            let nu = AtomMeasure::from_pairs([(1.0, 0.5), (1.5, 0.25), (2.0, 0.25)]).unwrap();
            // dense scan of t in [1, 2.5]; the step error stays below the (1 + xi)^(-1/2) term
            let sup = (0..=20_000)
                .map(|i| crate::measure::fourier_atoms(&nu, xi * (1.0 + 1.5 * i as f64 / 20_000.0)).norm())
                .fold(0.0, f64::max);
            let g = (1.0 + xi).powf(-0.5) + sup;
            prop_assert!(term_j(a, b, 1, xi, &nu, &p).norm() <= g);
        }
    }
}
