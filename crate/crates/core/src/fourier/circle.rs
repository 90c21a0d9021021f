use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{fourier_atoms, AtomMeasure};

/// `exp(-pi i / 4)`, the phase of the leading oscillation of the circle transform.
pub const CIRCLE_PHASE: Complex64 = Complex64 {
    re: std::f64::consts::FRAC_1_SQRT_2,
    im: -std::f64::consts::FRAC_1_SQRT_2,
};

const SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind of order zero.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        let q = -0.25 * x * x;
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut k = 1.0;
        while term.abs() > 1e-18 * sum.abs().max(1e-3) || k < 4.0 {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        let (p, q) = hankel_pq(x);
        let chi = x - FRAC_PI_4;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

// asymptotic series for the amplitude factors, cut at the smallest term
fn hankel_pq(x: f64) -> (f64, f64) {
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        let odd = (2 * k - 1) as f64;
        let next = term * (-(odd * odd)) / (8.0 * k as f64 * x);
        if next.abs() >= last || next.abs() < 1e-18 {
            break;
        }
        last = next.abs();
        term = next;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
    }
    (p, q)
}

/// Transform of arclength measure on the unit circle at frequency modulus
/// `rho`: `2 pi J0(2 pi rho)`.
pub fn circle_sigma_hat(rho: f64) -> f64 {
    TAU * bessel_j0(TAU * rho)
}

/// Transform at `xi` of the pushforward of `(r^(1/2) mu) x sigma` under
/// `(r, w) -> r w`, for a radial measure `mu` on `(0, inf)`.
pub fn weighted_circle_product_hat(mu: &AtomMeasure<f64>, xi: [f64; 2]) -> Result<Complex64> {
    if let Some(a) = mu.atoms().iter().find(|a| !(a.position > 0.0)) {
        return Err(Error::NonpositiveRadius { radius: a.position });
    }
    let rho = xi[0].hypot(xi[1]);
    let v: f64 = mu
        .atoms()
        .iter()
        .map(|a| a.weight * a.position.sqrt() * circle_sigma_hat(a.position * rho))
        .sum();
    Ok(Complex64::new(v, 0.0))
}

/// Leading oscillatory term `rho^(-1/2) (c mu^(-rho) + conj(c) mu^(rho))` of
/// [`weighted_circle_product_hat`] at `|xi| = rho > 0`.
pub fn circle_leading_term(mu: &AtomMeasure<f64>, rho: f64) -> Complex64 {
    let plus = fourier_atoms(mu, rho);
    let minus = fourier_atoms(mu, -rho);
    (CIRCLE_PHASE * minus + CIRCLE_PHASE.conj() * plus) / rho.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    // 25-digit reference values
    const J0_TABLE: [(f64, f64); 11] = [
        (0.5, 0.938_469_807_240_812_904_2),
        (3.0, -0.260_051_954_901_933_437_6),
        (10.0, -0.245_935_764_451_348_335_2),
        (11.9, 0.025_049_441_699_589_563_73),
        (12.1, 0.069_666_773_606_807_388_50),
        (12.5, 0.146_884_054_700_421_102_3),
        (20.0, 0.167_024_664_340_583_154_7),
        (31.4159, 0.100_248_355_032_808_835_1),
        (100.0, 0.019_985_850_304_223_122_42),
        (1000.0, 0.024_786_686_152_420_174_56),
        (6433.98, 0.007_021_233_424_957_793_824),
    ];

    fn scale(x: f64) -> f64 {
        (2.0 / (PI * x)).sqrt().min(1.0)
    }

    #[test]
    fn j0_reference_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        for &(x, want) in &J0_TABLE {
            let got = bessel_j0(x);
            let err = (got - want).abs() / want.abs().max(scale(x));
            assert!(err < 1e-9, "J0({x}) = {got}, want {want}, err {err}");
        }
    }

    #[test]
    fn sigma_hat_values() {
        assert_eq!(circle_sigma_hat(0.0), TAU);
        let want = 0.629_895_576_131_253_878_877;
        assert!((circle_sigma_hat(5.0) - want).abs() < 1e-9 * TAU);
    }

    #[test]
    fn bessel_equation_residual() {
        let h = 1e-4;
        let mut worst = 0.0f64;
        for i in 0..400 {
            let x = 0.05 + i as f64 * 0.1;
            let f = circle_sigma_hat;
            let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
            let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let res = x * d2 + d1 + TAU * TAU * x * f(x);
            let size = TAU * TAU * x * TAU * scale(TAU * x);
            worst = worst.max(res.abs() / size);
        }
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn asymptotic_residual_constant() {
        let mut c = 0.0f64;
        for i in 0..32 {
            let rho = 8.0 * 128f64.powf(i as f64 / 31.0);
            let lead = 2.0 / rho.sqrt() * (TAU * (rho - 0.125)).cos();
            c = c.max((circle_sigma_hat(rho) - lead).abs() * rho.powf(1.5));
        }
        // the next term of the expansion has constant 1/(8 pi)
        assert!(c < 5.0 && (c - 1.0 / (8.0 * PI)).abs() < 0.01, "{c}");
    }

    #[test]
    fn weighted_product_reductions() {
        let d1 = AtomMeasure::dirac(1.0, 1.0).unwrap();
        for &r in &[0.0, 0.3, 5.0, 77.7] {
            let v = weighted_circle_product_hat(&d1, [r * 0.6, r * 0.8]).unwrap();
            assert!((v.re - circle_sigma_hat(r)).abs() < 1e-12);
        }
        let mu = AtomMeasure::from_pairs([(1.0, 0.5), (4.0, 0.25)]).unwrap();
        let v = weighted_circle_product_hat(&mu, [0.0, 0.0]).unwrap();
        assert!((v.re - TAU * (0.5 + 0.25 * 2.0)).abs() < 1e-12);
        let bad = AtomMeasure::from_pairs([(-1.0, 1.0)]).unwrap();
        assert_eq!(
            weighted_circle_product_hat(&bad, [1.0, 0.0]),
            Err(Error::NonpositiveRadius { radius: -1.0 })
        );
    }

    #[test]
    fn two_radii_leading_term() {
        let mu = AtomMeasure::from_pairs([(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let rho = 50.0;
        let v = weighted_circle_product_hat(&mu, [rho, 0.0]).unwrap();
        let lead = circle_leading_term(&mu, rho);
        // residual constant from the next expansion term: sum_r w / r / (8 pi)
        let c = (0.5 + 0.5 / 2.0) / (8.0 * PI);
        assert!(lead.im.abs() < 1e-12);
        assert!((v - lead).norm() <= 1.1 * c * rho.powf(-1.5));
    }
}
