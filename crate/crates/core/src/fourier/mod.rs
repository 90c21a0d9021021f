//! Transforms of grid and product measures, the decay envelope `g`, decay
//! exponent fitting and the unit-circle transform.

mod circle;
mod decay;
mod envelope;

pub use circle::{
    bessel_j0, circle_leading_term, circle_sigma_hat, weighted_circle_product_hat, CIRCLE_PHASE,
};
pub use decay::{decay_fit, log_factor, DecayReport, MIN_SAMPLES};
pub use envelope::{phi_envelope, EnvelopeG};

use num_complex::Complex64;

use crate::measure::{AtomMeasure, GridMeasure};

/// Transform of the step density of `m`.
pub fn fourier_grid(m: &GridMeasure, xi: f64) -> Complex64 {
    m.fourier(xi)
}

/// Transform of the pushforward of `m x nu` under multiplication:
/// `sum_y w_y * fourier_grid(m, y xi)`.
pub fn fourier_product(m: &GridMeasure, nu: &AtomMeasure<f64>, xi: f64) -> Complex64 {
    nu.atoms()
        .iter()
        .map(|a| m.fourier(a.position * xi) * a.weight)
        .sum()
}
