//! Random Cantor measures with prescribed Hausdorff and Fourier dimension,
//! plus numerical checks for Fourier decay, Riesz energies and sumsets.

pub mod cantor;
pub mod dimension;
pub mod error;
pub mod fourier;
pub mod measure;
pub mod quad;
pub mod rng;
pub mod sumset;

pub use error::{Error, Result};
pub use measure::{AtomMeasure, GridMeasure, MeasureDiam};
