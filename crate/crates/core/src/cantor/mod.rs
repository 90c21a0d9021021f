//! Random Cantor construction with certified digit-set selection.
//!
//! Level `j` consists of `T_j` intervals `[a, a + 1/N_j]` with
//! `a = 1 + m/N_j`. Each interval keeps a random `t_{j+1}`-subset of its
//! `n_{j+1}` children; a level is accepted only when the transform increments
//! it causes stay under the concentration bounds on a grid of frequencies.

mod construct;
pub mod params;
mod terms;

pub use construct::{
    ancestor_ratio, child_offsets, construct, frostman_ratio, level_measure, random_digit_sets,
    verify_level, verify_measure, CantorMeasure, Certificate, LevelCheck, LevelRecord,
    ProductBound, Rejection, VerifyReport,
};
pub use params::{default_sequences, default_zeta0, ConstructionParams};
pub use terms::{
    deviation_x, deviation_y, hoeffding_threshold, term_i, term_j, LevelView,
};
