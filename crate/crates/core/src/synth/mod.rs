//! Synthetic phantoms and reference uncertainty-map generators.

mod cohort;
mod generators;
mod phantom;

pub use cohort::{case_id, case_seed, write_cohort, SyntheticCohort, GT_DIR};
pub use generators::{
    binary_margin, gen_uncertainty, inverted_prob, normalized_entropy, piecewise_sigmoid,
    sample_variance, GeneratorKind,
};
pub use phantom::{make_phantom, Phantom, PhantomParams};
