//! Scoring of voxel-wise uncertainty maps that accompany multi-entity brain
//! tumor segmentations.
//!
//! Each tumor entity (whole tumor, tumor core, enhancing tumor) is scored by
//! filtering voxels whose uncertainty reaches a threshold, tracking the Dice
//! coefficient of what remains together with the fraction of true positives
//! and true negatives that were filtered away, and combining the areas under
//! those three curves into a single number in `[0, 1]`.
//!
//! The [`ranking`] module turns per-case scores of several teams into
//! cumulative ranks, paired permutation p-values and a grouped leaderboard.
//! [`synth`] produces synthetic phantoms and reference uncertainty maps, and
//! [`io`] reads and writes NIfTI-1 cohorts and result tables.

pub mod error;
pub mod io;
pub mod parallel;
pub mod ranking;
pub mod scoring;
pub mod synth;
pub mod volume;

pub use error::{Error, ErrorClass, Result};
pub use scoring::{
    compute_entity_curve, curve_auc, entity_score, evaluate_case, CaseResult, ConfusionCounts,
    EntityCurve, EntityScore, ScoreVariant, ThresholdGrid,
};
pub use volume::{
    extract_entity_masks, validate_uncertainty, Entity, EntityMask, EntitySet, GridShape,
    SegmentationVolume, UncertaintyMap,
};
