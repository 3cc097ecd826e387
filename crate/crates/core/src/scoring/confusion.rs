use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::EntityMask;

/// Confusion counts over the kept voxels plus the number filtered away.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub filtered: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_ + self.filtered
    }
}

/// Counts agreement between `gt` and `pred` over voxels where `kept` is set.
pub fn confusion(gt: &EntityMask, pred: &EntityMask, kept: &[bool]) -> Result<ConfusionCounts> {
    gt.shape().ensure_same(&pred.shape())?;
    if kept.len() != gt.as_slice().len() {
        return Err(Error::VoxelCountMismatch {
            expected: gt.as_slice().len(),
            actual: kept.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for ((&g, &p), &k) in gt.as_slice().iter().zip(pred.as_slice()).zip(kept) {
        match (k, g, p) {
            (false, _, _) => c.filtered += 1,
            (true, true, true) => c.tp += 1,
            (true, false, false) => c.tn += 1,
            (true, false, true) => c.fp += 1,
            (true, true, false) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Dice coefficient; 1.0 when there is nothing positive to compare.
pub fn dsc(c: &ConfusionCounts) -> f64 {
    let denom = 2 * c.tp + c.fp + c.fn_;
    if denom == 0 {
        1.0
    } else {
        (2 * c.tp) as f64 / denom as f64
    }
}

fn filtered_ratio(base: u64, kept: u64) -> f64 {
    if base == 0 {
        return 0.0;
    }
    ((base as f64 - kept as f64) / base as f64).clamp(0.0, 1.0)
}

/// Fraction of baseline true positives lost at this threshold.
pub fn ftp_ratio(c_tau: &ConfusionCounts, c_base: &ConfusionCounts) -> f64 {
    filtered_ratio(c_base.tp, c_tau.tp)
}

/// Fraction of baseline true negatives lost at this threshold.
pub fn ftn_ratio(c_tau: &ConfusionCounts, c_base: &ConfusionCounts) -> f64 {
    filtered_ratio(c_base.tn, c_tau.tn)
}

pub fn precision(c: &ConfusionCounts) -> f64 {
    if c.tp + c.fp == 0 {
        1.0
    } else {
        c.tp as f64 / (c.tp + c.fp) as f64
    }
}

pub fn recall(c: &ConfusionCounts) -> f64 {
    if c.tp + c.fn_ == 0 {
        1.0
    } else {
        c.tp as f64 / (c.tp + c.fn_) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::{Entity, GridShape};

    fn mask(bits: &[bool]) -> EntityMask {
        let shape = GridShape::new([bits.len(), 1, 1]).unwrap();
        EntityMask::new(shape, Entity::WholeTumor, bits.to_vec()).unwrap()
    }

    fn counts(tp: u64, tn: u64, fp: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts {
            tp,
            tn,
            fp,
            fn_,
            filtered: 0,
        }
    }

    #[test]
    fn identical_masks() {
        let bits = [true, false, true, false, false];
        let c = confusion(&mask(&bits), &mask(&bits), &[true; 5]).unwrap();
        assert_eq!(c, counts(2, 3, 0, 0));
    }

    #[test]
    fn overlapping_pair() {
        // gt = {A, B}, pred = {B, C}, plus one background voxel
        let gt = mask(&[true, true, false, false]);
        let pred = mask(&[false, true, true, false]);
        let c = confusion(&gt, &pred, &[true; 4]).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (1, 1, 1, 1));
        assert_eq!(dsc(&c), 0.5);
    }

    #[test]
    fn nothing_kept() {
        let gt = mask(&[true, false, true]);
        let pred = mask(&[true, true, false]);
        let c = confusion(&gt, &pred, &[false; 3]).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                filtered: 3,
                ..Default::default()
            }
        );
        assert_eq!(dsc(&c), 1.0);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let err = confusion(&mask(&[true]), &mask(&[true, false]), &[true]);
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
        let err = confusion(&mask(&[true]), &mask(&[true]), &[true, true]);
        assert!(err.is_err());
    }

    #[test]
    fn dice_examples() {
        assert_eq!(dsc(&counts(7, 0, 0, 0)), 1.0);
        assert_eq!(dsc(&counts(1, 0, 1, 1)), 0.5);
        assert_eq!(dsc(&counts(0, 10, 0, 0)), 1.0);
    }

    #[test]
    fn ratio_examples() {
        let base = counts(20, 10_000, 0, 0);
        assert!((ftp_ratio(&counts(19, 0, 0, 0), &base) - 0.05).abs() < 1e-15);
        assert_eq!(ftp_ratio(&base, &base), 0.0);
        assert_eq!(ftp_ratio(&counts(0, 0, 0, 0), &counts(0, 5, 0, 0)), 0.0);
        assert!((ftn_ratio(&counts(0, 9985, 0, 0), &base) - 0.0015).abs() < 1e-15);
        assert_eq!(ftn_ratio(&base, &base), 0.0);
        assert_eq!(ftn_ratio(&base, &counts(3, 0, 0, 0)), 0.0);
        // more kept than at baseline is clamped
        assert_eq!(ftp_ratio(&counts(30, 0, 0, 0), &base), 0.0);
    }

    #[test]
    fn precision_recall_conventions() {
        assert_eq!(precision(&counts(0, 4, 0, 2)), 1.0);
        assert_eq!(recall(&counts(0, 4, 3, 0)), 1.0);
        assert_eq!(precision(&counts(3, 0, 1, 0)), 0.75);
        assert_eq!(recall(&counts(1, 0, 0, 3)), 0.25);
    }
}
