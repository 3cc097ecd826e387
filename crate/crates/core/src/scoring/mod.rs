//! Threshold filtering, confusion counting, DSC/FTP/FTN curves and the
//! combined per-entity score.

mod confusion;
mod curve;
mod grid;
mod score;

use serde::{Deserialize, Serialize};

pub use confusion::{confusion, dsc, ftn_ratio, ftp_ratio, precision, recall, ConfusionCounts};
pub use curve::{compute_entity_curve, curve_auc, threshold_counts, EntityCurve};
pub use grid::{kept_mask, ThresholdGrid, BASELINE_TAU};
pub use score::{entity_score, EntityScore, ScoreVariant};

use crate::error::{Error, Result};
use crate::parallel;
use crate::volume::{extract_entity_masks, Entity, SegmentationVolume, UncertaintyMap};

/// Scores of one case for WT, TC and ET, and their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case_id: String,
    pub entities: [EntityScore; 3],
    pub overall: f64,
}

impl CaseResult {
    pub fn new(case_id: impl Into<String>, entities: [EntityScore; 3]) -> Self {
        let overall = entities.iter().map(|e| e.score).sum::<f64>() / 3.0;
        Self {
            case_id: case_id.into(),
            entities,
            overall,
        }
    }

    pub fn entity(&self, entity: Entity) -> &EntityScore {
        &self.entities[entity.index()]
    }
}

/// Scores one case; `unc` is ordered WT, TC, ET.
pub fn evaluate_case(
    case_id: &str,
    gt: &SegmentationVolume,
    pred: &SegmentationVolume,
    unc: &[UncertaintyMap; 3],
    grid: &ThresholdGrid,
    variant: ScoreVariant,
) -> Result<CaseResult> {
    evaluate_case_with_curves(case_id, gt, pred, unc, grid, variant, false).map(|(r, _)| r)
}

/// Like [`evaluate_case`] but also returns the three curves.
pub fn evaluate_case_with_curves(
    case_id: &str,
    gt: &SegmentationVolume,
    pred: &SegmentationVolume,
    unc: &[UncertaintyMap; 3],
    grid: &ThresholdGrid,
    variant: ScoreVariant,
    with_pr: bool,
) -> Result<(CaseResult, [EntityCurve; 3])> {
    gt.shape().ensure_same(&pred.shape())?;
    for (map, entity) in unc.iter().zip(Entity::ALL) {
        if map.entity() != entity {
            return Err(Error::EntityMismatch {
                expected: entity,
                found: map.entity(),
            });
        }
        gt.shape().ensure_same(&map.shape())?;
    }
    let gt_masks = extract_entity_masks(gt);
    let pred_masks = extract_entity_masks(pred);
    let curves = parallel::map_range(3, |i| {
        let e = Entity::ALL[i];
        compute_entity_curve(gt_masks.get(e), pred_masks.get(e), &unc[i], grid, with_pr)
    });
    let mut it = curves.into_iter();
    let curves = [
        it.next().unwrap()?,
        it.next().unwrap()?,
        it.next().unwrap()?,
    ];
    let scores = [0, 1, 2].map(|i| entity_score(&curves[i], variant));
    Ok((CaseResult::new(case_id, scores), curves))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::GridShape;

    fn zero_maps(shape: GridShape) -> [UncertaintyMap; 3] {
        Entity::ALL.map(|e| UncertaintyMap::constant(shape, e, 0.0).unwrap())
    }

    #[test]
    fn perfect_case_scores_one() {
        let shape = GridShape::cube(4).unwrap();
        let mut labels = vec![0u8; 64];
        labels[10] = 1;
        labels[11] = 2;
        labels[12] = 4;
        let seg = SegmentationVolume::new(shape, labels).unwrap();
        let r = evaluate_case(
            "c",
            &seg,
            &seg,
            &zero_maps(shape),
            &ThresholdGrid::default(),
            ScoreVariant::Full,
        )
        .unwrap();
        assert!(r.entities.iter().all(|e| e.score == 1.0));
        assert_eq!(r.overall, 1.0);
    }

    #[test]
    fn overall_is_mean_of_entities() {
        let e = |s| EntityScore {
            auc_dsc: 0.0,
            auc_ftp: 0.0,
            auc_ftn: 0.0,
            score: s,
        };
        let r = CaseResult::new("SCAN", [e(0.9429), e(0.9135), e(0.8885)]);
        assert!((r.overall - 0.9150).abs() < 5e-4);
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let shape = GridShape::cube(2).unwrap();
        let other = GridShape::cube(3).unwrap();
        let seg = SegmentationVolume::zeros(shape);
        let grid = ThresholdGrid::default();
        let wrong = SegmentationVolume::zeros(other);
        assert!(matches!(
            evaluate_case(
                "c",
                &seg,
                &wrong,
                &zero_maps(shape),
                &grid,
                ScoreVariant::Full
            ),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(evaluate_case(
            "c",
            &seg,
            &seg,
            &zero_maps(other),
            &grid,
            ScoreVariant::Full
        )
        .is_err());
        let mut maps = zero_maps(shape);
        maps.swap(0, 1);
        assert!(matches!(
            evaluate_case("c", &seg, &seg, &maps, &grid, ScoreVariant::Full),
            Err(Error::EntityMismatch { .. })
        ));
    }
}
