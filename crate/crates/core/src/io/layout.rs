use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{
    evaluate_case_with_curves, CaseResult, EntityCurve, ScoreVariant, ThresholdGrid,
};
use crate::volume::{Entity, SegmentationVolume, UncertaintyMap};

use super::nifti::read_nifti;

pub const ID_PLACEHOLDER: &str = "{ID}";

/// File-name patterns; `{ID}` stands for the case identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Naming {
    pub prediction: String,
    pub ground_truth: String,
    pub unc_whole: String,
    pub unc_core: String,
    pub unc_enhance: String,
}

impl Default for Naming {
    fn default() -> Self {
        Self {
            prediction: "{ID}.nii.gz".into(),
            ground_truth: "{ID}.nii.gz".into(),
            unc_whole: "{ID}_unc_whole.nii.gz".into(),
            unc_core: "{ID}_unc_core.nii.gz".into(),
            unc_enhance: "{ID}_unc_enhance.nii.gz".into(),
        }
    }
}

impl Naming {
    pub fn uncertainty(&self, entity: Entity) -> &str {
        match entity {
            Entity::WholeTumor => &self.unc_whole,
            Entity::TumorCore => &self.unc_core,
            Entity::EnhancingTumor => &self.unc_enhance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in [
            &self.prediction,
            &self.ground_truth,
            &self.unc_whole,
            &self.unc_core,
            &self.unc_enhance,
        ] {
            if p.matches(ID_PLACEHOLDER).count() != 1 {
                return Err(Error::Config(format!(
                    "naming pattern {p:?} must contain {ID_PLACEHOLDER} exactly once"
                )));
            }
        }
        Ok(())
    }
}

/// Replaces `{ID}` in `pattern`.
pub fn fill(pattern: &str, id: &str) -> String {
    pattern.replacen(ID_PLACEHOLDER, id, 1)
}

/// The case ID if `name` matches `pattern`.
pub fn match_pattern<'a>(pattern: &str, name: &'a str) -> Option<&'a str> {
    let (prefix, suffix) = pattern.split_once(ID_PLACEHOLDER)?;
    let id = name.strip_prefix(prefix)?.strip_suffix(suffix)?;
    (!id.is_empty()).then_some(id)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseFiles {
    pub case_id: String,
    pub ground_truth: PathBuf,
    pub prediction: PathBuf,
    /// WT, TC, ET.
    pub uncertainty: [PathBuf; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortLayout {
    pub gt_root: PathBuf,
    pub pred_root: PathBuf,
    /// Sorted by case ID.
    pub cases: Vec<CaseFiles>,
}

fn list_names(root: &Path) -> Result<Vec<String>> {
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        if entry.file_type().map(|t| t.is_file()).unwrap_or(false) {
            if let Some(name) = entry.file_name().to_str() {
                names.push(name.to_string());
            }
        }
    }
    Ok(names)
}

/// Finds every case in `pred_root` and resolves its five files.
pub fn discover_cohort(gt_root: &Path, pred_root: &Path, naming: &Naming) -> Result<CohortLayout> {
    naming.validate()?;
    if !gt_root.is_dir() {
        return Err(Error::io(
            gt_root,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "ground-truth directory not found",
            ),
        ));
    }
    let names = list_names(pred_root)?;
    let is_unc = |name: &str| {
        Entity::ALL
            .iter()
            .any(|&e| match_pattern(naming.uncertainty(e), name).is_some())
    };
    let mut ids: Vec<String> = names
        .iter()
        .filter(|n| !is_unc(n))
        .filter_map(|n| match_pattern(&naming.prediction, n))
        .map(str::to_string)
        .collect();
    ids.sort();
    ids.dedup();

    let require = |path: PathBuf, case: &str, role: &str| {
        if path.is_file() {
            Ok(path)
        } else {
            Err(Error::MissingFile {
                case: case.to_string(),
                role: role.to_string(),
                path,
            })
        }
    };
    let cases = ids
        .iter()
        .map(|id| {
            let unc = |e: Entity, role: &str| {
                require(pred_root.join(fill(naming.uncertainty(e), id)), id, role)
            };
            Ok(CaseFiles {
                case_id: id.clone(),
                ground_truth: require(
                    gt_root.join(fill(&naming.ground_truth, id)),
                    id,
                    "ground truth",
                )?,
                prediction: require(
                    pred_root.join(fill(&naming.prediction, id)),
                    id,
                    "prediction",
                )?,
                uncertainty: [
                    unc(Entity::WholeTumor, "whole-tumor uncertainty")?,
                    unc(Entity::TumorCore, "tumor-core uncertainty")?,
                    unc(Entity::EnhancingTumor, "enhancing-tumor uncertainty")?,
                ],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CohortLayout {
        gt_root: gt_root.to_path_buf(),
        pred_root: pred_root.to_path_buf(),
        cases,
    })
}

/// All inputs of one case, validated and shape-checked.
#[derive(Debug, Clone)]
pub struct LoadedCase {
    pub case_id: String,
    pub gt: SegmentationVolume,
    pub pred: SegmentationVolume,
    pub uncertainty: [UncertaintyMap; 3],
}

pub fn load_case(files: &CaseFiles) -> Result<LoadedCase> {
    let gt = read_nifti(&files.ground_truth)?.into_segmentation()?;
    let pred = read_nifti(&files.prediction)?.into_segmentation()?;
    gt.shape().ensure_same(&pred.shape())?;
    let load_unc = |i: usize| -> Result<UncertaintyMap> {
        let map = read_nifti(&files.uncertainty[i])?.into_uncertainty(Entity::ALL[i])?;
        gt.shape().ensure_same(&map.shape())?;
        Ok(map)
    };
    let uncertainty = [load_unc(0)?, load_unc(1)?, load_unc(2)?];
    Ok(LoadedCase {
        case_id: files.case_id.clone(),
        gt,
        pred,
        uncertainty,
    })
}

impl LoadedCase {
    pub fn evaluate(
        &self,
        grid: &ThresholdGrid,
        variant: ScoreVariant,
        with_pr: bool,
    ) -> Result<(CaseResult, [EntityCurve; 3])> {
        evaluate_case_with_curves(
            &self.case_id,
            &self.gt,
            &self.pred,
            &self.uncertainty,
            grid,
            variant,
            with_pr,
        )
    }
}
