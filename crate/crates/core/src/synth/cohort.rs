use std::fs;
use std::path::{Path, PathBuf};

use super::generators::{gen_uncertainty, GeneratorKind};
use super::phantom::{make_phantom, PhantomParams};
use crate::error::{Error, Result};
use crate::io::{fill, write_segmentation, write_uncertainty, Naming};
use crate::parallel;
use crate::volume::Entity;

pub const GT_DIR: &str = "gt";

/// Where a synthetic cohort was written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCohort {
    pub root: PathBuf,
    pub gt_root: PathBuf,
    pub case_ids: Vec<String>,
    /// One prediction directory per generator.
    pub submissions: Vec<(GeneratorKind, PathBuf)>,
}

pub fn case_id(index: usize) -> String {
    format!("case_{index:03}")
}

/// Seed for case `index` of a cohort.
pub fn case_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index as u64)
        .rotate_left(17)
}

/// Writes `n_cases` phantoms to `root`: ground truth under `gt/` and one
/// directory per generator kind holding predictions and three uncertainty
/// maps per case, named according to `naming`.
pub fn write_cohort(
    root: &Path,
    base: &PhantomParams,
    n_cases: usize,
    kinds: &[GeneratorKind],
    naming: &Naming,
) -> Result<SyntheticCohort> {
    naming.validate()?;
    let gt_root = root.join(GT_DIR);
    let mkdir = |p: &Path| fs::create_dir_all(p).map_err(|e| Error::io(p, e));
    mkdir(&gt_root)?;
    let submissions: Vec<(GeneratorKind, PathBuf)> =
        kinds.iter().map(|&k| (k, root.join(k.name()))).collect();
    for (_, dir) in &submissions {
        mkdir(dir)?;
    }
    let needs_samples = kinds.contains(&GeneratorKind::SampleVariance);

    let written = parallel::map_range(n_cases, |i| -> Result<String> {
        let id = case_id(i);
        let mut params = base.clone();
        params.seed = case_seed(base.seed, i);
        if needs_samples && params.samples < 2 {
            params.samples = 8;
        }
        let phantom = make_phantom(&params)?;
        write_segmentation(gt_root.join(fill(&naming.ground_truth, &id)), &phantom.gt)?;
        for (kind, dir) in &submissions {
            write_segmentation(dir.join(fill(&naming.prediction, &id)), &phantom.pred)?;
            for e in Entity::ALL {
                let map = gen_uncertainty(&phantom, e, *kind)?;
                write_uncertainty(dir.join(fill(naming.uncertainty(e), &id)), &map)?;
            }
        }
        Ok(id)
    });
    let case_ids = written.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SyntheticCohort {
        root: root.to_path_buf(),
        gt_root,
        case_ids,
        submissions,
    })
}
