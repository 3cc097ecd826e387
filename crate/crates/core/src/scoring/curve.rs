use serde::{Deserialize, Serialize};

use super::confusion::{self, ConfusionCounts};
use super::grid::ThresholdGrid;
use crate::error::{Error, Result};
use crate::parallel;
use crate::volume::{Entity, EntityMask, UncertaintyMap};

const CHUNK: usize = 1 << 16;

/// DSC, FTP and FTN (and optionally precision/recall) at every threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityCurve {
    pub entity: Entity,
    pub grid: ThresholdGrid,
    pub counts: Vec<ConfusionCounts>,
    pub dsc: Vec<f64>,
    pub ftp: Vec<f64>,
    pub ftn: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recall: Option<Vec<f64>>,
}

impl EntityCurve {
    /// Builds the series from per-threshold counts; the last entry is the baseline.
    pub fn from_counts(
        entity: Entity,
        grid: ThresholdGrid,
        counts: Vec<ConfusionCounts>,
        with_pr: bool,
    ) -> Self {
        let base = *counts.last().expect("grid has at least two thresholds");
        let dsc = counts.iter().map(confusion::dsc).collect();
        let ftp = counts
            .iter()
            .map(|c| confusion::ftp_ratio(c, &base))
            .collect();
        let ftn = counts
            .iter()
            .map(|c| confusion::ftn_ratio(c, &base))
            .collect();
        let (precision, recall) = if with_pr {
            (
                Some(counts.iter().map(confusion::precision).collect()),
                Some(counts.iter().map(confusion::recall).collect()),
            )
        } else {
            (None, None)
        };
        Self {
            entity,
            grid,
            counts,
            dsc,
            ftp,
            ftn,
            precision,
            recall,
        }
    }

    pub fn auc_dsc(&self) -> f64 {
        trapezoid(self.grid.taus(), &self.dsc)
    }

    pub fn auc_ftp(&self) -> f64 {
        trapezoid(self.grid.taus(), &self.ftp)
    }

    pub fn auc_ftn(&self) -> f64 {
        trapezoid(self.grid.taus(), &self.ftn)
    }
}

// tp, tn, fp, fn indexed by 2 * gt + pred
const TN: usize = 0;
const FP: usize = 1;
const FN: usize = 2;
const TP: usize = 3;

type Histogram = Vec<[u64; 4]>;

/// Per-threshold confusion counts via a single pass over the voxels.
///
/// Each voxel is binned by the first threshold at which it is kept; a prefix
/// sum over bins then yields the kept counts at every threshold.
pub fn threshold_counts(
    gt: &EntityMask,
    pred: &EntityMask,
    unc: &UncertaintyMap,
    grid: &ThresholdGrid,
) -> Result<Vec<ConfusionCounts>> {
    gt.shape().ensure_same(&pred.shape())?;
    gt.shape().ensure_same(&unc.shape())?;
    let n = grid.len();
    let (g, p, u) = (gt.as_slice(), pred.as_slice(), unc.values());

    let partials: Vec<Histogram> = parallel::map_chunks(g.len(), CHUNK, |start, end| {
        let mut hist = vec![[0u64; 4]; n];
        for i in start..end {
            let cat = 2 * g[i] as usize + p[i] as usize;
            hist[grid.first_kept(u[i] as f64)][cat] += 1;
        }
        hist
    });

    let mut hist = vec![[0u64; 4]; n];
    for part in &partials {
        for (acc, bin) in hist.iter_mut().zip(part) {
            for c in 0..4 {
                acc[c] += bin[c];
            }
        }
    }

    let total = g.len() as u64;
    let mut running = [0u64; 4];
    Ok(hist
        .iter()
        .map(|bin| {
            for c in 0..4 {
                running[c] += bin[c];
            }
            let kept: u64 = running.iter().sum();
            ConfusionCounts {
                tp: running[TP],
                tn: running[TN],
                fp: running[FP],
                fn_: running[FN],
                filtered: total - kept,
            }
        })
        .collect())
}

/// Full curve for one entity.
pub fn compute_entity_curve(
    gt: &EntityMask,
    pred: &EntityMask,
    unc: &UncertaintyMap,
    grid: &ThresholdGrid,
    with_pr: bool,
) -> Result<EntityCurve> {
    let counts = threshold_counts(gt, pred, unc, grid)?;
    Ok(EntityCurve::from_counts(
        gt.entity(),
        grid.clone(),
        counts,
        with_pr,
    ))
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    let span = xs[xs.len() - 1] - xs[0];
    let area: f64 = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) * 0.5)
        .sum();
    area / span
}

/// Trapezoidal area under `ys` over `xs`, divided by the span of `xs` so a
/// constant series integrates to its value.
pub fn curve_auc(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::SeriesLength {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidGrid("need at least two points".into()));
    }
    if xs[0] == xs[xs.len() - 1] {
        return Err(Error::DegenerateGrid(xs[0]));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid(
            "abscissae must strictly increase".into(),
        ));
    }
    Ok(trapezoid(xs, ys))
}
