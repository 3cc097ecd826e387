use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::UncertaintyMap;

/// The unfiltered baseline threshold.
pub const BASELINE_TAU: f64 = 100.0;

/// Strictly increasing uncertainty thresholds ending at the baseline 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ThresholdGrid {
    taus: Vec<f64>,
}

impl ThresholdGrid {
    pub fn new(taus: Vec<f64>) -> Result<Self> {
        if taus.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least two thresholds, got {}",
                taus.len()
            )));
        }
        if let Some(t) = taus.iter().find(|t| !(0.0..=BASELINE_TAU).contains(*t)) {
            return Err(Error::InvalidGrid(format!(
                "threshold {t} outside [0, 100]"
            )));
        }
        if let Some(w) = taus.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "thresholds must strictly increase ({} then {})",
                w[0], w[1]
            )));
        }
        if taus[taus.len() - 1] != BASELINE_TAU {
            return Err(Error::InvalidGrid(
                "the last threshold must be 100 (the unfiltered baseline)".into(),
            ));
        }
        Ok(Self { taus })
    }

    /// `start, start + step, ...` up to and including `stop`, which must be 100.
    pub fn range(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 || start > stop {
            return Err(Error::InvalidGrid(format!(
                "bad range {start}:{stop}:{step}"
            )));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        let mut taus: Vec<f64> = (0..=n).map(|i| start + step * i as f64).collect();
        // snap accumulated rounding onto the end point
        if let Some(last) = taus.last_mut() {
            if (*last - stop).abs() < step * 1e-6 {
                *last = stop;
            }
        }
        Self::new(taus)
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Index of the first threshold at which a voxel of uncertainty `u` is
    /// kept. The voxel stays kept at every later threshold, and every voxel
    /// is kept at the baseline (the last index).
    pub(crate) fn first_kept(&self, u: f64) -> usize {
        let interior = &self.taus[..self.taus.len() - 1];
        interior.partition_point(|&t| t <= u)
    }
}

impl Default for ThresholdGrid {
    /// 5, 10, ..., 100.
    fn default() -> Self {
        Self {
            taus: (1..=20).map(|i| 5.0 * i as f64).collect(),
        }
    }
}

impl TryFrom<Vec<f64>> for ThresholdGrid {
    type Error = Error;
    fn try_from(taus: Vec<f64>) -> Result<Self> {
        Self::new(taus)
    }
}

impl From<ThresholdGrid> for Vec<f64> {
    fn from(grid: ThresholdGrid) -> Self {
        grid.taus
    }
}

impl FromStr for ThresholdGrid {
    type Err = Error;

    /// Accepts `start:stop:step` or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidGrid(format!("not a number: {p:?}")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, step] => Self::range(num(start)?, num(stop)?, num(step)?),
            [list] => Self::new(list.split(',').map(num).collect::<Result<_>>()?),
            _ => Err(Error::InvalidGrid(format!("cannot parse grid {s:?}"))),
        }
    }
}

impl fmt::Display for ThresholdGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.taus.iter().map(|t| t.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Voxels that survive filtering at `tau`: everything at the baseline,
/// otherwise those with uncertainty strictly below `tau`.
pub fn kept_mask(unc: &UncertaintyMap, tau: f64) -> Vec<bool> {
    if tau >= BASELINE_TAU {
        return vec![true; unc.values().len()];
    }
    unc.values().iter().map(|&u| (u as f64) < tau).collect()
}
