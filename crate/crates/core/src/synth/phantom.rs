use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::volume::{
    Entity, EntityMask, GridShape, SegmentationVolume, EDEMA, ENHANCING, NECROTIC_CORE,
};

/// Share of the whole tumor that belongs to the tumor core.
const CORE_SHARE: f64 = 0.4;
/// Share of the tumor core that is necrotic (the rest is enhancing).
const NECROTIC_SHARE: f64 = 0.3;
/// Smallest distance of a probability from the 0.5 decision boundary.
const MIN_CONFIDENCE: f64 = 0.04;

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomParams {
    pub shape: GridShape,
    /// Fraction of voxels inside the whole tumor.
    pub tumor_fraction: f64,
    /// Probability that a boundary voxel's prediction is flipped.
    pub error_rate: f64,
    /// Box-blur radius (voxels) used to soften probabilities near boundaries.
    pub blur: usize,
    /// Number of binary samples per entity (0 for none).
    pub samples: usize,
    pub seed: u64,
}

impl PhantomParams {
    pub fn new(shape: GridShape, seed: u64) -> Self {
        Self {
            shape,
            tumor_fraction: 0.001,
            error_rate: 0.1,
            blur: 1,
            samples: 0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tumor_fraction > 0.0 && self.tumor_fraction < 1.0) {
            return Err(Error::InvalidFraction(format!(
                "tumor_fraction must lie in (0, 1), got {}",
                self.tumor_fraction
            )));
        }
        if !(0.0..1.0).contains(&self.error_rate) {
            return Err(Error::InvalidFraction(format!(
                "error_rate must lie in [0, 1), got {}",
                self.error_rate
            )));
        }
        if self.samples == 1 {
            return Err(Error::InvalidFraction(
                "at least two samples are needed for a variance".into(),
            ));
        }
        Ok(())
    }
}

/// Synthetic case: ground truth, a prediction with per-entity foreground
/// probabilities, and optional binary samples around those probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub gt: SegmentationVolume,
    pub pred: SegmentationVolume,
    /// Foreground probability per entity (WT, TC, ET); `pred` is `prob >= 0.5`.
    pub prob: [Vec<f32>; 3],
    /// `samples[entity][b][voxel]`, empty when no samples were requested.
    pub samples: [Vec<Vec<bool>>; 3],
}

impl Phantom {
    pub fn shape(&self) -> GridShape {
        self.gt.shape()
    }

    pub fn prob(&self, entity: Entity) -> &[f32] {
        &self.prob[entity.index()]
    }

    pub fn samples(&self, entity: Entity) -> &[Vec<bool>] {
        &self.samples[entity.index()]
    }
}

/// Smoothly perturbed ellipsoidal distance from a random center.
fn blob_field(shape: GridShape, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dims = shape.dims().map(|d| d as f64);
    let center: [f64; 3] = std::array::from_fn(|i| dims[i] * (0.5 + rng.random_range(-0.1..0.1)));
    let radii: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.7..1.3));
    let waves: Vec<([f64; 3], f64, f64)> = (0..4)
        .map(|_| {
            let dir: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            (
                dir,
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.03..0.08),
            )
        })
        .collect();
    let scale = dims.iter().cloned().fold(f64::INFINITY, f64::min) / 8.0;
    (0..shape.len())
        .map(|i| {
            let c = shape.coords(i);
            let rel: [f64; 3] = std::array::from_fn(|k| (c[k] as f64 + 0.5 - center[k]) / radii[k]);
            let r = rel.iter().map(|v| v * v).sum::<f64>().sqrt();
            let wobble: f64 = waves
                .iter()
                .map(|(dir, phase, amp)| {
                    let t = (dir[0] * rel[0] + dir[1] * rel[1] + dir[2] * rel[2]) / scale;
                    amp * (t + phase).sin()
                })
                .sum();
            r * (1.0 + wobble)
        })
        .collect()
}

/// Value of the `k`-th smallest element (1-based) of `field`.
fn kth_smallest(field: &[f64], k: usize) -> f64 {
    let mut copy = field.to_vec();
    let (_, v, _) = copy.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
    *v
}

/// Mean of `mask` over a `(2r+1)^3` box, clipped at the grid border.
fn box_blur(shape: GridShape, mask: &[bool], radius: usize) -> Vec<f32> {
    let mut data: Vec<f32> = mask.iter().map(|&m| m as u8 as f32).collect();
    if radius == 0 {
        return data;
    }
    let dims = shape.dims();
    let strides = [1, dims[0], dims[0] * dims[1]];
    for axis in 0..3 {
        let n = dims[axis];
        let stride = strides[axis];
        let mut line = vec![0f32; n];
        let mut prefix = vec![0f64; n + 1];
        for start in 0..data.len() {
            // visit each line once, from its first voxel
            if !(start / stride).is_multiple_of(n) {
                continue;
            }
            for (j, l) in line.iter_mut().enumerate() {
                *l = data[start + j * stride];
            }
            for j in 0..n {
                prefix[j + 1] = prefix[j] + line[j] as f64;
            }
            for j in 0..n {
                let lo = j.saturating_sub(radius);
                let hi = (j + radius + 1).min(n);
                data[start + j * stride] = ((prefix[hi] - prefix[lo]) / (hi - lo) as f64) as f32;
            }
        }
    }
    data
}

fn on_boundary(shape: GridShape, mask: &[bool], index: usize) -> bool {
    let [x, y, z] = shape.coords(index);
    let [dx, dy, dz] = shape.dims();
    let here = mask[index];
    let differs = |nx: usize, ny: usize, nz: usize| mask[shape.index(nx, ny, nz)] != here;
    (x > 0 && differs(x - 1, y, z))
        || (x + 1 < dx && differs(x + 1, y, z))
        || (y > 0 && differs(x, y - 1, z))
        || (y + 1 < dy && differs(x, y + 1, z))
        || (z > 0 && differs(x, y, z - 1))
        || (z + 1 < dz && differs(x, y, z + 1))
}

fn entity_probability(
    shape: GridShape,
    mask: &EntityMask,
    params: &PhantomParams,
    rng: &mut ChaCha8Rng,
) -> Vec<f32> {
    let m = mask.as_slice();
    let blurred = box_blur(shape, m, params.blur);
    (0..m.len())
        .map(|i| {
            let b = blurred[i] as f64;
            let jitter = 1.0 - 0.1 * rng.random::<f64>();
            let confidence = (2.0 * b - 1.0).abs().max(MIN_CONFIDENCE) * jitter;
            let mut p = if m[i] {
                0.5 + 0.5 * confidence
            } else {
                0.5 - 0.5 * confidence
            };
            if params.error_rate > 0.0
                && rng.random::<f64>() < params.error_rate
                && on_boundary(shape, m, i)
            {
                p = 1.0 - p;
            }
            p as f32
        })
        .collect()
}

/// Deterministic synthetic case; see [`PhantomParams`].
#[allow(clippy::needless_range_loop)]
pub fn make_phantom(params: &PhantomParams) -> Result<Phantom> {
    params.validate()?;
    let shape = params.shape;
    let n = shape.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let field = blob_field(shape, &mut rng);
    let k_wt = ((params.tumor_fraction * n as f64).round() as usize).clamp(1, n);
    let k_tc = ((CORE_SHARE * k_wt as f64).round() as usize).max(1);
    let k_nec = (NECROTIC_SHARE * k_tc as f64).floor() as usize;
    let t_wt = kth_smallest(&field, k_wt);
    let t_tc = kth_smallest(&field, k_tc);
    let t_nec = (k_nec > 0).then(|| kth_smallest(&field, k_nec));
    let labels: Vec<u8> = field
        .iter()
        .map(|&f| match t_nec {
            Some(t) if f <= t => NECROTIC_CORE,
            _ if f <= t_tc => ENHANCING,
            _ if f <= t_wt => EDEMA,
            _ => 0,
        })
        .collect();
    let gt = SegmentationVolume::new(shape, labels)?;

    let mut prob =
        Entity::ALL.map(|e| entity_probability(shape, &gt.entity_mask(e), params, &mut rng));
    // keep predicted entities nested: p_ET <= p_TC <= p_WT
    for i in 0..n {
        prob[1][i] = prob[1][i].min(prob[0][i]);
        prob[2][i] = prob[2][i].min(prob[1][i]);
    }
    let pred_labels: Vec<u8> = (0..n)
        .map(
            |i| match (prob[0][i] >= 0.5, prob[1][i] >= 0.5, prob[2][i] >= 0.5) {
                (_, _, true) => ENHANCING,
                (_, true, false) => NECROTIC_CORE,
                (true, false, false) => EDEMA,
                _ => 0,
            },
        )
        .collect();
    let pred = SegmentationVolume::new(shape, pred_labels)?;

    let samples = std::array::from_fn(|e| {
        (0..params.samples)
            .map(|_| {
                prob[e]
                    .iter()
                    .map(|&p| rng.random::<f64>() < p as f64)
                    .collect()
            })
            .collect()
    });

    Ok(Phantom {
        gt,
        pred,
        prob,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::extract_entity_masks;

    fn params(side: usize, seed: u64) -> PhantomParams {
        PhantomParams::new(GridShape::cube(side).unwrap(), seed)
    }

    #[test]
    fn zero_error_rate_reproduces_ground_truth() {
        let mut p = params(16, 3);
        p.error_rate = 0.0;
        p.tumor_fraction = 0.05;
        let ph = make_phantom(&p).unwrap();
        assert_eq!(ph.pred, ph.gt);
    }

    #[test]
    fn deterministic_given_seed() {
        let mut p = params(12, 11);
        p.samples = 4;
        p.tumor_fraction = 0.02;
        assert_eq!(make_phantom(&p).unwrap(), make_phantom(&p).unwrap());
        let mut q = p.clone();
        q.seed = 12;
        assert_ne!(make_phantom(&p).unwrap(), make_phantom(&q).unwrap());
    }

    #[test]
    fn foreground_count_tracks_fraction() {
        let mut p = params(32, 5);
        p.tumor_fraction = 0.01;
        let ph = make_phantom(&p).unwrap();
        let wt = ph.gt.labels().iter().filter(|&&l| l != 0).count() as f64;
        let target = 0.01 * 32f64.powi(3);
        assert!((wt - target).abs() <= 0.2 * target, "{wt} vs {target}");
    }

    #[test]
    fn ground_truth_and_prediction_are_nested_and_consistent() {
        let mut p = params(16, 8);
        p.tumor_fraction = 0.03;
        p.error_rate = 0.4;
        let ph = make_phantom(&p).unwrap();
        for seg in [&ph.gt, &ph.pred] {
            assert!(extract_entity_masks(seg).is_nested());
        }
        let masks = extract_entity_masks(&ph.pred);
        for e in Entity::ALL {
            let from_prob: Vec<bool> = ph.prob(e).iter().map(|&p| p >= 0.5).collect();
            assert_eq!(masks.get(e).as_slice(), from_prob.as_slice());
        }
        assert!(ph.gt.labels().contains(&ENHANCING));
        assert_ne!(ph.pred, ph.gt);
    }

    #[test]
    fn invalid_parameters() {
        for f in [0.0, 1.0, -0.2] {
            let mut p = params(4, 0);
            p.tumor_fraction = f;
            assert!(matches!(make_phantom(&p), Err(Error::InvalidFraction(_))));
        }
        let mut p = params(4, 0);
        p.error_rate = 1.0;
        assert!(make_phantom(&p).is_err());
        let mut p = params(4, 0);
        p.samples = 1;
        assert!(make_phantom(&p).is_err());
    }

    #[test]
    fn blur_preserves_constant_fields_and_softens_edges() {
        let shape = GridShape::new([5, 1, 1]).unwrap();
        let b = box_blur(shape, &[true; 5], 2);
        assert!(b.iter().all(|&v| (v - 1.0).abs() < 1e-6));
        let b = box_blur(shape, &[false, false, true, true, true], 1);
        assert_eq!(b[0], 0.0);
        assert!((b[1] - 1.0 / 3.0).abs() < 1e-6);
        assert!((b[4] - 1.0).abs() < 1e-6);
    }
}
