use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::phantom::Phantom;
use crate::error::{Error, Result};
use crate::volume::{Entity, UncertaintyMap};

/// Reference constructions of a voxel-wise uncertainty map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// `100 (1 - p)`.
    InvertedProb,
    /// `100 (1 - 2 |0.5 - p|)`.
    BinaryMargin,
    /// `200 (1 - p)` above 0.5, `200 p` below.
    PiecewiseSigmoid,
    /// Binary entropy in bits, times 100.
    NormalizedEntropy,
    /// Variance of the binary samples, scaled by 400.
    SampleVariance,
    /// 100 exactly on the prediction's errors, 0 elsewhere.
    Oracle,
    /// 100 on every predicted-negative voxel, `100 (1 - p)` on predicted positives.
    BackgroundUncertain,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 7] = [
        GeneratorKind::InvertedProb,
        GeneratorKind::BinaryMargin,
        GeneratorKind::PiecewiseSigmoid,
        GeneratorKind::NormalizedEntropy,
        GeneratorKind::SampleVariance,
        GeneratorKind::Oracle,
        GeneratorKind::BackgroundUncertain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::InvertedProb => "inverted-prob",
            GeneratorKind::BinaryMargin => "binary-margin",
            GeneratorKind::PiecewiseSigmoid => "piecewise-sigmoid",
            GeneratorKind::NormalizedEntropy => "normalized-entropy",
            GeneratorKind::SampleVariance => "sample-variance",
            GeneratorKind::Oracle => "oracle",
            GeneratorKind::BackgroundUncertain => "background-uncertain",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown generator {s:?}")))
    }
}

pub fn inverted_prob(p: f64) -> f64 {
    100.0 * (1.0 - p)
}

pub fn binary_margin(p: f64) -> f64 {
    100.0 * (1.0 - 2.0 * (0.5 - p).abs())
}

pub fn piecewise_sigmoid(p: f64) -> f64 {
    if p >= 0.5 {
        200.0 * (1.0 - p)
    } else {
        200.0 * p
    }
}

pub fn normalized_entropy(p: f64) -> f64 {
    let plogp = |q: f64| if q <= 0.0 { 0.0 } else { q * q.ln() };
    100.0 * (-(plogp(p) + plogp(1.0 - p)) / std::f64::consts::LN_2)
}

/// `400 * (1/B) Σ (y_b - ȳ)^2` for binary samples, which is `400 ȳ (1 - ȳ)`.
pub fn sample_variance(positives: usize, total: usize) -> f64 {
    let mean = positives as f64 / total as f64;
    400.0 * mean * (1.0 - mean)
}

fn to_map(
    phantom: &Phantom,
    entity: Entity,
    values: impl Iterator<Item = f64>,
) -> Result<UncertaintyMap> {
    let values = values.map(|u| u.clamp(0.0, 100.0) as f32).collect();
    UncertaintyMap::new(phantom.shape(), entity, values)
}

/// Uncertainty map of `kind` for one entity of the phantom.
pub fn gen_uncertainty(
    phantom: &Phantom,
    entity: Entity,
    kind: GeneratorKind,
) -> Result<UncertaintyMap> {
    let prob = phantom.prob(entity).iter().map(|&p| p as f64);
    match kind {
        GeneratorKind::InvertedProb => to_map(phantom, entity, prob.map(inverted_prob)),
        GeneratorKind::BinaryMargin => to_map(phantom, entity, prob.map(binary_margin)),
        GeneratorKind::PiecewiseSigmoid => to_map(phantom, entity, prob.map(piecewise_sigmoid)),
        GeneratorKind::NormalizedEntropy => to_map(phantom, entity, prob.map(normalized_entropy)),
        GeneratorKind::SampleVariance => {
            let samples = phantom.samples(entity);
            if samples.len() < 2 {
                return Err(Error::MissingSamples(entity));
            }
            let b = samples.len();
            let values = (0..phantom.shape().len()).map(|i| {
                let positives = samples.iter().filter(|s| s[i]).count();
                sample_variance(positives, b)
            });
            to_map(phantom, entity, values)
        }
        GeneratorKind::Oracle => {
            let gt = phantom.gt.entity_mask(entity);
            let pred = phantom.pred.entity_mask(entity);
            let values =
                gt.as_slice()
                    .iter()
                    .zip(pred.as_slice())
                    .map(|(g, p)| if g == p { 0.0 } else { 100.0 });
            to_map(phantom, entity, values)
        }
        GeneratorKind::BackgroundUncertain => {
            let pred = phantom.pred.entity_mask(entity);
            let values = prob
                .zip(pred.as_slice())
                .map(|(p, &fg)| if fg { inverted_prob(p) } else { 100.0 });
            to_map(phantom, entity, values)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{make_phantom, PhantomParams};
    use crate::volume::GridShape;
    use proptest::prelude::*;

    #[test]
    fn symmetry_point_is_maximal() {
        assert_eq!(binary_margin(0.5), 100.0);
        assert_eq!(piecewise_sigmoid(0.5), 100.0);
        assert!((normalized_entropy(0.5) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn certain_foreground_is_not_uncertain() {
        assert_eq!(inverted_prob(1.0), 0.0);
        assert_eq!(normalized_entropy(1.0), 0.0);
        assert_eq!(normalized_entropy(0.0), 0.0);
    }

    #[test]
    fn values_at_point_nine() {
        assert!((piecewise_sigmoid(0.9) - 20.0).abs() < 1e-12);
        // -(0.9 ln 0.9 + 0.1 ln 0.1) / ln 2 = 0.46899559358928...
        assert!((normalized_entropy(0.9) - 46.899559358928).abs() < 1e-9);
    }

    #[test]
    fn sample_variance_matches_definition() {
        let ys = [1.0, 0.0, 1.0, 1.0, 0.0];
        let mean = ys.iter().sum::<f64>() / 5.0;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / 5.0;
        assert!((sample_variance(3, 5) - 400.0 * var).abs() < 1e-12);
        assert_eq!(sample_variance(0, 7), 0.0);
        assert_eq!(sample_variance(7, 7), 0.0);
        assert_eq!(sample_variance(2, 4), 100.0);
    }

    #[test]
    fn phantom_maps_are_valid() {
        let mut params = PhantomParams::new(GridShape::cube(10).unwrap(), 4);
        params.tumor_fraction = 0.05;
        params.samples = 6;
        let ph = make_phantom(&params).unwrap();
        for kind in GeneratorKind::ALL {
            for e in Entity::ALL {
                let map = gen_uncertainty(&ph, e, kind).unwrap();
                assert_eq!(map.entity(), e);
            }
        }
        let margin = gen_uncertainty(&ph, Entity::TumorCore, GeneratorKind::BinaryMargin).unwrap();
        let sigmoid =
            gen_uncertainty(&ph, Entity::TumorCore, GeneratorKind::PiecewiseSigmoid).unwrap();
        for (a, b) in margin.values().iter().zip(sigmoid.values()) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn sample_variance_needs_samples() {
        let ph = make_phantom(&PhantomParams::new(GridShape::cube(6).unwrap(), 1)).unwrap();
        assert!(matches!(
            gen_uncertainty(&ph, Entity::WholeTumor, GeneratorKind::SampleVariance),
            Err(Error::MissingSamples(Entity::WholeTumor))
        ));
    }

    #[test]
    fn names_round_trip() {
        for k in GeneratorKind::ALL {
            assert_eq!(k.name().parse::<GeneratorKind>().unwrap(), k);
        }
    }

    proptest! {
        #[test]
        fn margin_equals_piecewise(p in 0.0f64..=1.0) {
            prop_assert!((binary_margin(p) - piecewise_sigmoid(p)).abs() < 1e-9);
            prop_assert!((binary_margin(p) - 200.0 * p.min(1.0 - p)).abs() < 1e-9);
        }

        #[test]
        fn monotone_in_distance_from_boundary(a in 0.0f64..=0.5, b in 0.0f64..=0.5, upper in any::<bool>()) {
            let (near, far) = if a <= b { (a, b) } else { (b, a) };
            let to_p = |d: f64| if upper { 0.5 + d } else { 0.5 - d };
            let (pn, pf) = (to_p(near), to_p(far));
            for g in [binary_margin, piecewise_sigmoid, normalized_entropy] {
                prop_assert!(g(pn) >= g(pf) - 1e-9);
            }
        }

        #[test]
        fn outputs_in_range(p in 0.0f64..=1.0) {
            for g in [inverted_prob, binary_margin, piecewise_sigmoid, normalized_entropy] {
                let u = g(p);
                prop_assert!((-1e-9..=100.0 + 1e-9).contains(&u));
            }
        }
    }
}
