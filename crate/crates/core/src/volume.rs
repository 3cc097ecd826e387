//! Label volumes, binary entity masks and uncertainty maps.
//!
//! Voxels are stored in NIfTI order: x varies fastest, then y, then z.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BACKGROUND: u8 = 0;
pub const NECROTIC_CORE: u8 = 1;
pub const EDEMA: u8 = 2;
pub const ENHANCING: u8 = 4;

/// Voxel counts along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    dims: [usize; 3],
}

impl GridShape {
    pub fn new(dims: [usize; 3]) -> Result<Self> {
        let fits = dims
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64))
            .is_some_and(|n| usize::try_from(n).is_ok());
        if dims.contains(&0) || !fits {
            return Err(Error::InvalidShape(dims));
        }
        Ok(Self { dims })
    }

    pub fn cube(side: usize) -> Result<Self> {
        Self::new([side; 3])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    /// Always false; a valid grid holds at least one voxel.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn coords(&self, index: usize) -> [usize; 3] {
        let x = index % self.dims[0];
        let yz = index / self.dims[0];
        [x, yz % self.dims[1], yz / self.dims[1]]
    }

    pub(crate) fn ensure_same(&self, other: &GridShape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch {
                left: self.dims,
                right: other.dims,
            });
        }
        Ok(())
    }

    fn ensure_len(&self, actual: usize) -> Result<()> {
        if actual != self.len() {
            return Err(Error::VoxelCountMismatch {
                expected: self.len(),
                actual,
            });
        }
        Ok(())
    }
}

/// The three nested tumor entities evaluated per case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Entity {
    #[serde(rename = "WT")]
    WholeTumor,
    #[serde(rename = "TC")]
    TumorCore,
    #[serde(rename = "ET")]
    EnhancingTumor,
}

impl Entity {
    pub const ALL: [Entity; 3] = [
        Entity::WholeTumor,
        Entity::TumorCore,
        Entity::EnhancingTumor,
    ];

    pub fn abbrev(self) -> &'static str {
        match self {
            Entity::WholeTumor => "WT",
            Entity::TumorCore => "TC",
            Entity::EnhancingTumor => "ET",
        }
    }

    /// Position in [`Entity::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Whether a voxel with this label belongs to the entity.
    pub fn contains_label(self, label: u8) -> bool {
        match self {
            Entity::WholeTumor => matches!(label, NECROTIC_CORE | EDEMA | ENHANCING),
            Entity::TumorCore => matches!(label, NECROTIC_CORE | ENHANCING),
            Entity::EnhancingTumor => label == ENHANCING,
        }
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbrev())
    }
}

/// Integer label grid using the 0/1/2/4 convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationVolume {
    shape: GridShape,
    labels: Vec<u8>,
}

fn is_valid_label(label: u8) -> bool {
    matches!(label, BACKGROUND | NECROTIC_CORE | EDEMA | ENHANCING)
}

impl SegmentationVolume {
    pub fn new(shape: GridShape, labels: Vec<u8>) -> Result<Self> {
        shape.ensure_len(labels.len())?;
        if let Some(index) = labels.iter().position(|&l| !is_valid_label(l)) {
            return Err(Error::InvalidLabel {
                value: labels[index] as f64,
                index,
            });
        }
        Ok(Self { shape, labels })
    }

    /// Builds a volume from real-valued voxels, as read from disk.
    /// Non-integral values and codes outside the convention are rejected.
    pub fn from_values<T: Copy + Into<f64>>(shape: GridShape, values: &[T]) -> Result<Self> {
        shape.ensure_len(values.len())?;
        let labels = values
            .iter()
            .enumerate()
            .map(|(index, &v)| {
                let v: f64 = v.into();
                let code = v as u8;
                if v.fract() == 0.0 && (0.0..=4.0).contains(&v) && is_valid_label(code) {
                    Ok(code)
                } else {
                    Err(Error::InvalidLabel { value: v, index })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { shape, labels })
    }

    pub fn zeros(shape: GridShape) -> Self {
        Self {
            shape,
            labels: vec![BACKGROUND; shape.len()],
        }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn entity_mask(&self, entity: Entity) -> EntityMask {
        EntityMask {
            shape: self.shape,
            entity,
            mask: self
                .labels
                .iter()
                .map(|&l| entity.contains_label(l))
                .collect(),
        }
    }
}

/// Binary mask of one tumor entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMask {
    shape: GridShape,
    entity: Entity,
    mask: Vec<bool>,
}

impl EntityMask {
    pub fn new(shape: GridShape, entity: Entity, mask: Vec<bool>) -> Result<Self> {
        shape.ensure_len(mask.len())?;
        Ok(Self {
            shape,
            entity,
            mask,
        })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn entity(&self) -> Entity {
        self.entity
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// True when every voxel set here is also set in `other`.
    pub fn is_subset_of(&self, other: &EntityMask) -> bool {
        self.shape == other.shape && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }
}

/// Masks for WT, TC and ET derived from one segmentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntitySet {
    masks: [EntityMask; 3],
}

impl EntitySet {
    pub fn get(&self, entity: Entity) -> &EntityMask {
        &self.masks[entity.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &EntityMask> {
        self.masks.iter()
    }

    /// ET ⊆ TC ⊆ WT.
    pub fn is_nested(&self) -> bool {
        self.get(Entity::EnhancingTumor)
            .is_subset_of(self.get(Entity::TumorCore))
            && self
                .get(Entity::TumorCore)
                .is_subset_of(self.get(Entity::WholeTumor))
    }
}

/// Splits a validated segmentation into its three entity masks.
pub fn extract_entity_masks(seg: &SegmentationVolume) -> EntitySet {
    EntitySet {
        masks: Entity::ALL.map(|e| seg.entity_mask(e)),
    }
}

/// Per-voxel uncertainty in `[0, 100]` for one entity.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyMap {
    shape: GridShape,
    entity: Entity,
    values: Vec<f32>,
}

impl UncertaintyMap {
    /// Rejects maps with any value outside `[0, 100]` or non-finite.
    pub fn new(shape: GridShape, entity: Entity, values: Vec<f32>) -> Result<Self> {
        shape.ensure_len(values.len())?;
        let report = validate_uncertainty(&values);
        if let Some(first) = report.violations.first() {
            return Err(Error::InvalidUncertainty {
                entity,
                count: report.violations.len(),
                first_index: first.index,
                first_value: first.value,
            });
        }
        Ok(Self {
            shape,
            entity,
            values,
        })
    }

    pub fn constant(shape: GridShape, entity: Entity, value: f32) -> Result<Self> {
        Self::new(shape, entity, vec![value; shape.len()])
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn entity(&self) -> Entity {
        self.entity
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    Negative,
    AboveHundred,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub value: f32,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every voxel whose value is negative, above 100, or not finite.
pub fn validate_uncertainty(values: &[f32]) -> ValidationReport {
    let violations = values
        .iter()
        .enumerate()
        .filter_map(|(index, &value)| {
            let kind = if !value.is_finite() {
                ViolationKind::NonFinite
            } else if value < 0.0 {
                ViolationKind::Negative
            } else if value > 100.0 {
                ViolationKind::AboveHundred
            } else {
                return None;
            };
            Some(Violation { index, value, kind })
        })
        .collect();
    ValidationReport { violations }
}
