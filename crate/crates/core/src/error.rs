use std::path::PathBuf;

use thiserror::Error;

use crate::volume::Entity;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid shape {0:?}: every dimension must be positive and the voxel count must fit in 64 bits")]
    InvalidShape([usize; 3]),

    #[error("expected {expected} voxels for the grid, got {actual}")]
    VoxelCountMismatch { expected: usize, actual: usize },

    #[error("invalid label {value} at voxel {index} (allowed labels: 0, 1, 2, 4)")]
    InvalidLabel { value: f64, index: usize },

    #[error("{entity} uncertainty map has {count} voxels outside [0, 100] (first at voxel {first_index}: {first_value})")]
    InvalidUncertainty {
        entity: Entity,
        count: usize,
        first_index: usize,
        first_value: f32,
    },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: [usize; 3], right: [usize; 3] },

    #[error("uncertainty map is for {found}, expected {expected}")]
    EntityMismatch { expected: Entity, found: Entity },

    #[error("invalid threshold grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate grid: first and last threshold are both {0}")]
    DegenerateGrid(f64),

    #[error("series length {ys} does not match {xs} thresholds")]
    SeriesLength { xs: usize, ys: usize },

    #[error("score matrix is missing team {team:?} on case {case:?}")]
    IncompleteMatrix { team: String, case: String },

    #[error("teams {a:?} and {b:?} were scored on different case sets")]
    CaseSetMismatch { a: String, b: String },

    #[error("ranking needs at least two teams, got {0}")]
    TooFewTeams(usize),

    #[error("paired vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("permutation test needs at least one permutation and one case")]
    EmptyPermutation,

    #[error("exhaustive enumeration over {0} cases is too large (limit {1})")]
    TooManyCases(usize, usize),

    #[error("no permutation test result for teams {0:?} and {1:?}")]
    MissingPair(String, String),

    #[error("invalid phantom parameter: {0}")]
    InvalidFraction(String),

    #[error("the phantom carries no binary samples for {0}")]
    MissingSamples(Entity),

    #[error("{path}: not a NIfTI-1 single-file volume")]
    NotNifti { path: PathBuf },

    #[error("{path}: unsupported NIfTI datatype code {code}")]
    UnsupportedDatatype { path: PathBuf, code: i16 },

    #[error("{path}: {detail}")]
    DimMismatch { path: PathBuf, detail: String },

    #[error("case {case:?} has no {role} file (looked for {path})")]
    MissingFile {
        case: String,
        role: String,
        path: PathBuf,
    },

    #[error("no cases found under {0}")]
    EmptyCohort(PathBuf),

    #[error("no result rows to write")]
    EmptyRows,

    #[error("invalid result table {path}: {detail}")]
    InvalidResults { path: PathBuf, detail: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Coarse grouping of errors, used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Files that cannot be found, opened, parsed or written.
    Ingestion,
    /// Inputs that parse but violate a domain rule.
    Validation,
    /// Inputs that are individually valid but disagree with each other.
    Consistency,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            NotNifti { .. }
            | UnsupportedDatatype { .. }
            | DimMismatch { .. }
            | MissingFile { .. }
            | EmptyCohort(_)
            | InvalidResults { .. }
            | Io { .. }
            | Csv(_)
            | Json(_) => ErrorClass::Ingestion,
            CaseSetMismatch { .. } | IncompleteMatrix { .. } | MissingPair(..) => {
                ErrorClass::Consistency
            }
            _ => ErrorClass::Validation,
        }
    }
}
