//! NIfTI-1 volumes, cohort layout discovery, configuration files, and result
//! tables.

mod config;
mod layout;
pub mod nifti;
mod results;

pub use config::ConfigFile;
pub use layout::{
    discover_cohort, fill, load_case, match_pattern, CaseFiles, CohortLayout, LoadedCase, Naming,
};
pub use nifti::{
    read_nifti, write_nifti, write_segmentation, write_uncertainty, NiftiVolume, VoxelData,
};
pub use results::{
    curve_csv, curve_file_name, leaderboard_csv, pairwise_csv, ranks_csv, read_results,
    results_csv, write_curve, write_ranking, write_results, ResultFormat, ResultRow,
    RESULT_COLUMNS,
};
