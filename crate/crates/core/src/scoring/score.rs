use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::curve::EntityCurve;
use crate::error::Error;

/// Which curve areas enter the entity score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreVariant {
    /// DSC area, penalised by both filtered-TP and filtered-TN areas.
    #[default]
    Full,
    DscOnly,
    DscPlusFtp,
    DscPlusFtn,
}

impl ScoreVariant {
    pub const ALL: [ScoreVariant; 4] = [
        ScoreVariant::Full,
        ScoreVariant::DscOnly,
        ScoreVariant::DscPlusFtp,
        ScoreVariant::DscPlusFtn,
    ];

    pub fn combine(self, auc_dsc: f64, auc_ftp: f64, auc_ftn: f64) -> f64 {
        match self {
            ScoreVariant::Full => (auc_dsc + (1.0 - auc_ftp) + (1.0 - auc_ftn)) / 3.0,
            ScoreVariant::DscOnly => auc_dsc,
            ScoreVariant::DscPlusFtp => (auc_dsc + (1.0 - auc_ftp)) / 2.0,
            ScoreVariant::DscPlusFtn => (auc_dsc + (1.0 - auc_ftn)) / 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScoreVariant::Full => "full",
            ScoreVariant::DscOnly => "dsc",
            ScoreVariant::DscPlusFtp => "dsc-ftp",
            ScoreVariant::DscPlusFtn => "dsc-ftn",
        }
    }
}

impl fmt::Display for ScoreVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScoreVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "full" => Ok(ScoreVariant::Full),
            "dsc" | "dsc-only" => Ok(ScoreVariant::DscOnly),
            "dsc-ftp" => Ok(ScoreVariant::DscPlusFtp),
            "dsc-ftn" => Ok(ScoreVariant::DscPlusFtn),
            other => Err(Error::Config(format!("unknown score variant {other:?}"))),
        }
    }
}

/// Curve areas and the combined score for one entity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntityScore {
    pub auc_dsc: f64,
    pub auc_ftp: f64,
    pub auc_ftn: f64,
    pub score: f64,
}

impl EntityScore {
    pub fn from_aucs(auc_dsc: f64, auc_ftp: f64, auc_ftn: f64, variant: ScoreVariant) -> Self {
        Self {
            auc_dsc,
            auc_ftp,
            auc_ftn,
            score: variant.combine(auc_dsc, auc_ftp, auc_ftn),
        }
    }
}

pub fn entity_score(curve: &EntityCurve, variant: ScoreVariant) -> EntityScore {
    EntityScore::from_aucs(curve.auc_dsc(), curve.auc_ftp(), curve.auc_ftn(), variant)
}
