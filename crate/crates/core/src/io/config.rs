use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::layout::Naming;
use crate::error::{Error, Result};

/// Optional settings read from a TOML file; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub grid: Option<String>,
    pub variant: Option<String>,
    pub perms: Option<u64>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    #[serde(default)]
    pub naming: Naming,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.naming.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let cfg = ConfigFile::parse(
            r#"
            grid = "10:100:10"
            perms = 5000
            [naming]
            unc_core = "{ID}_tc.nii.gz"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.grid.as_deref(), Some("10:100:10"));
        assert_eq!(cfg.perms, Some(5000));
        assert_eq!(cfg.naming.unc_core, "{ID}_tc.nii.gz");
        assert_eq!(cfg.naming.unc_whole, Naming::default().unc_whole);
    }

    #[test]
    fn unknown_keys_and_bad_patterns_fail() {
        assert!(ConfigFile::parse("colour = 3").is_err());
        assert!(ConfigFile::parse("[naming]\nprediction = \"pred.nii\"").is_err());
    }
}
