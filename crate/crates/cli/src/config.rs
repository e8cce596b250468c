//! TOML configuration file support. Each command reads its own table; keys
//! match the long flag names with underscores. Precedence everywhere:
//! command-line flag, then config file, then built-in default.

use std::path::Path;

use serde::Deserialize;

use crate::commands::{
    cv::CvArgs, density::DensityArgs, predict::PredictArgs, simulate::SimulateArgs,
};
use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<std::path::PathBuf>,
    pub density: DensityArgs,
    pub predict: PredictArgs,
    pub cv: CvArgs,
    pub simulate: SimulateArgs,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config file {}: {e}", path.display()))
    })?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config file {}: {e}", path.display())))
}
