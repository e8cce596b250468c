//! JSON report envelopes. Every JSON file carries `schema_version`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)
        .map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))?;
    writeln!(file)?;
    Ok(())
}

/// Echo of the semi-metric choice without the (potentially large) fitted
/// eigenbasis.
#[derive(Serialize)]
pub struct SemiMetricEcho {
    pub family: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
}

impl SemiMetricEcho {
    pub fn of(spec: &condmode::SemiMetricSpec64) -> Self {
        match spec {
            condmode::SemiMetricSpec::L2 => SemiMetricEcho {
                family: "l2",
                q: None,
            },
            condmode::SemiMetricSpec::Deriv { q } => SemiMetricEcho {
                family: "deriv",
                q: Some(*q),
            },
            condmode::SemiMetricSpec::Pca { q, .. } => SemiMetricEcho {
                family: "pca",
                q: Some(*q),
            },
        }
    }
}

#[derive(Serialize)]
pub struct IntervalEcho {
    pub lower: f64,
    pub upper: f64,
    pub grid_points: usize,
}

#[derive(Serialize)]
pub struct DensityReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub effective_n: usize,
    pub h_k: f64,
    pub h_h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knn_rank: Option<usize>,
    pub interval: IntervalEcho,
    pub semimetric: SemiMetricEcho,
    pub k_kernel: String,
    pub h_kernel: String,
    pub warnings: Vec<String>,
    pub density_csv: String,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct PredictReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub prediction: f64,
    pub effective_n: usize,
    pub h_k: f64,
    pub h_h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knn_rank: Option<usize>,
    pub interval: IntervalEcho,
    pub n_segments: usize,
    pub characteristic: String,
    pub truncated_samples: usize,
    pub warnings: Vec<String>,
    pub density_curve_path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cv_table_path: Option<String>,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct CvReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub hk_kind: &'static str,
    /// Fixed bandwidth value, when `hk_kind == "fixed"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_k: Option<f64>,
    /// Nearest-neighbour rank, when `hk_kind == "knn"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knn_rank: Option<usize>,
    pub h_h: f64,
    pub score: f64,
    pub excluded_folds: usize,
    pub candidates: usize,
    pub table_csv: String,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct RatePerN {
    pub n: usize,
    pub k: usize,
    pub h_h: f64,
    pub lp_error: f64,
    pub median_abs_error: f64,
    pub mean_h_k: f64,
    pub small_ball: f64,
    pub excluded: usize,
}

#[derive(Serialize)]
pub struct RateReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub slope: f64,
    pub intercept: f64,
    pub reference_exponent: f64,
    pub schedule: String,
    pub excluded_count: usize,
    pub p: f64,
    pub j: u32,
    pub b1: f64,
    pub b2: f64,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub per_n: Vec<RatePerN>,
    pub table_csv: String,
    pub seed: u64,
}
