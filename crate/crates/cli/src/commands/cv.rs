use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use condmode::{cv_select, io, BandwidthGrid, CvTemplate, HkCandidate, ModeSearchInterval};

use super::{pick, resolve_kernels, resolve_semimetric};
use crate::commands::density::parse_interval;
use crate::output::{self, write_json, SCHEMA_VERSION};
use crate::CliError;

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvArgs {
    /// Long-form curve CSV (series_id,time,value)
    #[arg(long)]
    pub curves: Option<PathBuf>,

    /// Response CSV (series_id,response)
    #[arg(long)]
    pub responses: Option<PathBuf>,

    /// Nearest-neighbour rank candidates
    #[arg(long, value_delimiter = ',')]
    pub knn_grid: Option<Vec<usize>>,

    /// Fixed h_K candidates
    #[arg(long, value_delimiter = ',')]
    pub hk_grid: Option<Vec<f64>>,

    /// h_H candidates
    #[arg(long, value_delimiter = ',')]
    pub hh_grid: Option<Vec<f64>>,

    /// Semi-metric family: l2, deriv or pca
    #[arg(long)]
    pub semimetric: Option<String>,

    /// Derivative order / PCA component count
    #[arg(long)]
    pub q: Option<usize>,

    /// Curve kernel: box, quadshift or epanechnikov
    #[arg(long)]
    pub k_kernel: Option<String>,

    /// Response kernel: gaussian or epanechnikov
    #[arg(long)]
    pub h_kernel: Option<String>,

    /// Fixed mode-search interval as LO:HI (default: per-fold from training responses)
    #[arg(long, value_parser = parse_interval)]
    pub interval: Option<(f64, f64)>,

    /// Number of evaluation grid points
    #[arg(long)]
    pub grid_points: Option<usize>,
}

impl CvArgs {
    pub fn merged(self, file: CvArgs) -> CvArgs {
        CvArgs {
            curves: pick(self.curves, file.curves),
            responses: pick(self.responses, file.responses),
            knn_grid: pick(self.knn_grid, file.knn_grid),
            hk_grid: pick(self.hk_grid, file.hk_grid),
            hh_grid: pick(self.hh_grid, file.hh_grid),
            semimetric: pick(self.semimetric, file.semimetric),
            q: pick(self.q, file.q),
            k_kernel: pick(self.k_kernel, file.k_kernel),
            h_kernel: pick(self.h_kernel, file.h_kernel),
            interval: pick(self.interval, file.interval),
            grid_points: pick(self.grid_points, file.grid_points),
        }
    }
}

pub fn run(args: CvArgs, out_dir: &Path, seed: u64) -> Result<(), CliError> {
    let curves_path = args
        .curves
        .ok_or_else(|| CliError::Config("missing required option --curves".into()))?;
    let responses_path = args
        .responses
        .ok_or_else(|| CliError::Config("missing required option --responses".into()))?;

    let sample = io::read_sample(&curves_path, &responses_path)?;
    let semimetric = resolve_semimetric(args.semimetric.as_deref(), args.q, &sample)?;
    let (k_kernel, h_kernel) = resolve_kernels(args.k_kernel.as_deref(), args.h_kernel.as_deref())?;

    let defaults = BandwidthGrid::default_for(&sample);
    let mut hk_candidates: Vec<HkCandidate<f64>> = Vec::new();
    if let Some(ks) = &args.knn_grid {
        hk_candidates.extend(ks.iter().map(|&k| HkCandidate::KnnRank(k)));
    }
    if let Some(hs) = &args.hk_grid {
        hk_candidates.extend(hs.iter().map(|&h| HkCandidate::Fixed(h)));
    }
    if hk_candidates.is_empty() {
        hk_candidates = defaults.hk_candidates;
    }
    let hh_candidates = args.hh_grid.clone().unwrap_or(defaults.hh_candidates);
    let grid = BandwidthGrid::new(hk_candidates, hh_candidates)?;

    let grid_points = args.grid_points.unwrap_or(101);
    let interval = match args.interval {
        Some((lo, hi)) => Some(ModeSearchInterval::new(lo, hi, grid_points)?),
        None => None,
    };
    let template = CvTemplate {
        semimetric,
        k_kernel,
        h_kernel,
        grid_points,
        interval,
    };

    let selection = cv_select(&grid, &template, &sample)?;

    let table_name = "cv_table.csv";
    io::write_cv_csv(&out_dir.join(table_name), &selection.table)?;

    let (hk_kind, h_k, knn_rank) = match selection.hk {
        HkCandidate::Fixed(h) => ("fixed", Some(h), None),
        HkCandidate::KnnRank(k) => ("knn", None, Some(k)),
    };
    let excluded_folds = selection
        .table
        .iter()
        .find(|row| row.hk == selection.hk && row.hh == selection.hh)
        .map(|row| row.excluded_folds)
        .unwrap_or(0);

    write_json(
        &out_dir.join("cv_selection.json"),
        &output::CvReport {
            schema_version: SCHEMA_VERSION,
            command: "cv",
            hk_kind,
            h_k,
            knn_rank,
            h_h: selection.hh,
            score: selection.score,
            excluded_folds,
            candidates: selection.table.len(),
            table_csv: table_name.to_string(),
            seed,
        },
    )?;
    println!(
        "selected: {} {} with h_h = {} (score {})",
        hk_kind,
        h_k.map(|h| h.to_string())
            .or(knn_rank.map(|k| format!("k={k}")))
            .unwrap_or_default(),
        selection.hh,
        selection.score
    );
    Ok(())
}
