use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use condmode::{
    io, predict_next, BandwidthGrid, BandwidthStrategy, Characteristic, HhChoice, HkCandidate,
    PathSlicingConfig, PredictSpec,
};

use super::{pick, resolve_kernels};
use crate::commands::density::parse_interval;
use crate::output::{self, write_json, IntervalEcho, SCHEMA_VERSION};
use crate::CliError;

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictArgs {
    /// Single-series CSV (time,value)
    #[arg(long)]
    pub series: Option<PathBuf>,

    /// Number of segments N to cut the series into
    #[arg(long)]
    pub segments: Option<usize>,

    /// Characteristic of the next segment: endpoint, mean, max or integral
    #[arg(long)]
    pub characteristic: Option<String>,

    /// Mean-center segments before distance computation
    #[arg(long)]
    #[serde(default)]
    pub center: bool,

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

    /// Fixed curve bandwidth
    #[arg(long)]
    pub h_k: Option<f64>,

    /// Nearest-neighbour rank for the curve bandwidth (default: 10% of N-1)
    #[arg(long)]
    pub knn: Option<usize>,

    /// Response bandwidth (default: Silverman scale)
    #[arg(long)]
    pub h_h: Option<f64>,

    /// Select bandwidths by leave-one-out cross-validation
    #[arg(long)]
    #[serde(default)]
    pub cv: bool,

    /// Nearest-neighbour rank candidates for --cv
    #[arg(long, value_delimiter = ',')]
    pub knn_grid: Option<Vec<usize>>,

    /// Fixed h_K candidates for --cv
    #[arg(long, value_delimiter = ',')]
    pub hk_grid: Option<Vec<f64>>,

    /// h_H candidates for --cv
    #[arg(long, value_delimiter = ',')]
    pub hh_grid: Option<Vec<f64>>,

    /// Mode-search interval as LO:HI
    #[arg(long, value_parser = parse_interval)]
    pub interval: Option<(f64, f64)>,

    /// Number of evaluation grid points
    #[arg(long)]
    pub grid_points: Option<usize>,
}

impl PredictArgs {
    pub fn merged(self, file: PredictArgs) -> PredictArgs {
        PredictArgs {
            series: pick(self.series, file.series),
            segments: pick(self.segments, file.segments),
            characteristic: pick(self.characteristic, file.characteristic),
            center: self.center || file.center,
            semimetric: pick(self.semimetric, file.semimetric),
            q: pick(self.q, file.q),
            k_kernel: pick(self.k_kernel, file.k_kernel),
            h_kernel: pick(self.h_kernel, file.h_kernel),
            h_k: pick(self.h_k, file.h_k),
            knn: pick(self.knn, file.knn),
            h_h: pick(self.h_h, file.h_h),
            cv: self.cv || file.cv,
            knn_grid: pick(self.knn_grid, file.knn_grid),
            hk_grid: pick(self.hk_grid, file.hk_grid),
            hh_grid: pick(self.hh_grid, file.hh_grid),
            interval: pick(self.interval, file.interval),
            grid_points: pick(self.grid_points, file.grid_points),
        }
    }
}

pub fn run(args: PredictArgs, out_dir: &Path, seed: u64) -> Result<(), CliError> {
    let series_path = args
        .series
        .ok_or_else(|| CliError::Config("missing required option --series".into()))?;
    let n_segments = args
        .segments
        .ok_or_else(|| CliError::Config("missing required option --segments".into()))?;
    let characteristic: Characteristic = args
        .characteristic
        .as_deref()
        .unwrap_or("endpoint")
        .parse()?;
    if args.h_k.is_some() && args.knn.is_some() {
        return Err(CliError::Config(
            "--h-k and --knn are mutually exclusive".into(),
        ));
    }

    let path = io::read_series(&series_path)?;

    let mut slicing = PathSlicingConfig::new(n_segments, characteristic)?;
    slicing.center_segments = args.center;

    // the semi-metric is fitted inside predict_next on the segment sample;
    // building it needs a placeholder sample only when PCA is requested,
    // so pass the unfitted spec through
    let semimetric = match args.semimetric.as_deref().unwrap_or("l2") {
        "l2" => condmode::SemiMetricSpec::l2(),
        "deriv" => condmode::SemiMetricSpec::deriv(args.q.unwrap_or(1))?,
        "pca" => condmode::SemiMetricSpec::pca(args.q.unwrap_or(2))?,
        other => {
            return Err(CliError::Config(format!(
                "unknown semi-metric '{other}' (expected l2, deriv or pca)"
            )))
        }
    };
    let (k_kernel, h_kernel) = resolve_kernels(args.k_kernel.as_deref(), args.h_kernel.as_deref())?;

    let bandwidth = if args.cv {
        // default candidates come from the sliced sample, so slice once here
        let sliced = condmode::slice_path(&path, &slicing)?;
        let pairs = condmode::build_pairs(&sliced.segments, characteristic)?;
        let defaults = BandwidthGrid::default_for(&pairs);
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
        BandwidthStrategy::CrossValidate(BandwidthGrid::new(hk_candidates, hh_candidates)?)
    } else {
        let hh = match args.h_h {
            Some(h) => HhChoice::Fixed(h),
            None => HhChoice::Silverman { factor: 1.0 },
        };
        let hk = match (args.h_k, args.knn) {
            (Some(h), _) => HkCandidate::Fixed(h),
            (None, Some(k)) => HkCandidate::KnnRank(k),
            (None, None) => {
                HkCandidate::KnnRank(((n_segments.saturating_sub(1)) as f64 * 0.1).ceil() as usize)
            }
        };
        BandwidthStrategy::Direct { hk, hh }
    };

    let mut spec = PredictSpec::new(slicing);
    spec.semimetric = semimetric;
    spec.k_kernel = k_kernel;
    spec.h_kernel = h_kernel;
    spec.bandwidth = bandwidth;
    spec.grid_points = args.grid_points.unwrap_or(201);
    spec.interval = args.interval;

    let report = predict_next(&path, &spec)?;

    let density_name = "prediction_density.csv";
    io::write_density_csv(&out_dir.join(density_name), &report.density)?;

    let cv_table_path = match &report.cv {
        Some(sel) => {
            let name = "cv_table.csv";
            io::write_cv_csv(&out_dir.join(name), &sel.table)?;
            Some(name.to_string())
        }
        None => None,
    };

    write_json(
        &out_dir.join("prediction.json"),
        &output::PredictReport {
            schema_version: SCHEMA_VERSION,
            command: "predict",
            prediction: report.prediction,
            effective_n: report.effective_n,
            h_k: report.h_k,
            h_h: report.h_h,
            knn_rank: report.knn_rank,
            interval: IntervalEcho {
                lower: report.interval_lower,
                upper: report.interval_upper,
                grid_points: spec.grid_points,
            },
            n_segments,
            characteristic: characteristic.name().to_string(),
            truncated_samples: report.truncated_samples,
            warnings: report.warnings.clone(),
            density_curve_path: density_name.to_string(),
            cv_table_path,
            seed,
        },
    )?;
    println!("prediction: {}", report.prediction);
    Ok(())
}
