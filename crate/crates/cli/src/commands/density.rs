use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use condmode::{io, knn_bandwidth, silverman_bandwidth, EstimatorConfig, ModeSearchInterval};

use super::{pick, resolve_kernels, resolve_semimetric};
use crate::output::{self, write_json, IntervalEcho, SemiMetricEcho, SCHEMA_VERSION};
use crate::CliError;

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensityArgs {
    /// Long-form curve CSV (series_id,time,value)
    #[arg(long)]
    pub curves: Option<PathBuf>,

    /// Response CSV (series_id,response)
    #[arg(long)]
    pub responses: Option<PathBuf>,

    /// Query curve CSV (time,value)
    #[arg(long)]
    pub query: Option<PathBuf>,

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

    /// Fixed curve bandwidth (conflicts with --knn)
    #[arg(long)]
    pub h_k: Option<f64>,

    /// Nearest-neighbour rank for the curve bandwidth
    #[arg(long)]
    pub knn: Option<usize>,

    /// Response bandwidth (default: Silverman scale)
    #[arg(long)]
    pub h_h: Option<f64>,

    /// Mode-search interval as LO:HI (default: response range padded by h_h)
    #[arg(long, value_parser = parse_interval)]
    pub interval: Option<(f64, f64)>,

    /// Number of evaluation grid points
    #[arg(long)]
    pub grid_points: Option<usize>,
}

pub fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got '{s}'"))?;
    let lo = lo.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

impl DensityArgs {
    pub fn merged(self, file: DensityArgs) -> DensityArgs {
        DensityArgs {
            curves: pick(self.curves, file.curves),
            responses: pick(self.responses, file.responses),
            query: pick(self.query, file.query),
            semimetric: pick(self.semimetric, file.semimetric),
            q: pick(self.q, file.q),
            k_kernel: pick(self.k_kernel, file.k_kernel),
            h_kernel: pick(self.h_kernel, file.h_kernel),
            h_k: pick(self.h_k, file.h_k),
            knn: pick(self.knn, file.knn),
            h_h: pick(self.h_h, file.h_h),
            interval: pick(self.interval, file.interval),
            grid_points: pick(self.grid_points, file.grid_points),
        }
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing required option --{flag}")))
}

pub fn run(args: DensityArgs, out_dir: &Path, seed: u64) -> Result<(), CliError> {
    let curves_path = required(args.curves, "curves")?;
    let responses_path = required(args.responses, "responses")?;
    let query_path = required(args.query, "query")?;
    if args.h_k.is_some() && args.knn.is_some() {
        return Err(CliError::Config(
            "--h-k and --knn are mutually exclusive".into(),
        ));
    }

    let sample = io::read_sample(&curves_path, &responses_path)?;
    let query = io::read_series(&query_path)?;

    let semimetric = resolve_semimetric(args.semimetric.as_deref(), args.q, &sample)?;
    let (k_kernel, h_kernel) = resolve_kernels(args.k_kernel.as_deref(), args.h_kernel.as_deref())?;

    let h_h = args
        .h_h
        .unwrap_or_else(|| silverman_bandwidth(sample.responses()));
    let (h_k, knn_rank) = match args.h_k {
        Some(h) => (h, None),
        None => {
            let k = args
                .knn
                .unwrap_or_else(|| ((sample.n() as f64 * 0.1).ceil() as usize).max(1));
            (knn_bandwidth(&semimetric, &sample, &query, k)?, Some(k))
        }
    };

    let (lower, upper) = args.interval.unwrap_or_else(|| {
        let lo = sample
            .responses()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let hi = sample
            .responses()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        (lo - h_h, hi + h_h)
    });
    let grid_points = args.grid_points.unwrap_or(201);
    let interval = ModeSearchInterval::new(lower, upper, grid_points)?;

    let cfg = EstimatorConfig::new(semimetric, k_kernel, h_kernel, h_k, h_h, interval)?;
    let density = cfg.cond_density_curve(&sample, &query)?;

    let mut warnings = Vec::new();
    if density.effective_n == 0 {
        warnings.push("empty ball: no sample curve within h_k of the query".to_string());
    }
    if !k_kernel.h6_compliant() {
        warnings.push(format!(
            "curve kernel '{k_kernel}' vanishes at the support boundary (flagged non-compliant)"
        ));
    }

    let csv_name = "density.csv";
    io::write_density_csv(&out_dir.join(csv_name), &density)?;
    write_json(
        &out_dir.join("density.json"),
        &output::DensityReport {
            schema_version: SCHEMA_VERSION,
            command: "density",
            effective_n: density.effective_n,
            h_k,
            h_h,
            knn_rank,
            interval: IntervalEcho {
                lower,
                upper,
                grid_points,
            },
            semimetric: SemiMetricEcho::of(&cfg.semimetric),
            k_kernel: k_kernel.to_string(),
            h_kernel: h_kernel.to_string(),
            warnings,
            density_csv: csv_name.to_string(),
            seed,
        },
    )?;
    Ok(())
}
