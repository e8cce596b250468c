use std::path::Path;

use clap::Args;
use serde::Deserialize;

use condmode::{io, rate_study, CurveBuilder, Driver, GeneratorSpec, Link, Noise, RateStudyConfig};

use super::pick;
use crate::output::{self, write_json, RatePerN, SCHEMA_VERSION};
use crate::CliError;

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateArgs {
    /// Sample sizes, e.g. 100,200,400,800,1600
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,

    /// Replications per sample size (at least 30)
    #[arg(long)]
    pub reps: Option<usize>,

    /// Norm order p of the reported error
    #[arg(long)]
    pub p: Option<f64>,

    /// Latent driver: ar1, expar or arch1
    #[arg(long)]
    pub driver: Option<String>,

    /// AR(1) coefficient
    #[arg(long)]
    pub rho: Option<f64>,

    /// EXPAR coefficients
    #[arg(long)]
    pub expar_a: Option<f64>,
    #[arg(long)]
    pub expar_b: Option<f64>,
    #[arg(long)]
    pub expar_c: Option<f64>,

    /// ARCH(1) coefficients
    #[arg(long)]
    pub arch_omega: Option<f64>,
    #[arg(long)]
    pub arch_alpha: Option<f64>,

    /// Curve builder: sine or sineline
    #[arg(long)]
    pub builder: Option<String>,

    /// Grid points per generated curve
    #[arg(long)]
    pub curve_points: Option<usize>,

    /// Slope scale of the sineline builder
    #[arg(long)]
    pub slope_sd: Option<f64>,

    /// Link applied to the curve score: identity, affine or tanh
    #[arg(long)]
    pub link: Option<String>,
    #[arg(long)]
    pub link_scale: Option<f64>,
    #[arg(long)]
    pub link_offset: Option<f64>,

    /// Response noise: gaussian or laplace
    #[arg(long)]
    pub noise: Option<String>,

    /// Noise scale
    #[arg(long)]
    pub sigma: Option<f64>,

    /// Rank fraction of the nearest-neighbour curve bandwidth
    #[arg(long)]
    pub knn_frac: Option<f64>,

    /// Response bandwidth schedule h_H = hh_coef * n^(-hh_exponent)
    #[arg(long)]
    pub hh_coef: Option<f64>,
    #[arg(long)]
    pub hh_exponent: Option<f64>,

    /// Mode-search grid resolution
    #[arg(long)]
    pub grid_points: Option<usize>,

    /// Reference smoothness exponents (only enter the reported slope target)
    #[arg(long)]
    pub j: Option<u32>,
    #[arg(long)]
    pub b1: Option<f64>,
    #[arg(long)]
    pub b2: Option<f64>,
}

impl SimulateArgs {
    pub fn merged(self, file: SimulateArgs) -> SimulateArgs {
        SimulateArgs {
            n_grid: pick(self.n_grid, file.n_grid),
            reps: pick(self.reps, file.reps),
            p: pick(self.p, file.p),
            driver: pick(self.driver, file.driver),
            rho: pick(self.rho, file.rho),
            expar_a: pick(self.expar_a, file.expar_a),
            expar_b: pick(self.expar_b, file.expar_b),
            expar_c: pick(self.expar_c, file.expar_c),
            arch_omega: pick(self.arch_omega, file.arch_omega),
            arch_alpha: pick(self.arch_alpha, file.arch_alpha),
            builder: pick(self.builder, file.builder),
            curve_points: pick(self.curve_points, file.curve_points),
            slope_sd: pick(self.slope_sd, file.slope_sd),
            link: pick(self.link, file.link),
            link_scale: pick(self.link_scale, file.link_scale),
            link_offset: pick(self.link_offset, file.link_offset),
            noise: pick(self.noise, file.noise),
            sigma: pick(self.sigma, file.sigma),
            knn_frac: pick(self.knn_frac, file.knn_frac),
            hh_coef: pick(self.hh_coef, file.hh_coef),
            hh_exponent: pick(self.hh_exponent, file.hh_exponent),
            grid_points: pick(self.grid_points, file.grid_points),
            j: pick(self.j, file.j),
            b1: pick(self.b1, file.b1),
            b2: pick(self.b2, file.b2),
        }
    }
}

pub fn run(args: SimulateArgs, out_dir: &Path, seed: u64) -> Result<(), CliError> {
    let driver = match args.driver.as_deref().unwrap_or("ar1") {
        "ar1" => Driver::Ar1 {
            rho: args.rho.unwrap_or(0.5),
        },
        "expar" => Driver::Expar {
            a: args.expar_a.unwrap_or(0.3),
            b: args.expar_b.unwrap_or(0.5),
            c: args.expar_c.unwrap_or(1.0),
        },
        "arch1" => Driver::Arch1 {
            omega: args.arch_omega.unwrap_or(0.5),
            alpha: args.arch_alpha.unwrap_or(0.5),
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown driver '{other}' (expected ar1, expar or arch1)"
            )))
        }
    };
    let curve_points = args.curve_points.unwrap_or(21);
    if curve_points < 2 {
        return Err(CliError::Config("--curve-points must be at least 2".into()));
    }
    let curve_builder = match args.builder.as_deref().unwrap_or("sine") {
        "sine" => CurveBuilder::sine_amplitude(curve_points),
        "sineline" => CurveBuilder::sine_linear(curve_points, args.slope_sd.unwrap_or(0.5)),
        other => {
            return Err(CliError::Config(format!(
                "unknown curve builder '{other}' (expected sine or sineline)"
            )))
        }
    };
    let link = match args.link.as_deref().unwrap_or("tanh") {
        "identity" => Link::Identity,
        "affine" => Link::Affine {
            scale: args.link_scale.unwrap_or(1.0),
            offset: args.link_offset.unwrap_or(0.0),
        },
        "tanh" => Link::Tanh,
        other => {
            return Err(CliError::Config(format!(
                "unknown link '{other}' (expected identity, affine or tanh)"
            )))
        }
    };
    let sigma = args.sigma.unwrap_or(0.25);
    let noise = match args.noise.as_deref().unwrap_or("gaussian") {
        "gaussian" => Noise::Gaussian { sigma },
        "laplace" => Noise::Laplace { sigma },
        other => {
            return Err(CliError::Config(format!(
                "unknown noise '{other}' (expected gaussian or laplace)"
            )))
        }
    };
    let spec = GeneratorSpec {
        driver,
        curve_builder,
        link,
        noise,
        seed,
    };

    let defaults = RateStudyConfig::<f64>::default();
    let cfg = RateStudyConfig {
        n_grid: args.n_grid.unwrap_or(defaults.n_grid),
        replications: args.reps.unwrap_or(defaults.replications),
        p: args.p.unwrap_or(defaults.p),
        j: args.j.unwrap_or(defaults.j),
        b1: args.b1.unwrap_or(defaults.b1),
        b2: args.b2.unwrap_or(defaults.b2),
        knn_frac: args.knn_frac.unwrap_or(defaults.knn_frac),
        hh_coef: args.hh_coef.unwrap_or(defaults.hh_coef),
        hh_exponent: args.hh_exponent.unwrap_or(defaults.hh_exponent),
        grid_points: args.grid_points.unwrap_or(defaults.grid_points),
        k_kernel: defaults.k_kernel,
        h_kernel: defaults.h_kernel,
    };

    let report = rate_study(&spec, &cfg)?;

    let table_name = "rate_table.csv";
    io::write_rate_csv(&out_dir.join(table_name), &report)?;
    write_json(
        &out_dir.join("rate_summary.json"),
        &output::RateReport {
            schema_version: SCHEMA_VERSION,
            command: "simulate",
            slope: report.slope,
            intercept: report.intercept,
            reference_exponent: report.reference_exponent,
            schedule: report.schedule.clone(),
            excluded_count: report.excluded_total,
            p: cfg.p,
            j: cfg.j,
            b1: cfg.b1,
            b2: cfg.b2,
            n_grid: cfg.n_grid.clone(),
            replications: cfg.replications,
            per_n: report
                .per_n
                .iter()
                .map(|row| RatePerN {
                    n: row.n,
                    k: row.k,
                    h_h: row.h_h,
                    lp_error: row.lp_error,
                    median_abs_error: row.median_abs_error,
                    mean_h_k: row.mean_h_k,
                    small_ball: row.small_ball,
                    excluded: row.excluded,
                })
                .collect(),
            table_csv: table_name.to_string(),
            seed,
        },
    )?;
    println!(
        "slope: {:.6}  reference exponent: {:.6}  excluded replications: {}",
        report.slope, report.reference_exponent, report.excluded_total
    );
    Ok(())
}
