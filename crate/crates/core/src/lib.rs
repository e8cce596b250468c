//! Nonparametric conditional-mode estimation and prediction for
//! curve-valued data.
//!
//! The estimator weighs observations by a kernel of the semi-metric
//! distance between curves, smooths their responses with a second kernel
//! into a conditional density, and takes the density's grid argmax as the
//! conditional mode. On top of that core the crate provides:
//!
//! - three semi-metric families (L2, finite-difference derivative,
//!   functional-PCA projection),
//! - curve- and response-kernel registries with numerical compliance
//!   checks,
//! - nearest-neighbour and leave-one-out cross-validated bandwidth
//!   selection,
//! - one-step-ahead functional time-series prediction by slicing a sampled
//!   path into curve segments,
//! - strongly mixing synthetic data generators with closed-form modes and
//!   a Monte Carlo harness measuring the estimator's error decay.
//!
//! All numerical code is generic over the scalar type through [`Real`]
//! (`f32` or `f64`); the `*64`/`*32` aliases at the crate root pick one.

pub mod bandwidth;
pub mod curve;
pub mod error;
pub mod estimator;
pub mod io;
pub mod kernel;
pub mod numeric;
pub mod sample;
pub mod scalar;
pub mod semimetric;
pub mod simulate;
pub mod timeseries;

pub use bandwidth::{
    cv_select, knn_bandwidth, silverman_bandwidth, BandwidthGrid, CvRow, CvSelection, CvTemplate,
    HkCandidate,
};
pub use curve::Curve;
pub use error::{Error, Result};
pub use estimator::{
    small_ball_empirical, DensityCurveEstimate, EstimatorConfig, ModeEstimate, ModeSearchInterval,
};
pub use kernel::{
    check_compliance, ComplianceCheck, ComplianceReport, CurveKernel, KernelSpec, ResponseKernel,
};
pub use sample::{validate_sample, FunctionalSample, Violation};
pub use scalar::Real;
pub use semimetric::SemiMetricSpec;
pub use simulate::{
    rate_study, CurveBuilder, Driver, GeneratorSpec, Link, Noise, RateRow, RateStudyConfig,
    RateStudyReport, RateSummaryRow, TrueModeOracle,
};
pub use timeseries::{
    build_pairs, predict_next, slice_path, BandwidthStrategy, Characteristic, HhChoice,
    PathSlicingConfig, PredictSpec, PredictionReport, SlicedPath,
};

pub type Curve64 = Curve<f64>;
pub type Curve32 = Curve<f32>;
pub type FunctionalSample64 = FunctionalSample<f64>;
pub type FunctionalSample32 = FunctionalSample<f32>;
pub type SemiMetricSpec64 = SemiMetricSpec<f64>;
pub type EstimatorConfig64 = EstimatorConfig<f64>;
pub type ModeSearchInterval64 = ModeSearchInterval<f64>;
pub type BandwidthGrid64 = BandwidthGrid<f64>;
pub type PredictSpec64 = PredictSpec<f64>;
pub type GeneratorSpec64 = GeneratorSpec<f64>;
pub type RateStudyConfig64 = RateStudyConfig<f64>;
