//! Functional time-series prediction: slice a sampled path into consecutive
//! curve segments, pair each segment with a scalar characteristic of its
//! successor, and predict the next characteristic by the conditional mode.

use serde::{Deserialize, Serialize};

use crate::bandwidth::{
    cv_select, knn_bandwidth, silverman_bandwidth, BandwidthGrid, CvSelection, CvTemplate,
    HkCandidate,
};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::estimator::{DensityCurveEstimate, EstimatorConfig, ModeSearchInterval};
use crate::kernel::{CurveKernel, ResponseKernel};
use crate::numeric::trapezoid;
use crate::sample::FunctionalSample;
use crate::scalar::Real;
use crate::semimetric::SemiMetricSpec;

/// Scalar summary `G` of a curve segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Characteristic {
    Endpoint,
    Mean,
    Max,
    Integral,
}

impl Characteristic {
    pub fn apply<T: Real>(self, curve: &Curve<T>) -> T {
        let v = curve.values();
        match self {
            Characteristic::Endpoint => v[v.len() - 1],
            Characteristic::Mean => v.iter().copied().sum::<T>() / T::of(v.len()),
            Characteristic::Max => v.iter().copied().fold(T::neg_infinity(), T::max),
            Characteristic::Integral => trapezoid(curve.times(), v),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Characteristic::Endpoint => "endpoint",
            Characteristic::Mean => "mean",
            Characteristic::Max => "max",
            Characteristic::Integral => "integral",
        }
    }
}

impl std::str::FromStr for Characteristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "endpoint" => Ok(Characteristic::Endpoint),
            "mean" => Ok(Characteristic::Mean),
            "max" => Ok(Characteristic::Max),
            "integral" => Ok(Characteristic::Integral),
            other => Err(Error::InvalidConfig(format!(
                "unknown characteristic '{other}' (expected endpoint, mean, max or integral)"
            ))),
        }
    }
}

/// How to cut the path and summarize successor segments. The horizon is
/// fixed at one segment ahead.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PathSlicingConfig {
    pub n_segments: usize,
    pub characteristic: Characteristic,
    /// Mean-center each segment before distance computation (responses are
    /// always computed from the raw segments).
    pub center_segments: bool,
}

impl PathSlicingConfig {
    pub fn new(n_segments: usize, characteristic: Characteristic) -> Result<Self> {
        if n_segments < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 segments, got {n_segments}"
            )));
        }
        Ok(PathSlicingConfig {
            n_segments,
            characteristic,
            center_segments: false,
        })
    }
}

/// Output of [`slice_path`].
#[derive(Clone, Debug)]
pub struct SlicedPath<T> {
    /// `N` segments on a shared local grid starting at zero.
    pub segments: Vec<Curve<T>>,
    /// Trailing samples dropped to make the length divisible by `N`.
    pub truncated_samples: usize,
    /// Whether the path's time steps were uniform; when they are not, the
    /// shared local grid (taken from the first block) misstates the timing
    /// of later segments.
    pub uniform_grid: bool,
}

/// Cuts the sampled path into `N` equal consecutive blocks, reparameterized
/// onto a shared local grid (the first block's times shifted to start at
/// zero). Concatenating the segment values recovers the truncated path
/// exactly.
pub fn slice_path<T: Real>(path: &Curve<T>, cfg: &PathSlicingConfig) -> Result<SlicedPath<T>> {
    let n_segments = cfg.n_segments;
    if n_segments < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 segments, got {n_segments}"
        )));
    }
    let len = path.len();
    let seg_len = len / n_segments;
    if seg_len < 2 {
        return Err(Error::PathTooShort {
            len,
            segments: n_segments,
        });
    }
    let used = seg_len * n_segments;

    let t0 = path.times()[0];
    let local_grid: Vec<T> = path.times()[..seg_len].iter().map(|&t| t - t0).collect();

    let steps: Vec<T> = path.times()[..used]
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    let first = steps[0];
    let uniform_grid = steps
        .iter()
        .all(|&s| (s - first).abs() <= first.abs() * T::lit(1e-9));

    let segments = (0..n_segments)
        .map(|i| {
            let block = &path.values()[i * seg_len..(i + 1) * seg_len];
            Curve::new(local_grid.clone(), block.to_vec())
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SlicedPath {
        segments,
        truncated_samples: len - used,
        uniform_grid,
    })
}

/// Builds the regression pairs: curves are segments `1..N-1` and response
/// `i` is `G` applied to segment `i+1`.
pub fn build_pairs<T: Real>(
    segments: &[Curve<T>],
    g: Characteristic,
) -> Result<FunctionalSample<T>> {
    if segments.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 segments to build pairs, got {}",
            segments.len()
        )));
    }
    let curves = segments[..segments.len() - 1].to_vec();
    let responses = segments[1..].iter().map(|s| g.apply(s)).collect();
    FunctionalSample::new(curves, responses)
}

/// Response-bandwidth rule for prediction.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum HhChoice<T> {
    Fixed(T),
    /// `factor * 1.06 * sd(Y) * n^{-1/5}`.
    Silverman {
        factor: T,
    },
}

/// Bandwidth strategy for prediction: direct choices or cross-validation.
#[derive(Clone, Debug)]
pub enum BandwidthStrategy<T> {
    Direct { hk: HkCandidate<T>, hh: HhChoice<T> },
    CrossValidate(BandwidthGrid<T>),
}

/// Full prediction specification.
#[derive(Clone, Debug)]
pub struct PredictSpec<T> {
    pub slicing: PathSlicingConfig,
    pub semimetric: SemiMetricSpec<T>,
    pub k_kernel: CurveKernel,
    pub h_kernel: ResponseKernel,
    pub bandwidth: BandwidthStrategy<T>,
    pub grid_points: usize,
    /// Mode-search interval override; defaults to the response range padded
    /// by one `h_H`.
    pub interval: Option<(T, T)>,
}

impl<T: Real> PredictSpec<T> {
    /// Defaults: L2 semi-metric, box/gaussian kernels, nearest-neighbour
    /// `h_K` at 10% rank, Silverman `h_H`, 201 grid points.
    pub fn new(slicing: PathSlicingConfig) -> Self {
        let rank = ((slicing.n_segments - 1) as f64 * 0.1).ceil() as usize;
        PredictSpec {
            slicing,
            semimetric: SemiMetricSpec::l2(),
            k_kernel: CurveKernel::Box,
            h_kernel: ResponseKernel::Gaussian,
            bandwidth: BandwidthStrategy::Direct {
                hk: HkCandidate::KnnRank(rank.max(1)),
                hh: HhChoice::Silverman { factor: T::one() },
            },
            grid_points: 201,
            interval: None,
        }
    }
}

/// Prediction report for the next segment characteristic.
#[derive(Clone, Debug, Serialize)]
pub struct PredictionReport<T> {
    pub prediction: T,
    pub effective_n: usize,
    pub h_k: T,
    pub h_h: T,
    /// Rank behind `h_k`, when a nearest-neighbour bandwidth was used.
    pub knn_rank: Option<usize>,
    pub interval_lower: T,
    pub interval_upper: T,
    pub n_segments: usize,
    pub characteristic: Characteristic,
    pub truncated_samples: usize,
    pub warnings: Vec<String>,
    pub density: DensityCurveEstimate<T>,
    /// Present when bandwidths were cross-validated.
    pub cv: Option<CvSelection<T>>,
}

/// Predicts the characteristic of the segment following the path's last
/// block: slices the path, builds the `N - 1` pairs, and returns the
/// conditional mode at the last segment. Empty-ball predictions are the
/// interval lower bound, flagged by a warning, never silent.
pub fn predict_next<T: Real>(
    path: &Curve<T>,
    spec: &PredictSpec<T>,
) -> Result<PredictionReport<T>> {
    let sliced = slice_path(path, &spec.slicing)?;
    let mut warnings = Vec::new();
    if !sliced.uniform_grid {
        warnings.push(
            "path time steps are not uniform; segments share the first block's local grid"
                .to_string(),
        );
    }

    let g = spec.slicing.characteristic;
    let raw_sample = build_pairs(&sliced.segments, g)?;
    let (sample, x) = if spec.slicing.center_segments {
        let curves = raw_sample.curves().iter().map(Curve::centered).collect();
        (
            FunctionalSample::new(curves, raw_sample.responses().to_vec())?,
            sliced.segments[sliced.segments.len() - 1].centered(),
        )
    } else {
        (
            raw_sample,
            sliced.segments[sliced.segments.len() - 1].clone(),
        )
    };

    let semimetric = if spec.semimetric.is_fitted() {
        spec.semimetric.clone()
    } else {
        spec.semimetric.fit_pca(&sample)?
    };

    let mut cv_result = None;
    let (hk_choice, h_h) = match &spec.bandwidth {
        BandwidthStrategy::Direct { hk, hh } => {
            let h_h = match *hh {
                HhChoice::Fixed(h) => h,
                HhChoice::Silverman { factor } => factor * silverman_bandwidth(sample.responses()),
            };
            (*hk, h_h)
        }
        BandwidthStrategy::CrossValidate(grid) => {
            let template = CvTemplate {
                semimetric: semimetric.clone(),
                k_kernel: spec.k_kernel,
                h_kernel: spec.h_kernel,
                grid_points: spec.grid_points,
                interval: None,
            };
            let sel = cv_select(grid, &template, &sample)?;
            let out = (sel.hk, sel.hh);
            cv_result = Some(sel);
            out
        }
    };
    let (h_k, knn_rank) = match hk_choice {
        HkCandidate::Fixed(h) => (h, None),
        HkCandidate::KnnRank(k) => (knn_bandwidth(&semimetric, &sample, &x, k)?, Some(k)),
    };

    let (lower, upper) = match spec.interval {
        Some(pair) => pair,
        None => {
            let lo = sample
                .responses()
                .iter()
                .cloned()
                .fold(T::infinity(), T::min);
            let hi = sample
                .responses()
                .iter()
                .cloned()
                .fold(T::neg_infinity(), T::max);
            (lo - h_h, hi + h_h)
        }
    };
    let interval = ModeSearchInterval::new(lower, upper, spec.grid_points)?;

    let cfg = EstimatorConfig::new(semimetric, spec.k_kernel, spec.h_kernel, h_k, h_h, interval)?;
    let density = cfg.cond_density_curve(&sample, &x)?;
    let mode = cfg.mode_from_density(&density);
    warnings.extend(mode.warnings);

    Ok(PredictionReport {
        prediction: mode.theta_hat,
        effective_n: density.effective_n,
        h_k,
        h_h,
        knn_rank,
        interval_lower: lower,
        interval_upper: upper,
        n_segments: spec.slicing.n_segments,
        characteristic: g,
        truncated_samples: sliced.truncated_samples,
        warnings,
        density,
        cv: cv_result,
    })
}
