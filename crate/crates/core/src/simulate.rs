//! Synthetic data generators driven by strongly mixing scalar processes
//! (AR(1), EXPAR, ARCH(1) — all geometrically strongly mixing within the
//! enforced parameter ranges), with closed-form conditional modes, and the
//! Monte Carlo study that measures the estimator's L^p error decay across
//! sample sizes.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::knn_bandwidth;
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::estimator::{EstimatorConfig, ModeSearchInterval};
use crate::kernel::{CurveKernel, ResponseKernel};
use crate::numeric::{dot_weighted, median, ols_line, trapezoid_weights};
use crate::sample::FunctionalSample;
use crate::scalar::Real;
use crate::semimetric::SemiMetricSpec;

/// Latent scalar driver. Each variant is geometrically strongly mixing
/// within its validated parameter range.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Driver<T> {
    /// `z_t = rho z_{t-1} + e_t`, `|rho| < 1`; started from the stationary law.
    Ar1 { rho: T },
    /// `z_t = (a + b exp(-c z_{t-1}^2)) z_{t-1} + e_t`, `|a| < 1`, `|a+b| < 1`, `c > 0`.
    Expar { a: T, b: T, c: T },
    /// `z_t = sigma_t e_t`, `sigma_t^2 = omega + alpha z_{t-1}^2`, `omega > 0`, `0 <= alpha < 1`.
    Arch1 { omega: T, alpha: T },
}

impl<T: Real> Driver<T> {
    fn validate(&self) -> Result<()> {
        match self {
            Driver::Ar1 { rho } => {
                if !(rho.is_finite() && rho.abs() < T::one()) {
                    return Err(Error::InvalidConfig(format!(
                        "AR(1) requires |rho| < 1, got {rho}"
                    )));
                }
            }
            Driver::Expar { a, b, c } => {
                if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                    return Err(Error::InvalidConfig(
                        "EXPAR parameters must be finite".into(),
                    ));
                }
                if a.abs() >= T::one() || (*a + *b).abs() >= T::one() || *c <= T::zero() {
                    return Err(Error::InvalidConfig(format!(
                        "EXPAR requires |a| < 1, |a + b| < 1, c > 0; got a={a}, b={b}, c={c}"
                    )));
                }
            }
            Driver::Arch1 { omega, alpha } => {
                if !(omega.is_finite() && *omega > T::zero()) {
                    return Err(Error::InvalidConfig(format!(
                        "ARCH(1) requires omega > 0, got {omega}"
                    )));
                }
                if !(alpha.is_finite() && *alpha >= T::zero() && *alpha < T::one()) {
                    return Err(Error::InvalidConfig(format!(
                        "ARCH(1) requires 0 <= alpha < 1, got {alpha}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Draws `count` consecutive values of the stationary sequence.
    fn series(&self, rng: &mut ChaCha8Rng, count: usize) -> Vec<T> {
        let gauss = |rng: &mut ChaCha8Rng| -> T {
            let e: f64 = rng.sample(StandardNormal);
            T::lit(e)
        };
        let mut out = Vec::with_capacity(count);
        match *self {
            Driver::Ar1 { rho } => {
                let stationary_sd = (T::one() - rho * rho).sqrt().recip();
                let mut z = stationary_sd * gauss(rng);
                for _ in 0..count {
                    out.push(z);
                    z = rho * z + gauss(rng);
                }
            }
            Driver::Expar { a, b, c } => {
                let mut z = gauss(rng);
                for _ in 0..200 {
                    z = (a + b * (-c * z * z).exp()) * z + gauss(rng);
                }
                for _ in 0..count {
                    out.push(z);
                    z = (a + b * (-c * z * z).exp()) * z + gauss(rng);
                }
            }
            Driver::Arch1 { omega, alpha } => {
                let stationary_sd = (omega / (T::one() - alpha)).sqrt();
                let mut z = stationary_sd * gauss(rng);
                for _ in 0..50 {
                    z = (omega + alpha * z * z).sqrt() * gauss(rng);
                }
                for _ in 0..count {
                    out.push(z);
                    z = (omega + alpha * z * z).sqrt() * gauss(rng);
                }
            }
        }
        out
    }
}

/// Map from a latent scalar to a curve on a fixed grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum CurveBuilder<T> {
    /// `X(t) = z sin(pi t)`.
    SineAmplitude { times: Vec<T> },
    /// `X(t) = z sin(pi t) + B t` with `B ~ N(0, slope_sd^2)` independent.
    SineLinear { times: Vec<T>, slope_sd: T },
}

impl<T: Real> CurveBuilder<T> {
    /// Unit interval grid with `m` points.
    pub fn sine_amplitude(m: usize) -> Self {
        CurveBuilder::SineAmplitude {
            times: unit_grid(m),
        }
    }

    pub fn sine_linear(m: usize, slope_sd: T) -> Self {
        CurveBuilder::SineLinear {
            times: unit_grid(m),
            slope_sd,
        }
    }

    fn times(&self) -> &[T] {
        match self {
            CurveBuilder::SineAmplitude { times } => times,
            CurveBuilder::SineLinear { times, .. } => times,
        }
    }

    fn validate(&self) -> Result<()> {
        let times = self.times();
        if times.len() < 2 {
            return Err(Error::InvalidConfig(
                "curve builder grid needs at least 2 points".into(),
            ));
        }
        if let CurveBuilder::SineLinear { slope_sd, .. } = self {
            if !(slope_sd.is_finite() && *slope_sd >= T::zero()) {
                return Err(Error::InvalidConfig(format!(
                    "slope_sd must be nonnegative, got {slope_sd}"
                )));
            }
        }
        Ok(())
    }

    fn build(&self, z: T, rng: &mut ChaCha8Rng) -> Curve<T> {
        match self {
            CurveBuilder::SineAmplitude { times } => {
                let values = times.iter().map(|&t| z * (T::PI() * t).sin()).collect();
                Curve::new_unchecked(times.clone(), values)
            }
            CurveBuilder::SineLinear { times, slope_sd } => {
                let e: f64 = rng.sample(StandardNormal);
                let slope = *slope_sd * T::lit(e);
                let values = times
                    .iter()
                    .map(|&t| z * (T::PI() * t).sin() + slope * t)
                    .collect();
                Curve::new_unchecked(times.clone(), values)
            }
        }
    }

    /// Recovers the sine coefficient of an arbitrary curve by least-squares
    /// projection onto the builder's basis under quadrature weights; exact
    /// for curves in the span.
    fn score(&self, x: &Curve<T>) -> T {
        let w = trapezoid_weights(x.times());
        let sine: Vec<T> = x.times().iter().map(|&t| (T::PI() * t).sin()).collect();
        match self {
            CurveBuilder::SineAmplitude { .. } => {
                dot_weighted(&w, x.values(), &sine) / dot_weighted(&w, &sine, &sine)
            }
            CurveBuilder::SineLinear { .. } => {
                let lin: Vec<T> = x.times().to_vec();
                let g11 = dot_weighted(&w, &sine, &sine);
                let g12 = dot_weighted(&w, &sine, &lin);
                let g22 = dot_weighted(&w, &lin, &lin);
                let r1 = dot_weighted(&w, x.values(), &sine);
                let r2 = dot_weighted(&w, x.values(), &lin);
                (r1 * g22 - r2 * g12) / (g11 * g22 - g12 * g12)
            }
        }
    }
}

fn unit_grid<T: Real>(m: usize) -> Vec<T> {
    (0..m).map(|j| T::of(j) / T::of(m - 1)).collect()
}

/// Link `m` applied to the curve score.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Link<T> {
    Identity,
    Affine { scale: T, offset: T },
    Tanh,
}

impl<T: Real> Link<T> {
    fn apply(&self, s: T) -> T {
        match *self {
            Link::Identity => s,
            Link::Affine { scale, offset } => scale * s + offset,
            Link::Tanh => s.tanh(),
        }
    }
}

/// Symmetric unimodal response noise, so the conditional mode equals the
/// link value exactly.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Noise<T> {
    Gaussian { sigma: T },
    Laplace { sigma: T },
}

impl<T: Real> Noise<T> {
    fn validate(&self) -> Result<()> {
        let sigma = match self {
            Noise::Gaussian { sigma } | Noise::Laplace { sigma } => *sigma,
        };
        if !(sigma.is_finite() && sigma > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "noise scale must be positive, got {sigma}"
            )));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> T {
        match *self {
            Noise::Gaussian { sigma } => {
                let e: f64 = rng.sample(StandardNormal);
                sigma * T::lit(e)
            }
            Noise::Laplace { sigma } => {
                // inverse CDF from a centered uniform
                let u: f64 = rng.random_range(-0.5..0.5);
                let v = -u.signum() * (1.0 - 2.0 * u.abs()).ln();
                sigma * T::lit(v)
            }
        }
    }
}

/// Full synthetic model: mixing driver, curve map, link, noise and seed.
/// `Y_i = link(z_i) + noise` with `X_i = builder(z_i)`, so the true
/// conditional mode is `theta(x) = link(score(x))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorSpec<T> {
    pub driver: Driver<T>,
    pub curve_builder: CurveBuilder<T>,
    pub link: Link<T>,
    pub noise: Noise<T>,
    pub seed: u64,
}

impl<T: Real> GeneratorSpec<T> {
    /// AR(1) sine-amplitude design with a tanh link and gaussian noise.
    pub fn default_ar1(rho: T, sigma: T, seed: u64) -> Self {
        GeneratorSpec {
            driver: Driver::Ar1 { rho },
            curve_builder: CurveBuilder::sine_amplitude(21),
            link: Link::Tanh,
            noise: Noise::Gaussian { sigma },
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.driver.validate()?;
        self.curve_builder.validate()?;
        self.noise.validate()
    }

    /// Draws a sample of `n` pairs plus the closed-form mode oracle.
    pub fn generate(&self, n: usize) -> Result<(FunctionalSample<T>, TrueModeOracle<T>)> {
        let (sample, _) = self.generate_seeded(n, self.seed, false)?;
        Ok((sample, self.oracle()))
    }

    /// The closed-form conditional-mode oracle for this model.
    pub fn oracle(&self) -> TrueModeOracle<T> {
        TrueModeOracle {
            builder: self.curve_builder.clone(),
            link: self.link,
        }
    }

    /// Seeded draw used by the rate study: optionally emits one extra curve
    /// (the next latent value) as an out-of-sample query point.
    fn generate_seeded(
        &self,
        n: usize,
        seed: u64,
        with_query: bool,
    ) -> Result<(FunctionalSample<T>, Option<Curve<T>>)> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "sample size must be at least 1".into(),
            ));
        }
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let extra = usize::from(with_query);
        let latents = self.driver.series(&mut rng, n + extra);

        let mut curves = Vec::with_capacity(n);
        let mut responses = Vec::with_capacity(n);
        for &z in latents.iter().take(n) {
            curves.push(self.curve_builder.build(z, &mut rng));
            responses.push(self.link.apply(z) + self.noise.sample(&mut rng));
        }
        let query = if with_query {
            Some(self.curve_builder.build(latents[n], &mut rng))
        } else {
            None
        };
        Ok((FunctionalSample::new(curves, responses)?, query))
    }
}

/// Closed-form `theta(x) = link(score(x))` for generated models.
#[derive(Clone, Debug)]
pub struct TrueModeOracle<T> {
    builder: CurveBuilder<T>,
    link: Link<T>,
}

impl<T: Real> TrueModeOracle<T> {
    pub fn theta(&self, x: &Curve<T>) -> T {
        self.link.apply(self.builder.score(x))
    }
}

/// Monte Carlo design for the error-decay study.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateStudyConfig<T> {
    /// Increasing sample sizes.
    pub n_grid: Vec<usize>,
    /// Replications per sample size (at least 30).
    pub replications: usize,
    /// Norm order `p >= 1` for the reported error.
    pub p: T,
    /// Smoothness exponents entering only the theoretical reference slope.
    pub j: u32,
    pub b1: T,
    pub b2: T,
    /// `h_K` = nearest-neighbour bandwidth at rank `ceil(knn_frac * n)`.
    pub knn_frac: T,
    /// `h_H = hh_coef * n^{-hh_exponent}`.
    pub hh_coef: T,
    pub hh_exponent: T,
    /// Mode-search grid resolution.
    pub grid_points: usize,
    pub k_kernel: CurveKernel,
    pub h_kernel: ResponseKernel,
}

impl<T: Real> Default for RateStudyConfig<T> {
    fn default() -> Self {
        RateStudyConfig {
            n_grid: vec![100, 200, 400, 800, 1600],
            replications: 100,
            p: T::lit(2.0),
            j: 2,
            b1: T::one(),
            b2: T::lit(2.0),
            knn_frac: T::lit(0.1),
            hh_coef: T::lit(0.45),
            hh_exponent: T::lit(0.1667),
            grid_points: 401,
            k_kernel: CurveKernel::Box,
            h_kernel: ResponseKernel::Gaussian,
        }
    }
}

impl<T: Real> RateStudyConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "n_grid must be a nonempty increasing sequence".into(),
            ));
        }
        if self.replications < 30 {
            return Err(Error::InvalidConfig(format!(
                "need at least 30 replications, got {}",
                self.replications
            )));
        }
        if self.p < T::one() {
            return Err(Error::InvalidConfig(format!(
                "norm order p must be at least 1, got {}",
                self.p
            )));
        }
        if !(self.knn_frac > T::zero() && self.knn_frac <= T::one()) {
            return Err(Error::InvalidConfig(format!(
                "knn_frac must be in (0, 1], got {}",
                self.knn_frac
            )));
        }
        if !self.hh_coef.is_finite() || self.hh_coef <= T::zero() {
            return Err(Error::InvalidConfig(format!(
                "hh_coef must be positive, got {}",
                self.hh_coef
            )));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidConfig(
                "mode-search grid needs at least 2 points".into(),
            ));
        }
        if self.j == 0 {
            return Err(Error::InvalidConfig("j must be at least 1".into()));
        }
        Ok(())
    }

    fn schedule_description(&self) -> String {
        format!(
            "h_K: kNN rank ceil({} * n) (empirical small-ball mass held at about {}); \
             h_H = {} * n^(-{}); mode grid M = {}",
            self.knn_frac, self.knn_frac, self.hh_coef, self.hh_exponent, self.grid_points
        )
    }
}

/// One replication's outcome.
#[derive(Clone, Debug, Serialize)]
pub struct RateRow<T> {
    pub n: usize,
    pub replication: usize,
    /// Absent when the replication was excluded (empty ball).
    pub abs_error: Option<T>,
    pub excluded: bool,
}

/// Per-sample-size aggregate.
#[derive(Clone, Debug, Serialize)]
pub struct RateSummaryRow<T> {
    pub n: usize,
    pub k: usize,
    pub h_h: T,
    /// `(mean |error|^p)^{1/p}` over valid replications.
    pub lp_error: T,
    pub median_abs_error: T,
    /// Mean resolved curve bandwidth.
    pub mean_h_k: T,
    /// Empirical small-ball mass at `h_K`, `k / n` under the kNN schedule.
    pub small_ball: T,
    pub excluded: usize,
}

/// Full study report.
#[derive(Clone, Debug, Serialize)]
pub struct RateStudyReport<T> {
    pub rows: Vec<RateRow<T>>,
    pub per_n: Vec<RateSummaryRow<T>>,
    /// Fitted log-log slope of the L^p error against n.
    pub slope: T,
    pub intercept: T,
    /// `-1/(2j)`: the variance-term exponent when the kNN schedule keeps
    /// `n * phi_x(h_K)` proportional to `n`.
    pub reference_exponent: T,
    pub schedule: String,
    pub excluded_total: usize,
    pub seed: u64,
}

/// Runs the Monte Carlo error-decay study. Per replication: draw a sample
/// and a fresh query curve, resolve bandwidths from the schedule, estimate
/// the mode at the query and record the absolute error against the oracle.
/// Replication seeds are `spec.seed + replication counter`, so results are
/// byte-identical regardless of the worker count.
pub fn rate_study<T: Real>(
    spec: &GeneratorSpec<T>,
    cfg: &RateStudyConfig<T>,
) -> Result<RateStudyReport<T>> {
    spec.validate()?;
    cfg.validate()?;

    let reps = cfg.replications;
    let jobs: Vec<(usize, usize, usize)> = cfg
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(ni, &n)| (0..reps).map(move |r| (ni, n, r)))
        .collect();

    let outcomes: Vec<Result<(Option<T>, T)>> = jobs
        .par_iter()
        .map(|&(ni, n, r)| {
            let rep_seed = spec.seed.wrapping_add((ni * reps + r) as u64);
            replication_error(spec, cfg, n, rep_seed)
        })
        .collect();

    let oracle_check = outcomes.iter().find_map(|o| o.as_ref().err());
    if let Some(e) = oracle_check {
        return Err(Error::InvalidConfig(format!("replication failed: {e}")));
    }

    let mut rows = Vec::with_capacity(jobs.len());
    let mut per_n = Vec::with_capacity(cfg.n_grid.len());
    let mut excluded_total = 0usize;
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let mut errors = Vec::with_capacity(reps);
        let mut hks = Vec::with_capacity(reps);
        let mut excluded = 0usize;
        for r in 0..reps {
            let (err, h_k) = outcomes[ni * reps + r].as_ref().expect("checked above");
            rows.push(RateRow {
                n,
                replication: r,
                abs_error: *err,
                excluded: err.is_none(),
            });
            match err {
                Some(e) => {
                    errors.push(*e);
                    hks.push(*h_k);
                }
                None => excluded += 1,
            }
        }
        excluded_total += excluded;
        if errors.is_empty() {
            return Err(Error::NoUsableBandwidth);
        }
        let p = cfg.p;
        let lp_error =
            (errors.iter().map(|&e| e.powf(p)).sum::<T>() / T::of(errors.len())).powf(p.recip());
        let k = knn_rank(cfg.knn_frac, n);
        per_n.push(RateSummaryRow {
            n,
            k,
            h_h: hh_value(cfg, n),
            lp_error,
            median_abs_error: median(&errors),
            mean_h_k: hks.iter().copied().sum::<T>() / T::of(hks.len()),
            small_ball: T::of(k) / T::of(n),
            excluded,
        });
    }

    let ln_n: Vec<T> = per_n.iter().map(|row| T::of(row.n).ln()).collect();
    let ln_e: Vec<T> = per_n.iter().map(|row| row.lp_error.ln()).collect();
    let (slope, intercept) = ols_line(&ln_n, &ln_e);

    Ok(RateStudyReport {
        rows,
        per_n,
        slope,
        intercept,
        reference_exponent: -(T::of(2 * cfg.j as usize)).recip(),
        schedule: cfg.schedule_description(),
        excluded_total,
        seed: spec.seed,
    })
}

fn knn_rank<T: Real>(frac: T, n: usize) -> usize {
    let k = (frac * T::of(n)).ceil().to_usize().unwrap_or(1);
    k.clamp(1, n)
}

fn hh_value<T: Real>(cfg: &RateStudyConfig<T>, n: usize) -> T {
    cfg.hh_coef * T::of(n).powf(-cfg.hh_exponent)
}

/// Absolute mode-estimation error of one replication; `None` marks an
/// excluded (empty-ball) replication. Also returns the resolved `h_K`.
fn replication_error<T: Real>(
    spec: &GeneratorSpec<T>,
    cfg: &RateStudyConfig<T>,
    n: usize,
    rep_seed: u64,
) -> Result<(Option<T>, T)> {
    let (sample, query) = spec.generate_seeded(n, rep_seed, true)?;
    let query = query.expect("query requested");
    let oracle = spec.oracle();

    let semimetric = SemiMetricSpec::l2();
    let k = knn_rank(cfg.knn_frac, n);
    let h_k = knn_bandwidth(&semimetric, &sample, &query, k)?;
    let h_h = hh_value(cfg, n);

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
    let interval = ModeSearchInterval::new(lo - h_h, hi + h_h, cfg.grid_points)?;

    let est = EstimatorConfig::new(semimetric, cfg.k_kernel, cfg.h_kernel, h_k, h_h, interval)?;
    let curve = est.cond_density_curve(&sample, &query)?;
    if curve.effective_n == 0 {
        return Ok((None, h_k));
    }
    let mode = est.mode_from_density(&curve);
    Ok((Some((mode.theta_hat - oracle.theta(&query)).abs()), h_k))
}
