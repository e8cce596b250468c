//! Double-kernel conditional density estimation for curve-valued predictors
//! and the grid-argmax conditional mode, with the empirical small-ball
//! diagnostic.
//!
//! For a query curve `x`, observation weights are
//! `W_i = K(d(x, X_i)/h_K) / Σ_j K(d(x, X_j)/h_K)` (zero vector when the
//! denominator vanishes), the conditional density estimate at `y` is
//! `h_H^{-1} Σ_i W_i H((y - Y_i)/h_H)`, and the mode estimate is the argmax
//! of that density over an equally spaced grid on the search interval, ties
//! broken towards the smallest grid value.

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::kernel::{CurveKernel, ResponseKernel};
use crate::sample::FunctionalSample;
use crate::scalar::Real;
use crate::semimetric::SemiMetricSpec;

/// Relative tolerance within which grid maxima count as tied.
const TIE_REL_TOL: f64 = 1e-12;

/// Mode-search interval `(lower, upper)` scanned on `grid_points` equally
/// spaced values, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSearchInterval<T> {
    lower: T,
    upper: T,
    grid_points: usize,
}

impl<T: Real> ModeSearchInterval<T> {
    pub fn new(lower: T, upper: T, grid_points: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidConfig(format!(
                "mode-search interval needs finite lower < upper, got [{lower}, {upper}]"
            )));
        }
        if grid_points < 2 {
            return Err(Error::InvalidConfig(format!(
                "mode-search grid needs at least 2 points, got {grid_points}"
            )));
        }
        Ok(ModeSearchInterval {
            lower,
            upper,
            grid_points,
        })
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points
    }

    /// Grid value `m`; both endpoints are exact.
    pub fn point(&self, m: usize) -> T {
        debug_assert!(m < self.grid_points);
        if m == 0 {
            self.lower
        } else if m == self.grid_points - 1 {
            self.upper
        } else {
            self.lower + (self.upper - self.lower) * T::of(m) / T::of(self.grid_points - 1)
        }
    }

    pub fn y_grid(&self) -> Vec<T> {
        (0..self.grid_points).map(|m| self.point(m)).collect()
    }
}

/// Everything the estimator needs besides the data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimatorConfig<T> {
    pub semimetric: SemiMetricSpec<T>,
    pub k_kernel: CurveKernel,
    pub h_kernel: ResponseKernel,
    h_k: T,
    h_h: T,
    k_scale: T,
    pub interval: ModeSearchInterval<T>,
}

impl<T: Real> EstimatorConfig<T> {
    pub fn new(
        semimetric: SemiMetricSpec<T>,
        k_kernel: CurveKernel,
        h_kernel: ResponseKernel,
        h_k: T,
        h_h: T,
        interval: ModeSearchInterval<T>,
    ) -> Result<Self> {
        for (name, h) in [("h_k", h_k), ("h_h", h_h)] {
            if !(h.is_finite() && h > T::zero()) {
                let _ = name;
                return Err(Error::NonPositiveBandwidth(h.to_f64().unwrap_or(f64::NAN)));
            }
        }
        if !k_kernel.h6_compliant() {
            log::warn!(
                "curve kernel '{}' vanishes at the support boundary; estimates remain usable but \
                 the boundedness condition behind the convergence guarantees does not hold",
                k_kernel.name()
            );
        }
        Ok(EstimatorConfig {
            semimetric,
            k_kernel,
            h_kernel,
            h_k,
            h_h,
            k_scale: T::one(),
            interval,
        })
    }

    /// Multiplies every evaluation of `K` by a positive constant. Weight
    /// normalization makes the estimator invariant to this factor; kernels
    /// are only defined up to one.
    pub fn with_k_scale(mut self, k_scale: T) -> Result<Self> {
        if !(k_scale.is_finite() && k_scale > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "k_scale must be positive and finite, got {k_scale}"
            )));
        }
        self.k_scale = k_scale;
        Ok(self)
    }

    pub fn h_k(&self) -> T {
        self.h_k
    }

    pub fn h_h(&self) -> T {
        self.h_h
    }

    fn kernel_values(&self, distances: &[T]) -> Vec<T> {
        distances
            .iter()
            .map(|&d| self.k_scale * self.k_kernel.eval(d / self.h_k))
            .collect()
    }

    /// Normalized kernel weights of the sample curves at `x`: the zero
    /// vector when no kernel value is positive, otherwise nonnegative
    /// weights summing to one.
    pub fn weights(&self, sample: &FunctionalSample<T>, x: &Curve<T>) -> Result<Vec<T>> {
        let distances = self.semimetric.distance_matrix(sample, x)?;
        Ok(self.weights_from_kernels(self.kernel_values(&distances)))
    }

    fn weights_from_kernels(&self, mut k: Vec<T>) -> Vec<T> {
        // normalize by the maximum first: scale factors on K cancel exactly
        // for flat kernels and to rounding error otherwise
        let k_max = k.iter().copied().fold(T::zero(), T::max);
        if k_max <= T::zero() {
            for w in k.iter_mut() {
                *w = T::zero();
            }
            return k;
        }
        for w in k.iter_mut() {
            *w /= k_max;
        }
        let total: T = k.iter().copied().sum();
        for w in k.iter_mut() {
            *w /= total;
        }
        k
    }

    /// Conditional density estimate at a single response value `y`.
    pub fn cond_density_at(&self, sample: &FunctionalSample<T>, x: &Curve<T>, y: T) -> Result<T> {
        let weights = self.weights(sample, x)?;
        Ok(self.density_value(&weights, sample.responses(), y))
    }

    fn density_value(&self, weights: &[T], responses: &[T], y: T) -> T {
        let mut acc = T::zero();
        for (&w, &yi) in weights.iter().zip(responses) {
            if w > T::zero() {
                acc += w * self.h_kernel.eval((y - yi) / self.h_h);
            }
        }
        acc / self.h_h
    }

    /// Conditional density evaluated on the mode-search grid, together with
    /// the number of observations strictly inside the ball `d(x, X_i) < h_K`.
    pub fn cond_density_curve(
        &self,
        sample: &FunctionalSample<T>,
        x: &Curve<T>,
    ) -> Result<DensityCurveEstimate<T>> {
        let distances = self.semimetric.distance_matrix(sample, x)?;
        let effective_n = distances.iter().filter(|&&d| d < self.h_k).count();
        let weights = self.weights_from_kernels(self.kernel_values(&distances));
        if effective_n == 0 {
            log::warn!("empty ball: no sample curve within h_k of the query; density is zero");
        }
        let y_grid = self.interval.y_grid();
        let density = y_grid
            .iter()
            .map(|&y| self.density_value(&weights, sample.responses(), y))
            .collect();
        Ok(DensityCurveEstimate {
            y_grid,
            density,
            effective_n,
        })
    }

    /// Conditional mode estimate: grid argmax of the conditional density,
    /// ties resolved to the smallest grid value.
    pub fn mode_estimate(
        &self,
        sample: &FunctionalSample<T>,
        x: &Curve<T>,
    ) -> Result<ModeEstimate<T>> {
        let curve = self.cond_density_curve(sample, x)?;
        Ok(self.mode_from_density(&curve))
    }

    /// Argmax step only, reusing an already computed density curve.
    pub fn mode_from_density(&self, curve: &DensityCurveEstimate<T>) -> ModeEstimate<T> {
        let max = curve
            .density
            .iter()
            .copied()
            .fold(T::neg_infinity(), T::max);
        let threshold = max * (T::one() - T::lit(TIE_REL_TOL));
        let mut theta_hat = self.interval.lower();
        let mut density_at_mode = max;
        let mut tie_count = 0usize;
        let mut first = true;
        for (m, &d) in curve.density.iter().enumerate() {
            if d >= threshold {
                tie_count += 1;
                if first {
                    theta_hat = curve.y_grid[m];
                    density_at_mode = d;
                    first = false;
                }
            }
        }

        let mut warnings = Vec::new();
        if curve.effective_n == 0 {
            warnings.push(
                "empty ball: no observation within h_k of the query; the reported mode is the \
                 interval lower bound and is unreliable"
                    .to_string(),
            );
        }
        if tie_count > 1 {
            warnings.push(format!(
                "density maximum attained at {tie_count} grid points; smallest maximizer returned"
            ));
        }
        if !self.k_kernel.h6_compliant() {
            warnings.push(format!(
                "curve kernel '{}' vanishes at the support boundary (flagged non-compliant)",
                self.k_kernel.name()
            ));
        }

        ModeEstimate {
            theta_hat,
            density_at_mode,
            tie_count,
            warnings,
        }
    }
}

/// Conditional density sampled on the mode-search grid.
#[derive(Clone, Debug, Serialize)]
pub struct DensityCurveEstimate<T> {
    pub y_grid: Vec<T>,
    pub density: Vec<T>,
    /// Number of observations strictly inside the ball around the query.
    pub effective_n: usize,
}

/// Conditional mode estimate with tie diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct ModeEstimate<T> {
    pub theta_hat: T,
    pub density_at_mode: T,
    pub tie_count: usize,
    pub warnings: Vec<String>,
}

/// Fraction of sample curves strictly inside the ball `B(x, h)`; the
/// empirical plug-in for the small-ball probability.
pub fn small_ball_empirical<T: Real>(
    spec: &SemiMetricSpec<T>,
    sample: &FunctionalSample<T>,
    x: &Curve<T>,
    h: T,
) -> Result<T> {
    if !(h.is_finite() && h > T::zero()) {
        return Err(Error::NonPositiveBandwidth(h.to_f64().unwrap_or(f64::NAN)));
    }
    let distances = spec.distance_matrix(sample, x)?;
    let inside = distances.iter().filter(|&&d| d < h).count();
    Ok(T::of(inside) / T::of(sample.n()))
}
