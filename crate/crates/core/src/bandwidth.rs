//! Data-driven bandwidth selection: k-nearest-neighbour curve bandwidths
//! and leave-one-out cross-validation of `(h_K, h_H)` pairs scored by
//! squared mode-prediction error.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::estimator::{EstimatorConfig, ModeSearchInterval};
use crate::kernel::{CurveKernel, ResponseKernel};
use crate::numeric::sample_sd;
use crate::sample::FunctionalSample;
use crate::scalar::Real;
use crate::semimetric::SemiMetricSpec;

/// A curve-bandwidth candidate: either a fixed value of `h_K` or a
/// nearest-neighbour rank resolved per query point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HkCandidate<T> {
    Fixed(T),
    KnnRank(usize),
}

impl<T: Real> HkCandidate<T> {
    fn sort_key(&self) -> (u8, f64) {
        match self {
            HkCandidate::Fixed(h) => (0, h.to_f64().unwrap_or(f64::NAN)),
            HkCandidate::KnnRank(k) => (1, *k as f64),
        }
    }
}

/// Candidate grids for cross-validation (leave-one-out).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BandwidthGrid<T> {
    pub hk_candidates: Vec<HkCandidate<T>>,
    pub hh_candidates: Vec<T>,
}

impl<T: Real> BandwidthGrid<T> {
    pub fn new(hk_candidates: Vec<HkCandidate<T>>, hh_candidates: Vec<T>) -> Result<Self> {
        let grid = BandwidthGrid {
            hk_candidates,
            hh_candidates,
        };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        if self.hk_candidates.is_empty() || self.hh_candidates.is_empty() {
            return Err(Error::InvalidConfig(
                "bandwidth grid needs at least one h_K and one h_H candidate".into(),
            ));
        }
        for c in &self.hk_candidates {
            match c {
                HkCandidate::Fixed(h) if !(h.is_finite() && *h > T::zero()) => {
                    return Err(Error::NonPositiveBandwidth(h.to_f64().unwrap_or(f64::NAN)));
                }
                HkCandidate::KnnRank(0) => {
                    return Err(Error::InvalidConfig(
                        "nearest-neighbour rank candidates must be at least 1".into(),
                    ));
                }
                _ => {}
            }
        }
        for &h in &self.hh_candidates {
            if !(h.is_finite() && h > T::zero()) {
                return Err(Error::NonPositiveBandwidth(h.to_f64().unwrap_or(f64::NAN)));
            }
        }
        Ok(())
    }

    /// Default grid: nearest-neighbour ranks at 5/10/20/40% of `n` and
    /// Silverman-scale response bandwidths times 0.5/1/2.
    pub fn default_for(sample: &FunctionalSample<T>) -> Self {
        let n = sample.n();
        let mut ranks: Vec<usize> = [0.05, 0.10, 0.20, 0.40]
            .iter()
            .map(|f| ((f * n as f64).ceil() as usize).clamp(1, n.saturating_sub(1).max(1)))
            .collect();
        ranks.dedup();
        let hh0 = silverman_bandwidth(sample.responses());
        let hh = [0.5, 1.0, 2.0].iter().map(|&f| hh0 * T::lit(f)).collect();
        BandwidthGrid {
            hk_candidates: ranks.into_iter().map(HkCandidate::KnnRank).collect(),
            hh_candidates: hh,
        }
    }
}

/// Distance to the k-th nearest sample curve, inflated so that exactly `k`
/// curves fall strictly inside the ball (for distinct positive distances).
/// When the k-th distance is zero (curves duplicating the query), returns a
/// positive radius below the next positive distance, so the ball still
/// captures the zero-distance curves instead of degenerating to emptiness.
pub fn knn_bandwidth<T: Real>(
    spec: &SemiMetricSpec<T>,
    sample: &FunctionalSample<T>,
    x: &Curve<T>,
    k: usize,
) -> Result<T> {
    let n = sample.n();
    if k == 0 || k > n {
        return Err(Error::KnnRankOutOfRange { k, n });
    }
    let mut distances = spec.distance_matrix(sample, x)?;
    distances.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let kth = distances[k - 1];
    if kth > T::zero() {
        // 1e-9 relative inflation; widened to a few ulps for narrow scalar types
        let inflation = T::lit(1e-9).max(T::epsilon() * T::lit(4.0));
        Ok(kth * (T::one() + inflation))
    } else {
        match distances.iter().copied().find(|&d| d > T::zero()) {
            Some(next) => Ok(next * T::lit(0.5)),
            None => Ok(T::one()),
        }
    }
}

/// Silverman-style scale for the response bandwidth: `1.06 sd(Y) n^{-1/5}`,
/// with a small positive fallback when the responses are degenerate.
pub fn silverman_bandwidth<T: Real>(responses: &[T]) -> T {
    let n = responses.len().max(1);
    let sd = sample_sd(responses);
    let scale = if sd > T::zero() {
        sd
    } else {
        let magnitude = responses.iter().fold(T::zero(), |acc, &y| acc.max(y.abs()));
        (magnitude * T::lit(1e-3)).max(T::lit(1e-6))
    };
    T::lit(1.06) * scale * T::of(n).powf(-T::lit(0.2))
}

/// Estimator pieces held fixed during cross-validation. When `interval` is
/// `None` each fold derives its own interval from the training responses
/// padded by the candidate `h_H`.
#[derive(Clone, Debug)]
pub struct CvTemplate<T> {
    pub semimetric: SemiMetricSpec<T>,
    pub k_kernel: CurveKernel,
    pub h_kernel: ResponseKernel,
    pub grid_points: usize,
    pub interval: Option<ModeSearchInterval<T>>,
}

/// One row of the cross-validation score table.
#[derive(Clone, Debug, Serialize)]
pub struct CvRow<T> {
    pub hk: HkCandidate<T>,
    pub hh: T,
    /// Mean squared leave-one-out error over usable folds; `None` when every
    /// fold was excluded.
    pub score: Option<T>,
    pub excluded_folds: usize,
}

/// Result of [`cv_select`]: the winning pair plus the full table.
#[derive(Clone, Debug, Serialize)]
pub struct CvSelection<T> {
    pub hk: HkCandidate<T>,
    pub hh: T,
    pub score: T,
    pub table: Vec<CvRow<T>>,
}

/// Leave-one-out cross-validation over the candidate grid. Each fold
/// predicts `Y_i` by the conditional mode computed from the sample without
/// pair `i`, evaluated at `x = X_i`; folds with empty balls are excluded
/// and counted. Ties in the score resolve to the first candidate in
/// `(h_K, h_H)` sort order.
pub fn cv_select<T: Real>(
    grid: &BandwidthGrid<T>,
    template: &CvTemplate<T>,
    sample: &FunctionalSample<T>,
) -> Result<CvSelection<T>> {
    grid.validate()?;
    let n = sample.n();
    if n < 3 {
        return Err(Error::InvalidConfig(format!(
            "cross-validation needs at least 3 observations, got {n}"
        )));
    }
    if !template.semimetric.is_fitted() {
        return Err(Error::UnfittedPca);
    }
    for c in &grid.hk_candidates {
        if let HkCandidate::KnnRank(k) = c {
            if *k > n - 1 {
                return Err(Error::KnnRankOutOfRange { k: *k, n: n - 1 });
            }
        }
    }

    let mut candidates: Vec<(HkCandidate<T>, T)> = grid
        .hk_candidates
        .iter()
        .flat_map(|&hk| grid.hh_candidates.iter().map(move |&hh| (hk, hh)))
        .collect();
    candidates.sort_by(|a, b| {
        let ka = a.0.sort_key();
        let kb = b.0.sort_key();
        ka.0.cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(a.1.partial_cmp(&b.1).expect("finite h_H"))
    });

    // flat (candidate, fold) grid, evaluated in parallel, assembled in order
    let jobs: Vec<(usize, usize)> = (0..candidates.len())
        .flat_map(|c| (0..n).map(move |i| (c, i)))
        .collect();
    let fold_errors: Vec<Option<T>> = jobs
        .par_iter()
        .map(|&(c, i)| {
            let (hk, hh) = candidates[c];
            cv_fold_error(template, sample, hk, hh, i)
        })
        .collect();

    let mut table = Vec::with_capacity(candidates.len());
    for (c, &(hk, hh)) in candidates.iter().enumerate() {
        let errs = &fold_errors[c * n..(c + 1) * n];
        let mut acc = T::zero();
        let mut used = 0usize;
        for e in errs.iter().flatten() {
            acc += *e;
            used += 1;
        }
        let score = if used > 0 {
            Some(acc / T::of(used))
        } else {
            None
        };
        table.push(CvRow {
            hk,
            hh,
            score,
            excluded_folds: n - used,
        });
    }

    let mut best: Option<(usize, T)> = None;
    for (idx, row) in table.iter().enumerate() {
        if let Some(s) = row.score {
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((idx, s));
            }
        }
    }
    let (idx, score) = best.ok_or(Error::NoUsableBandwidth)?;
    Ok(CvSelection {
        hk: table[idx].hk,
        hh: table[idx].hh,
        score,
        table,
    })
}

fn cv_fold_error<T: Real>(
    template: &CvTemplate<T>,
    sample: &FunctionalSample<T>,
    hk: HkCandidate<T>,
    hh: T,
    i: usize,
) -> Option<T> {
    let training = sample.leave_one_out(i);
    let x = &sample.curves()[i];
    let h_k = match hk {
        HkCandidate::Fixed(h) => h,
        HkCandidate::KnnRank(k) => knn_bandwidth(&template.semimetric, &training, x, k).ok()?,
    };
    let interval = match template.interval {
        Some(iv) => iv,
        None => {
            let lo = training
                .responses()
                .iter()
                .cloned()
                .fold(T::infinity(), T::min);
            let hi = training
                .responses()
                .iter()
                .cloned()
                .fold(T::neg_infinity(), T::max);
            ModeSearchInterval::new(lo - hh, hi + hh, template.grid_points).ok()?
        }
    };
    let cfg = EstimatorConfig::new(
        template.semimetric.clone(),
        template.k_kernel,
        template.h_kernel,
        h_k,
        hh,
        interval,
    )
    .ok()?;
    let curve = cfg.cond_density_curve(&training, x).ok()?;
    if curve.effective_n == 0 {
        return None;
    }
    let mode = cfg.mode_from_density(&curve);
    let err = mode.theta_hat - sample.responses()[i];
    Some(err * err)
}
