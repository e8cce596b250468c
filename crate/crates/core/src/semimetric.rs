//! Semi-metrics between curves: L2, finite-difference derivative, and
//! functional-PCA projection distances, all under trapezoidal quadrature.

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::numeric::{dot_weighted, sym_eigen, trapezoid_weights};
use crate::sample::FunctionalSample;
use crate::scalar::Real;

/// Declarative choice of the semi-metric `d`.
///
/// The PCA family must be fitted with [`SemiMetricSpec::fit_pca`] before it
/// can measure distances; fitting stores the top-`q` eigenvectors of the
/// empirical covariance of mean-centered curves, orthonormal under the
/// quadrature inner product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum SemiMetricSpec<T> {
    L2,
    Deriv {
        q: usize,
    },
    Pca {
        q: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        eigenbasis: Option<Vec<Vec<T>>>,
    },
}

impl<T: Real> SemiMetricSpec<T> {
    pub fn l2() -> Self {
        SemiMetricSpec::L2
    }

    pub fn deriv(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidConfig(
                "derivative order q must be at least 1".into(),
            ));
        }
        Ok(SemiMetricSpec::Deriv { q })
    }

    pub fn pca(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidConfig(
                "PCA component count q must be at least 1".into(),
            ));
        }
        Ok(SemiMetricSpec::Pca {
            q,
            eigenbasis: None,
        })
    }

    /// Whether the spec is ready to measure distances.
    pub fn is_fitted(&self) -> bool {
        !matches!(
            self,
            SemiMetricSpec::Pca {
                eigenbasis: None,
                ..
            }
        )
    }

    /// Fits the PCA eigenbasis on a sample. Errors when called on another
    /// family or when `q` exceeds the grid size or the curve count.
    pub fn fit_pca(&self, sample: &FunctionalSample<T>) -> Result<Self> {
        let q = match self {
            SemiMetricSpec::Pca { q, .. } => *q,
            _ => {
                return Err(Error::InvalidConfig(
                    "fit_pca requires a PCA semi-metric".into(),
                ))
            }
        };
        let n = sample.n();
        let grid = sample.grid();
        let m = grid.len();
        if q > m {
            return Err(Error::PcaRank {
                q,
                max: m,
                what: "grid size",
            });
        }
        if q > n {
            return Err(Error::PcaRank {
                q,
                max: n,
                what: "curve count",
            });
        }

        let w = trapezoid_weights(grid);
        let sqrt_w: Vec<T> = w.iter().map(|&x| x.sqrt()).collect();

        let mut mean = vec![T::zero(); m];
        for c in sample.curves() {
            for (j, &v) in c.values().iter().enumerate() {
                mean[j] += v;
            }
        }
        let n_t = T::of(n);
        for v in mean.iter_mut() {
            *v /= n_t;
        }

        // B = W^{1/2} S W^{1/2} with S the empirical covariance matrix;
        // eigenvectors of B pulled back by W^{-1/2} are orthonormal under
        // the quadrature inner product.
        let centered: Vec<Vec<T>> = sample
            .curves()
            .iter()
            .map(|c| {
                c.values()
                    .iter()
                    .zip(&mean)
                    .map(|(&v, &mu)| v - mu)
                    .collect()
            })
            .collect();
        let mut b = vec![vec![T::zero(); m]; m];
        for row in &centered {
            for j in 0..m {
                let rj = row[j];
                for k in j..m {
                    b[j][k] += rj * row[k];
                }
            }
        }
        for j in 0..m {
            for k in j..m {
                let v = b[j][k] / n_t * sqrt_w[j] * sqrt_w[k];
                b[j][k] = v;
                b[k][j] = v;
            }
        }

        let eig = sym_eigen(&b);
        let eigenbasis: Vec<Vec<T>> = eig
            .vectors
            .into_iter()
            .take(q)
            .map(|v| v.iter().zip(&sqrt_w).map(|(&x, &s)| x / s).collect())
            .collect();

        Ok(SemiMetricSpec::Pca {
            q,
            eigenbasis: Some(eigenbasis),
        })
    }

    /// Distance between two curves on the same grid.
    pub fn distance(&self, u: &Curve<T>, v: &Curve<T>) -> Result<T> {
        if !u.same_grid(v) {
            return Err(Error::GridMismatch);
        }
        match self {
            SemiMetricSpec::L2 => Ok(l2_distance(u.times(), u.values(), v.values())),
            SemiMetricSpec::Deriv { q } => {
                let (times, du) = finite_difference(u.times(), u.values(), *q)?;
                let (_, dv) = finite_difference(v.times(), v.values(), *q)?;
                Ok(l2_distance(&times, &du, &dv))
            }
            SemiMetricSpec::Pca { eigenbasis, .. } => {
                let basis = eigenbasis.as_ref().ok_or(Error::UnfittedPca)?;
                if basis.iter().any(|e| e.len() != u.len()) {
                    return Err(Error::GridMismatch);
                }
                let w = trapezoid_weights(u.times());
                let diff: Vec<T> = u
                    .values()
                    .iter()
                    .zip(v.values())
                    .map(|(&a, &b)| a - b)
                    .collect();
                let mut acc = T::zero();
                for e in basis {
                    let proj = dot_weighted(&w, &diff, e);
                    acc += proj * proj;
                }
                Ok(acc.sqrt())
            }
        }
    }

    /// Distances from `x` to every curve of the sample; entry `i` equals
    /// `distance(x, curves[i])` exactly.
    pub fn distance_matrix(&self, sample: &FunctionalSample<T>, x: &Curve<T>) -> Result<Vec<T>> {
        sample
            .curves()
            .iter()
            .map(|c| self.distance(x, c))
            .collect()
    }
}

fn l2_distance<T: Real>(times: &[T], a: &[T], b: &[T]) -> T {
    let half = T::lit(0.5);
    let sq = |x: T| x * x;
    let mut acc = T::zero();
    for j in 1..times.len() {
        let f0 = sq(a[j - 1] - b[j - 1]);
        let f1 = sq(a[j] - b[j]);
        acc += (times[j] - times[j - 1]) * (f0 + f1) * half;
    }
    acc.sqrt()
}

/// Forward finite differences of order `q`; each application shortens the
/// grid by one point (keeping left endpoints).
fn finite_difference<T: Real>(times: &[T], values: &[T], q: usize) -> Result<(Vec<T>, Vec<T>)> {
    if times.len() < q + 2 {
        return Err(Error::InvalidConfig(format!(
            "derivative order {q} needs at least {} grid points, got {}",
            q + 2,
            times.len()
        )));
    }
    let mut t = times.to_vec();
    let mut v = values.to_vec();
    for _ in 0..q {
        let mut dv = Vec::with_capacity(v.len() - 1);
        for j in 0..v.len() - 1 {
            dv.push((v[j + 1] - v[j]) / (t[j + 1] - t[j]));
        }
        t.truncate(dv.len());
        v = dv;
    }
    Ok((t, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn uniform_grid(m: usize) -> Vec<f64> {
        (0..m).map(|j| j as f64 / (m - 1) as f64).collect()
    }

    fn curve_fn(m: usize, f: impl Fn(f64) -> f64) -> Curve<f64> {
        let t = uniform_grid(m);
        let v = t.iter().map(|&x| f(x)).collect();
        Curve::new(t, v).unwrap()
    }

    #[test]
    fn l2_zero_on_identical_curves() {
        let u = curve_fn(17, |t| t * t - 3.0);
        assert_eq!(SemiMetricSpec::l2().distance(&u, &u).unwrap(), 0.0);
    }

    #[test]
    fn l2_unit_distance_between_constants() {
        for m in [2, 5, 101] {
            let u = curve_fn(m, |_| 0.0);
            let v = curve_fn(m, |_| 1.0);
            assert_relative_eq!(
                SemiMetricSpec::l2().distance(&u, &v).unwrap(),
                1.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn deriv_ignores_vertical_shifts() {
        // first differences of t and t + 5 agree on a 101-point grid
        let u = curve_fn(101, |t| t);
        let v = curve_fn(101, |t| t + 5.0);
        let d = SemiMetricSpec::deriv(1).unwrap().distance(&u, &v).unwrap();
        assert!(d.abs() < 1e-10, "d = {d}");
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let u = curve_fn(10, |t| t);
        let v = curve_fn(11, |t| t);
        assert!(matches!(
            SemiMetricSpec::l2().distance(&u, &v),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn unfitted_pca_is_an_error() {
        let u = curve_fn(10, |t| t);
        assert!(matches!(
            SemiMetricSpec::pca(2).unwrap().distance(&u, &u),
            Err(Error::UnfittedPca)
        ));
    }

    fn random_sample(n: usize, m: usize, seed: u64) -> FunctionalSample<f64> {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = uniform_grid(m);
        let curves = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
                Curve::new(grid.clone(), v).unwrap()
            })
            .collect();
        let responses = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        FunctionalSample::new(curves, responses).unwrap()
    }

    #[test]
    fn full_rank_pca_matches_weighted_euclidean() {
        let m = 7;
        let sample = random_sample(12, m, 3);
        let spec = SemiMetricSpec::pca(m).unwrap().fit_pca(&sample).unwrap();
        let u = &sample.curves()[0];
        let v = &sample.curves()[1];
        let d = spec.distance(u, v).unwrap();

        // oracle: quadrature-weighted Euclidean distance of the value vectors
        let w = trapezoid_weights(u.times());
        let direct: f64 = u
            .values()
            .iter()
            .zip(v.values())
            .zip(&w)
            .map(|((&a, &b), &wj)| wj * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert_relative_eq!(d, direct, epsilon = 1e-8);
    }

    #[test]
    fn sine_amplitude_sample_recovers_sine_eigenvector() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let m = 41;
        let grid = uniform_grid(m);
        let curves: Vec<Curve<f64>> = (0..40)
            .map(|_| {
                let a: f64 = rng.random_range(-3.0..3.0);
                let v = grid
                    .iter()
                    .map(|&t| a * (std::f64::consts::PI * t).sin())
                    .collect();
                Curve::new(grid.clone(), v).unwrap()
            })
            .collect();
        let sample = FunctionalSample::new(curves, vec![0.0; 40]).unwrap();
        let spec = SemiMetricSpec::pca(1).unwrap().fit_pca(&sample).unwrap();
        let basis = match &spec {
            SemiMetricSpec::Pca { eigenbasis, .. } => eigenbasis.as_ref().unwrap(),
            _ => unreachable!(),
        };
        let sine: Vec<f64> = grid
            .iter()
            .map(|&t| (std::f64::consts::PI * t).sin())
            .collect();
        let w = trapezoid_weights(&grid);
        let cos_sim = dot_weighted(&w, &basis[0], &sine).abs()
            / (dot_weighted(&w, &basis[0], &basis[0]).sqrt()
                * dot_weighted(&w, &sine, &sine).sqrt());
        assert!(cos_sim > 0.999, "cosine similarity {cos_sim}");
    }

    #[test]
    fn constant_sample_fit_gives_zero_distances() {
        let grid = uniform_grid(9);
        let curves: Vec<Curve<f64>> = (0..5)
            .map(|_| Curve::new(grid.clone(), vec![2.0; 9]).unwrap())
            .collect();
        let sample = FunctionalSample::new(curves, vec![0.0; 5]).unwrap();
        let spec = SemiMetricSpec::pca(2).unwrap().fit_pca(&sample).unwrap();
        let d = spec
            .distance(&sample.curves()[0], &sample.curves()[3])
            .unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn pca_rank_errors() {
        let sample = random_sample(4, 6, 7);
        assert!(matches!(
            SemiMetricSpec::pca(7).unwrap().fit_pca(&sample),
            Err(Error::PcaRank { .. })
        ));
        assert!(matches!(
            SemiMetricSpec::pca(5).unwrap().fit_pca(&sample),
            Err(Error::PcaRank { .. })
        ));
    }

    #[test]
    fn eigenbasis_is_orthonormal_under_quadrature() {
        let sample = random_sample(20, 9, 5);
        let spec = SemiMetricSpec::pca(3).unwrap().fit_pca(&sample).unwrap();
        let basis = match &spec {
            SemiMetricSpec::Pca { eigenbasis, .. } => eigenbasis.as_ref().unwrap(),
            _ => unreachable!(),
        };
        let w = trapezoid_weights(sample.grid());
        for i in 0..3 {
            for j in 0..3 {
                let ip = dot_weighted(&w, &basis[i], &basis[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(ip, expect, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn low_rank_pca_admits_distinct_curves_at_distance_zero() {
        // semi-metric, not metric: perturb orthogonally to the eigenbasis
        let sample = random_sample(15, 8, 9);
        let spec = SemiMetricSpec::pca(2).unwrap().fit_pca(&sample).unwrap();
        let basis = match &spec {
            SemiMetricSpec::Pca { eigenbasis, .. } => eigenbasis.as_ref().unwrap(),
            _ => unreachable!(),
        };
        let grid = sample.grid().to_vec();
        let w = trapezoid_weights(&grid);
        // Gram-Schmidt a bump against the basis
        let mut bump: Vec<f64> = (0..8).map(|j| if j == 3 { 1.0 } else { 0.0 }).collect();
        for e in basis {
            let coef = dot_weighted(&w, &bump, e);
            for j in 0..8 {
                bump[j] -= coef * e[j];
            }
        }
        let u = sample.curves()[0].clone();
        let v_values: Vec<f64> = u.values().iter().zip(&bump).map(|(&a, &b)| a + b).collect();
        let v = Curve::new(grid, v_values).unwrap();
        assert_ne!(u.values(), v.values());
        let d = spec.distance(&u, &v).unwrap();
        assert!(d < 1e-10, "expected degenerate distance, got {d}");
    }

    #[test]
    fn distance_matrix_equals_elementwise_calls() {
        let sample = random_sample(10, 12, 21);
        let x = sample.curves()[4].clone();
        for spec in [
            SemiMetricSpec::l2(),
            SemiMetricSpec::deriv(1).unwrap(),
            SemiMetricSpec::pca(3).unwrap().fit_pca(&sample).unwrap(),
        ] {
            let batch = spec.distance_matrix(&sample, &x).unwrap();
            assert_eq!(batch.len(), sample.n());
            for (i, c) in sample.curves().iter().enumerate() {
                assert_eq!(batch[i], spec.distance(&x, c).unwrap());
            }
            assert_eq!(batch[4], 0.0);
        }
    }

    #[test]
    fn distance_matrix_single_observation() {
        let sample = random_sample(1, 6, 8);
        let x = sample.curves()[0].clone();
        let batch = SemiMetricSpec::l2().distance_matrix(&sample, &x).unwrap();
        assert_eq!(batch, vec![0.0]);
    }

    #[test]
    fn serde_round_trip_and_shape() {
        let spec = SemiMetricSpec::<f64>::deriv(2).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"family":"deriv","q":2}"#);
        let back: SemiMetricSpec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);

        let sample = random_sample(6, 4, 2);
        let fitted = SemiMetricSpec::pca(2).unwrap().fit_pca(&sample).unwrap();
        let json = serde_json::to_string(&fitted).unwrap();
        assert!(json.contains(r#""family":"pca""#) && json.contains(r#""eigenbasis""#));
        let back: SemiMetricSpec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, fitted);
    }

    proptest! {
        #[test]
        fn semimetric_axioms_hold(seed in 0u64..500) {
            let sample = random_sample(2, 10, seed);
            let u = &sample.curves()[0];
            let v = &sample.curves()[1];
            let fitted = SemiMetricSpec::pca(2).unwrap().fit_pca(&random_sample(8, 10, seed ^ 0xabc)).unwrap();
            for spec in [SemiMetricSpec::l2(), SemiMetricSpec::deriv(1).unwrap(), fitted] {
                let duv = spec.distance(u, v).unwrap();
                let dvu = spec.distance(v, u).unwrap();
                prop_assert!(duv >= 0.0);
                prop_assert_eq!(duv, dvu);
                prop_assert_eq!(spec.distance(u, u).unwrap(), 0.0);
            }
        }
    }
}
