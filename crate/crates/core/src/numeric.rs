//! Shared numerical routines: trapezoidal quadrature, adaptive Simpson
//! integration, a cyclic Jacobi eigensolver for small symmetric matrices,
//! and least-squares line fitting.

use crate::scalar::Real;

/// Trapezoidal quadrature weights for an ascending grid.
///
/// `sum_j w[j] * f[j]` equals the trapezoid rule for `∫ f` over the grid.
pub fn trapezoid_weights<T: Real>(times: &[T]) -> Vec<T> {
    let m = times.len();
    assert!(m >= 2, "quadrature needs at least two grid points");
    let half = T::lit(0.5);
    let mut w = vec![T::zero(); m];
    w[0] = (times[1] - times[0]) * half;
    for j in 1..m - 1 {
        w[j] = (times[j + 1] - times[j - 1]) * half;
    }
    w[m - 1] = (times[m - 1] - times[m - 2]) * half;
    w
}

/// Trapezoid rule for `∫ f` over the grid.
pub fn trapezoid<T: Real>(times: &[T], values: &[T]) -> T {
    debug_assert_eq!(times.len(), values.len());
    let half = T::lit(0.5);
    let mut acc = T::zero();
    for j in 1..times.len() {
        acc += (times[j] - times[j - 1]) * (values[j] + values[j - 1]) * half;
    }
    acc
}

/// Weighted inner product `sum_j w[j] a[j] b[j]`.
pub fn dot_weighted<T: Real>(w: &[T], a: &[T], b: &[T]) -> T {
    debug_assert!(w.len() == a.len() && a.len() == b.len());
    let mut acc = T::zero();
    for j in 0..w.len() {
        acc += w[j] * a[j] * b[j];
    }
    acc
}

/// Adaptive Simpson integration of `f` over `[a, b]`.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> T {
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson_step(f, a, b, fa, fb);
    simpson_recurse(f, a, b, fa, fb, m, fm, whole, tol, 40)
}

fn simpson_step<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, fa: T, fb: T) -> (T, T, T) {
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let fm = f(m);
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    (m, fm, whole)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fb: T,
    m: T,
    fm: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let (lm, flm, left) = simpson_step(f, a, m, fa, fm);
    let (rm, frm, right) = simpson_step(f, m, b, fm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return left + right + delta / T::lit(15.0);
    }
    let half_tol = tol * T::lit(0.5);
    simpson_recurse(f, a, m, fa, fm, lm, flm, left, half_tol, depth - 1)
        + simpson_recurse(f, m, b, fm, fb, rm, frm, right, half_tol, depth - 1)
}

/// Eigen-decomposition of a small symmetric matrix, eigenpairs sorted by
/// descending eigenvalue (stable on ties).
pub struct SymEigen<T> {
    pub values: Vec<T>,
    /// `vectors[k]` is the eigenvector paired with `values[k]`.
    pub vectors: Vec<Vec<T>>,
}

/// Cyclic Jacobi eigensolver for a symmetric matrix.
///
/// Deterministic: fixed sweep order, stable descending sort, and the sign of
/// each eigenvector is normalized so its largest-magnitude component is
/// positive.
#[allow(clippy::needless_range_loop)]
pub fn sym_eigen<T: Real>(matrix: &[Vec<T>]) -> SymEigen<T> {
    let n = matrix.len();
    assert!(n > 0 && matrix.iter().all(|r| r.len() == n));
    let mut a: Vec<Vec<T>> = matrix.to_vec();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut row = vec![T::zero(); n];
            row[i] = T::one();
            row
        })
        .collect();

    let scale = a
        .iter()
        .flatten()
        .fold(T::zero(), |acc, &x| acc + x * x)
        .sqrt();
    let tol = T::epsilon() * (scale + T::one());

    for _sweep in 0..64 {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() <= tol * T::lit(1e-3) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * apq);
                let t = {
                    let s = if theta >= T::zero() {
                        T::one()
                    } else {
                        -T::one()
                    };
                    s / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).expect("finite eigenvalues"));
    let values: Vec<T> = order.iter().map(|&i| a[i][i]).collect();
    let vectors: Vec<Vec<T>> = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<T> = (0..n).map(|row| v[row][col]).collect();
            let lead = vec.iter().fold(
                T::zero(),
                |acc, &x| if x.abs() > acc.abs() { x } else { acc },
            );
            if lead < T::zero() {
                for x in vec.iter_mut() {
                    *x = -*x;
                }
            }
            vec
        })
        .collect();
    SymEigen { values, vectors }
}

/// Ordinary least-squares fit `y ≈ slope * x + intercept`.
pub fn ols_line<T: Real>(x: &[T], y: &[T]) -> (T, T) {
    assert!(x.len() == y.len() && x.len() >= 2);
    let n = T::of(x.len());
    let mean_x = x.iter().copied().sum::<T>() / n;
    let mean_y = y.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for i in 0..x.len() {
        let dx = x[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (y[i] - mean_y);
    }
    let slope = sxy / sxx;
    (slope, mean_y - slope * mean_x)
}

/// Median of a slice (averages the two central order statistics).
pub fn median<T: Real>(values: &[T]) -> T {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) * T::lit(0.5)
    }
}

/// Sample standard deviation (n − 1 denominator); zero for length-1 input.
pub fn sample_sd<T: Real>(values: &[T]) -> T {
    let n = values.len();
    if n < 2 {
        return T::zero();
    }
    let mean = values.iter().copied().sum::<T>() / T::of(n);
    let ss = values.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>();
    (ss / T::of(n - 1)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trapezoid_exact_for_linear() {
        let t = [0.0, 0.25, 1.0];
        let f = [1.0, 1.5, 3.0]; // 1 + 2x
        assert_relative_eq!(trapezoid(&t, &f), 2.0, epsilon = 1e-14);
        let w = trapezoid_weights(&t);
        let by_weights: f64 = w.iter().zip(&f).map(|(w, f)| w * f).sum();
        assert_relative_eq!(by_weights, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn simpson_matches_analytic_integrals() {
        let quartic = |x: f64| x * x * x * x;
        assert_relative_eq!(
            adaptive_simpson(&quartic, 0.0, 1.0, 1e-12),
            0.2,
            epsilon = 1e-10
        );
        let bump = |x: f64| (-x * x / 2.0).exp();
        let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(
            adaptive_simpson(&bump, -8.0, 8.0, 1e-12) / sqrt_2pi,
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn jacobi_solves_known_2x2() {
        // eigenvalues of [[2,1],[1,2]] are 3 and 1
        let m: Vec<Vec<f64>> = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let eig = sym_eigen(&m);
        assert_relative_eq!(eig.values[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(eig.values[1], 1.0, epsilon = 1e-12);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(eig.vectors[0][0].abs(), inv_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(eig.vectors[0][1].abs(), inv_sqrt2, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_diagonal_is_sorted_descending() {
        let m = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 5.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ];
        let eig = sym_eigen(&m);
        assert_eq!(eig.values, vec![5.0, 3.0, 1.0]);
        assert_eq!(eig.vectors[0], vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn ols_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 3.0, 5.0, 7.0]; // 2x - 1
        let (slope, intercept) = ols_line(&x, &y);
        assert_relative_eq!(slope, 2.0, epsilon = 1e-12);
        assert_relative_eq!(intercept, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn median_handles_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}
