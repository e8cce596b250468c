//! Kernel registries for the curve-distance kernel `K` (support `[0, 1)`)
//! and the response kernel `H` (integrates to one), with numerical
//! compliance checks on the bounds and moment conditions each role needs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::numeric::adaptive_simpson;
use crate::scalar::Real;

/// Kernel applied to normalized curve distances `d(x, X_i) / h_K`.
///
/// All variants vanish outside `[0, 1)`. `Box` and `QuadShift` are bounded
/// away from zero on the support; `Epanechnikov` vanishes at the boundary
/// and is therefore registered with `h6_compliant() == false`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKernel {
    Box,
    QuadShift,
    Epanechnikov,
}

impl CurveKernel {
    /// Kernel value at the normalized distance `t`; zero for `t < 0` or `t >= 1`.
    pub fn eval<T: Real>(self, t: T) -> T {
        if t < T::zero() || t >= T::one() {
            return T::zero();
        }
        match self {
            CurveKernel::Box => T::one(),
            CurveKernel::QuadShift => T::one() - t * t * T::lit(0.5),
            CurveKernel::Epanechnikov => T::lit(0.75) * (T::one() - t * t),
        }
    }

    /// Whether the kernel is bounded between positive constants on `(0, 1)`.
    pub fn h6_compliant(self) -> bool {
        !matches!(self, CurveKernel::Epanechnikov)
    }

    pub fn name(self) -> &'static str {
        match self {
            CurveKernel::Box => "box",
            CurveKernel::QuadShift => "quadshift",
            CurveKernel::Epanechnikov => "epanechnikov",
        }
    }
}

impl FromStr for CurveKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "box" => Ok(CurveKernel::Box),
            "quadshift" => Ok(CurveKernel::QuadShift),
            "epanechnikov" => Ok(CurveKernel::Epanechnikov),
            other => Err(Error::InvalidConfig(format!(
                "unknown curve kernel '{other}' (expected box, quadshift or epanechnikov)"
            ))),
        }
    }
}

impl fmt::Display for CurveKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Kernel applied to normalized response offsets `(y - Y_i) / h_H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseKernel {
    Gaussian,
    Epanechnikov,
}

impl ResponseKernel {
    /// Kernel value at `t`.
    pub fn eval<T: Real>(self, t: T) -> T {
        match self {
            ResponseKernel::Gaussian => {
                let norm = (T::lit(2.0) * T::PI()).sqrt();
                (-t * t * T::lit(0.5)).exp() / norm
            }
            ResponseKernel::Epanechnikov => {
                if t.abs() <= T::one() {
                    T::lit(0.75) * (T::one() - t * t)
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Both registered kernels are Lipschitz with an integrable modulus and
    /// have finite absolute moments, so the flag is true by construction.
    pub fn h7_compliant(self) -> bool {
        true
    }

    pub fn name(self) -> &'static str {
        match self {
            ResponseKernel::Gaussian => "gaussian",
            ResponseKernel::Epanechnikov => "epanechnikov",
        }
    }

    /// Integration bounds covering the numerically relevant support.
    fn bounds(self) -> (f64, f64) {
        match self {
            ResponseKernel::Gaussian => (-8.0, 8.0),
            ResponseKernel::Epanechnikov => (-1.0, 1.0),
        }
    }
}

impl FromStr for ResponseKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "gaussian" => Ok(ResponseKernel::Gaussian),
            "epanechnikov" => Ok(ResponseKernel::Epanechnikov),
            other => Err(Error::InvalidConfig(format!(
                "unknown response kernel '{other}' (expected gaussian or epanechnikov)"
            ))),
        }
    }
}

impl fmt::Display for ResponseKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A kernel together with its role in the estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelSpec {
    K(CurveKernel),
    H(ResponseKernel),
}

/// One numerically checked condition.
#[derive(Clone, Debug, Serialize)]
pub struct ComplianceCheck {
    pub condition: String,
    pub passed: bool,
    pub observed: f64,
}

/// Outcome of [`check_compliance`].
#[derive(Clone, Debug, Serialize)]
pub struct ComplianceReport {
    pub kernel: String,
    pub role: char,
    pub checks: Vec<ComplianceCheck>,
}

impl ComplianceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Numerically verifies the conditions attached to the kernel's role:
/// support containment and positive inf / finite sup over `(0, 1)` for a
/// `K`-role kernel; unit integral and finite absolute moments (orders 1
/// and 2) for an `H`-role kernel.
pub fn check_compliance(spec: KernelSpec) -> ComplianceReport {
    match spec {
        KernelSpec::K(k) => check_k(k),
        KernelSpec::H(h) => check_h(h),
    }
}

fn check_k(k: CurveKernel) -> ComplianceReport {
    let outside = [-1.0, -1e-9, 1.0, 1.25, 8.0]
        .iter()
        .map(|&t| k.eval(t))
        .fold(0.0f64, f64::max);

    // inf/sup over a 10^4-point grid of (0,1), plus a probe next to 1 to
    // expose kernels that vanish at the boundary.
    let n = 10_000;
    let mut inf = f64::INFINITY;
    let mut sup = f64::NEG_INFINITY;
    for i in 0..n {
        let t = (i as f64 + 0.5) / n as f64;
        let v = k.eval(t);
        inf = inf.min(v);
        sup = sup.max(v);
    }
    inf = inf.min(k.eval(1.0 - 1e-12));

    ComplianceReport {
        kernel: k.name().to_string(),
        role: 'K',
        checks: vec![
            ComplianceCheck {
                condition: "zero outside [0, 1)".into(),
                passed: outside == 0.0,
                observed: outside,
            },
            ComplianceCheck {
                condition: "bounded below by a positive constant on (0, 1)".into(),
                passed: inf > 1e-9,
                observed: inf,
            },
            ComplianceCheck {
                condition: "bounded above on (0, 1)".into(),
                passed: sup.is_finite() && sup > 0.0,
                observed: sup,
            },
        ],
    }
}

fn check_h(h: ResponseKernel) -> ComplianceReport {
    let (lo, hi) = h.bounds();
    let mass = adaptive_simpson(&|t: f64| h.eval(t), lo, hi, 1e-10);
    let m1 = adaptive_simpson(&|t: f64| t.abs() * h.eval(t), lo, hi, 1e-10);
    let m2 = adaptive_simpson(&|t: f64| t * t * h.eval(t), lo, hi, 1e-10);

    ComplianceReport {
        kernel: h.name().to_string(),
        role: 'H',
        checks: vec![
            ComplianceCheck {
                condition: "integrates to one (tolerance 1e-6)".into(),
                passed: (mass - 1.0).abs() <= 1e-6,
                observed: mass,
            },
            ComplianceCheck {
                condition: "finite absolute moment of order 1".into(),
                passed: m1.is_finite(),
                observed: m1,
            },
            ComplianceCheck {
                condition: "finite absolute moment of order 2".into(),
                passed: m2.is_finite(),
                observed: m2,
            },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn box_kernel_values() {
        assert_eq!(CurveKernel::Box.eval(0.5), 1.0);
        assert_eq!(CurveKernel::Box.eval(0.0), 1.0);
        assert_eq!(CurveKernel::Box.eval(1.2), 0.0);
        assert_eq!(CurveKernel::Box.eval(1.0), 0.0);
        assert_eq!(CurveKernel::Box.eval(-0.1), 0.0);
    }

    #[test]
    fn quadshift_kernel_values() {
        assert_eq!(CurveKernel::QuadShift.eval(0.0), 1.0);
        assert_relative_eq!(CurveKernel::QuadShift.eval(0.5), 0.875);
        // bounded in (1/2, 1] on the support
        assert!(CurveKernel::QuadShift.eval(0.999_999) > 0.5);
    }

    #[test]
    fn gaussian_kernel_values() {
        assert_relative_eq!(
            ResponseKernel::Gaussian.eval(0.0),
            0.3989422804,
            epsilon = 1e-10
        );
        assert_eq!(
            ResponseKernel::Gaussian.eval(1.3),
            ResponseKernel::Gaussian.eval(-1.3)
        );
    }

    #[test]
    fn epanechnikov_response_kernel_values() {
        assert_eq!(ResponseKernel::Epanechnikov.eval(0.0), 0.75);
        assert_eq!(ResponseKernel::Epanechnikov.eval(1.5), 0.0);
    }

    #[test]
    fn box_and_quadshift_pass_k_compliance() {
        for k in [CurveKernel::Box, CurveKernel::QuadShift] {
            let report = check_compliance(KernelSpec::K(k));
            assert!(report.passed(), "{report:?}");
            assert!(k.h6_compliant());
        }
    }

    #[test]
    fn epanechnikov_fails_k_lower_bound() {
        let report = check_compliance(KernelSpec::K(CurveKernel::Epanechnikov));
        assert!(!report.passed());
        let lower = &report.checks[1];
        assert!(!lower.passed);
        assert!(lower.observed < 1e-9);
        assert!(!CurveKernel::Epanechnikov.h6_compliant());
    }

    #[test]
    fn response_kernels_integrate_to_one() {
        for h in [ResponseKernel::Gaussian, ResponseKernel::Epanechnikov] {
            let report = check_compliance(KernelSpec::H(h));
            assert!(report.passed(), "{report:?}");
            assert_relative_eq!(report.checks[0].observed, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn names_round_trip() {
        for k in [
            CurveKernel::Box,
            CurveKernel::QuadShift,
            CurveKernel::Epanechnikov,
        ] {
            assert_eq!(k.name().parse::<CurveKernel>().unwrap(), k);
        }
        for h in [ResponseKernel::Gaussian, ResponseKernel::Epanechnikov] {
            assert_eq!(h.name().parse::<ResponseKernel>().unwrap(), h);
        }
        assert!("triangle".parse::<CurveKernel>().is_err());
    }

    proptest! {
        #[test]
        fn kernels_are_nonnegative(t in -5.0f64..5.0) {
            for k in [CurveKernel::Box, CurveKernel::QuadShift, CurveKernel::Epanechnikov] {
                prop_assert!(k.eval(t) >= 0.0);
            }
            for h in [ResponseKernel::Gaussian, ResponseKernel::Epanechnikov] {
                prop_assert!(h.eval(t) >= 0.0);
            }
        }

        #[test]
        fn curve_kernels_vanish_outside_support(t in -5.0f64..5.0) {
            prop_assume!(!(0.0..1.0).contains(&t));
            for k in [CurveKernel::Box, CurveKernel::QuadShift, CurveKernel::Epanechnikov] {
                prop_assert_eq!(k.eval(t), 0.0);
            }
        }
    }
}
