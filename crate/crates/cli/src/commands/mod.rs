pub mod cv;
pub mod density;
pub mod predict;
pub mod simulate;

use condmode::{CurveKernel, FunctionalSample64, ResponseKernel, SemiMetricSpec64};

use crate::CliError;

/// Builds the semi-metric from name and optional component/order count,
/// fitting PCA on the sample when needed.
pub fn resolve_semimetric(
    name: Option<&str>,
    q: Option<usize>,
    sample: &FunctionalSample64,
) -> Result<SemiMetricSpec64, CliError> {
    let spec = match name.unwrap_or("l2") {
        "l2" => SemiMetricSpec64::l2(),
        "deriv" => SemiMetricSpec64::deriv(q.unwrap_or(1))?,
        "pca" => SemiMetricSpec64::pca(q.unwrap_or(2))?.fit_pca(sample)?,
        other => {
            return Err(CliError::Config(format!(
                "unknown semi-metric '{other}' (expected l2, deriv or pca)"
            )))
        }
    };
    Ok(spec)
}

pub fn resolve_kernels(
    k_kernel: Option<&str>,
    h_kernel: Option<&str>,
) -> Result<(CurveKernel, ResponseKernel), CliError> {
    let k = k_kernel.unwrap_or("box").parse::<CurveKernel>()?;
    let h = h_kernel.unwrap_or("gaussian").parse::<ResponseKernel>()?;
    Ok((k, h))
}

/// Field-wise precedence helper: flag value, else config-file value.
pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}
