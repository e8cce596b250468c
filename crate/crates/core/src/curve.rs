//! Discretized functional observations and linear-interpolation resampling.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A discretized curve: finite values sampled on a strictly increasing time
/// grid of at least two points. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve<T> {
    times: Vec<T>,
    values: Vec<T>,
}

#[allow(clippy::len_without_is_empty)]
impl<T: Real> Curve<T> {
    /// Builds a curve, checking the grid and value invariants.
    pub fn new(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        let c = Self::new_unchecked(times, values);
        match c.invariant_breach() {
            None => Ok(c),
            Some(msg) => Err(Error::InvalidCurve(msg)),
        }
    }

    /// Builds a curve without checking invariants. Intended for assembling
    /// raw data that will be passed through [`crate::validate_sample`].
    pub fn new_unchecked(times: Vec<T>, values: Vec<T>) -> Self {
        Curve { times, values }
    }

    /// First invariant violation, if any.
    pub(crate) fn invariant_breach(&self) -> Option<String> {
        if self.times.len() != self.values.len() {
            return Some(format!(
                "times ({}) and values ({}) differ in length",
                self.times.len(),
                self.values.len()
            ));
        }
        if self.times.len() < 2 {
            return Some(format!(
                "grid has {} points, need at least 2",
                self.times.len()
            ));
        }
        for (j, t) in self.times.iter().enumerate() {
            if !t.is_finite() {
                return Some(format!("time at position {j} is not finite"));
            }
        }
        for j in 1..self.times.len() {
            if self.times[j] <= self.times[j - 1] {
                return Some(format!("times not strictly increasing at position {j}"));
            }
        }
        for (j, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Some(format!("value at position {j} is not finite"));
            }
        }
        None
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Number of grid points (at least 2 by construction).
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// Whether `other` shares this curve's exact time grid.
    pub fn same_grid(&self, other: &Curve<T>) -> bool {
        self.times == other.times
    }

    /// Value at `t` by linear interpolation between neighbouring grid points.
    /// Exact at grid points. Errors outside the grid span.
    pub fn interpolate_at(&self, t: T) -> Result<T> {
        let first = self.times[0];
        let last = self.times[self.times.len() - 1];
        if t < first || t > last {
            return Err(Error::Extrapolation {
                time: t.to_f64().unwrap_or(f64::NAN),
                min: first.to_f64().unwrap_or(f64::NAN),
                max: last.to_f64().unwrap_or(f64::NAN),
            });
        }
        // index of the last grid time <= t
        let j = self.times.partition_point(|&s| s <= t) - 1;
        if self.times[j] == t {
            return Ok(self.values[j]);
        }
        let (t0, t1) = (self.times[j], self.times[j + 1]);
        let (v0, v1) = (self.values[j], self.values[j + 1]);
        Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }

    /// Linear resampling onto `target_times`, which must be an ascending grid
    /// of at least two points inside the source span.
    pub fn resample(&self, target_times: &[T]) -> Result<Curve<T>> {
        if target_times == self.times.as_slice() {
            return Ok(self.clone());
        }
        let values = target_times
            .iter()
            .map(|&t| self.interpolate_at(t))
            .collect::<Result<Vec<T>>>()?;
        Curve::new(target_times.to_vec(), values)
    }

    /// Curve with values shifted so their arithmetic mean is zero.
    pub fn centered(&self) -> Curve<T> {
        let mean = self.values.iter().copied().sum::<T>() / T::of(self.values.len());
        Curve {
            times: self.times.clone(),
            values: self.values.iter().map(|&v| v - mean).collect(),
        }
    }
}
