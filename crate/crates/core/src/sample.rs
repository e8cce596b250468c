//! Paired functional observations `(X_i, Y_i)` and sample validation.

use std::fmt;

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Paired observations: curves `X_i` on a common time grid and scalar
/// responses `Y_i`. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalSample<T> {
    curves: Vec<Curve<T>>,
    responses: Vec<T>,
}

impl<T: Real> FunctionalSample<T> {
    /// Builds a sample, rejecting the first invariant violation found.
    pub fn new(curves: Vec<Curve<T>>, responses: Vec<T>) -> Result<Self> {
        let s = Self::new_unchecked(curves, responses);
        match validate_sample(&s).into_iter().next() {
            None => Ok(s),
            Some(v) => Err(Error::InvalidSample(v.to_string())),
        }
    }

    /// Builds without validation; pair with [`validate_sample`].
    pub fn new_unchecked(curves: Vec<Curve<T>>, responses: Vec<T>) -> Self {
        FunctionalSample { curves, responses }
    }

    pub fn n(&self) -> usize {
        self.curves.len()
    }

    pub fn curves(&self) -> &[Curve<T>] {
        &self.curves
    }

    pub fn responses(&self) -> &[T] {
        &self.responses
    }

    /// The shared time grid.
    pub fn grid(&self) -> &[T] {
        self.curves[0].times()
    }

    /// Copy of the sample with observation `i` removed.
    pub fn leave_one_out(&self, i: usize) -> FunctionalSample<T> {
        let mut curves = Vec::with_capacity(self.curves.len() - 1);
        let mut responses = Vec::with_capacity(self.responses.len() - 1);
        for (j, (c, &y)) in self.curves.iter().zip(&self.responses).enumerate() {
            if j != i {
                curves.push(c.clone());
                responses.push(y);
            }
        }
        FunctionalSample { curves, responses }
    }
}

/// A single invariant violation found by [`validate_sample`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptySample,
    CurveInvalid { curve: usize, detail: String },
    GridMismatch { curve: usize },
    NonFiniteResponse { index: usize },
    ResponseCountMismatch { curves: usize, responses: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptySample => write!(f, "sample contains no curves"),
            Violation::CurveInvalid { curve, detail } => {
                write!(f, "curve {curve}: {detail}")
            }
            Violation::GridMismatch { curve } => {
                write!(f, "curve {curve}: time grid differs from curve 0")
            }
            Violation::NonFiniteResponse { index } => {
                write!(f, "response {index} is not finite")
            }
            Violation::ResponseCountMismatch { curves, responses } => {
                write!(f, "{curves} curves but {responses} responses")
            }
        }
    }
}

/// Checks every sample invariant and reports all violations found. An empty
/// report means every downstream operation accepts the sample.
pub fn validate_sample<T: Real>(sample: &FunctionalSample<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    if sample.curves.is_empty() {
        out.push(Violation::EmptySample);
    }
    for (i, c) in sample.curves.iter().enumerate() {
        if let Some(detail) = c.invariant_breach() {
            out.push(Violation::CurveInvalid { curve: i, detail });
        }
    }
    if let Some(first) = sample.curves.first() {
        for (i, c) in sample.curves.iter().enumerate().skip(1) {
            if !first.same_grid(c) {
                out.push(Violation::GridMismatch { curve: i });
            }
        }
    }
    if sample.curves.len() != sample.responses.len() {
        out.push(Violation::ResponseCountMismatch {
            curves: sample.curves.len(),
            responses: sample.responses.len(),
        });
    }
    for (i, y) in sample.responses.iter().enumerate() {
        if !y.is_finite() {
            out.push(Violation::NonFiniteResponse { index: i });
        }
    }
    out
}
