//! The nonlinearity `f = f_up + f_down` as a user-supplied pair of a
//! nondecreasing and a nonincreasing nonnegative part.
//!
//! The decomposition is never inferred from a raw `f` (it is not unique);
//! both parts are taken as given and the monotonicity contract is checked
//! by dense sampling.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{parse_expression, ExprError};

/// Shareable scalar function handle on `[0, ∞)`.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Absolute tolerance on adjacent-pair differences in [`MonotoneSplit::verify`].
pub const SPLIT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("nonlinearity argument must be nonnegative, got {0}")]
    NegativeArgument(f64),
    #[error("{part} returned non-finite value {value} at x = {x}")]
    NonFinite {
        part: &'static str,
        x: f64,
        value: f64,
    },
    #[error("x_max must be positive, got {0}")]
    InvalidXMax(f64),
    #[error("samples must be >= 2, got {0}")]
    InvalidSamples(usize),
    #[error(transparent)]
    Parse(#[from] ExprError),
}

/// Which part and which contract clause a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SplitClause {
    UpNonnegative,
    DownNonnegative,
    UpNondecreasing,
    DownNonincreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitWitness {
    pub clause: SplitClause,
    /// Left sample of the violating pair (equals `x_hi` for sign clauses).
    pub x_lo: f64,
    pub x_hi: f64,
    pub violation: f64,
}

/// Outcome of the sampled monotonicity/nonnegativity check.
#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub passed: bool,
    pub worst_violation: f64,
    /// Witness of the largest violation.
    pub worst_witness: Option<SplitWitness>,
    /// First violation in ascending scan order; for a function that starts
    /// decreasing at some x this pair brackets the turning point.
    pub first_witness: Option<SplitWitness>,
    pub samples: usize,
    pub x_max: f64,
    pub tol: f64,
}

#[derive(Clone)]
pub struct MonotoneSplit {
    f_up: ScalarFn,
    f_down: ScalarFn,
}

impl std::fmt::Debug for MonotoneSplit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MonotoneSplit").finish_non_exhaustive()
    }
}

impl MonotoneSplit {
    pub fn new(f_up: ScalarFn, f_down: ScalarFn) -> Self {
        Self { f_up, f_down }
    }

    pub fn from_fns<U, D>(f_up: U, f_down: D) -> Self
    where
        U: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(Arc::new(f_up), Arc::new(f_down))
    }

    /// Parses both parts with the expression grammar.
    pub fn from_expressions(f_up: &str, f_down: &str) -> Result<Self, SplitError> {
        let up = parse_expression(f_up)?;
        let down = parse_expression(f_down)?;
        Ok(Self::new(up.into_fn(), down.into_fn()))
    }

    fn eval_part(&self, part: &'static str, f: &ScalarFn, x: f64) -> Result<f64, SplitError> {
        if x.is_nan() || x < 0.0 {
            return Err(SplitError::NegativeArgument(x));
        }
        let v = f(x);
        if !v.is_finite() {
            return Err(SplitError::NonFinite { part, x, value: v });
        }
        Ok(v)
    }

    /// Raw handle to the increasing part (no domain/finiteness checks).
    pub fn f_up_handle(&self) -> &ScalarFn {
        &self.f_up
    }

    /// Raw handle to the decreasing part (no domain/finiteness checks).
    pub fn f_down_handle(&self) -> &ScalarFn {
        &self.f_down
    }

    pub fn eval_up(&self, x: f64) -> Result<f64, SplitError> {
        self.eval_part("f_up", &self.f_up, x)
    }

    pub fn eval_down(&self, x: f64) -> Result<f64, SplitError> {
        self.eval_part("f_down", &self.f_down, x)
    }

    /// `f(x) = f_up(x) + f_down(x)`, a single addition in fixed order.
    pub fn eval_f(&self, x: f64) -> Result<f64, SplitError> {
        let up = self.eval_up(x)?;
        let down = self.eval_down(x)?;
        let sum = up + down;
        if !sum.is_finite() {
            return Err(SplitError::NonFinite {
                part: "f_up + f_down",
                x,
                value: sum,
            });
        }
        Ok(sum)
    }

    /// Samples both parts on `samples` equally spaced points in
    /// `[0, x_max]` and checks nonnegativity plus the monotonicity of each
    /// part. Passes iff the worst violation is at most [`SPLIT_TOL`].
    pub fn verify(&self, x_max: f64, samples: usize) -> Result<SplitReport, SplitError> {
        if !(x_max > 0.0 && x_max.is_finite()) {
            return Err(SplitError::InvalidXMax(x_max));
        }
        if samples < 2 {
            return Err(SplitError::InvalidSamples(samples));
        }
        let step = x_max / (samples - 1) as f64;
        let xs: Vec<f64> = (0..samples)
            .map(|i| if i + 1 == samples { x_max } else { i as f64 * step })
            .collect();
        let mut ups = Vec::with_capacity(samples);
        let mut downs = Vec::with_capacity(samples);
        for &x in &xs {
            ups.push(self.eval_up(x)?);
            downs.push(self.eval_down(x)?);
        }

        let mut worst = 0.0f64;
        let mut worst_witness = None;
        let mut first_witness = None;
        let mut record = |clause: SplitClause, x_lo: f64, x_hi: f64, violation: f64| {
            if violation <= 0.0 {
                return;
            }
            let witness = SplitWitness {
                clause,
                x_lo,
                x_hi,
                violation,
            };
            if first_witness.is_none() {
                first_witness = Some(witness);
            }
            if violation > worst {
                worst = violation;
                worst_witness = Some(witness);
            }
        };

        for i in 0..samples {
            record(SplitClause::UpNonnegative, xs[i], xs[i], -ups[i]);
            record(SplitClause::DownNonnegative, xs[i], xs[i], -downs[i]);
            if i > 0 {
                record(
                    SplitClause::UpNondecreasing,
                    xs[i - 1],
                    xs[i],
                    ups[i - 1] - ups[i],
                );
                record(
                    SplitClause::DownNonincreasing,
                    xs[i - 1],
                    xs[i],
                    downs[i] - downs[i - 1],
                );
            }
        }

        Ok(SplitReport {
            passed: worst <= SPLIT_TOL,
            worst_violation: worst,
            worst_witness,
            first_witness,
            samples,
            x_max,
            tol: SPLIT_TOL,
        })
    }
}
