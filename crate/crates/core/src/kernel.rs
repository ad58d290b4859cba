//! Kernels `G(t,τ)` on `[T1,T2]²` given by two polynomial branches that
//! meet along the crease `τ = t`.
//!
//! Branch coefficients are stored as exact rationals so row integrals and
//! certificate thresholds can be reported in closed form; a cached `f64`
//! mirror drives all floating-point evaluation.

use num::{BigInt, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::Rational;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("interval endpoints must satisfy t1 < t2, got [{t1}, {t2}]")]
    InvalidInterval { t1: f64, t2: f64 },
    #[error("kernel exponent k must be positive and finite, got {0}")]
    InvalidExponent(f64),
    #[error("coordinate {name} = {value} lies outside the domain [{t1}, {t2}]")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        t1: f64,
        t2: f64,
    },
    #[error(
        "branches disagree on the crease at t = {t}: lower = {lower}, upper = {upper} \
         (allowed relative mismatch 1e-12)"
    )]
    CreaseMismatch { t: f64, lower: f64, upper: f64 },
    #[error("polynomial term has zero denominator")]
    ZeroDenominator,
    #[error("integration bounds must satisfy a <= b, got [{a}, {b}]")]
    InvalidBounds { a: f64, b: f64 },
}

/// Closed interval `[t1, t2]` with `t1 < t2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    t1: f64,
    t2: f64,
}

impl Interval {
    pub fn new(t1: f64, t2: f64) -> Result<Self, KernelError> {
        if !(t1.is_finite() && t2.is_finite() && t1 < t2) {
            return Err(KernelError::InvalidInterval { t1, t2 });
        }
        Ok(Self { t1, t2 })
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn span(&self) -> f64 {
        self.t2 - self.t1
    }

    /// `(t1 + t2) / 2`.
    pub fn midpoint(&self) -> f64 {
        (self.t1 + self.t2) / 2.0
    }

    /// `(3 t1 + t2) / 4`, the focal point of the general cone.
    pub fn quarter(&self) -> f64 {
        (3.0 * self.t1 + self.t2) / 4.0
    }

    /// `(7 t1 + t2) / 8`, the focal point of the symmetric cone.
    pub fn eighth(&self) -> f64 {
        (7.0 * self.t1 + self.t2) / 8.0
    }

    pub fn contains(&self, v: f64) -> bool {
        v.is_finite() && self.t1 <= v && v <= self.t2
    }

    /// Reflection `t ↦ t2 - t + t1`, clamped against rounding so that
    /// in-domain inputs stay in-domain.
    pub fn reflect(&self, t: f64) -> f64 {
        (self.t2 - t + self.t1).clamp(self.t1, self.t2)
    }

    /// Exact rational endpoints (every finite `f64` is a rational).
    pub fn exact_endpoints(&self) -> (Rational, Rational) {
        (rational_from_f64(self.t1), rational_from_f64(self.t2))
    }
}

pub(crate) fn rational_from_f64(v: f64) -> Rational {
    Rational::from_float(v).expect("finite f64 converts to a rational")
}

/// Bivariate polynomial `p(t,τ) = Σ c[i][j] t^i τ^j` with exact rational
/// coefficients and an `f64` mirror for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariatePoly {
    /// `coeffs[i][j]` multiplies `t^i τ^j`; rectangular storage.
    coeffs: Vec<Vec<Rational>>,
    coeffs_f64: Vec<Vec<f64>>,
}

impl BivariatePoly {
    /// Builds from `(t_power, tau_power, coefficient)` terms; repeated
    /// powers accumulate.
    pub fn from_terms(terms: &[(usize, usize, Rational)]) -> Self {
        let deg_t = terms.iter().map(|&(i, _, _)| i).max().unwrap_or(0);
        let deg_tau = terms.iter().map(|&(_, j, _)| j).max().unwrap_or(0);
        let mut coeffs = vec![vec![Rational::zero(); deg_tau + 1]; deg_t + 1];
        for (i, j, c) in terms {
            coeffs[*i][*j] += c.clone();
        }
        let coeffs_f64 = coeffs
            .iter()
            .map(|row| row.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        Self { coeffs, coeffs_f64 }
    }

    /// Convenience for integer-fraction terms `(i, j, p/q)`.
    pub fn from_int_terms(terms: &[(usize, usize, i64, i64)]) -> Result<Self, KernelError> {
        let mut out = Vec::with_capacity(terms.len());
        for &(i, j, p, q) in terms {
            if q == 0 {
                return Err(KernelError::ZeroDenominator);
            }
            out.push((i, j, Rational::new(BigInt::from(p), BigInt::from(q))));
        }
        Ok(Self::from_terms(&out))
    }

    pub fn degree_t(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree_tau(&self) -> usize {
        self.coeffs.first().map_or(0, |r| r.len() - 1)
    }

    /// Horner evaluation, nested in τ first and then t, so identical
    /// inputs always produce bit-identical outputs.
    pub fn eval(&self, t: f64, tau: f64) -> f64 {
        let mut acc = 0.0;
        for row in self.coeffs_f64.iter().rev() {
            let mut inner = 0.0;
            for c in row.iter().rev() {
                inner = inner * tau + c;
            }
            acc = acc * t + inner;
        }
        acc
    }

    /// Exact evaluation with the same nesting as [`Self::eval`].
    pub fn eval_exact(&self, t: &Rational, tau: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for row in self.coeffs.iter().rev() {
            let mut inner = Rational::zero();
            for c in row.iter().rev() {
                inner = inner * tau + c;
            }
            acc = acc * t + inner;
        }
        acc
    }

    /// Exact `∫_a^b p(t,τ) dτ` for fixed rational `t`.
    pub fn integrate_tau_exact(&self, t: &Rational, a: &Rational, b: &Rational) -> Rational {
        // Collapse to a univariate polynomial in τ: u[j] = Σ_i c[i][j] t^i.
        let deg_tau = self.degree_tau();
        let mut u = vec![Rational::zero(); deg_tau + 1];
        let mut t_pow = Rational::from_integer(BigInt::from(1));
        for row in &self.coeffs {
            for (j, c) in row.iter().enumerate() {
                u[j] += c * &t_pow;
            }
            t_pow *= t;
        }
        // Σ_j u[j] (b^{j+1} - a^{j+1}) / (j+1).
        let mut total = Rational::zero();
        let mut a_pow = a.clone();
        let mut b_pow = b.clone();
        for (j, uj) in u.iter().enumerate() {
            let denom = Rational::from_integer(BigInt::from(j as i64 + 1));
            total += uj * (&b_pow - &a_pow) / denom;
            a_pow *= a;
            b_pow *= b;
        }
        total
    }
}

/// Two-branch polynomial kernel split along the crease `τ = t`.
///
/// `lower` applies when `τ <= t`, `upper` when `t <= τ`; construction
/// verifies that the branches agree on the crease.
#[derive(Debug, Clone)]
pub struct Kernel {
    name: String,
    domain: Interval,
    k_exponent: f64,
    lower: BivariatePoly,
    upper: BivariatePoly,
}

/// Sample count used to verify branch agreement along the crease.
const CREASE_SAMPLES: usize = 201;

impl Kernel {
    pub fn new(
        name: impl Into<String>,
        domain: Interval,
        k_exponent: f64,
        lower: BivariatePoly,
        upper: BivariatePoly,
    ) -> Result<Self, KernelError> {
        if !(k_exponent.is_finite() && k_exponent > 0.0) {
            return Err(KernelError::InvalidExponent(k_exponent));
        }
        for idx in 0..CREASE_SAMPLES {
            let frac = idx as f64 / (CREASE_SAMPLES - 1) as f64;
            let t = domain.t1() + domain.span() * frac;
            let lo = lower.eval(t, t);
            let up = upper.eval(t, t);
            if (lo - up).abs() > 1e-12 * (1.0 + up.abs()) {
                return Err(KernelError::CreaseMismatch {
                    t,
                    lower: lo,
                    upper: up,
                });
            }
        }
        Ok(Self {
            name: name.into(),
            domain,
            k_exponent,
            lower,
            upper,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn k_exponent(&self) -> f64 {
        self.k_exponent
    }

    pub fn lower_branch(&self) -> &BivariatePoly {
        &self.lower
    }

    pub fn upper_branch(&self) -> &BivariatePoly {
        &self.upper
    }

    /// Largest τ-degree across branches; quadrature exactness depends on it.
    pub fn degree_tau(&self) -> usize {
        self.lower.degree_tau().max(self.upper.degree_tau())
    }

    fn check_coord(&self, name: &'static str, v: f64) -> Result<(), KernelError> {
        if self.domain.contains(v) {
            Ok(())
        } else {
            Err(KernelError::OutOfDomain {
                name,
                value: v,
                t1: self.domain.t1(),
                t2: self.domain.t2(),
            })
        }
    }

    /// `G(t,τ)`. Out-of-domain arguments are an error, never clamped.
    pub fn eval(&self, t: f64, tau: f64) -> Result<f64, KernelError> {
        self.check_coord("t", t)?;
        self.check_coord("tau", tau)?;
        Ok(self.eval_raw(t, tau))
    }

    /// Branch-selected evaluation without the domain check; callers must
    /// guarantee `(t, tau)` lies in the domain square.
    pub(crate) fn eval_raw(&self, t: f64, tau: f64) -> f64 {
        if tau <= t {
            self.lower.eval(t, tau)
        } else {
            self.upper.eval(t, tau)
        }
    }

    /// `G(T2 - t + T1, T2 - τ + T1)`, the reflected evaluation used by the
    /// symmetry checks.
    pub fn reflected_eval(&self, t: f64, tau: f64) -> Result<f64, KernelError> {
        self.check_coord("t", t)?;
        self.check_coord("tau", tau)?;
        Ok(self.eval_raw(self.domain.reflect(t), self.domain.reflect(tau)))
    }

    /// Exact `∫_a^b G(t,τ) dτ`, crease-aware. Arguments are rationals so
    /// focal points like `(3T1+T2)/4` can be passed without rounding.
    pub fn row_integral_exact(
        &self,
        t: &Rational,
        a: &Rational,
        b: &Rational,
    ) -> Result<Rational, KernelError> {
        let (lo, hi) = self.domain.exact_endpoints();
        let inside = |v: &Rational| &lo <= v && v <= &hi;
        if !inside(t) {
            return Err(KernelError::OutOfDomain {
                name: "t",
                value: t.to_f64().unwrap_or(f64::NAN),
                t1: self.domain.t1(),
                t2: self.domain.t2(),
            });
        }
        if a > b {
            return Err(KernelError::InvalidBounds {
                a: a.to_f64().unwrap_or(f64::NAN),
                b: b.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !inside(a) || !inside(b) {
            return Err(KernelError::OutOfDomain {
                name: "tau",
                value: if inside(a) { b } else { a }.to_f64().unwrap_or(f64::NAN),
                t1: self.domain.t1(),
                t2: self.domain.t2(),
            });
        }
        let value = if b <= t {
            self.lower.integrate_tau_exact(t, a, b)
        } else if t <= a {
            self.upper.integrate_tau_exact(t, a, b)
        } else {
            self.lower.integrate_tau_exact(t, a, t) + self.upper.integrate_tau_exact(t, t, b)
        };
        Ok(value)
    }
}

/// The beam kernel on `[0,1]` for `x'''' = f` with boundary conditions
/// `x(0) = x''(0) = x(1) = x''(1) = 0`, with scaling exponent `k = 1`.
pub fn lidstone_kernel() -> Kernel {
    let domain = Interval::new(0.0, 1.0).expect("unit interval");
    // τ <= t branch: (τ³t - τ³ + τt³ - 3τt² + 2τt) / 6
    let lower = BivariatePoly::from_int_terms(&[
        (1, 3, 1, 6),
        (0, 3, -1, 6),
        (3, 1, 1, 6),
        (2, 1, -3, 6),
        (1, 1, 2, 6),
    ])
    .expect("static coefficients");
    // t <= τ branch: (τ³t - 3τ²t + τt³ + 2τt - t³) / 6
    let upper = BivariatePoly::from_int_terms(&[
        (1, 3, 1, 6),
        (1, 2, -3, 6),
        (3, 1, 1, 6),
        (1, 1, 2, 6),
        (3, 0, -1, 6),
    ])
    .expect("static coefficients");
    Kernel::new("lidstone", domain, 1.0, lower, upper).expect("branches agree on the crease")
}
