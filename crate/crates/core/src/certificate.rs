//! Evaluation of the four existence-certificate inequalities for a kernel
//! and a monotone split, in both the general and symmetric variants.
//!
//! With `q` the focal point and `I1..I4` the kernel integrals below, the
//! conditions read
//!
//! ```text
//! (1) f_up(a + 4^-k d) · I1 > a
//! (2) f_up(b + 4^k c) · I2 < b
//! (3) f_down(0) · I3 < c
//! (4) f_down(b + d) · I4 > d
//! ```
//!
//! and each margin is the signed slack of its inequality. Thresholds are
//! computed twice: by Gauss-Legendre quadrature and by the exact rational
//! antiderivative, and the exact condition bounds (`b/I2`, `c/I3`, ...)
//! are reported as rationals.

use num::BigInt;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::cone::{pow_k, ConeVariant};
use crate::kernel::{rational_from_f64, Kernel};
use crate::quadrature::{
    kernel_row_integral, symmetrized_row_integral, QuadratureConfig, QuadratureError,
};
use crate::split::{MonotoneSplit, SplitError, SplitReport};
use crate::Rational;

/// Sample count used when validating the split ahead of certification.
const SPLIT_SAMPLES: usize = 513;

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("box parameters must be nonnegative and finite: a={a}, b={b}, c={c}, d={d}")]
    InvalidParams { a: f64, b: f64, c: f64, d: f64 },
    #[error("b and c must be positive for the simplified certificate: b={b}, c={c}")]
    NonPositiveBox { b: f64, c: f64 },
    #[error(
        "degenerate kernel: threshold {name} = {value} is not strictly positive, \
         condition ratios are undefined"
    )]
    DegenerateKernel { name: &'static str, value: f64 },
    #[error("monotone split failed verification (worst violation {worst})")]
    SplitRejected { worst: f64, report: SplitReport },
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Kernel(#[from] crate::kernel::KernelError),
}

fn ser_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_rational_array<S: Serializer>(r: &[Rational; 4], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(r.iter().map(|v| v.to_string()))
}

/// Box parameters `(a, b, c, d)` of the four conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl BoxParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, CertificateError> {
        let ok = [a, b, c, d].iter().all(|v| v.is_finite() && *v >= 0.0);
        if !ok {
            return Err(CertificateError::InvalidParams { a, b, c, d });
        }
        Ok(Self { a, b, c, d })
    }

    /// `a = d = 0` box of the simplified corollaries.
    pub fn simplified(b: f64, c: f64) -> Result<Self, CertificateError> {
        if !(b > 0.0 && c > 0.0 && b.is_finite() && c.is_finite()) {
            return Err(CertificateError::NonPositiveBox { b, c });
        }
        Self::new(0.0, b, c, 0.0)
    }
}

/// Exact rational values of the threshold integrals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactThresholds {
    #[serde(serialize_with = "ser_rational")]
    pub i1: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub i2: Rational,
    /// Symmetric variant: the half-interval convention `2∫_{T1}^{T̄}`.
    #[serde(serialize_with = "ser_rational")]
    pub i3: Rational,
    /// Literal full-interval integral (equals `i3` in the general variant).
    #[serde(serialize_with = "ser_rational")]
    pub i3_literal: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub i4: Rational,
}

impl ExactThresholds {
    /// Exact condition bounds `[a/I1, b/I2, c/I3, d/I4]` for exact params.
    pub fn condition_bounds(&self, params: &BoxParams) -> [Rational; 4] {
        [
            rational_from_f64(params.a) / &self.i1,
            rational_from_f64(params.b) / &self.i2,
            rational_from_f64(params.c) / &self.i3,
            rational_from_f64(params.d) / &self.i4,
        ]
    }
}

/// The four condition integrals for one variant.
///
/// General variant with `q = (3T1+T2)/4`:
/// `I1 = ∫_q^{T2} G(q,·)`, `I2 = I4 = ∫_{T1}^{T2} G(T2,·)`,
/// `I3 = ∫_{T1}^{T2} G(q,·)`.
///
/// Symmetric variant with `q = (7T1+T2)/8` and midpoint `T̄`:
/// `I1 = ∫_q^{T̄} G(q,·)`, `I2 = ∫_{T1}^{T2} G(T̄,·)`,
/// `I3 = 2∫_{T1}^{T̄} G(q,·)` (half-interval convention; the literal
/// full-interval value is kept alongside because the two genuinely differ
/// for creased kernels), `I4 = ∫_{T1}^{T̄} G(T̄,·)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    pub variant: ConeVariant,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i3_literal: f64,
    pub i4: f64,
    pub exact: ExactThresholds,
}

impl Thresholds {
    /// The condition-3 integral actually used for margins: the larger of
    /// the two readings, which yields the smaller threshold `c/I3` and so
    /// certifies conservatively under either convention.
    pub fn i3_conservative(&self) -> f64 {
        self.i3.max(self.i3_literal)
    }
}

pub fn compute_thresholds(
    kernel: &Kernel,
    variant: ConeVariant,
    qcfg: &QuadratureConfig,
) -> Result<Thresholds, CertificateError> {
    let d = kernel.domain();
    let (t1, t2) = (d.t1(), d.t2());
    let (e1, e2) = d.exact_endpoints();
    let two = Rational::from_integer(BigInt::from(2));

    let (i1, i2, i3, i3_literal, i4, exact) = match variant {
        ConeVariant::General => {
            let q = d.quarter();
            let qe = (&e1 * Rational::from_integer(BigInt::from(3)) + &e2)
                / Rational::from_integer(BigInt::from(4));
            let i1 = kernel_row_integral(kernel, q, q, t2, qcfg)?;
            let i2 = kernel_row_integral(kernel, t2, t1, t2, qcfg)?;
            let i3 = kernel_row_integral(kernel, q, t1, t2, qcfg)?;
            let exact = ExactThresholds {
                i1: kernel.row_integral_exact(&qe, &qe, &e2)?,
                i2: kernel.row_integral_exact(&e2, &e1, &e2)?,
                i3: kernel.row_integral_exact(&qe, &e1, &e2)?,
                i3_literal: kernel.row_integral_exact(&qe, &e1, &e2)?,
                i4: kernel.row_integral_exact(&e2, &e1, &e2)?,
            };
            (i1, i2, i3, i3, i2, exact)
        }
        ConeVariant::Symmetric => {
            let q = d.eighth();
            let mid = d.midpoint();
            let qe = (&e1 * Rational::from_integer(BigInt::from(7)) + &e2)
                / Rational::from_integer(BigInt::from(8));
            let mide = (&e1 + &e2) / &two;
            let i1 = kernel_row_integral(kernel, q, q, mid, qcfg)?;
            let i2 = kernel_row_integral(kernel, mid, t1, t2, qcfg)?;
            let i3 = symmetrized_row_integral(kernel, q, qcfg)?;
            let i3_literal = kernel_row_integral(kernel, q, t1, t2, qcfg)?;
            let i4 = kernel_row_integral(kernel, mid, t1, mid, qcfg)?;
            let exact = ExactThresholds {
                i1: kernel.row_integral_exact(&qe, &qe, &mide)?,
                i2: kernel.row_integral_exact(&mide, &e1, &e2)?,
                i3: kernel.row_integral_exact(&qe, &e1, &mide)? * &two,
                i3_literal: kernel.row_integral_exact(&qe, &e1, &e2)?,
                i4: kernel.row_integral_exact(&mide, &e1, &mide)?,
            };
            (i1, i2, i3, i3_literal, i4, exact)
        }
    };

    for (name, value) in [
        ("I1", i1),
        ("I2", i2),
        ("I3", i3),
        ("I3_literal", i3_literal),
        ("I4", i4),
    ] {
        if value.is_nan() || value <= 0.0 {
            return Err(CertificateError::DegenerateKernel { name, value });
        }
    }

    Ok(Thresholds {
        variant,
        i1,
        i2,
        i3,
        i3_literal,
        i4,
        exact,
    })
}

/// A fully evaluated certificate: thresholds, the four signed margins,
/// and the verdict. `satisfied` iff every margin strictly exceeds the
/// strictness guard and `b > a` whenever `a > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub variant: ConeVariant,
    pub params: BoxParams,
    pub thresholds: Thresholds,
    /// Signed slacks of conditions (1)–(4); positive means satisfied.
    pub margins: [f64; 4],
    pub satisfied: bool,
    pub strictness_eps: f64,
    pub notes: String,
    /// Exact condition bounds `[a/I1, b/I2, c/I3, d/I4]`.
    #[serde(serialize_with = "ser_rational_array")]
    pub exact_bounds: [Rational; 4],
}

impl Certificate {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

fn certify_with_thresholds(
    kernel: &Kernel,
    split: &MonotoneSplit,
    params: BoxParams,
    thresholds: Thresholds,
    strictness_eps: f64,
) -> Result<Certificate, CertificateError> {
    let k = kernel.k_exponent();
    let four_k = pow_k(4.0, k);
    let m1 = split.eval_up(params.a + params.d / four_k)? * thresholds.i1 - params.a;
    let m2 = params.b - split.eval_up(params.b + four_k * params.c)? * thresholds.i2;
    let m3 = params.c - split.eval_down(0.0)? * thresholds.i3_conservative();
    let m4 = split.eval_down(params.b + params.d)? * thresholds.i4 - params.d;
    let margins = [m1, m2, m3, m4];

    let order_ok = params.a == 0.0 || params.b > params.a;
    let min_margin = margins.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let satisfied = min_margin > strictness_eps && order_ok;

    let exact_bounds = thresholds.exact.condition_bounds(&params);
    let mut notes = String::new();
    if thresholds.variant == ConeVariant::Symmetric && thresholds.i3 != thresholds.i3_literal {
        notes.push_str(&format!(
            "condition-3 integral differs by convention: half-interval 2*int[T1,Tmid] = {} \
             vs literal int[T1,T2] = {}; margins use the larger (threshold c/I3 = {} vs {}); \
             certificates hold under either reading.\n",
            thresholds.exact.i3,
            thresholds.exact.i3_literal,
            exact_bounds[2],
            rational_from_f64(params.c) / &thresholds.exact.i3_literal,
        ));
    }
    notes.push_str(&format!(
        "exact condition bounds: a/I1 = {}, b/I2 = {}, c/I3 = {}, d/I4 = {}\n",
        exact_bounds[0], exact_bounds[1], exact_bounds[2], exact_bounds[3],
    ));
    if !satisfied && order_ok && min_margin >= 0.0 && min_margin <= strictness_eps {
        notes.push_str("boundary: a margin is not strictly positive, not certified.\n");
    }
    if !order_ok {
        notes.push_str("order violated: a > 0 requires b > a.\n");
    }

    Ok(Certificate {
        variant: thresholds.variant,
        params,
        thresholds,
        margins,
        satisfied,
        strictness_eps,
        notes,
        exact_bounds,
    })
}

/// Verifies the split, computes thresholds, and evaluates the four
/// condition margins. The split is sampled up to `b + 4^k c + 1`, the
/// largest argument any condition evaluates, with margin.
pub fn certify(
    kernel: &Kernel,
    split: &MonotoneSplit,
    params: BoxParams,
    variant: ConeVariant,
    qcfg: &QuadratureConfig,
    strictness_eps: f64,
) -> Result<Certificate, CertificateError> {
    let x_max = params.b + pow_k(4.0, kernel.k_exponent()) * params.c + 1.0;
    let report = split.verify(x_max, SPLIT_SAMPLES)?;
    if !report.passed {
        return Err(CertificateError::SplitRejected {
            worst: report.worst_violation,
            report,
        });
    }
    let thresholds = compute_thresholds(kernel, variant, qcfg)?;
    certify_with_thresholds(kernel, split, params, thresholds, strictness_eps)
}

/// Certificate with `a = d = 0`: condition (1) reduces to `f_up(0) > 0`
/// and condition (4) to `f_down(b) > 0`.
pub fn simplified_certify(
    kernel: &Kernel,
    split: &MonotoneSplit,
    b: f64,
    c: f64,
    variant: ConeVariant,
    qcfg: &QuadratureConfig,
    strictness_eps: f64,
) -> Result<Certificate, CertificateError> {
    let params = BoxParams::simplified(b, c)?;
    certify(kernel, split, params, variant, qcfg, strictness_eps)
}

/// One necessary relation between box parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationCheck {
    /// False when the relation's precondition does not hold, in which case
    /// it constrains nothing and passes vacuously.
    pub applicable: bool,
    pub bound: f64,
    pub value: f64,
    pub slack: f64,
    pub passed: bool,
}

/// Necessary conditions implied by the certificate inequalities; a failed
/// relation proves no nonlinearity can satisfy the conditions with these
/// parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryReport {
    /// `d < c · (I2/I3)` (general) or `d < c · (I4/I3)` (symmetric).
    pub relation1: RelationCheck,
    /// When `d < 4^{2k} c`: `a < b · (I1/I2)`.
    pub relation2: RelationCheck,
    pub passed: bool,
}

pub fn corollary_relations(thresholds: &Thresholds, params: &BoxParams, k: f64) -> CorollaryReport {
    let numerator = match thresholds.variant {
        ConeVariant::General => thresholds.i2,
        ConeVariant::Symmetric => thresholds.i4,
    };
    let bound1 = params.c * (numerator / thresholds.i3);
    let relation1 = RelationCheck {
        applicable: true,
        bound: bound1,
        value: params.d,
        slack: bound1 - params.d,
        passed: params.d < bound1,
    };

    let applicable = params.d < pow_k(4.0, 2.0 * k) * params.c;
    let bound2 = params.b * (thresholds.i1 / thresholds.i2);
    let relation2 = RelationCheck {
        applicable,
        bound: bound2,
        value: params.a,
        slack: bound2 - params.a,
        passed: !applicable || params.a < bound2,
    };

    CorollaryReport {
        relation1,
        relation2,
        passed: relation1.passed && relation2.passed,
    }
}

/// Candidate values for the box-parameter search; each axis is scanned in
/// ascending order after sorting and deduplication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchGrid {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            a: vec![0.0],
            b: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            c: vec![0.0625, 0.125, 0.25, 0.5, 1.0],
            d: vec![0.0],
        }
    }
}

fn sorted_axis(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Deterministic grid search over `(a, b, c, d)`: ascending `b`, then `c`,
/// then `a`, then `d`, pruned by the corollary relations. Returns the
/// first satisfying certificate, or `None` — absence is a value, not an
/// error.
pub fn search_box_params(
    kernel: &Kernel,
    split: &MonotoneSplit,
    variant: ConeVariant,
    grid: &SearchGrid,
    qcfg: &QuadratureConfig,
    strictness_eps: f64,
) -> Result<Option<Certificate>, CertificateError> {
    let (axis_a, axis_b, axis_c, axis_d) = (
        sorted_axis(&grid.a),
        sorted_axis(&grid.b),
        sorted_axis(&grid.c),
        sorted_axis(&grid.d),
    );
    if axis_a.is_empty() || axis_b.is_empty() || axis_c.is_empty() || axis_d.is_empty() {
        return Ok(None);
    }
    let thresholds = compute_thresholds(kernel, variant, qcfg)?;
    let k = kernel.k_exponent();
    for &b in &axis_b {
        for &c in &axis_c {
            for &a in &axis_a {
                for &d in &axis_d {
                    let params = match BoxParams::new(a, b, c, d) {
                        Ok(p) => p,
                        Err(_) => continue,
                    };
                    if a > 0.0 && b <= a {
                        continue;
                    }
                    if !corollary_relations(&thresholds, &params, k).passed {
                        continue;
                    }
                    let x_max = b + pow_k(4.0, k) * c + 1.0;
                    let report = split.verify(x_max, SPLIT_SAMPLES)?;
                    if !report.passed {
                        return Err(CertificateError::SplitRejected {
                            worst: report.worst_violation,
                            report,
                        });
                    }
                    let cert = certify_with_thresholds(
                        kernel,
                        split,
                        params,
                        thresholds.clone(),
                        strictness_eps,
                    )?;
                    if cert.satisfied {
                        return Ok(Some(cert));
                    }
                }
            }
        }
    }
    Ok(None)
}
