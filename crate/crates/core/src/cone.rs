//! Order cones of candidate solutions and the four functionals the
//! existence certificates evaluate on them.
//!
//! The general cone asks for nonnegative, nondecreasing functions with the
//! scaling property `(y-T1)^k x(w) <= (w-T1)^k x(y)` for `y <= w`; the
//! symmetric cone additionally asks for reflection symmetry and applies
//! the monotonicity/scaling clauses on the left half interval only.

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{Interval, Kernel};

#[derive(Debug, Error)]
pub enum ConeError {
    #[error("k exponent must be positive and finite, got {0}")]
    InvalidExponent(f64),
    #[error("grid needs at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("nodes and values differ in length: {nodes} vs {values}")]
    LengthMismatch { nodes: usize, values: usize },
    #[error("nodes must be finite and strictly ascending (violated at index {0})")]
    NodesNotAscending(usize),
    #[error("value at index {index} is not finite: {value}")]
    NonFiniteValue { index: usize, value: f64 },
    #[error("evaluation point {0} lies outside the grid span [{1}, {2}]")]
    OutOfSpan(f64, f64, f64),
    #[error(
        "grid span [{got_lo}, {got_hi}] does not cover the cone interval [{want_lo}, {want_hi}]"
    )]
    SpanMismatch {
        got_lo: f64,
        got_hi: f64,
        want_lo: f64,
        want_hi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConeVariant {
    General,
    Symmetric,
}

impl std::fmt::Display for ConeVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConeVariant::General => f.write_str("general"),
            ConeVariant::Symmetric => f.write_str("symmetric"),
        }
    }
}

/// Cone description: interval, scaling exponent, and the two distinguished
/// evaluation points.
///
/// * general: focal `(3T1+T2)/4`, right endpoint `T2`;
/// * symmetric: focal `(7T1+T2)/8`, right point `T̄ = (T1+T2)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeSpec {
    pub variant: ConeVariant,
    pub interval: Interval,
    pub k_exponent: f64,
    pub focal_point: f64,
    pub right_point: f64,
}

impl ConeSpec {
    pub fn new(variant: ConeVariant, interval: Interval, k_exponent: f64) -> Result<Self, ConeError> {
        if !(k_exponent.is_finite() && k_exponent > 0.0) {
            return Err(ConeError::InvalidExponent(k_exponent));
        }
        let (focal_point, right_point) = match variant {
            ConeVariant::General => (interval.quarter(), interval.t2()),
            ConeVariant::Symmetric => (interval.eighth(), interval.midpoint()),
        };
        debug_assert!(focal_point < right_point);
        Ok(Self {
            variant,
            interval,
            k_exponent,
            focal_point,
            right_point,
        })
    }

    /// Cone over a kernel's domain with the kernel's exponent.
    pub fn for_kernel(kernel: &Kernel, variant: ConeVariant) -> Self {
        Self::new(variant, kernel.domain(), kernel.k_exponent())
            .expect("kernel k_exponent is validated at construction")
    }
}

/// `base^k`, with the common `k = 1` short-circuited so scaling margins
/// stay exact products.
pub(crate) fn pow_k(base: f64, k: f64) -> f64 {
    if k == 1.0 {
        base
    } else {
        base.powf(k)
    }
}

/// A function sampled on an ascending node grid; between nodes the value
/// is defined by linear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self, ConeError> {
        if nodes.len() < 2 {
            return Err(ConeError::TooFewNodes(nodes.len()));
        }
        if nodes.len() != values.len() {
            return Err(ConeError::LengthMismatch {
                nodes: nodes.len(),
                values: values.len(),
            });
        }
        for i in 0..nodes.len() {
            if !nodes[i].is_finite() || (i > 0 && nodes[i] <= nodes[i - 1]) {
                return Err(ConeError::NodesNotAscending(i));
            }
            if !values[i].is_finite() {
                return Err(ConeError::NonFiniteValue {
                    index: i,
                    value: values[i],
                });
            }
        }
        Ok(Self { nodes, values })
    }

    pub fn from_fn(nodes: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self, ConeError> {
        let values = nodes.iter().map(|&t| f(t)).collect();
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least two nodes
    }

    pub fn first_node(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last_node(&self) -> f64 {
        *self.nodes.last().expect("non-empty grid")
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Linear interpolation; `t` slightly outside the span (within
    /// `1e-12 * span` of an endpoint) is treated as the endpoint so that
    /// reflections survive rounding.
    pub fn eval(&self, t: f64) -> Result<f64, ConeError> {
        let lo = self.first_node();
        let hi = self.last_node();
        let slack = 1e-12 * (hi - lo);
        if !t.is_finite() || t < lo - slack || t > hi + slack {
            return Err(ConeError::OutOfSpan(t, lo, hi));
        }
        let t = t.clamp(lo, hi);
        match self.nodes.binary_search_by(|n| n.total_cmp(&t)) {
            Ok(i) => Ok(self.values[i]),
            Err(i) => {
                let (a, b) = (self.nodes[i - 1], self.nodes[i]);
                let frac = (t - a) / (b - a);
                Ok(self.values[i - 1] + frac * (self.values[i] - self.values[i - 1]))
            }
        }
    }

    fn require_span(&self, interval: &Interval) -> Result<(), ConeError> {
        let slack = 1e-12 * interval.span();
        if (self.first_node() - interval.t1()).abs() > slack
            || (self.last_node() - interval.t2()).abs() > slack
        {
            return Err(ConeError::SpanMismatch {
                got_lo: self.first_node(),
                got_hi: self.last_node(),
                want_lo: interval.t1(),
                want_hi: interval.t2(),
            });
        }
        Ok(())
    }
}

/// Values of the two convex (`beta`, `theta`) and two concave
/// (`alpha`, `psi`) functionals at a grid function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functionals {
    /// `min` over `[focal_point, right_point]`.
    pub alpha: f64,
    /// Value at the right point.
    pub beta: f64,
    /// Value at the focal point.
    pub theta: f64,
    /// Value at the right point.
    pub psi: f64,
}

/// Evaluates the four functionals. `alpha` is computed as attained
/// minimum rather than assumed equal to `theta`; for nondecreasing
/// members the two coincide, which is a testable property.
pub fn functionals(x: &GridFunction, spec: &ConeSpec) -> Result<Functionals, ConeError> {
    x.require_span(&spec.interval)?;
    let beta = x.eval(spec.right_point)?;
    let theta = x.eval(spec.focal_point)?;
    let psi = beta;
    // Piecewise-linear minimum over [focal, right]: interior nodes plus
    // the interpolated segment endpoints.
    let mut alpha = theta.min(beta);
    for (i, &t) in x.nodes().iter().enumerate() {
        if t > spec.focal_point && t < spec.right_point {
            alpha = alpha.min(x.values()[i]);
        }
    }
    Ok(Functionals {
        alpha,
        beta,
        theta,
        psi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MembershipClause {
    /// Values nonnegative on the whole interval.
    Nonnegative,
    /// Nondecreasing on `[T1, right_point]`.
    Nondecreasing,
    /// `(y-T1)^k x(w) <= (w-T1)^k x(y)` for node pairs `y <= w` in
    /// `[T1, right_point]`.
    KScaling,
    /// `x(T2 - t + T1) = x(t)` at all nodes (symmetric variant only).
    Symmetry,
}

impl std::fmt::Display for MembershipClause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MembershipClause::Nonnegative => "nonnegative",
            MembershipClause::Nondecreasing => "nondecreasing",
            MembershipClause::KScaling => "k-scaling",
            MembershipClause::Symmetry => "symmetry",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClauseCheck {
    pub clause: MembershipClause,
    /// Signed margin; negative means the raw inequality is violated.
    /// The clause passes iff `worst_margin >= -tol`.
    pub worst_margin: f64,
    /// Node pair attaining the worst margin (a single point is repeated).
    pub witness: Option<(f64, f64)>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub variant: ConeVariant,
    pub tol: f64,
    pub clauses: Vec<ClauseCheck>,
    pub passed: bool,
}

impl MembershipReport {
    pub fn clause(&self, which: MembershipClause) -> Option<&ClauseCheck> {
        self.clauses.iter().find(|c| c.clause == which)
    }
}

/// Checks cone membership on node pairs. Linear interpolation between
/// nodes is the defined semantics, so node-pair checking is exact for the
/// stored representation.
pub fn check_membership(
    x: &GridFunction,
    spec: &ConeSpec,
    tol: f64,
) -> Result<MembershipReport, ConeError> {
    x.require_span(&spec.interval)?;
    let t1 = spec.interval.t1();
    let k = spec.k_exponent;
    let nodes = x.nodes();
    let values = x.values();
    // Index of the last node inside [T1, right_point] (with tiny slack so
    // the right point itself participates even if rounded).
    let right_slack = spec.right_point + 1e-12 * spec.interval.span();
    let upto = nodes.partition_point(|&t| t <= right_slack);

    let mut clauses = Vec::new();

    // (a) nonnegativity at every node.
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for (i, &v) in values.iter().enumerate() {
        if v < worst {
            worst = v;
            witness = Some((nodes[i], nodes[i]));
        }
    }
    clauses.push(ClauseCheck {
        clause: MembershipClause::Nonnegative,
        worst_margin: worst,
        witness,
        passed: worst >= -tol,
    });

    // (b) nondecreasing on [T1, right_point].
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for i in 1..upto {
        let margin = values[i] - values[i - 1];
        if margin < worst {
            worst = margin;
            witness = Some((nodes[i - 1], nodes[i]));
        }
    }
    clauses.push(ClauseCheck {
        clause: MembershipClause::Nondecreasing,
        worst_margin: worst,
        witness,
        passed: worst >= -tol,
    });

    // (c) k-scaling over node pairs y <= w in [T1, right_point].
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for i in 0..upto {
        let uy = pow_k(nodes[i] - t1, k);
        for j in i..upto {
            let uw = pow_k(nodes[j] - t1, k);
            let margin = uw * values[i] - uy * values[j];
            if margin < worst {
                worst = margin;
                witness = Some((nodes[i], nodes[j]));
            }
        }
    }
    clauses.push(ClauseCheck {
        clause: MembershipClause::KScaling,
        worst_margin: worst,
        witness,
        passed: worst >= -tol,
    });

    // (d) reflection symmetry at every node (symmetric variant).
    if spec.variant == ConeVariant::Symmetric {
        let mut worst = f64::INFINITY;
        let mut witness = None;
        for (i, &t) in nodes.iter().enumerate() {
            let reflected = spec.interval.reflect(t);
            let margin = -(x.eval(reflected)? - values[i]).abs();
            if margin < worst {
                worst = margin;
                witness = Some((t, reflected));
            }
        }
        clauses.push(ClauseCheck {
            clause: MembershipClause::Symmetry,
            worst_margin: worst,
            witness,
            passed: worst >= -tol,
        });
    }

    let passed = clauses.iter().all(|c| c.passed);
    Ok(MembershipReport {
        variant: spec.variant,
        tol,
        clauses,
        passed,
    })
}

/// Uniform grid of `n >= 2` nodes over the interval with required points
/// (focal, right point, midpoint) merged in; used to build candidate and
/// solution grids.
pub fn standard_nodes(interval: &Interval, n: usize, spec: Option<&ConeSpec>) -> Vec<f64> {
    let n = n.max(2);
    let mut nodes: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                interval.t2()
            } else {
                interval.t1() + interval.span() * (i as f64 / (n - 1) as f64)
            }
        })
        .collect();
    let mut required = vec![interval.midpoint()];
    if let Some(s) = spec {
        required.push(s.focal_point);
        required.push(s.right_point);
    }
    let slack = 1e-12 * interval.span();
    for r in required {
        if !nodes.iter().any(|&t| (t - r).abs() <= slack) {
            nodes.push(r);
        }
    }
    nodes.sort_by(f64::total_cmp);
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::lidstone_kernel;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    fn grid_of(f: impl Fn(f64) -> f64, n: usize, spec: &ConeSpec) -> GridFunction {
        GridFunction::from_fn(standard_nodes(&unit(), n, Some(spec)), f).unwrap()
    }

    #[test]
    fn grid_function_validation() {
        assert!(GridFunction::new(vec![0.0], vec![0.0]).is_err());
        assert!(GridFunction::new(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(GridFunction::new(vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(GridFunction::new(vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(GridFunction::new(vec![0.0, 1.0], vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn interpolation_contract() {
        let g = GridFunction::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(g.eval(0.25).unwrap(), 0.5);
        assert_eq!(g.eval(0.5).unwrap(), 1.0);
        assert_eq!(g.eval(0.75).unwrap(), 0.5);
        assert!(g.eval(1.5).is_err());
    }

    #[test]
    fn functionals_identity_function_general() {
        let spec = ConeSpec::new(ConeVariant::General, unit(), 1.0).unwrap();
        let x = grid_of(|t| t, 101, &spec);
        let f = functionals(&x, &spec).unwrap();
        assert_eq!(f.beta, 1.0);
        assert_eq!(f.theta, 0.25);
        assert_eq!(f.alpha, 0.25);
        assert_eq!(f.psi, 1.0);
    }

    #[test]
    fn functionals_zero_function() {
        let spec = ConeSpec::new(ConeVariant::General, unit(), 1.0).unwrap();
        let x = grid_of(|_| 0.0, 33, &spec);
        let f = functionals(&x, &spec).unwrap();
        assert_eq!((f.alpha, f.beta, f.theta, f.psi), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn functionals_identity_function_symmetric() {
        let spec = ConeSpec::new(ConeVariant::Symmetric, unit(), 1.0).unwrap();
        let x = grid_of(|t| t, 101, &spec);
        let f = functionals(&x, &spec).unwrap();
        assert_eq!(f.beta, 0.5);
        assert_eq!(f.theta, 0.125);
    }

    #[test]
    fn identity_is_a_general_cone_member() {
        let spec = ConeSpec::new(ConeVariant::General, unit(), 1.0).unwrap();
        let x = grid_of(|t| t, 101, &spec);
        let report = check_membership(&x, &spec, 1e-9).unwrap();
        assert!(report.passed, "clauses: {:?}", report.clauses);
        // The scaling clause holds with equality: y·w = w·y.
        let scaling = report.clause(MembershipClause::KScaling).unwrap();
        assert_eq!(scaling.worst_margin, 0.0);
    }

    #[test]
    fn square_fails_k_scaling_with_predicted_witness() {
        let spec = ConeSpec::new(ConeVariant::General, unit(), 1.0).unwrap();
        let x = grid_of(|t| t * t, 101, &spec);
        let report = check_membership(&x, &spec, 1e-9).unwrap();
        assert!(!report.passed);
        let scaling = report.clause(MembershipClause::KScaling).unwrap();
        assert!(!scaling.passed);
        // margin(y,w) = w y² - y w² = y w (y - w); the grid minimum is at
        // y = 1/2, w = 1 with value -1/4.
        assert_eq!(scaling.witness, Some((0.5, 1.0)));
        assert!((scaling.worst_margin + 0.25).abs() <= 1e-15);
    }

    #[test]
    fn quartic_is_a_symmetric_cone_member() {
        let spec = ConeSpec::new(ConeVariant::Symmetric, unit(), 1.0).unwrap();
        let quartic = |t: f64| (t.powi(4) - 2.0 * t.powi(3) + t) / 24.0;
        let x = grid_of(quartic, 129, &spec);
        let report = check_membership(&x, &spec, 1e-9).unwrap();
        assert!(report.passed, "clauses: {:?}", report.clauses);
    }

    #[test]
    fn asymmetric_function_fails_symmetry_clause() {
        let spec = ConeSpec::new(ConeVariant::Symmetric, unit(), 1.0).unwrap();
        let x = grid_of(|t| t, 101, &spec);
        let report = check_membership(&x, &spec, 1e-9).unwrap();
        let sym = report.clause(MembershipClause::Symmetry).unwrap();
        assert!(!sym.passed);
    }

    #[test]
    fn member_functionals_are_ordered() {
        // theta <= beta and alpha <= psi for monotone members.
        let spec = ConeSpec::new(ConeVariant::General, unit(), 1.0).unwrap();
        for f in [
            |t: f64| t,
            |t: f64| t.min(0.7),
            |t: f64| t.sqrt() * 0.3,
            |_: f64| 0.25,
        ] {
            let x = grid_of(f, 65, &spec);
            let report = check_membership(&x, &spec, 1e-9).unwrap();
            assert!(report.passed);
            let vals = functionals(&x, &spec).unwrap();
            assert!(vals.theta <= vals.beta + 1e-12);
            assert!(vals.alpha <= vals.psi + 1e-12);
            // alpha coincides with theta for nondecreasing members.
            assert!((vals.alpha - vals.theta).abs() <= 1e-12);
        }
    }

    #[test]
    fn members_obey_the_four_k_bound() {
        // x(T2) <= 4^k x((3T1+T2)/4) for general members.
        let spec = ConeSpec::new(ConeVariant::General, unit(), 1.0).unwrap();
        for f in [|t: f64| t, |t: f64| t.min(0.4), |t: f64| (2.0 * t).min(t + 0.3)] {
            let x = grid_of(f, 65, &spec);
            assert!(check_membership(&x, &spec, 1e-9).unwrap().passed);
            let at_end = x.eval(1.0).unwrap();
            let at_focal = x.eval(0.25).unwrap();
            assert!(at_end <= 4.0 * at_focal + 1e-9);
        }
    }

    #[test]
    fn membership_is_scale_invariant() {
        let spec = ConeSpec::new(ConeVariant::General, unit(), 1.0).unwrap();
        for f in [
            |t: f64| t,
            |t: f64| t * t, // non-member
            |t: f64| t.min(0.6),
        ] {
            let x = grid_of(f, 41, &spec);
            let doubled = GridFunction::new(
                x.nodes().to_vec(),
                x.values().iter().map(|v| 2.0 * v).collect(),
            )
            .unwrap();
            let a = check_membership(&x, &spec, 0.0).unwrap();
            let b = check_membership(&doubled, &spec, 0.0).unwrap();
            assert_eq!(a.passed, b.passed);
        }
    }

    #[test]
    fn cone_spec_points_from_kernel() {
        let g = lidstone_kernel();
        let spec = ConeSpec::for_kernel(&g, ConeVariant::Symmetric);
        assert_eq!(spec.focal_point, 0.125);
        assert_eq!(spec.right_point, 0.5);
        let spec = ConeSpec::for_kernel(&g, ConeVariant::General);
        assert_eq!(spec.focal_point, 0.25);
        assert_eq!(spec.right_point, 1.0);
    }

    #[test]
    fn standard_nodes_include_required_points() {
        let spec = ConeSpec::new(ConeVariant::Symmetric, unit(), 1.0).unwrap();
        let nodes = standard_nodes(&unit(), 10, Some(&spec));
        for p in [0.0, 1.0, 0.125, 0.5] {
            assert!(nodes.iter().any(|&t| (t - p).abs() <= 1e-12));
        }
        for w in nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
    }
}
