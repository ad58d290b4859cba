//! Damped Picard iteration for the fixed-point problem
//! `x = T x`, `(T x)(t) = ∫ G(t,τ) f(x(τ)) dτ`, discretized Nystrom-style
//! on a node grid with linear interpolation between nodes.
//!
//! Quadrature panels are aligned to both the grid nodes and the crease
//! `τ = t` (every evaluation point is itself a node), so the piecewise
//! structure of the integrand never straddles a panel.
//!
//! There is no global convergence guarantee for Picard iteration;
//! non-convergence is a reported outcome, never a panic.

use serde::Serialize;
use thiserror::Error;

use crate::cone::{
    check_membership, functionals, standard_nodes, ConeError, ConeSpec, Functionals,
    GridFunction, MembershipReport,
};
use crate::kernel::Kernel;
use crate::quadrature::{legendre_rule, QuadratureConfig};
use crate::split::{MonotoneSplit, ScalarFn, SplitError};

/// Inputs this far below zero are rejected; values in `[-NEG_CLAMP, 0)`
/// are treated as exact zeros (the nonlinearity lives on `[0, ∞)`).
const NEG_CLAMP: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("grid_points must be >= 2, got {0}")]
    InvalidGridPoints(usize),
    #[error("damping must lie in (0, 1], got {0}")]
    InvalidDamping(f64),
    #[error("residual_tol must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("input value {value} at node {node} is negative beyond the clamp window")]
    NegativeInput { node: f64, value: f64 },
    #[error("nonlinearity returned non-finite value {value} at tau = {tau} (iteration {iteration})")]
    NonFiniteAt {
        tau: f64,
        value: f64,
        iteration: usize,
    },
    #[error("solution grid does not span the kernel domain")]
    GridSpanMismatch,
    #[error("result has not converged; validation requires a converged solve")]
    NotConverged,
    #[error("sample {index} is not a cone member (clause {clause})")]
    SampleNotInCone { index: usize, clause: String },
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Split(#[from] SplitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Node count before the cone's focal/right points are merged in.
    pub grid_points: usize,
    pub max_iterations: usize,
    /// Sup-norm defect below which the iterate counts as converged.
    pub residual_tol: f64,
    pub damping: f64,
    /// Residual growth factor (relative to the first residual) that flags
    /// divergence.
    pub divergence_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_points: 129,
            max_iterations: 500,
            residual_tol: 1e-10,
            damping: 1.0,
            divergence_factor: 1e6,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), SolveError> {
        if self.grid_points < 2 {
            return Err(SolveError::InvalidGridPoints(self.grid_points));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(SolveError::InvalidDamping(self.damping));
        }
        if self.residual_tol.is_nan() || self.residual_tol <= 0.0 {
            return Err(SolveError::InvalidTolerance(self.residual_tol));
        }
        Ok(())
    }
}

/// Starting iterate for the fixed-point loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub enum InitialGuess {
    /// The zero function, the bottom of the cone.
    #[default]
    Zero,
    /// `t ↦ scale · (t - T1)/(T2 - T1)`.
    Linear { scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionResult {
    pub x: GridFunction,
    /// Sup-norm of `x - T x` at the returned iterate.
    pub residual: f64,
    /// Number of operator applications performed.
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    pub history: Vec<f64>,
}

/// Precomputed quadrature of `∫ G(t_i, τ) g(x(τ)) dτ` over a fixed grid:
/// kernel rows against the panel-aligned Gauss nodes are evaluated once,
/// each application is then one scalar pass plus a matrix-vector product
/// in fixed summation order.
struct NystromOperator {
    /// Quadrature abscissae, ascending, one block per grid segment.
    taus: Vec<f64>,
    /// Left segment index per abscissa (for interpolation).
    segment: Vec<usize>,
    /// Interpolation fraction within the segment per abscissa.
    fraction: Vec<f64>,
    /// `rows[i][m] = G(nodes[i], taus[m]) * weight[m]`.
    rows: Vec<Vec<f64>>,
}

impl NystromOperator {
    fn build(kernel: &Kernel, nodes: &[f64], nodes_per_panel: usize) -> Self {
        let rule = legendre_rule(nodes_per_panel);
        let mut taus = Vec::new();
        let mut weights = Vec::new();
        let mut segment = Vec::new();
        let mut fraction = Vec::new();
        for s in 0..nodes.len() - 1 {
            let (a, b) = (nodes[s], nodes[s + 1]);
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            for &(xi, w) in rule.iter() {
                let tau = mid + half * xi;
                taus.push(tau);
                weights.push(w * half);
                segment.push(s);
                fraction.push((tau - a) / (b - a));
            }
        }
        let rows = nodes
            .iter()
            .map(|&t| {
                taus.iter()
                    .zip(&weights)
                    .map(|(&tau, &w)| kernel.eval_raw(t, tau) * w)
                    .collect()
            })
            .collect();
        Self {
            taus,
            segment,
            fraction,
            rows,
        }
    }

    /// Values of the interpolant of `values` at every abscissa.
    fn interpolate(&self, values: &[f64]) -> Vec<f64> {
        self.segment
            .iter()
            .zip(&self.fraction)
            .map(|(&s, &frac)| values[s] + frac * (values[s + 1] - values[s]))
            .collect()
    }

    /// Applies `x ↦ ∫ G(·,τ) g(x(τ)) dτ` for one part `g`.
    fn apply_part(
        &self,
        g: &ScalarFn,
        x_at_taus: &[f64],
        iteration: usize,
    ) -> Result<Vec<f64>, SolveError> {
        let mut g_vals = Vec::with_capacity(x_at_taus.len());
        for (&xv, &tau) in x_at_taus.iter().zip(&self.taus) {
            let v = g(xv);
            if !v.is_finite() {
                return Err(SolveError::NonFiniteAt {
                    tau,
                    value: v,
                    iteration,
                });
            }
            g_vals.push(v);
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().zip(&g_vals).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Validates node values against the clamp window and returns the cleaned
/// copy used for interpolation.
fn clamped_values(x: &GridFunction) -> Result<Vec<f64>, SolveError> {
    let mut values = x.values().to_vec();
    for (i, v) in values.iter_mut().enumerate() {
        if *v < -NEG_CLAMP {
            return Err(SolveError::NegativeInput {
                node: x.nodes()[i],
                value: *v,
            });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(values)
}

fn require_domain_span(kernel: &Kernel, x: &GridFunction) -> Result<(), SolveError> {
    let d = kernel.domain();
    let slack = 1e-12 * d.span();
    if (x.first_node() - d.t1()).abs() > slack || (x.last_node() - d.t2()).abs() > slack {
        return Err(SolveError::GridSpanMismatch);
    }
    Ok(())
}

enum Part {
    Up,
    Down,
    Both,
}

fn apply_operator(
    kernel: &Kernel,
    split: &MonotoneSplit,
    x: &GridFunction,
    qcfg: &QuadratureConfig,
    part: Part,
) -> Result<GridFunction, SolveError> {
    require_domain_span(kernel, x)?;
    let values = clamped_values(x)?;
    let op = NystromOperator::build(kernel, x.nodes(), qcfg.nodes_per_panel());
    let x_at_taus = op.interpolate(&values);
    let out = match part {
        Part::Up => op.apply_part(split.f_up_handle(), &x_at_taus, 0)?,
        Part::Down => op.apply_part(split.f_down_handle(), &x_at_taus, 0)?,
        Part::Both => {
            let up = op.apply_part(split.f_up_handle(), &x_at_taus, 0)?;
            let down = op.apply_part(split.f_down_handle(), &x_at_taus, 0)?;
            up.iter().zip(&down).map(|(a, b)| a + b).collect()
        }
    };
    Ok(GridFunction::new(x.nodes().to_vec(), out)?)
}

/// `(T x)(t_i) = ∫ G(t_i,τ) f(x(τ)) dτ` on the grid of `x`. Computed as
/// `R x + S x`, one addition per node, so linearity in the split is exact.
pub fn apply_t(
    kernel: &Kernel,
    split: &MonotoneSplit,
    x: &GridFunction,
    qcfg: &QuadratureConfig,
) -> Result<GridFunction, SolveError> {
    apply_operator(kernel, split, x, qcfg, Part::Both)
}

/// The `f_up` half of the operator.
pub fn apply_r(
    kernel: &Kernel,
    split: &MonotoneSplit,
    x: &GridFunction,
    qcfg: &QuadratureConfig,
) -> Result<GridFunction, SolveError> {
    apply_operator(kernel, split, x, qcfg, Part::Up)
}

/// The `f_down` half of the operator.
pub fn apply_s(
    kernel: &Kernel,
    split: &MonotoneSplit,
    x: &GridFunction,
    qcfg: &QuadratureConfig,
) -> Result<GridFunction, SolveError> {
    apply_operator(kernel, split, x, qcfg, Part::Down)
}

/// Builds the solution grid: `grid_points` uniform nodes with the cone's
/// focal and right points merged in.
pub fn solution_grid(kernel: &Kernel, spec: &ConeSpec, grid_points: usize) -> Vec<f64> {
    standard_nodes(&kernel.domain(), grid_points, Some(spec))
}

/// Damped Picard iteration `x ← (1-damping) x + damping T x` from the
/// initial guess. Stops when the sup-norm defect `|x - T x|` drops to
/// `residual_tol` (converged), after `max_iterations` applications (not
/// converged), or when the defect exceeds `divergence_factor` times the
/// initial one (diverged). Deterministic for identical inputs.
///
/// The split is assumed to have passed [`MonotoneSplit::verify`]; run it
/// (or [`crate::certificate::certify`]) beforehand.
pub fn solve_fixed_point(
    kernel: &Kernel,
    split: &MonotoneSplit,
    spec: &ConeSpec,
    cfg: &SolverConfig,
    qcfg: &QuadratureConfig,
    initial: InitialGuess,
) -> Result<SolutionResult, SolveError> {
    cfg.validate()?;
    let nodes = solution_grid(kernel, spec, cfg.grid_points);
    let d = kernel.domain();
    let mut values: Vec<f64> = match initial {
        InitialGuess::Zero => vec![0.0; nodes.len()],
        InitialGuess::Linear { scale } => nodes
            .iter()
            .map(|&t| scale * (t - d.t1()) / d.span())
            .collect(),
    };
    let op = NystromOperator::build(kernel, &nodes, qcfg.nodes_per_panel());

    let mut history = Vec::new();
    let mut converged = false;
    let mut diverged = false;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for iter in 0..cfg.max_iterations {
        // Negative excursions beyond the clamp window abort the solve; the
        // nonlinearity is only defined on [0, ∞).
        for (i, v) in values.iter_mut().enumerate() {
            if *v < -NEG_CLAMP {
                return Err(SolveError::NegativeInput {
                    node: nodes[i],
                    value: *v,
                });
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let x_at_taus = op.interpolate(&values);
        let up = op.apply_part(split.f_up_handle(), &x_at_taus, iter)?;
        let down = op.apply_part(split.f_down_handle(), &x_at_taus, iter)?;
        let image: Vec<f64> = up.iter().zip(&down).map(|(a, b)| a + b).collect();
        iterations = iter + 1;

        residual = values
            .iter()
            .zip(&image)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        history.push(residual);

        if residual <= cfg.residual_tol {
            converged = true;
            break;
        }
        if residual > cfg.divergence_factor * (1.0 + history[0]) {
            diverged = true;
            break;
        }
        if cfg.damping == 1.0 {
            values = image;
        } else {
            for (x, y) in values.iter_mut().zip(&image) {
                *x = (1.0 - cfg.damping) * *x + cfg.damping * y;
            }
        }
    }

    Ok(SolutionResult {
        x: GridFunction::new(nodes, values)?,
        residual,
        iterations,
        converged,
        diverged,
        history,
    })
}

/// Findings about a computed solution; every entry is informational, not
/// an error.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionValidation {
    /// Sup-norm defect recomputed at the solution nodes with doubled
    /// quadrature order — a check that the quadrature was resolved.
    pub refined_residual: f64,
    /// Minimum over nodes strictly inside the interval.
    pub min_interior: f64,
    /// Positive on the open interval (vacuous for the trivial solution).
    pub positive_interior: bool,
    /// Whether the solution is identically zero up to `tol`.
    pub trivial: bool,
    pub membership: MembershipReport,
    /// `max |x(t) - x(T2-t+T1)|` over nodes; symmetric variant only.
    pub symmetry_defect: Option<f64>,
    pub functionals: Functionals,
}

/// Re-examines a converged solve: refined-quadrature residual, interior
/// positivity, cone membership, symmetry defect, and the functional
/// values for comparison against the certificate box.
pub fn verify_solution(
    kernel: &Kernel,
    split: &MonotoneSplit,
    result: &SolutionResult,
    spec: &ConeSpec,
    tol: f64,
    qcfg: &QuadratureConfig,
) -> Result<SolutionValidation, SolveError> {
    if !result.converged {
        return Err(SolveError::NotConverged);
    }
    let x = &result.x;
    let refined = apply_operator(kernel, split, x, &qcfg.refined(), Part::Both)?;
    let refined_residual = x
        .values()
        .iter()
        .zip(refined.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let d = kernel.domain();
    let slack = 1e-12 * d.span();
    let mut min_interior = f64::INFINITY;
    for (&t, &v) in x.nodes().iter().zip(x.values()) {
        if t > d.t1() + slack && t < d.t2() - slack {
            min_interior = min_interior.min(v);
        }
    }
    let trivial = x.sup_norm() <= tol;
    let positive_interior = trivial || min_interior > 0.0;

    let membership = check_membership(x, spec, tol)?;

    let symmetry_defect = if spec.variant == crate::cone::ConeVariant::Symmetric {
        let mut defect = 0.0f64;
        for (&t, &v) in x.nodes().iter().zip(x.values()) {
            defect = defect.max((x.eval(d.reflect(t))? - v).abs());
        }
        Some(defect)
    } else {
        None
    };

    let functionals = functionals(x, spec)?;

    Ok(SolutionValidation {
        refined_residual,
        min_interior,
        positive_interior,
        trivial,
        membership,
        symmetry_defect,
        functionals,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MappingCheck {
    pub sample_index: usize,
    pub operator: char,
    pub report: MembershipReport,
}

/// Spot check that `T`, `R`, `S` map cone members back into the cone.
#[derive(Debug, Clone, Serialize)]
pub struct ConeMappingReport {
    pub checks: Vec<MappingCheck>,
    pub passed: bool,
}

/// Applies the three operators to each sample and re-checks membership of
/// the images. Samples that are not members themselves are a precondition
/// violation, reported as an error.
pub fn check_cone_mapping(
    kernel: &Kernel,
    split: &MonotoneSplit,
    spec: &ConeSpec,
    samples: &[GridFunction],
    tol: f64,
    qcfg: &QuadratureConfig,
) -> Result<ConeMappingReport, SolveError> {
    for (index, sample) in samples.iter().enumerate() {
        let report = check_membership(sample, spec, tol)?;
        if !report.passed {
            let clause = report
                .clauses
                .iter()
                .find(|c| !c.passed)
                .map(|c| c.clause.to_string())
                .unwrap_or_default();
            return Err(SolveError::SampleNotInCone { index, clause });
        }
    }
    let mut checks = Vec::new();
    for (index, sample) in samples.iter().enumerate() {
        for (operator, part) in [('T', Part::Both), ('R', Part::Up), ('S', Part::Down)] {
            let image = apply_operator(kernel, split, sample, qcfg, part)?;
            let report = check_membership(&image, spec, tol)?;
            checks.push(MappingCheck {
                sample_index: index,
                operator,
                report,
            });
        }
    }
    let passed = checks.iter().all(|c| c.report.passed);
    Ok(ConeMappingReport { checks, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ConeVariant;
    use crate::kernel::lidstone_kernel;
    use approx::assert_abs_diff_eq;

    fn quartic(t: f64) -> f64 {
        (t.powi(4) - 2.0 * t.powi(3) + t) / 24.0
    }

    fn symmetric_spec() -> ConeSpec {
        ConeSpec::for_kernel(&lidstone_kernel(), ConeVariant::Symmetric)
    }

    fn grid_fn(n: usize, f: impl Fn(f64) -> f64) -> GridFunction {
        let g = lidstone_kernel();
        let nodes = solution_grid(&g, &symmetric_spec(), n);
        GridFunction::from_fn(nodes, f).unwrap()
    }

    #[test]
    fn zero_nonlinearity_maps_to_zero() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|_| 0.0, |_| 0.0);
        let x = grid_fn(33, |t| t * (1.0 - t));
        let y = apply_t(&g, &split, &x, &QuadratureConfig::default()).unwrap();
        assert!(y.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_one_yields_the_quartic() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|_| 1.0, |_| 0.0);
        let x = grid_fn(65, |_| 0.0);
        let y = apply_t(&g, &split, &x, &QuadratureConfig::default()).unwrap();
        for (&t, &v) in y.nodes().iter().zip(y.values()) {
            assert_abs_diff_eq!(v, quartic(t), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(y.eval(0.5).unwrap(), 5.0 / 384.0, epsilon = 1e-15);
    }

    #[test]
    fn apply_t_is_r_plus_s_exactly() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_expressions("1 + x/2", "1/(1+x)").unwrap();
        let qcfg = QuadratureConfig::default();
        let x = grid_fn(65, |t| t.min(1.0 - t));
        let t_img = apply_t(&g, &split, &x, &qcfg).unwrap();
        let r_img = apply_r(&g, &split, &x, &qcfg).unwrap();
        let s_img = apply_s(&g, &split, &x, &qcfg).unwrap();
        for i in 0..t_img.len() {
            let sum = r_img.values()[i] + s_img.values()[i];
            assert_eq!(t_img.values()[i], sum); // one addition per node
        }
    }

    #[test]
    fn part_operators_isolate_their_half() {
        let g = lidstone_kernel();
        let qcfg = QuadratureConfig::default();
        let x = grid_fn(65, |t| t.min(1.0 - t));
        // f_down ≡ 0 makes S vanish identically.
        let split = MonotoneSplit::from_fns(|x| 1.0 + x, |_| 0.0);
        let s_img = apply_s(&g, &split, &x, &qcfg).unwrap();
        assert!(s_img.values().iter().all(|&v| v == 0.0));
        // f_up ≡ 1 makes R the row-integral function (the quartic).
        let split = MonotoneSplit::from_fns(|_| 1.0, |x| 1.0 / (1.0 + x));
        let r_img = apply_r(&g, &split, &x, &qcfg).unwrap();
        for (&t, &v) in r_img.nodes().iter().zip(r_img.values()) {
            assert_abs_diff_eq!(v, quartic(t), epsilon = 1e-15);
        }
    }

    #[test]
    fn apply_s_with_constant_down_gives_row_integrals() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|x| x, |x| 1.0 / (1.0 + x));
        let x = grid_fn(65, |_| 0.0);
        let y = apply_s(&g, &split, &x, &QuadratureConfig::default()).unwrap();
        // f_down(0) = 1, so S0 is the row-integral function = the quartic.
        for (&t, &v) in y.nodes().iter().zip(y.values()) {
            assert_abs_diff_eq!(v, quartic(t), epsilon = 1e-15);
        }
    }

    #[test]
    fn negative_inputs_rejected_beyond_clamp() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|x| x, |_| 0.0);
        let nodes = solution_grid(&g, &symmetric_spec(), 17);
        let mut values = vec![0.1; nodes.len()];
        values[3] = -1e-6;
        let x = GridFunction::new(nodes.clone(), values).unwrap();
        assert!(matches!(
            apply_t(&g, &split, &x, &QuadratureConfig::default()),
            Err(SolveError::NegativeInput { .. })
        ));
        // Inside the window the value is clamped to zero.
        let mut values = vec![0.1; nodes.len()];
        values[3] = -1e-13;
        let x = GridFunction::new(nodes, values).unwrap();
        assert!(apply_t(&g, &split, &x, &QuadratureConfig::default()).is_ok());
    }

    #[test]
    fn solve_constant_rhs_in_two_iterations() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|_| 1.0, |_| 0.0);
        let result = solve_fixed_point(
            &g,
            &split,
            &symmetric_spec(),
            &SolverConfig::default(),
            &QuadratureConfig::default(),
            InitialGuess::Zero,
        )
        .unwrap();
        assert!(result.converged);
        assert!(result.iterations <= 2);
        for (&t, &v) in result.x.nodes().iter().zip(result.x.values()) {
            assert_abs_diff_eq!(v, quartic(t), epsilon = 1e-13);
        }
    }

    #[test]
    fn solve_zero_rhs_immediately() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|_| 0.0, |_| 0.0);
        let result = solve_fixed_point(
            &g,
            &split,
            &symmetric_spec(),
            &SolverConfig::default(),
            &QuadratureConfig::default(),
            InitialGuess::Zero,
        )
        .unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations, 1);
        assert_eq!(result.residual, 0.0);
        assert!(result.x.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn solve_example_instance_converges() {
        // sup|f'| <= 3/2 and sup_t ∫G(t,·) = 5/384 give a contraction.
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_expressions("1 + x/2", "1/(1+x)").unwrap();
        let result = solve_fixed_point(
            &g,
            &split,
            &symmetric_spec(),
            &SolverConfig::default(),
            &QuadratureConfig::default(),
            InitialGuess::Zero,
        )
        .unwrap();
        assert!(result.converged);
        assert!(result.residual <= 1e-10);
        assert!(!result.diverged);
    }

    #[test]
    fn solve_is_deterministic() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_expressions("1 + x/2", "1/(1+x)").unwrap();
        let run = || {
            solve_fixed_point(
                &g,
                &split,
                &symmetric_spec(),
                &SolverConfig::default(),
                &QuadratureConfig::default(),
                InitialGuess::Zero,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
        for (x, y) in a.x.values().iter().zip(b.x.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn nonconvergence_is_an_outcome_not_an_error() {
        // f_up(x) = 2 + 100x is far from a contraction at this scale and
        // Picard diverges; the solve must report rather than fail.
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|x| 2.0 + 100.0 * x, |_| 0.0);
        let cfg = SolverConfig {
            max_iterations: 40,
            ..SolverConfig::default()
        };
        let result = solve_fixed_point(
            &g,
            &split,
            &symmetric_spec(),
            &cfg,
            &QuadratureConfig::default(),
            InitialGuess::Zero,
        )
        .unwrap();
        assert!(!result.converged);
    }

    #[test]
    fn linear_initial_guess_is_supported() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_expressions("1 + x/2", "1/(1+x)").unwrap();
        let result = solve_fixed_point(
            &g,
            &split,
            &symmetric_spec(),
            &SolverConfig::default(),
            &QuadratureConfig::default(),
            InitialGuess::Linear { scale: 1.0 },
        )
        .unwrap();
        assert!(result.converged);
    }

    #[test]
    fn validation_of_the_quartic_solution() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|_| 1.0, |_| 0.0);
        let spec = symmetric_spec();
        let qcfg = QuadratureConfig::default();
        let result =
            solve_fixed_point(&g, &split, &spec, &SolverConfig::default(), &qcfg, InitialGuess::Zero)
                .unwrap();
        let validation = verify_solution(&g, &split, &result, &spec, 1e-9, &qcfg).unwrap();
        assert!(validation.refined_residual <= 1e-9);
        assert!(validation.positive_interior);
        assert!(!validation.trivial);
        assert!(validation.membership.passed);
        assert!(validation.symmetry_defect.unwrap() <= 1e-13);
        // beta = x(1/2) = 5/384 for the quartic.
        assert_abs_diff_eq!(validation.functionals.beta, 5.0 / 384.0, epsilon = 1e-13);
    }

    #[test]
    fn trivial_solution_is_flagged() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|_| 0.0, |_| 0.0);
        let spec = symmetric_spec();
        let qcfg = QuadratureConfig::default();
        let result =
            solve_fixed_point(&g, &split, &spec, &SolverConfig::default(), &qcfg, InitialGuess::Zero)
                .unwrap();
        let validation = verify_solution(&g, &split, &result, &spec, 1e-9, &qcfg).unwrap();
        assert!(validation.trivial);
        assert!(validation.positive_interior); // vacuously
    }

    #[test]
    fn validation_requires_convergence() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|x| 2.0 + 100.0 * x, |_| 0.0);
        let spec = symmetric_spec();
        let qcfg = QuadratureConfig::default();
        let cfg = SolverConfig {
            max_iterations: 5,
            ..SolverConfig::default()
        };
        let result = solve_fixed_point(&g, &split, &spec, &cfg, &qcfg, InitialGuess::Zero).unwrap();
        assert!(matches!(
            verify_solution(&g, &split, &result, &spec, 1e-9, &qcfg),
            Err(SolveError::NotConverged)
        ));
    }

    #[test]
    fn cone_mapping_spot_check_passes_for_members() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_expressions("1 + x/2", "1/(1+x)").unwrap();
        let spec = symmetric_spec();
        let samples = vec![
            grid_fn(65, |_| 0.25),
            grid_fn(65, |t| t * (1.0 - t)),
            grid_fn(65, |t| t.min(1.0 - t)),
            grid_fn(65, quartic),
        ];
        let report = check_cone_mapping(
            &g,
            &split,
            &spec,
            &samples,
            1e-9,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(report.passed);
        assert_eq!(report.checks.len(), 12);
    }

    #[test]
    fn cone_mapping_rejects_nonmember_samples() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|x| x, |_| 0.0);
        let spec = symmetric_spec();
        let samples = vec![grid_fn(33, |t| t * t)];
        assert!(matches!(
            check_cone_mapping(
                &g,
                &split,
                &spec,
                &samples,
                1e-9,
                &QuadratureConfig::default()
            ),
            Err(SolveError::SampleNotInCone { index: 0, .. })
        ));
    }

    #[test]
    fn empty_sample_list_passes_vacuously() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|x| x, |_| 0.0);
        let report = check_cone_mapping(
            &g,
            &split,
            &symmetric_spec(),
            &[],
            1e-9,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(report.passed);
        assert!(report.checks.is_empty());
    }

    #[test]
    fn grid_refinement_shrinks_interpolant_error() {
        // Nodal values are quadrature-exact for f ≡ 1; the piecewise-linear
        // interpolant carries the O(h²) error, so doubling the grid must
        // shrink the dense-grid error by at least 3x.
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|_| 1.0, |_| 0.0);
        let spec = symmetric_spec();
        let qcfg = QuadratureConfig::default();
        let dense_error = |points: usize| {
            let cfg = SolverConfig {
                grid_points: points,
                ..SolverConfig::default()
            };
            let result =
                solve_fixed_point(&g, &split, &spec, &cfg, &qcfg, InitialGuess::Zero).unwrap();
            let mut err = 0.0f64;
            for i in 0..=4096 {
                let t = i as f64 / 4096.0;
                err = err.max((result.x.eval(t).unwrap() - quartic(t)).abs());
            }
            err
        };
        let coarse = dense_error(129);
        let fine = dense_error(257);
        assert!(
            coarse / fine >= 3.0,
            "expected >= 3x reduction, got {coarse:.3e} / {fine:.3e}"
        );
    }

    #[test]
    fn config_validation() {
        let g = lidstone_kernel();
        let split = MonotoneSplit::from_fns(|_| 1.0, |_| 0.0);
        let spec = symmetric_spec();
        let qcfg = QuadratureConfig::default();
        for bad in [
            SolverConfig {
                grid_points: 1,
                ..SolverConfig::default()
            },
            SolverConfig {
                damping: 0.0,
                ..SolverConfig::default()
            },
            SolverConfig {
                damping: 1.5,
                ..SolverConfig::default()
            },
            SolverConfig {
                residual_tol: 0.0,
                ..SolverConfig::default()
            },
        ] {
            assert!(solve_fixed_point(&g, &split, &spec, &bad, &qcfg, InitialGuess::Zero).is_err());
        }
    }
}
