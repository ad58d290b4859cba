//! Fixed-order composite Gauss-Legendre quadrature with crease-aware
//! panel splitting for kernel rows.
//!
//! No adaptivity: every built-in integrand is piecewise polynomial, so a
//! fixed rule is exact and the panel sum stays deterministic. Panels are
//! accumulated left to right in a single accumulator.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{Kernel, KernelError};

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("nodes_per_panel must be >= 2, got {0}")]
    InvalidOrder(usize),
    #[error("panels must be >= 1, got {0}")]
    InvalidPanels(usize),
    #[error("integration bounds must satisfy a <= b, got [{a}, {b}]")]
    InvalidBounds { a: f64, b: f64 },
    #[error("integrand returned a non-finite value {value} at tau = {location}")]
    NonFiniteIntegrand { location: f64, value: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Composite Gauss-Legendre configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadratureConfig {
    nodes_per_panel: usize,
    panels: usize,
    crease_split: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes_per_panel: 16,
            panels: 8,
            crease_split: true,
        }
    }
}

impl QuadratureConfig {
    pub fn new(
        nodes_per_panel: usize,
        panels: usize,
        crease_split: bool,
    ) -> Result<Self, QuadratureError> {
        if nodes_per_panel < 2 {
            return Err(QuadratureError::InvalidOrder(nodes_per_panel));
        }
        if panels < 1 {
            return Err(QuadratureError::InvalidPanels(panels));
        }
        Ok(Self {
            nodes_per_panel,
            panels,
            crease_split,
        })
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn crease_split(&self) -> bool {
        self.crease_split
    }

    /// Same rule with doubled node count, used for residual re-checks.
    pub fn refined(&self) -> Self {
        Self {
            nodes_per_panel: self.nodes_per_panel * 2,
            panels: self.panels,
            crease_split: self.crease_split,
        }
    }
}

type Rule = Arc<Vec<(f64, f64)>>;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending by node.
///
/// Roots of the Legendre polynomial are found by Newton iteration from
/// the Chebyshev-like initial guess; rules are cached per order.
pub fn legendre_rule(order: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("legendre rule cache poisoned");
    guard
        .entry(order)
        .or_insert_with(|| Arc::new(compute_legendre_rule(order)))
        .clone()
}

/// Legendre `P_n(x)` and its derivative via the three-term recurrence.
fn legendre_value_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for m in 2..=n {
        let m_f = m as f64;
        let next = ((2.0 * m_f - 1.0) * x * p - (m_f - 1.0) * p_prev) / m_f;
        p_prev = p;
        p = next;
    }
    let deriv = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, deriv)
}

fn compute_legendre_rule(order: usize) -> Vec<(f64, f64)> {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    if order == 1 {
        return vec![(0.0, 2.0)];
    }
    let n = order as f64;
    let mut rule = Vec::with_capacity(order);
    for i in 0..order.div_ceil(2) {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_value_deriv(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                let (p2, d2) = legendre_value_deriv(order, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    // Mirror onto the positive half; odd orders keep the centre node once.
    let half = rule.clone();
    if order % 2 == 1 {
        let centre = *rule.last().expect("non-empty half rule");
        debug_assert!(centre.0.abs() < 1e-14);
        rule.pop();
        rule.push((0.0, centre.1));
    }
    for &(x, w) in half.iter().rev() {
        if x < -1e-14 {
            rule.push((-x, w));
        }
    }
    rule
}

/// Single-panel Gauss-Legendre sum over `[a, b]`.
fn panel_sum<F>(f: &mut F, a: f64, b: f64, rule: &[(f64, f64)]) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in rule {
        let tau = mid + half * x;
        let v = f(tau);
        if !v.is_finite() {
            return Err(QuadratureError::NonFiniteIntegrand {
                location: tau,
                value: v,
            });
        }
        acc += w * v;
    }
    Ok(acc * half)
}

/// `∫_a^b f(τ) dτ` by composite Gauss-Legendre with
/// `config.panels` equal panels of `config.nodes_per_panel` nodes.
pub fn integrate<F>(
    mut f: F,
    a: f64,
    b: f64,
    config: &QuadratureConfig,
) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadratureError::InvalidBounds { a, b });
    }
    if a == b {
        return Ok(0.0);
    }
    let rule = legendre_rule(config.nodes_per_panel);
    let n = config.panels;
    let width = (b - a) / n as f64;
    let mut total = 0.0;
    for p in 0..n {
        let lo = a + width * p as f64;
        let hi = if p + 1 == n { b } else { a + width * (p + 1) as f64 };
        total += panel_sum(&mut f, lo, hi, &rule)?;
    }
    Ok(total)
}

/// `∫_a^b G(t,τ) dτ` with a mandatory panel boundary at the crease
/// `τ = t` whenever it lies strictly inside `[a, b]`.
pub fn kernel_row_integral(
    kernel: &Kernel,
    t: f64,
    a: f64,
    b: f64,
    config: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    let domain = kernel.domain();
    if !domain.contains(t) {
        return Err(KernelError::OutOfDomain {
            name: "t",
            value: t,
            t1: domain.t1(),
            t2: domain.t2(),
        }
        .into());
    }
    if a > b {
        return Err(QuadratureError::InvalidBounds { a, b });
    }
    if !domain.contains(a) || !domain.contains(b) {
        let bad = if domain.contains(a) { b } else { a };
        return Err(KernelError::OutOfDomain {
            name: "tau",
            value: bad,
            t1: domain.t1(),
            t2: domain.t2(),
        }
        .into());
    }
    let f = |tau: f64| kernel.eval_raw(t, tau);
    if config.crease_split() && a < t && t < b {
        Ok(integrate(f, a, t, config)? + integrate(f, t, b, config)?)
    } else {
        integrate(f, a, b, config)
    }
}

/// `2 ∫_{T1}^{T̄} G(t,τ) dτ` where `T̄` is the domain midpoint — the
/// half-interval evaluation convention for the symmetric certificate.
pub fn symmetrized_row_integral(
    kernel: &Kernel,
    t: f64,
    config: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    let domain = kernel.domain();
    Ok(2.0 * kernel_row_integral(kernel, t, domain.t1(), domain.midpoint(), config)?)
}
