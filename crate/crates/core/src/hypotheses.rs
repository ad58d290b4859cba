//! Grid-based verification of the kernel properties required by the
//! existence certificates, reported with signed margins and witnesses.
//!
//! Checks are sampled on equally spaced grids, so they can refute a
//! property but only support (never prove) it; reports carry the grid
//! size so callers can refine.

use serde::Serialize;

use crate::cone::pow_k;
use crate::kernel::Kernel;
use crate::quadrature::{kernel_row_integral, QuadratureConfig, QuadratureError};

/// Default per-axis grid size for hypothesis scans.
pub const DEFAULT_GRID: usize = 101;
/// Default margin tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hypothesis {
    /// Nonnegative and not identically zero.
    H1,
    /// Rows nondecreasing in `t`.
    H2,
    /// `(y-T1)^k G(w,τ) <= (w-T1)^k G(y,τ)` for `y <= w`.
    H3,
    /// Half-interval monotonicity for `τ` in `[t2, T2-t2+T1]`.
    H4i,
    /// Reflected-pair monotonicity for `τ <= t2`.
    H4ii,
    /// Reflection symmetry `G(T2-t+T1, T2-τ+T1) = G(t,τ)`.
    H5,
    /// The row-integral consequence of H3.
    GProp,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Hypothesis::H1 => "H1",
            Hypothesis::H2 => "H2",
            Hypothesis::H3 => "H3",
            Hypothesis::H4i => "H4(i)",
            Hypothesis::H4ii => "H4(ii)",
            Hypothesis::H5 => "H5",
            Hypothesis::GProp => "gprop",
        };
        f.write_str(s)
    }
}

/// Outcome of a single hypothesis scan. `passed == (worst_margin >= -tol)`;
/// an infinite margin means every instance of the inequality was vacuous.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub hypothesis: Hypothesis,
    pub passed: bool,
    pub worst_margin: f64,
    /// Grid coordinates attaining the worst margin; layout per hypothesis:
    /// H1/H5 `(t, τ)`, H2/H4 `(t1, t2, τ)`, H3 `(y, w, τ)`, gprop `(y, w)`.
    pub witness: Option<Vec<f64>>,
    pub grid_size: usize,
    pub tol: f64,
}

impl HypothesisReport {
    fn from_scan(
        hypothesis: Hypothesis,
        worst_margin: f64,
        witness: Option<Vec<f64>>,
        grid_size: usize,
        tol: f64,
    ) -> Self {
        Self {
            hypothesis,
            passed: worst_margin >= -tol,
            worst_margin,
            witness,
            grid_size,
            tol,
        }
    }
}

fn grid_points(kernel: &Kernel, n: usize) -> Vec<f64> {
    let d = kernel.domain();
    (0..n)
        .map(|i| {
            if i + 1 == n {
                d.t2()
            } else {
                d.t1() + d.span() * (i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

fn kernel_grid(kernel: &Kernel, ts: &[f64]) -> Vec<Vec<f64>> {
    ts.iter()
        .map(|&t| ts.iter().map(|&tau| kernel.eval_raw(t, tau)).collect())
        .collect()
}

/// Tracks the minimum margin and the first grid point attaining it, so
/// witnesses are deterministic (lexicographically smallest in scan order).
struct WorstTracker {
    margin: f64,
    witness: Option<Vec<f64>>,
}

impl WorstTracker {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            witness: None,
        }
    }

    fn observe(&mut self, margin: f64, witness: &[f64]) {
        if margin < self.margin {
            self.margin = margin;
            self.witness = Some(witness.to_vec());
        }
    }
}

/// H1: `G >= 0` on the grid and `G` not identically zero.
///
/// Non-triviality is folded into the margin convention by shifting: its
/// margin is `max G - 2 tol`, so `worst_margin >= -tol` iff `max G >= tol`.
pub fn check_h1(kernel: &Kernel, grid_size: usize, tol: f64) -> HypothesisReport {
    assert!(grid_size >= 2, "grid_size must be at least 2");
    let ts = grid_points(kernel, grid_size);
    let mut min_v = f64::INFINITY;
    let mut min_at = (0.0, 0.0);
    let mut max_v = f64::NEG_INFINITY;
    let mut max_at = (0.0, 0.0);
    for &t in &ts {
        for &tau in &ts {
            let v = kernel.eval_raw(t, tau);
            if v < min_v {
                min_v = v;
                min_at = (t, tau);
            }
            if v > max_v {
                max_v = v;
                max_at = (t, tau);
            }
        }
    }
    let nontrivial_margin = max_v - 2.0 * tol;
    let (worst, witness) = if min_v <= nontrivial_margin {
        (min_v, vec![min_at.0, min_at.1])
    } else {
        (nontrivial_margin, vec![max_at.0, max_at.1])
    };
    HypothesisReport::from_scan(Hypothesis::H1, worst, Some(witness), grid_size, tol)
}

/// H2: `G(t1,τ) <= G(t2,τ)` for all grid `t1 <= t2` and all grid `τ`.
pub fn check_h2(kernel: &Kernel, grid_size: usize, tol: f64) -> HypothesisReport {
    assert!(grid_size >= 2, "grid_size must be at least 2");
    let ts = grid_points(kernel, grid_size);
    let g = kernel_grid(kernel, &ts);
    let mut worst = WorstTracker::new();
    for i1 in 0..ts.len() {
        for i2 in i1..ts.len() {
            for (j, &tau) in ts.iter().enumerate() {
                let margin = g[i2][j] - g[i1][j];
                worst.observe(margin, &[ts[i1], ts[i2], tau]);
            }
        }
    }
    HypothesisReport::from_scan(Hypothesis::H2, worst.margin, worst.witness, grid_size, tol)
}

/// H3: `(y-T1)^k G(w,τ) <= (w-T1)^k G(y,τ)` using the kernel's exponent.
pub fn check_h3(kernel: &Kernel, grid_size: usize, tol: f64) -> HypothesisReport {
    assert!(grid_size >= 2, "grid_size must be at least 2");
    let ts = grid_points(kernel, grid_size);
    let g = kernel_grid(kernel, &ts);
    let t1 = kernel.domain().t1();
    let k = kernel.k_exponent();
    let powers: Vec<f64> = ts.iter().map(|&t| pow_k(t - t1, k)).collect();
    let mut worst = WorstTracker::new();
    for iy in 0..ts.len() {
        for iw in iy..ts.len() {
            for (j, &tau) in ts.iter().enumerate() {
                let margin = powers[iw] * g[iy][j] - powers[iy] * g[iw][j];
                worst.observe(margin, &[ts[iy], ts[iw], tau]);
            }
        }
    }
    HypothesisReport::from_scan(Hypothesis::H3, worst.margin, worst.witness, grid_size, tol)
}

/// H4 on the left half interval: (i) plain monotonicity for `τ` between
/// `t2` and its reflection; (ii) monotonicity of reflected pair sums for
/// `τ <= t2`. Returns `(H4i, H4ii)`.
pub fn check_h4(kernel: &Kernel, grid_size: usize, tol: f64) -> (HypothesisReport, HypothesisReport) {
    assert!(grid_size >= 2, "grid_size must be at least 2");
    let domain = kernel.domain();
    let mid = domain.midpoint();
    let slack = 1e-12 * domain.span();
    let ts = grid_points(kernel, grid_size);
    let half: Vec<f64> = ts.iter().copied().filter(|&t| t <= mid + slack).collect();
    let mut worst_i = WorstTracker::new();
    let mut worst_ii = WorstTracker::new();
    for (a, &t1v) in half.iter().enumerate() {
        for &t2v in half.iter().skip(a) {
            let reflected_t2 = domain.reflect(t2v);
            for &tau in &ts {
                if t2v - slack <= tau && tau <= reflected_t2 + slack {
                    let margin = kernel.eval_raw(t2v, tau) - kernel.eval_raw(t1v, tau);
                    worst_i.observe(margin, &[t1v, t2v, tau]);
                }
                if tau <= t2v + slack {
                    let lhs =
                        kernel.eval_raw(t1v, tau) + kernel.eval_raw(domain.reflect(t1v), tau);
                    let rhs = kernel.eval_raw(t2v, tau) + kernel.eval_raw(reflected_t2, tau);
                    worst_ii.observe(rhs - lhs, &[t1v, t2v, tau]);
                }
            }
        }
    }
    (
        HypothesisReport::from_scan(Hypothesis::H4i, worst_i.margin, worst_i.witness, grid_size, tol),
        HypothesisReport::from_scan(
            Hypothesis::H4ii,
            worst_ii.margin,
            worst_ii.witness,
            grid_size,
            tol,
        ),
    )
}

/// H5: `|G - G_reflected| <= tol` on the full grid; the margin is the
/// negated absolute defect.
pub fn check_h5(kernel: &Kernel, grid_size: usize, tol: f64) -> HypothesisReport {
    assert!(grid_size >= 2, "grid_size must be at least 2");
    let domain = kernel.domain();
    let ts = grid_points(kernel, grid_size);
    let mut worst = WorstTracker::new();
    for &t in &ts {
        for &tau in &ts {
            let direct = kernel.eval_raw(t, tau);
            let reflected = kernel.eval_raw(domain.reflect(t), domain.reflect(tau));
            worst.observe(-(direct - reflected).abs(), &[t, tau]);
        }
    }
    HypothesisReport::from_scan(Hypothesis::H5, worst.margin, worst.witness, grid_size, tol)
}

/// Row-integral consequence of H3:
/// `(y-T1)^k ∫G(w,τ)dτ <= (w-T1)^k ∫G(y,τ)dτ` for grid `y <= w`.
pub fn check_gprop(
    kernel: &Kernel,
    grid_size: usize,
    tol: f64,
    qcfg: &QuadratureConfig,
) -> Result<HypothesisReport, QuadratureError> {
    assert!(grid_size >= 2, "grid_size must be at least 2");
    let domain = kernel.domain();
    let ts = grid_points(kernel, grid_size);
    let mut integrals = Vec::with_capacity(ts.len());
    for &t in &ts {
        integrals.push(kernel_row_integral(kernel, t, domain.t1(), domain.t2(), qcfg)?);
    }
    let k = kernel.k_exponent();
    let powers: Vec<f64> = ts.iter().map(|&t| pow_k(t - domain.t1(), k)).collect();
    let mut worst = WorstTracker::new();
    for iy in 0..ts.len() {
        for iw in iy..ts.len() {
            let margin = powers[iw] * integrals[iy] - powers[iy] * integrals[iw];
            worst.observe(margin, &[ts[iy], ts[iw]]);
        }
    }
    Ok(HypothesisReport::from_scan(
        Hypothesis::GProp,
        worst.margin,
        worst.witness,
        grid_size,
        tol,
    ))
}

/// Runs every check in a fixed order:
/// `[H1, H2, H3, H4i, H4ii, H5, gprop]`.
pub fn check_all(
    kernel: &Kernel,
    grid_size: usize,
    tol: f64,
    qcfg: &QuadratureConfig,
) -> Result<Vec<HypothesisReport>, QuadratureError> {
    let (h4i, h4ii) = check_h4(kernel, grid_size, tol);
    Ok(vec![
        check_h1(kernel, grid_size, tol),
        check_h2(kernel, grid_size, tol),
        check_h3(kernel, grid_size, tol),
        h4i,
        h4ii,
        check_h5(kernel, grid_size, tol),
        check_gprop(kernel, grid_size, tol, qcfg)?,
    ])
}

/// The hypotheses a certificate variant relies on.
pub fn required_for(variant: crate::cone::ConeVariant) -> &'static [Hypothesis] {
    match variant {
        crate::cone::ConeVariant::General => &[Hypothesis::H1, Hypothesis::H2, Hypothesis::H3],
        crate::cone::ConeVariant::Symmetric => &[
            Hypothesis::H1,
            Hypothesis::H3,
            Hypothesis::H4i,
            Hypothesis::H4ii,
            Hypothesis::H5,
        ],
    }
}
