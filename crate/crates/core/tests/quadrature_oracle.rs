//! Independent oracles for the quadrature: a dense trapezoid rule and the
//! symbolic antiderivative of random polynomials.

use hamkit_core::kernel::{lidstone_kernel, BivariatePoly, Interval, Kernel};
use hamkit_core::quadrature::{integrate, kernel_row_integral, QuadratureConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Trapezoid rule with `nodes` points; deliberately naive so it shares no
/// machinery with the Gauss-Legendre path.
fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, nodes: usize) -> f64 {
    let h = (b - a) / (nodes - 1) as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..nodes - 1 {
        acc += f(a + h * i as f64);
    }
    acc * h
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Antiderivative evaluated via the power rule.
fn poly_integral(coeffs: &[f64], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for (j, c) in coeffs.iter().enumerate() {
        let p = (j + 1) as f64;
        total += c * (b.powi(j as i32 + 1) - a.powi(j as i32 + 1)) / p;
    }
    total
}

#[test]
fn gauss_legendre_matches_dense_trapezoid_on_random_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51D5_70CE);
    let cfg = QuadratureConfig::default();
    for case in 0..20 {
        let degree = rng.gen_range(0..=6);
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gl = integrate(|x| poly_eval(&coeffs, x), 0.0, 1.0, &cfg).unwrap();
        let trap = trapezoid(|x| poly_eval(&coeffs, x), 0.0, 1.0, 100_001);
        assert!(
            (gl - trap).abs() <= 1e-9,
            "case {case} (degree {degree}): GL {gl} vs trapezoid {trap}"
        );
    }
}

#[test]
fn gauss_legendre_matches_antiderivative_on_random_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA17E_FACE);
    let cfg = QuadratureConfig::default();
    for _ in 0..50 {
        let degree = rng.gen_range(0..=6);
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let a = rng.gen_range(-1.0..0.0);
        let b = rng.gen_range(0.0..1.0);
        let gl = integrate(|x| poly_eval(&coeffs, x), a, b, &cfg).unwrap();
        let exact = poly_integral(&coeffs, a, b);
        assert!(
            (gl - exact).abs() <= 1e-13 * (1.0 + exact.abs()),
            "GL {gl} vs antiderivative {exact}"
        );
    }
}

#[test]
fn minimal_order_is_exact_for_cubic_kernels() {
    // nodes_per_panel >= (degree + 2) / 2 suffices: order 3 for cubics.
    let g = lidstone_kernel();
    let lean = QuadratureConfig::new(3, 1, true).unwrap();
    for (t, expect) in [
        (0.5, 5.0 / 384.0),
        (0.125, 497.0 / 98304.0),
        (0.25, (0.25f64.powi(4) - 2.0 * 0.25f64.powi(3) + 0.25) / 24.0),
    ] {
        let v = kernel_row_integral(&g, t, 0.0, 1.0, &lean).unwrap();
        assert!(
            (v - expect).abs() <= 1e-13 * (1.0 + expect.abs()),
            "t = {t}: {v} vs {expect}"
        );
    }
}

#[test]
fn row_integrals_match_the_beam_deflection_closed_form() {
    // The unit-load solution of the clamped-moment beam problem is
    // (t⁴ - 2t³ + t)/24, and ∫ G(t,·) reproduces it at every t.
    let g = lidstone_kernel();
    let cfg = QuadratureConfig::default();
    for i in 0..=32 {
        let t = i as f64 / 32.0;
        let quartic = (t.powi(4) - 2.0 * t.powi(3) + t) / 24.0;
        let row = kernel_row_integral(&g, t, 0.0, 1.0, &cfg).unwrap();
        assert!(
            (row - quartic).abs() <= 1e-16,
            "t = {t}: {row} vs {quartic}"
        );
    }
}

#[test]
fn symmetrized_equals_full_row_at_the_midpoint_for_symmetric_kernels() {
    use hamkit_core::quadrature::symmetrized_row_integral;
    let g = lidstone_kernel();
    let cfg = QuadratureConfig::default();
    let mid = g.domain().midpoint();
    let sym = symmetrized_row_integral(&g, mid, &cfg).unwrap();
    let full = kernel_row_integral(&g, mid, 0.0, 1.0, &cfg).unwrap();
    assert!((sym - full).abs() <= 1e-12);
}

#[test]
fn quadrature_agrees_with_exact_integration_for_a_custom_kernel() {
    // A quadratic kernel with a genuine crease: lower = tτ, upper agrees
    // on the diagonal via t² + t(τ - t) = tτ.
    let lower = BivariatePoly::from_int_terms(&[(1, 1, 1, 1)]).unwrap();
    let upper = BivariatePoly::from_int_terms(&[(1, 1, 1, 1)]).unwrap();
    let kernel = Kernel::new(
        "bilinear",
        Interval::new(0.0, 2.0).unwrap(),
        1.0,
        lower,
        upper,
    )
    .unwrap();
    let cfg = QuadratureConfig::default();
    // ∫_0^2 tτ dτ = 2t.
    for t in [0.0, 0.5, 1.0, 1.7, 2.0] {
        let v = kernel_row_integral(&kernel, t, 0.0, 2.0, &cfg).unwrap();
        assert!((v - 2.0 * t).abs() <= 1e-13 * (1.0 + 2.0 * t));
    }
}
