//! Numerical toolkit for Hammerstein integral equations
//! `x(t) = ∫ G(t,τ) f(x(τ)) dτ` on an interval `[T1, T2]`.
//!
//! The crate is organised around the ingredients of cone-theoretic
//! existence certificates for such equations:
//!
//! * [`kernel`] — piecewise-polynomial kernels `G(t,τ)` split along the
//!   crease `τ = t`, including the built-in Lidstone beam kernel.
//! * [`quadrature`] — composite Gauss-Legendre integration with
//!   crease-aware panel splitting.
//! * [`split`] — nonlinearities given as a monotone decomposition
//!   `f = f_up + f_down`.
//! * [`cone`] — grid functions, the order-cone membership checks, and the
//!   four functionals (alpha, beta, theta, psi) used by the certificates.
//! * [`hypotheses`] — grid-based verification of the kernel properties
//!   (H1)–(H5) with signed margins and witnesses.
//! * [`certificate`] — evaluation of the four existence-certificate
//!   inequalities, corollary relations, and box-parameter search.
//! * [`solver`] — damped Picard iteration on a Nystrom grid plus a
//!   posteriori validation of computed solutions.
//! * [`expr`] — a small expression grammar for user-supplied
//!   nonlinearities.

pub mod certificate;
pub mod cone;
pub mod expr;
pub mod hypotheses;
pub mod kernel;
pub mod quadrature;
pub mod solver;
pub mod split;

/// Exact rational scalar used wherever results admit closed forms
/// (polynomial kernel integrals and certificate thresholds).
pub type Rational = num::BigRational;

pub use cone::{check_membership, functionals, ConeSpec, ConeVariant, Functionals, GridFunction};
pub use kernel::{lidstone_kernel, Interval, Kernel};
pub use quadrature::{integrate, kernel_row_integral, symmetrized_row_integral, QuadratureConfig};
pub use split::MonotoneSplit;
