//! Quintic spline solver for fourth-order linear two-point boundary value
//! problems
//!
//! ```text
//! y''''(x) + f(x) y(x) = g(x),   a <= x <= b,
//! y(a) = alpha0,  y(b) = alpha1,  y'(a) = beta0,  y'(b) = beta1.
//! ```
//!
//! The solver collocates a quintic spline on a uniform mesh of `k`
//! subintervals. Eliminating the spline's derivative parameters leaves a
//! `(k-1) x (k-1)` linear system in the interior knot values alone: a
//! pentadiagonal band plus one special row at each end that carries the
//! clamped-slope data. The band is factored by banded LU with partial
//! pivoting, and the knot values are then expanded back into the full
//! spline (first through fourth derivative sequences), which can be
//! evaluated anywhere in `[a, b]` up to the fifth derivative.
//!
//! Everything numeric is generic over [`scalar::Real`] (any float with the
//! handful of traits the formulas need); the crate root re-exports `f64`
//! aliases for the common case.
//!
//! Entry points:
//! - [`problem::Bvp`] describes a problem; [`problem::example_problem`]
//!   returns one of the built-in test problems with analytic references.
//! - [`driver::solve_bvp`] runs the whole pipeline for one mesh.
//! - [`driver::convergence_study`] solves on a ladder of meshes and
//!   estimates observed convergence orders.
//! - [`cli::run`] is the command-line front end (`quintic-bvp` binary).

#![allow(non_snake_case)]

pub mod assembly;
pub mod banded;
pub mod cli;
pub mod driver;
pub mod expr;
pub mod problem;
pub mod scalar;
pub mod spline;

pub use scalar::Real;

/// `f64` alias for [`problem::Mesh`].
pub type Mesh = problem::Mesh<f64>;
/// `f64` alias for [`problem::Bvp`].
pub type Bvp = problem::Bvp<f64>;
/// `f64` alias for [`problem::AnalyticReference`].
pub type AnalyticReference = problem::AnalyticReference<f64>;
/// `f64` alias for [`banded::BandedMatrix`].
pub type BandedMatrix = banded::BandedMatrix<f64>;
/// `f64` alias for [`banded::BandedLu`].
pub type BandedLu = banded::BandedLu<f64>;
/// `f64` alias for [`assembly::AssembledSystem`].
pub type AssembledSystem = assembly::AssembledSystem<f64>;
/// `f64` alias for [`spline::SplineSolution`].
pub type SplineSolution = spline::SplineSolution<f64>;
/// `f64` alias for [`driver::ErrorTable`].
pub type ErrorTable = driver::ErrorTable<f64>;
/// `f64` alias for [`driver::ConvergenceReport`].
pub type ConvergenceReport = driver::ConvergenceReport<f64>;
