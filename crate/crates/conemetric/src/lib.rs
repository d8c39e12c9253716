//! Ordered-cone geometry and cone-metric fixed-point solving.
//!
//! The crate models closed convex pointed cones in R^n together with the
//! partial order they induce, evaluates the nonlinear scalarization
//! `xi_e(y) = inf { t : y ∈ t e − P }` (Gerstewitz/Tammer functional) with an
//! independent bisection oracle, validates finite vector-valued distance
//! tables against the cone-metric axioms M1–M4 and the rectangular axioms
//! RC1–RC3, reduces vector distances to ordinary scalar (rectangular)
//! metrics via `d_p = xi_e ∘ p`, and runs Picard iteration for Kannan and
//! Banach self-maps with certified geometric convergence bounds.
//!
//! Entry points:
//! - [`Cone`] and its order oracles `contains` / `in_interior` / `leq` / `ll`;
//! - [`ScalarizationContext::xi`] (closed forms) and
//!   [`ScalarizationContext::xi_bisect`] (bracket-and-bisect oracle);
//! - [`FiniteConeSpace::validate_cms`] / [`FiniteConeSpace::validate_rcms`]
//!   for exhaustive axiom checks with witnesses, and
//!   [`FiniteConeSpace::reduce`] for the scalar reduction;
//! - [`solver::Problem`] with [`solver::Problem::kannan_solve`] and
//!   [`solver::Problem::banach_solve`].

pub mod cone;
pub mod error;
pub mod scalarization;
pub mod solver;
pub mod space;
mod vecmath;

pub use cone::{Cone, ConeKind};
pub use error::{Error, Result};
pub use scalarization::ScalarizationContext;
pub use solver::{
    Certificate, CycleInfo, MapSpec, Outcome, Point, Problem, SolveConfig, SolveMode, SolveReport,
    TraceEntry, UniquenessCheck,
};
pub use space::{
    check_scalar_metric, check_scalar_rectangular, max_tail_gaps, AxiomId, AxiomReport,
    AxiomStatus, FiniteConeSpace, ReducedTable, Witness,
};
