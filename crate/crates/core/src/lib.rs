//! Semi-implicit finite-element solver for the doubly degenerate
//! u-formulation of the Richards equation, linearized by the L-scheme.
//!
//! The bounded unknown `u` is related to the effective saturation by
//! `θ = U⁻¹(u)`, `U(θ) = ∫₀^θ (1 − s^c)^(−b) ds`. Each time step freezes the
//! conductivity, convection and source at the previous time level and
//! solves the remaining nodal nonlinearity in `θ` by the L-scheme.

pub mod assembly;
pub mod constitutive;
pub mod error;
pub mod field;
pub mod interp;
pub mod lsolver;
pub mod mesh;
pub mod quadrature;
pub mod sparse;
pub mod timestepper;
pub mod verify;

pub use assembly::{DirichletConstraints, WeightRule};
pub use constitutive::{Constitutive, ConstitutiveTable, LinearModel, SoilModel, SoilParams};
pub use error::{Error, Result};
pub use field::{Field, ScalarField};
pub use lsolver::{FrozenStep, IterationHistory, LschemeConfig};
pub use mesh::{BoundaryTag, Mesh, Rect};
pub use sparse::CsrMatrix;
pub use timestepper::{run, run_regularized, Scenario, StepDiagnostics, Trajectory};
pub use verify::{BoundsReport, ConvergenceTable, RateSummary};
