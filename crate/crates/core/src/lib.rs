//! Mixed finite elements for Darcy flow in a fissured medium, and the thin-fissure limit.
//!
//! The rock blocks carry lowest-order Raviart–Thomas velocities and piecewise constant
//! pressures. Each fissure strip is either resolved (scaled ε-problem) or collapsed to a
//! one-dimensional manifold coupled to the rock through interface conditions.

pub mod assembly;
pub mod config;
pub mod data;
pub mod dofs;
pub mod expr;
pub mod fem;
pub mod geometry;
pub mod limit;
pub mod manufactured;
pub mod mesh;
pub mod residuals;
pub mod solution;
pub mod solver;
pub mod sparse;
pub mod sweep;

pub use assembly::{apply_bc, assemble_eps, AssemblyError, BcReport, DiscreteSystem};
pub use data::{DataError, DataSpec, ProblemData};
pub use geometry::{FissuredMedium, GeometryError, MediumSpec};
pub use limit::{assemble_limit, manifold_meshes, reconstruct_strip_fields};
pub use mesh::{build_mesh, refine, MeshError, MixedMesh};
pub use solution::SolutionField;
pub use solver::{estimate_infsup, solve_saddle, SolverError};
pub use config::SweepConfig;
pub use sweep::{emit_report, read_report, run_sweep, ConvergenceReport, SweepRow};
