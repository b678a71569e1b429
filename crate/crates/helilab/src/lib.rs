//! Discrete minimal-surface laboratory for helicoidal boundary problems.
//!
//! The crate builds helicoidal boundary contours, solves the Plateau problem
//! over them with containment and obstacle constraints, analyses second-order
//! stability through the Jacobi operator, assembles symmetric doubles and
//! screw-periodic tilings, and runs a battery of structural verifications
//! (tangency censuses, slab counts, level sets, pitch estimates).
//!
//! Module map:
//! - [`geometry`]: helicoid parametrisation, symmetries, side/angle tests,
//!   boundary contours and catenoidal barriers.
//! - [`linalg`]: sparse CSR matrices, conjugate gradients, and a generalized
//!   symmetric eigensolver used by the spectral machinery.
//! - [`mesh`]: half-edge triangle meshes with vertex roles, curvature fields,
//!   refinement, self-intersection tests, and OBJ/PLY round-tripping.
//! - [`solver`]: seed surfaces, constrained area minimisation, equivariant
//!   projection, and Newton refinement of (possibly unstable) equilibria.
//! - [`jacobi`]: stability operator assembly, first eigenpairs, normal
//!   pushes, and a mountain-pass saddle search.
//! - [`assembly`]: reflection doubles, screw-periodic tilings, and shortest
//!   handle geodesics.
//! - [`verify`]: structural census and report generation.
//! - [`config`] / [`pipeline`]: experiment configuration and staged runs.

pub mod assembly;
pub mod config;
pub mod geometry;
pub mod jacobi;
pub mod linalg;
pub mod mesh;
pub mod pipeline;
pub mod solver;
pub mod verify;

pub use geometry::Point3;
