//! Electrical flows, transfer impedance, and Schur-complement elimination on
//! weighted graphs.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: the weighted multigraph model, family generators, edge-list I/O.
//! - [`laplacian`]: dense `L⁺` solves and power iteration.
//! - [`electrical`]: unit flows, effective resistance, `Δ`, and `Π` / `Π̄`.
//! - [`schur`]: Schur complements and random-walk hitting probabilities.
//! - [`localization`]: the greedy elimination trace and its inequality checks.
//! - [`routing`]: oblivious routing along electrical flows.

pub mod electrical;
pub mod error;
pub mod graph;
pub mod laplacian;
pub mod localization;
pub mod routing;
pub mod schur;

pub use error::{Error, Result};
pub use graph::{generate_family, read_graph, write_graph, Edge, EdgeRole, EdgeVector, Family, Graph, VertexVector};
