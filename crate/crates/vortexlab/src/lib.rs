//! Numerical laboratory for twisted holomorphic maps.
//!
//! The crate implements, at desk scale, the computable content of a
//! compactness theory for twisted holomorphic maps on cylinders:
//!
//! * [`target`] — the two concrete Hamiltonian S¹-targets (weighted ℂⁿ and the
//!   round sphere) with action, moment map, gradient and charts;
//! * [`cylinder`] — discretised cylinders, connection/section pairs, covariant
//!   derivative, the ∂̄-operator, energies and exact Fourier-mode solutions;
//! * [`vortex`] — Floer cylinders, the coupled vortex solver, the Yang–Mills–Higgs
//!   functional and its topological identity;
//! * [`connections`] — meromorphic connections: residues, holonomy, Chern–Weil
//!   degree, orbifold degree and balanced temporal gauge;
//! * [`decay`] — discrete decay lemmas, rate fitting and the ψ/φ₀ decomposition;
//! * [`gradflow`] — gradient flows, chains of gradient segments and the
//!   rescaled-limit chain detector;
//! * [`curvegraph`] — bubble-graph combinatorics of nodal curves;
//! * [`acceptance`] — the quantitative acceptance suite shared by the CLI and
//!   the integration tests.

pub mod acceptance;
pub mod connections;
pub mod curvegraph;
pub mod cylinder;
pub mod decay;
pub mod error;
pub mod gradflow;
pub mod io;
pub mod scalar;
pub mod target;
pub mod vortex;

pub use error::{Error, Result};
