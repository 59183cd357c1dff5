//! Toolkit for locating factorization surfaces of one-dimensional quantum
//! spin chains with symbolic regression.
//!
//! The crate is organized around a physics pipeline and a search pipeline:
//!
//! * [`spin_models`] — the five chain Hamiltonians with exact-diagonalization
//!   solvers (dense for small chains, Lanczos for larger ones).
//! * [`free_fermion`] — analytic momentum-space solver for the quadratic
//!   chains, exact at finite size including boundary parity sectors.
//! * [`entanglement`] — partial transpose, negativity, and logarithmic
//!   negativity of small bipartite density matrices.
//! * [`fs_oracles`] — closed-form factorization-surface reference equations.
//! * [`dataset`] — parameter sampling, low-entanglement filtering, and
//!   CSV/JSON persistence of training data.
//! * [`sr_engine`] — genetic-programming symbolic regression over expression
//!   trees with a per-complexity Pareto front.
//! * [`template_fit`] — constant re-fitting of a fixed functional form and
//!   slice-wise comparison of candidate equations.
//! * [`validation`] — cross-engine and oracle-closure checks shared by the
//!   CLI and the test suite.

pub mod dataset;
pub mod entanglement;
pub mod free_fermion;
pub mod fs_oracles;
pub mod linalg;
pub mod spin_models;
pub mod sr_engine;
pub mod template_fit;
pub mod validation;
