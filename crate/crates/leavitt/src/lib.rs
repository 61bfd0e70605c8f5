//! Combinatorial regularity analysis for graph C*-algebras.
//!
//! The crate decides, for finite directed multigraphs (and row-finite
//! tail-extended presentations of graphs with infinite receivers), the
//! combinatorial conditions that govern regularity of the associated graph
//! algebra: Condition (K), distinct detours, the lattice of hereditary and
//! saturated vertex sets, and the presence of elementary subquotients. All
//! algebraic identities are verified inside an exact symbolic Leavitt path
//! algebra engine over the rationals, with a faithful matrix representation
//! on acyclic graphs serving as an independent oracle.
//!
//! Modules follow the analysis pipeline:
//!
//! * [`graph`] — multigraph data model, paths, walk counting;
//! * [`ideals`] — hereditary/saturated sets, closures, lattices, series;
//! * [`properties`] — Condition (K), distinct detours, elementary witnesses;
//! * [`lpa`] — symbolic Leavitt path algebra arithmetic and normal forms;
//! * [`inflow`] — in-flow subgraphs, nondegenerate growth, matrix units;
//! * [`desing`] — desingularization of infinite receivers and tail analysis;
//! * [`classify`] — top-level regularity verdicts with provenance tags;
//! * [`io`] — JSON input documents and DOT export;
//! * [`corpus`] — exhaustive small-graph enumeration and cross-checks.

pub mod classify;
pub mod corpus;
pub mod desing;
pub mod error;
pub mod graph;
pub mod ideals;
pub mod inflow;
pub mod io;
pub mod lpa;
pub mod properties;

pub use error::{Error, Result};
