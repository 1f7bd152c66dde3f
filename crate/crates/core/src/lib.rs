//! Hypergraph canonical forms, vertex-deletion decks, and Feynman-style
//! rule evaluation at desk scale.
//!
//! The crate is organized around three layers:
//!
//! * [`hypergraph`] and [`canon`]: finite hypergraphs with parallel edges,
//!   colored canonical codes computed per connected component, isomorphism
//!   tests with explicit witnesses, and enumeration up to isomorphism.
//! * [`structures`] and [`reconstruction`]: value tables attached to
//!   vertices and edges (colorings, labelings, ribbon data), vertex-deletion
//!   decks for plain, colored, and labeled hypergraphs, and the counting
//!   identities and reconstruction procedures that operate on decks.
//! * [`feynman`] and [`superpose`]: two-class decompositions, degree
//!   systems, evaluation of hypergraphs into formal tensor words, and the
//!   deck-superposition invariant built from those words.
//!
//! Drivers take an [`exec::ExecMode`] and produce identical output whether
//! they run sequentially or work-stealing; the `parallel` feature (default
//! on) gates the rayon dependency.

pub mod bruteforce;
pub mod canon;
pub mod error;
pub mod exec;
pub mod feynman;
pub mod gen;
pub mod hypergraph;
pub mod reconstruction;
pub mod structures;
pub mod superpose;
pub mod symcontext;

pub use error::{Error, Result};
pub use hypergraph::Hypergraph;
