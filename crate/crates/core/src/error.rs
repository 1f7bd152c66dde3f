use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },

    #[error("degenerate edge {incident:?}: edges need at least two distinct vertices")]
    DegenerateEdge { incident: Vec<usize> },

    #[error("edge {incident:?} declared under arity {declared}")]
    ArityMismatch { declared: usize, incident: Vec<usize> },

    #[error("incidence graph edge node {edge_node} is malformed: {reason}")]
    MalformedIncidence { edge_node: usize, reason: String },

    #[error("color assignment does not cover the hypergraph: {reason}")]
    ColorCoverageError { reason: String },

    #[error("requested size {requested} exceeds the configured cap {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("coloring is invalid: {reason}")]
    InvalidColoring { reason: String },

    #[error("labeling is not a bijection onto 0..{vertex_count}")]
    NotABijection { vertex_count: usize },

    #[error("not a Feynman graph: {reason}")]
    NotFeynman { reason: String },

    #[error("dart {dart} is a fixed point of the involution")]
    FixedPointInInvolution { dart: usize },

    #[error("genus {genus} at vertex {vertex} exceeds the cap {cap}")]
    GenusCapExceeded { vertex: usize, genus: u64, cap: u64 },

    #[error("structure specifications disagree: {reason}")]
    SpecMismatch { reason: String },

    #[error("operation needs a non-empty hypergraph")]
    EmptyHypergraph,

    #[error("structure slot (k={k}, j={j}) is not declared")]
    SlotUnknown { k: usize, j: usize },

    #[error("arity {arity} edges never survive vertex deletion at {vertex_count} vertices")]
    ArityTooLargeForDeck { arity: usize, vertex_count: usize },

    #[error("deck is inconsistent: {reason}")]
    InconsistentDeck { reason: String },

    #[error("degree tables are incoherent: edge side {edge_side} != vertex side {vertex_side}")]
    IncoherentRule { edge_side: u64, vertex_side: u64 },

    #[error("labeling required but absent")]
    MissingLabeling,
}

pub type Result<T> = std::result::Result<T, Error>;
