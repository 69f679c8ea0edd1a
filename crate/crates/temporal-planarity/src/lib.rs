//! Combinatorial machinery for deciding whether a temporal sequence of
//! 2-connected graphs — consecutive entries related by edge-label-preserving
//! minors — admits a simultaneous planar embedding.
//!
//! The crate is organised bottom-up: [`graph`] holds edge-labelled multigraphs
//! and rotation systems, [`decomposition`] the Tutte decomposition and the
//! flexibility measure, [`temporal`] sequences and minor witnesses, [`lists`]
//! embedding constraints over 3-blocks, [`bonds`] coloured bond graphs,
//! [`obstructions`] the five certificate detectors, [`transforms`] the
//! improvement machinery, and [`oracle`] an exact brute-force cross-check.

pub mod bonds;
pub mod decomposition;
pub mod graph;
pub mod lists;
pub mod obstructions;
pub mod oracle;
pub mod temporal;
pub mod transforms;

pub use graph::{Dart, EdgeId, EmbeddedGraph, LabeledGraph, RotationSystem, VertexId};

/// Crate-wide error type. Variants are grouped roughly by the layer that
/// raises them; everything is `Display`-friendly for CLI surfaces.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("contracting the loop {0} is not supported")]
    ContractLoop(EdgeId),
    #[error("vertex {0} is not isolated")]
    NotIsolated(VertexId),
    #[error("vertex id {0} is already in use")]
    VertexInUse(VertexId),
    #[error("duplicate edge label {0}")]
    DuplicateEdge(EdgeId),
    #[error("malformed rotation system: {0}")]
    MalformedRotation(String),
    #[error("witness step {index} failed: {source}")]
    Witness {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("graph is not connected")]
    NotConnected,
    #[error("graph is not 2-connected")]
    NotTwoConnected,
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("composition error: {0}")]
    Composition(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no minor relation between consecutive graphs {0} and {1}")]
    NoMinorRelation(usize, usize),
    #[error("input error: {0}")]
    Input(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
