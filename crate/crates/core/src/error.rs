use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("log undefined at cut locus (rotation angle {angle} too close to pi)")]
    CutLocus { angle: f64 },

    #[error("projection outside assumption envelope: {0}")]
    ProjectionEnvelope(String),

    #[error("feature at camera plane: point {index} has depth {depth:e}")]
    FeatureAtCameraPlane { index: usize, depth: f64 },

    #[error("degenerate feature configuration: condition number {condition:e}")]
    DegenerateFeatures { condition: f64 },

    #[error("invalid feature model: {0}")]
    InvalidFeatureModel(String),

    #[error("invalid node id {id} (graph has {n} nodes)")]
    InvalidNode { id: usize, n: usize },

    #[error("undirected graph is disconnected")]
    Disconnected,

    #[error("enumeration limit: {n} nodes exceeds the limit of {limit}")]
    EnumerationLimit { n: usize, limit: usize },

    #[error("graph violates assumption: balanced={balanced}, strongly_connected={strongly_connected}")]
    GraphAssumption { balanced: bool, strongly_connected: bool },

    #[error("gain below tracking threshold: k_e = {k_e} must exceed max(1, mu^2) = {threshold}")]
    TrackingThreshold { k_e: f64, threshold: f64 },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("step {step} (t = {t:.4} s): {source}")]
    AtStep {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips [`Error::AtStep`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}
