use alloc::boxed::Box;
use alloc::string::String;

/// Errors produced by the segmentation pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its allowed range or inputs disagree in shape.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// An operation received a raster with the wrong plane semantics.
    #[error("semantic error: expected {expected} raster, got {actual}")]
    Semantic {
        expected: &'static str,
        actual: &'static str,
    },
    /// Raster construction received non-finite or out-of-range data.
    #[error("invalid raster: {0}")]
    Raster(String),
    #[error("inpainting failed: {0}")]
    Inpaint(String),
    #[error("background model: {0}")]
    Model(String),
    /// The saliency map has a single occupied histogram bin.
    #[error("degenerate histogram: {0}")]
    Degenerate(String),
    /// A pipeline stage failed.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// The innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// The name of the failing pipeline stage, if known.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
