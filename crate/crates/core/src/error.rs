use thiserror::Error;

use crate::document::DocumentError;
use crate::evaluation::EvalError;
use crate::gateway::GatewayError;
use crate::pipeline::PipelineError;
use crate::search::SearchError;
use crate::synthesis::SynthesisError;
use crate::topics::TopicError;

/// Crate-wide error. Each subsystem has its own error type; this wraps them for
/// callers that drive several subsystems at once.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
