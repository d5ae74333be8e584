//! The three worked case studies: offender monitoring, hospital triage and
//! judicial sentencing.

pub mod judicial;
pub mod offender;
pub mod triage;

use thiserror::Error;

use crate::simplicial::{Face, SimplicialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid triage tree: {0}")]
    InvalidTree(String),
    #[error("node {node} has no answer `{answer}`")]
    InvalidAnswer { node: String, answer: String },
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("({t}, {g}) lies outside the stable domain of {mode}")]
    OutOfDomain { mode: Face, t: f64, g: f64 },
    #[error("({t}, {g}) lies in no stable domain")]
    CoverageGap { t: f64, g: f64 },
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
}
