// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QnetError {
    /// A caller supplied an argument outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input data is malformed or inconsistent with its companion data.
    #[error("data error: {0}")]
    Data(String),

    /// A precondition that the caller is responsible for was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A computed quantity left its admissible range by more than the numerical tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QnetError>;

pub(crate) fn invalid(msg: impl Into<String>) -> QnetError {
    QnetError::InvalidArgument(msg.into())
}

pub(crate) fn data(msg: impl Into<String>) -> QnetError {
    QnetError::Data(msg.into())
}
