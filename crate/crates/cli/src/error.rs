// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use qnet_core::QnetError;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Input { path: PathBuf, source: QnetError },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] QnetError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => EXIT_USAGE,
            CliError::Io { .. } => EXIT_FAILURE,
            CliError::Core(e) => match e {
                QnetError::InvalidArgument(_)
                | QnetError::Data(_)
                | QnetError::Contract(_)
                | QnetError::Json(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
