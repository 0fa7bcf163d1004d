// Copyright 2026 The wbpsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate pilot at subcarrier {index} (|pilot| = {magnitude:e})")]
    DegeneratePilot { index: usize, magnitude: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("allocation failure: requested {requested} bytes in {section}")]
    AllocationFailure { section: String, requested: u64 },

    #[error("deployment failure: {needed} bytes exceed T-SPM capacity {capacity} of tile {tile}")]
    DeploymentFailure { tile: usize, needed: u64, capacity: u64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("functional mismatch: {0}")]
    Fidelity(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
