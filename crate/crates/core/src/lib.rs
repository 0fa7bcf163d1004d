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

//! Deterministic discrete-event simulator of a hierarchical, dataflow-driven
//! heterogeneous manycore running a link-level wireless baseband workload.
//!
//! The crate is organized bottom-up:
//!
//! - [`signal`]: functional kernels (FFT, polar coding, Gold scrambling,
//!   QPSK, OFDM, LS/ZF) used as task bodies and as ground truth.
//! - [`cost`]: cycle costs of kernels and DMA transfers, anchored to measured
//!   single-tile numbers.
//! - [`dag`]: worst-case dataflow graphs, FIFO tokens, and runtime dismissal.
//! - [`machine`]: tiles, clusters, scratchpads, DMA engines and the event
//!   engine.
//! - [`sched`]: thread-level and task-level scheduling, with multi-threading
//!   and lazy deletion.
//! - [`sim`]: the event loop tying the machine and schedulers together.
//! - [`workload`]: link-chain DAGs, TDD thread arrivals, and experiments.
//! - [`config`] and [`report`]: text configuration and CSV reports.

pub mod config;
pub mod cost;
pub mod dag;
pub mod error;
pub mod machine;
pub mod report;
pub mod sched;
pub mod signal;
pub mod sim;
pub mod workload;

pub use error::{Error, Result};
