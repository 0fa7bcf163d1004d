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

//! Timed hardware model: tiles, clusters, scratchpads, DMA engines and the
//! discrete-event engine that drives them.

pub mod cluster;
pub mod dma;
pub mod event;
pub mod spm;
pub mod tile;

pub use cluster::{ClusterConfig, ClusterState, DeployTiming, SectionSizes, ThreadManager};
pub use dma::{DmaBooking, DmaEngine};
pub use event::{Cycle, EventKind, EventQueue, Scheduled, TraceDigest, TraceRecord, TraceWriter};
pub use spm::{RegionId, SectionKind, SpmSection};
pub use tile::{Csr, PortDirection, RunState, TileClass, TileState};

/// A serial processor (scheduler core) that can do one thing at a time.
#[derive(Debug, Clone, Default)]
pub struct Processor {
    pub busy_until: Cycle,
    pub busy_cycles: u64,
}

impl Processor {
    /// Books `cycles` of work requested at `now`; returns the finish time.
    pub fn occupy(&mut self, now: Cycle, cycles: u64) -> Cycle {
        let start = now.max(self.busy_until);
        self.busy_until = start + cycles;
        self.busy_cycles += cycles;
        self.busy_until
    }

    pub fn is_busy(&self, now: Cycle) -> bool {
        self.busy_until > now
    }
}
