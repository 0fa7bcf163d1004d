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

use crate::cost::{dma_cycles, DmaTiming};

use super::event::Cycle;

/// Burst-mode DMA engine. Requests are served FIFO in booking order, one
/// transfer at a time.
#[derive(Debug, Clone)]
pub struct DmaEngine {
    timing: DmaTiming,
    busy_until: Cycle,
    transfers: u64,
    bytes: u64,
    busy_cycles: u64,
}

/// Booked interval of one transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DmaBooking {
    pub start: Cycle,
    pub end: Cycle,
}

impl DmaEngine {
    pub fn new(timing: DmaTiming) -> Self {
        DmaEngine {
            timing,
            busy_until: 0,
            transfers: 0,
            bytes: 0,
            busy_cycles: 0,
        }
    }

    pub fn timing(&self) -> &DmaTiming {
        &self.timing
    }

    pub fn busy_until(&self) -> Cycle {
        self.busy_until
    }

    pub fn transfers(&self) -> u64 {
        self.transfers
    }

    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    pub fn busy_cycles(&self) -> u64 {
        self.busy_cycles
    }

    /// Queues a transfer requested at `now`.
    pub fn transfer(&mut self, now: Cycle, bytes: u64) -> DmaBooking {
        let start = now.max(self.busy_until);
        let len = dma_cycles(bytes, &self.timing);
        let end = start + len;
        self.busy_until = end;
        self.transfers += 1;
        self.bytes += bytes;
        self.busy_cycles += len;
        DmaBooking { start, end }
    }
}
