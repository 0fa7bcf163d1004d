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

use std::collections::BTreeSet;

use crate::cost::{DmaTiming, TileTiming};
use crate::error::{Error, Result};

use super::dma::{DmaBooking, DmaEngine};
use super::event::Cycle;
use super::spm::{SectionKind, SpmSection};
use super::tile::{PortDirection, TileClass, TileState};

/// Byte capacities of the four CS-SPM sections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionSizes {
    pub task_code_pool: u64,
    pub fifo_lists: u64,
    pub load_indication: u64,
    pub compute_data: u64,
}

impl Default for SectionSizes {
    fn default() -> Self {
        SectionSizes {
            task_code_pool: 512 * 1024,
            fifo_lists: 16 * 1024,
            load_indication: 4 * 1024,
            compute_data: 256 * 1024,
        }
    }
}

impl SectionSizes {
    pub fn get(&self, kind: SectionKind) -> u64 {
        match kind {
            SectionKind::TaskCodePool => self.task_code_pool,
            SectionKind::FifoLists => self.fifo_lists,
            SectionKind::LoadIndication => self.load_indication,
            SectionKind::ComputeData => self.compute_data,
        }
    }

    pub fn total(&self) -> u64 {
        SectionKind::ALL.iter().map(|&k| self.get(k)).sum()
    }
}

#[derive(Debug, Clone)]
pub struct ClusterConfig {
    pub tiles: Vec<TileClass>,
    pub large_timing: TileTiming,
    pub small_timing: TileTiming,
    pub tspm_large: u64,
    pub tspm_small: u64,
    pub sections: SectionSizes,
    pub max_threads: usize,
    pub dma: DmaTiming,
}

impl ClusterConfig {
    /// `l` large tiles followed by `s` small tiles.
    pub fn with_mix(l: usize, s: usize) -> Self {
        let mut tiles = vec![TileClass::Large; l];
        tiles.extend(std::iter::repeat(TileClass::Small).take(s));
        ClusterConfig {
            tiles,
            large_timing: TileTiming::large(),
            small_timing: TileTiming::small(),
            tspm_large: 128 * 1024,
            tspm_small: 64 * 1024,
            sections: SectionSizes::default(),
            max_threads: 2,
            dma: DmaTiming::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThreadManager {
    pub max_threads: usize,
    active: BTreeSet<u64>,
}

impl ThreadManager {
    pub fn new(max_threads: usize) -> Self {
        ThreadManager {
            max_threads,
            active: BTreeSet::new(),
        }
    }

    pub fn has_slot(&self) -> bool {
        self.active.len() < self.max_threads
    }

    pub fn active(&self) -> &BTreeSet<u64> {
        &self.active
    }

    pub fn admit(&mut self, tid: u64) -> Result<()> {
        if !self.has_slot() {
            return Err(Error::ProtocolViolation(format!(
                "thread {tid} admitted beyond max_threads={}",
                self.max_threads
            )));
        }
        self.active.insert(tid);
        Ok(())
    }

    pub fn release(&mut self, tid: u64) -> bool {
        self.active.remove(&tid)
    }
}

/// Timed outcome of a deploy request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeployTiming {
    pub dma: DmaBooking,
    /// When the core leaves reset and starts executing.
    pub running_at: Cycle,
}

#[derive(Debug, Clone)]
pub struct ClusterState {
    pub cluster_id: usize,
    pub tiles: Vec<TileState>,
    sections: Vec<SpmSection>,
    pub dma: DmaEngine,
    pub thread_manager: ThreadManager,
    csr_cycles: u64,
}

impl ClusterState {
    pub fn new(cluster_id: usize, cfg: &ClusterConfig) -> Self {
        let tiles = cfg
            .tiles
            .iter()
            .enumerate()
            .map(|(i, &class)| match class {
                TileClass::Large => TileState::new(i, class, cfg.large_timing, cfg.tspm_large),
                TileClass::Small => TileState::new(i, class, cfg.small_timing, cfg.tspm_small),
            })
            .collect();
        ClusterState {
            cluster_id,
            tiles,
            sections: SectionKind::ALL
                .iter()
                .map(|&k| SpmSection::new(k, cfg.sections.get(k)))
                .collect(),
            dma: DmaEngine::new(cfg.dma),
            thread_manager: ThreadManager::new(cfg.max_threads),
            csr_cycles: cfg.dma.csr_write_cycles,
        }
    }

    pub fn section(&self, kind: SectionKind) -> &SpmSection {
        &self.sections[kind.index()]
    }

    pub fn section_mut(&mut self, kind: SectionKind) -> &mut SpmSection {
        &mut self.sections[kind.index()]
    }

    pub fn csr_cycles(&self) -> u64 {
        self.csr_cycles
    }

    pub fn spm_consistent(&self) -> bool {
        self.sections.iter().all(SpmSection::check)
    }

    pub fn tiles_consistent(&self) -> bool {
        self.tiles.iter().all(TileState::invariant_holds)
    }

    /// Pack-and-ship deployment: port to bus, DMA burst, port to core, reset
    /// released. The tile is reserved immediately; call
    /// [`begin_run`](Self::begin_run) when the DMA completes.
    pub fn deploy_to_tile(&mut self, tile: usize, code_bytes: u64, data_bytes: u64, now: Cycle) -> Result<DeployTiming> {
        let csr = self.csr_cycles;
        let t = self
            .tiles
            .get_mut(tile)
            .ok_or_else(|| Error::invalid(format!("no tile {tile}")))?;
        if !t.is_idle() {
            return Err(Error::ProtocolViolation(format!("deploy to busy tile {tile}")));
        }
        let needed = code_bytes + data_bytes;
        if needed > t.tspm_capacity {
            return Err(Error::DeploymentFailure {
                tile,
                needed,
                capacity: t.tspm_capacity,
            });
        }
        t.reserve()?;
        let issued = now + t.set_port_direction(PortDirection::Bus, csr)?;
        t.check_dma_access()?;
        let dma = self.dma.transfer(issued, needed);
        Ok(DeployTiming {
            dma,
            running_at: dma.end + 2 * csr,
        })
    }

    /// Applies the post-DMA half of the deploy sequence.
    pub fn begin_run(&mut self, tile: usize) -> Result<()> {
        let csr = self.csr_cycles;
        let t = &mut self.tiles[tile];
        t.check_dma_access()?;
        t.set_port_direction(PortDirection::Core, csr)?;
        t.set_reset(false, csr);
        t.start()?;
        t.tasks_run += 1;
        Ok(())
    }

    /// Tile-side completion: return count written, port flipped, interrupt
    /// raised. Returns the interrupt time.
    pub fn complete_from_tile(&mut self, tile: usize, return_tokens: u32, now: Cycle) -> Result<Cycle> {
        let csr = self.csr_cycles;
        let t = &mut self.tiles[tile];
        if t.run_state() != super::tile::RunState::Running {
            return Err(Error::ProtocolViolation(format!("completion from non-running tile {tile}")));
        }
        t.finish_run();
        t.set_return_value_count(return_tokens);
        Ok(now + t.set_port_direction(PortDirection::Bus, csr)?)
    }

    /// Retrieval DMA of returned tokens into the CS-SPM.
    pub fn retrieve(&mut self, tile: usize, bytes: u64, now: Cycle) -> Result<DmaBooking> {
        self.tiles[tile].check_dma_access()?;
        Ok(self.dma.transfer(now, bytes))
    }

    pub fn release_tile(&mut self, tile: usize, now: Cycle) {
        self.tiles[tile].release(now);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::tile::RunState;

    #[test]
    fn deploy_latency_matches_protocol() {
        let mut c = ClusterState::new(0, &ClusterConfig::with_mix(1, 1));
        let d = c.deploy_to_tile(0, 600, 400, 0).unwrap();
        assert_eq!(d.running_at, 95);
        c.begin_run(0).unwrap();
        assert_eq!(c.tiles[0].run_state(), RunState::Running);
        let irq = c.complete_from_tile(0, 1, 1000).unwrap();
        assert_eq!(irq, 1004);
        assert_eq!(c.tiles[0].csr().return_value_count, 1);
    }

    #[test]
    fn empty_deploy_is_setup_plus_csrs() {
        let mut c = ClusterState::new(0, &ClusterConfig::with_mix(1, 0));
        assert_eq!(c.deploy_to_tile(0, 0, 0, 0).unwrap().running_at, 12 + 20);
    }

    #[test]
    fn oversized_deploy_leaves_tile_idle() {
        let mut c = ClusterState::new(0, &ClusterConfig::with_mix(0, 1));
        let err = c.deploy_to_tile(0, 64 * 1024, 1, 0).unwrap_err();
        assert!(matches!(err, Error::DeploymentFailure { .. }));
        assert!(c.tiles[0].is_idle());
        assert_eq!(c.dma.transfers(), 0);
    }

    #[test]
    fn thread_manager_bound() {
        let mut tm = ThreadManager::new(2);
        tm.admit(1).unwrap();
        tm.admit(2).unwrap();
        assert!(!tm.has_slot());
        assert!(tm.admit(3).is_err());
        assert!(tm.release(1));
        assert!(tm.has_slot());
    }
}
