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

use serde::{Deserialize, Serialize};

use crate::cost::TileTiming;
use crate::dag::TileAttr;
use crate::error::{Error, Result};

use super::event::Cycle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TileClass {
    Large,
    Small,
}

impl TileClass {
    pub fn matches(self, attr: TileAttr) -> bool {
        matches!(
            (attr, self),
            (TileAttr::Any, _) | (TileAttr::Large, TileClass::Large) | (TileAttr::Small, TileClass::Small)
        )
    }

    pub fn letter(self) -> char {
        match self {
            TileClass::Large => 'L',
            TileClass::Small => 'S',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PortDirection {
    Bus,
    Core,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunState {
    Idle,
    Loading,
    Running,
    Returning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Csr {
    pub reset_active: bool,
    pub return_value_count: u32,
    pub port_dir: PortDirection,
}

#[derive(Debug, Clone)]
pub struct TileState {
    pub tile_id: usize,
    pub class: TileClass,
    pub timing: TileTiming,
    pub tspm_capacity: u64,
    port: PortDirection,
    csr: Csr,
    run_state: RunState,
    pub last_finished: Option<Cycle>,
    pub busy_cycles: u64,
    pub tasks_run: u64,
}

impl TileState {
    pub fn new(tile_id: usize, class: TileClass, timing: TileTiming, tspm_capacity: u64) -> Self {
        TileState {
            tile_id,
            class,
            timing,
            tspm_capacity,
            port: PortDirection::Bus,
            csr: Csr {
                reset_active: true,
                return_value_count: 0,
                port_dir: PortDirection::Bus,
            },
            run_state: RunState::Idle,
            last_finished: None,
            busy_cycles: 0,
            tasks_run: 0,
        }
    }

    pub fn port(&self) -> PortDirection {
        self.port
    }

    pub fn csr(&self) -> Csr {
        self.csr
    }

    pub fn run_state(&self) -> RunState {
        self.run_state
    }

    pub fn is_idle(&self) -> bool {
        self.run_state == RunState::Idle
    }

    /// Flips the T-SPM port mux. Returns the CSR write cost.
    pub fn set_port_direction(&mut self, dir: PortDirection, csr_cycles: u64) -> Result<u64> {
        if self.run_state == RunState::Running {
            return Err(Error::ProtocolViolation(format!(
                "port direction change on running tile {}",
                self.tile_id
            )));
        }
        self.port = dir;
        self.csr.port_dir = dir;
        Ok(csr_cycles)
    }

    pub fn set_reset(&mut self, active: bool, csr_cycles: u64) -> u64 {
        self.csr.reset_active = active;
        csr_cycles
    }

    pub fn set_return_value_count(&mut self, n: u32) {
        self.csr.return_value_count = n;
    }

    /// Checks that a DMA may touch the T-SPM now.
    pub fn check_dma_access(&self) -> Result<()> {
        if self.port != PortDirection::Bus {
            return Err(Error::ProtocolViolation(format!(
                "DMA access to tile {} while port faces the core",
                self.tile_id
            )));
        }
        Ok(())
    }

    pub(crate) fn reserve(&mut self) -> Result<()> {
        if self.run_state != RunState::Idle {
            return Err(Error::ProtocolViolation(format!(
                "deploy to busy tile {} ({:?})",
                self.tile_id, self.run_state
            )));
        }
        self.run_state = RunState::Loading;
        Ok(())
    }

    /// Core start: requires the port to face the core with reset released.
    pub(crate) fn start(&mut self) -> Result<()> {
        if self.port != PortDirection::Core || self.csr.reset_active {
            return Err(Error::ProtocolViolation(format!(
                "tile {} started without core port or with reset held",
                self.tile_id
            )));
        }
        self.run_state = RunState::Running;
        Ok(())
    }

    pub(crate) fn finish_run(&mut self) {
        self.run_state = RunState::Returning;
        self.csr.reset_active = true;
    }

    pub(crate) fn release(&mut self, now: Cycle) {
        self.run_state = RunState::Idle;
        self.last_finished = Some(now);
    }

    /// `RUNNING ⇒ port = CORE ∧ reset released`.
    pub fn invariant_holds(&self) -> bool {
        self.run_state != RunState::Running || (self.port == PortDirection::Core && !self.csr.reset_active)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tile() -> TileState {
        TileState::new(0, TileClass::Large, TileTiming::large(), 1024)
    }

    #[test]
    fn port_flip_rules() {
        let mut t = tile();
        t.set_port_direction(PortDirection::Core, 4).unwrap();
        t.set_port_direction(PortDirection::Bus, 4).unwrap();
        assert_eq!(t.port(), PortDirection::Bus);
        assert_eq!(t.csr().port_dir, PortDirection::Bus);
        t.reserve().unwrap();
        t.set_port_direction(PortDirection::Core, 4).unwrap();
        t.set_reset(false, 4);
        t.start().unwrap();
        assert!(t.invariant_holds());
        assert!(t.set_port_direction(PortDirection::Bus, 4).is_err());
        assert!(t.check_dma_access().is_err());
    }

    #[test]
    fn attribute_matching() {
        assert!(TileClass::Large.matches(TileAttr::Any));
        assert!(TileClass::Small.matches(TileAttr::Small));
        assert!(!TileClass::Small.matches(TileAttr::Large));
    }
}
