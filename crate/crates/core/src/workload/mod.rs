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

//! Link-chain workloads: TX/RX DAGs, TDD thread arrivals and experiments.

mod dags;
mod experiment;
mod link;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::machine::Cycle;
use crate::signal::{OfdmConfig, PolarCode, MAX_USERS};

pub use dags::{build_rx_dag, build_tx_dag, code_bytes};
pub use experiment::{
    run_experiment, spawn_threads, throughput, ExperimentOptions, SpawnedThread, ThroughputReport,
};
pub use link::{pilot_symbol, receive_slot, transmit_slot, LinkExecutor};

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub block_len: usize,
    pub info_len: usize,
    pub rate_match_e: usize,
    /// Scrambler seed of user 0; user `j` uses `c_init + j`.
    pub c_init: u32,
    pub pilot_c_init: u32,
    pub ofdm: OfdmConfig,
    pub bp_iters: usize,
    pub users_per_slot: usize,
    /// `f64::INFINITY` means noiseless.
    pub snr_db: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            block_len: 512,
            info_len: 256,
            rate_match_e: 512,
            c_init: 0x1234,
            pilot_c_init: 0x5a5a,
            ofdm: OfdmConfig::default(),
            bp_iters: 30,
            users_per_slot: 4,
            snr_db: f64::INFINITY,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        self.ofdm.validate()?;
        PolarCode::new(self.block_len, self.info_len)?;
        if self.users_per_slot > MAX_USERS {
            return Err(Error::invalid(format!(
                "users_per_slot {} exceeds {MAX_USERS}",
                self.users_per_slot
            )));
        }
        let per_symbol = 2 * self.ofdm.n_subcarriers;
        if self.rate_match_e == 0 || self.rate_match_e % per_symbol != 0 {
            return Err(Error::invalid(format!(
                "rate_match_e {} must be a positive multiple of {per_symbol} (two bits per subcarrier)",
                self.rate_match_e
            )));
        }
        if self.bp_iters == 0 {
            return Err(Error::invalid("bp_iters must be >= 1"));
        }
        if self.snr_db.is_nan() {
            return Err(Error::invalid("snr_db is NaN"));
        }
        let max_seed = self.c_init as u64 + MAX_USERS as u64;
        if max_seed > 0x7fff_ffff || self.pilot_c_init > 0x7fff_ffff {
            return Err(Error::invalid("scrambler seeds must fit in 31 bits"));
        }
        Ok(())
    }

    pub fn polar(&self) -> Result<PolarCode> {
        PolarCode::new(self.block_len, self.info_len)
    }

    /// OFDM data symbols carried per user.
    pub fn symbols_per_user(&self) -> usize {
        self.rate_match_e / 2 / self.ofdm.n_subcarriers
    }

    pub fn user_c_init(&self, user: usize) -> u32 {
        self.c_init + user as u32
    }

    pub fn noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotKind {
    Downlink,
    Uplink,
}

impl SlotKind {
    pub fn letter(self) -> char {
        match self {
            SlotKind::Downlink => 'D',
            SlotKind::Uplink => 'U',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TddPattern {
    pub slots: Vec<SlotKind>,
    pub slot_duration: Cycle,
}

impl TddPattern {
    pub fn new(slots: Vec<SlotKind>, slot_duration: Cycle) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::invalid("TDD pattern is empty"));
        }
        if slot_duration == 0 {
            return Err(Error::invalid("slot_duration must be > 0"));
        }
        Ok(TddPattern { slots, slot_duration })
    }

    pub fn slot(&self, index: usize) -> SlotKind {
        self.slots[index % self.slots.len()]
    }
}

impl Default for TddPattern {
    fn default() -> Self {
        TddPattern {
            slots: vec![SlotKind::Uplink, SlotKind::Downlink],
            // One 5-user RX thread keeps a 2L2S cluster about 70% busy
            // over one slot (about 277k tile-cycles of 400k).
            slot_duration: 100_000,
        }
    }
}

impl fmt::Display for TddPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.slots.iter().map(|k| k.letter().to_string()).collect();
        f.write_str(&s.join(","))
    }
}

/// Parses `D,U,U` style slot lists (commas and spaces optional).
impl FromStr for TddPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let slots = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c.to_ascii_uppercase() {
                'D' => Ok(SlotKind::Downlink),
                'U' => Ok(SlotKind::Uplink),
                other => Err(Error::invalid(format!("unknown slot kind `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        TddPattern::new(slots, TddPattern::default().slot_duration)
    }
}
