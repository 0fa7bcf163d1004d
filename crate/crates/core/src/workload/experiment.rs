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

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::{CostParams, MODEL_CLOCK_HZ};
use crate::dag::{Payload, Token, ValidDag};
use crate::error::{Error, Result};
use crate::machine::{Cycle, TraceWriter};
use crate::signal::{awgn_channel, BitVec};
use crate::sim::{Metrics, Simulator, SystemConfig};

use super::{build_rx_dag, build_tx_dag, transmit_slot, LinkConfig, LinkExecutor, SlotKind, TddPattern};

/// One slot's thread with the ground truth needed to check it.
#[derive(Debug, Clone)]
pub struct SpawnedThread {
    pub slot: usize,
    pub kind: SlotKind,
    pub arrival: Cycle,
    pub dag: Arc<ValidDag>,
    pub data: Vec<Token>,
    /// Info bits of every user in the slot.
    pub truth: Vec<BitVec>,
    /// Exact output the thread must deliver, when known.
    pub expected: Option<Payload>,
}

/// One thread per slot: TX for downlink, RX for uplink. Uplink samples are
/// produced by the reference transmitter and the channel model.
pub fn spawn_threads(link: &LinkConfig, pattern: &TddPattern, n_slots: usize, seed: u64) -> Result<Vec<SpawnedThread>> {
    if n_slots == 0 {
        return Err(Error::invalid("n_slots must be >= 1"));
    }
    link.validate()?;
    let code = link.polar()?;
    let uses = |k: SlotKind| (0..n_slots).any(|i| pattern.slot(i) == k);
    let tx_dag = if uses(SlotKind::Downlink) {
        Some(build_tx_dag(link)?)
    } else {
        None
    };
    let rx_dag = if uses(SlotKind::Uplink) {
        Some(build_rx_dag(link)?)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_slots);
    for slot in 0..n_slots {
        let kind = pattern.slot(slot);
        let truth: Vec<BitVec> = (0..link.users_per_slot)
            .map(|_| (0..link.info_len).map(|_| rng.gen_range(0..2u8)).collect())
            .collect();
        let arrival = slot as Cycle * pattern.slot_duration;
        let th = match kind {
            SlotKind::Downlink => SpawnedThread {
                slot,
                kind,
                arrival,
                dag: tx_dag.clone().expect("tx dag"),
                data: truth.iter().map(|b| Token::new(Payload::Bits(b.clone()))).collect(),
                expected: Some(Payload::Cplx(transmit_slot(link, &code, &truth)?)),
                truth,
            },
            SlotKind::Uplink => {
                let clean = transmit_slot(link, &code, &truth)?;
                let rx = if link.noiseless() {
                    clean
                } else {
                    awgn_channel(&clean, link.snr_db, &mut rng)
                };
                SpawnedThread {
                    slot,
                    kind,
                    arrival,
                    dag: rx_dag.clone().expect("rx dag"),
                    data: vec![Token::new(Payload::Cplx(rx))],
                    expected: link.noiseless().then(|| Payload::Bits(truth.concat())),
                    truth,
                }
            }
        };
        out.push(th);
    }
    Ok(out)
}

/// `info_bits · clock / cycles`, in Mbps.
pub fn throughput(info_bits: u64, cycles: Cycle) -> Result<f64> {
    if cycles == 0 {
        return Err(Error::invalid("throughput over zero simulated cycles"));
    }
    Ok(info_bits as f64 * (MODEL_CLOCK_HZ / cycles as f64) / 1e6)
}

#[derive(Default)]
pub struct ExperimentOptions {
    pub trace: Option<TraceWriter>,
    /// Fail on any delivered word that differs from ground truth (noiseless
    /// runs only).
    pub verify: bool,
    pub inject_fault: bool,
}

impl ExperimentOptions {
    pub fn verified() -> Self {
        ExperimentOptions {
            verify: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThroughputReport {
    pub info_bits: u64,
    pub simulated_cycles: Cycle,
    pub throughput_mbps: f64,
    /// `[cluster][tile]` busy fraction.
    pub tile_utilization: Vec<Vec<f64>>,
    pub mean_utilization: f64,
    pub metrics: Metrics,
    pub digest: String,
    pub events: u64,
    pub bit_errors: u64,
    pub rx_threads: usize,
    pub tx_threads: usize,
    pub mean_latency: f64,
}

/// Builds the machine, runs every slot's thread to completion, checks the
/// delivered data and reports throughput.
pub fn run_experiment(
    sys: &SystemConfig,
    link: &LinkConfig,
    pattern: &TddPattern,
    n_slots: usize,
    seed: u64,
    cost: Arc<CostParams>,
    opts: ExperimentOptions,
) -> Result<ThroughputReport> {
    let spawned = spawn_threads(link, pattern, n_slots, seed)?;
    let mut sim = Simulator::new(sys.clone(), cost, LinkExecutor::new(link)?)?;
    if let Some(w) = opts.trace {
        sim.set_trace(w);
    }
    if opts.inject_fault {
        sim.inject_port_fault();
    }
    for th in &spawned {
        sim.add_thread(th.arrival, th.dag.clone(), th.data.clone())?;
    }
    let outcome = sim.run()?;

    let mut info_bits = 0u64;
    let mut bit_errors = 0u64;
    let (mut rx_threads, mut tx_threads) = (0, 0);
    for (th, summary) in spawned.iter().zip(&outcome.threads) {
        let delivered = summary.outputs.first();
        match th.kind {
            SlotKind::Uplink => {
                rx_threads += 1;
                let bits = delivered.and_then(Payload::as_bits).unwrap_or(&[]);
                let truth = th.truth.concat();
                info_bits += bits.len() as u64;
                bit_errors += bits.iter().zip(&truth).filter(|(a, b)| a != b).count() as u64
                    + truth.len().abs_diff(bits.len()) as u64;
            }
            SlotKind::Downlink => tx_threads += 1,
        }
        if opts.verify {
            if let Some(expected) = &th.expected {
                if delivered != Some(expected) {
                    return Err(Error::Fidelity(format!(
                        "slot {} ({:?}) delivered data differs from ground truth",
                        th.slot, th.kind
                    )));
                }
            }
        }
    }
    let cycles = outcome.makespan;
    let tile_utilization: Vec<Vec<f64>> = outcome
        .metrics
        .tile_busy
        .iter()
        .map(|c| {
            c.iter()
                .map(|&b| if cycles == 0 { 0.0 } else { (b as f64 / cycles as f64).min(1.0) })
                .collect()
        })
        .collect();
    let latencies: Vec<f64> = outcome
        .threads
        .iter()
        .filter_map(|t| t.completed.map(|c| (c - t.arrival) as f64))
        .collect();
    Ok(ThroughputReport {
        info_bits,
        simulated_cycles: cycles,
        throughput_mbps: if cycles == 0 { 0.0 } else { throughput(info_bits, cycles)? },
        mean_utilization: outcome.tile_utilization(),
        tile_utilization,
        metrics: outcome.metrics,
        digest: outcome.digest,
        events: outcome.events,
        bit_errors,
        rx_threads,
        tx_threads,
        mean_latency: latencies.iter().sum::<f64>() / latencies.len().max(1) as f64,
    })
}
