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


//! Packs a thread (DAG plus data) into one payload, unpacks it, and then
//! times shipping one task's code and data into a tile.

use wbpsim::dag::{Payload, Token};
use wbpsim::machine::{ClusterConfig, ClusterState};
use wbpsim::sched::{mem_pack, mem_unpack, packed_size};
use wbpsim::workload::{build_tx_dag, LinkConfig};

fn main() -> wbpsim::Result<()> {
    let cfg = LinkConfig {
        users_per_slot: 2,
        ..LinkConfig::default()
    };
    let dag = build_tx_dag(&cfg)?;
    let data: Vec<Token> = (0..2).map(|_| Token::new(Payload::Bits(vec![1; cfg.info_len]))).collect();

    let payload = mem_pack(&data, &dag);
    let data_bytes: u64 = data.iter().map(|t| t.byte_size).sum();
    println!(
        "payload {} bytes (expected {}), DAG code {} bytes",
        payload.len(),
        packed_size(&dag, data_bytes),
        dag.total_code_bytes()
    );
    let back = mem_unpack(&payload)?;
    println!("unpacked dag {:?}, {} data bytes", back.dag_id, back.data.len());

    let mut cluster = ClusterState::new(0, &ClusterConfig::with_mix(2, 2));
    let t = cluster.deploy_to_tile(0, 6 * 1024, 1024, 100)?;
    println!(
        "deploy at 100: DMA {}..{}, core out of reset at {}",
        t.dma.start, t.dma.end, t.running_at
    );
    Ok(())
}
