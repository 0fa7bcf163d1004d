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


//! Runs one receive DAG on a single cluster while blind detection reports
//! fewer users than the worst case. Decoders past the reported count are
//! dismissed and never reach a tile.

use std::sync::Arc;

use wbpsim::cost::{CostParams, KernelKind};
use wbpsim::dag::{Payload, Token};
use wbpsim::sim::{Simulator, SyntheticExecutor, SystemConfig};
use wbpsim::workload::{build_rx_dag, LinkConfig};

fn main() -> wbpsim::Result<()> {
    let cfg = LinkConfig::default();
    let dag = build_rx_dag(&cfg)?;
    println!("{} tasks, {} edges in the worst-case receive DAG", dag.len(), dag.edges().len());

    let cost = Arc::new(CostParams::calibrated());
    for keep in [0, 3, 20] {
        let mut sim = Simulator::new(SystemConfig::hierarchical(1, 2, 2), cost.clone(), SyntheticExecutor { keep: Some(keep) })?;
        let data = dag
            .topology
            .external_inputs
            .iter()
            .map(|_| Token::new(Payload::Bits(vec![0; 8])))
            .collect();
        sim.add_thread(0, dag.clone(), data)?;
        let out = sim.run()?;
        let bp = out.metrics.executed.get(&KernelKind::BpDecode).copied().unwrap_or(0);
        println!(
            "{keep:>2} users: {bp:>2} decoders ran, {:>2} dismissed, makespan {} cycles",
            out.metrics.dismissed_tasks, out.makespan
        );
    }
    Ok(())
}
