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


//! One end-to-end run on three clusters of 2L2S tiles, with a JSON-lines
//! event trace written to a temporary file.

use std::sync::Arc;

use wbpsim::cost::CostParams;
use wbpsim::machine::TraceWriter;
use wbpsim::sim::SystemConfig;
use wbpsim::workload::{run_experiment, ExperimentOptions, LinkConfig, TddPattern};

fn main() -> wbpsim::Result<()> {
    let sys = SystemConfig::hierarchical(3, 2, 2);
    let link = LinkConfig::default();
    let pattern = TddPattern::default();
    let path = std::env::temp_dir().join("wbpsim-trace.jsonl");
    let file = std::fs::File::create(&path).map_err(|e| wbpsim::Error::Io { path: path.clone(), source: e })?;

    let opts = ExperimentOptions {
        trace: Some(TraceWriter::new(Box::new(std::io::BufWriter::new(file)))),
        verify: true,
        ..ExperimentOptions::default()
    };
    let r = run_experiment(&sys, &link, &pattern, 8, 1, Arc::new(CostParams::calibrated()), opts)?;

    println!("{} RX / {} TX threads", r.rx_threads, r.tx_threads);
    println!("{} info bits in {} cycles: {:.2} Mbps", r.info_bits, r.simulated_cycles, r.throughput_mbps);
    println!("mean tile utilization {:.3}", r.mean_utilization);
    println!(
        "DAG transfers {}, residency hits {}, dismissed tasks {}",
        r.metrics.dag_transfers, r.metrics.residency_hits, r.metrics.dismissed_tasks
    );
    println!("{} events, digest {}", r.events, r.digest);
    println!("trace written to {}", path.display());
    Ok(())
}
