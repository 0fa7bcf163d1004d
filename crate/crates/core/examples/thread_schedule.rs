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


//! Thread-level placement on three clusters: two fresh placements, a
//! residency hit, and a thread that has to wait.

use wbpsim::dag::parse_dag;
use wbpsim::machine::{ClusterConfig, ClusterState};
use wbpsim::sched::{thread_schedule, DeploymentTable, SchedulerFeatures, ThreadDescriptor};

const CHAIN: &str = "
task a fft:128 LARGE 4096
task b scramble:256 SMALL 2048
edge EXTERNAL a 1
edge a b 1
edge b EXTERNAL 1
";

fn main() -> wbpsim::Result<()> {
    let dag = parse_dag(CHAIN)?.validated().expect("valid DAG");
    let cfg = ClusterConfig {
        max_threads: 1,
        ..ClusterConfig::with_mix(1, 1)
    };
    let mut clusters: Vec<ClusterState> = (0..3).map(|i| ClusterState::new(i, &cfg)).collect();
    let mut table = DeploymentTable::new();
    let features = SchedulerFeatures::default();

    let mut threads: Vec<ThreadDescriptor> = (0..4).map(|t| ThreadDescriptor::new(t, dag.clone(), Vec::new(), 0)).collect();
    let mut refs: Vec<&mut ThreadDescriptor> = threads.iter_mut().collect();
    let out = thread_schedule(&mut refs, &mut clusters, &mut table, features, 0)?;
    for d in &out.log {
        println!("{d:?}");
    }
    println!("deployment table: {:?}", table.resident_clusters(dag.id));
    Ok(())
}
