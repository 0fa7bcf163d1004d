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


//! A small cluster x tile grid, printed as CSV.

use wbpsim::config::{ExperimentConfig, Grid};
use wbpsim::report::{sweep, worker_count, write_csv};

fn main() -> wbpsim::Result<()> {
    let mut cfg = ExperimentConfig::parse(
        "[tdd]\nslot_duration = 1000\n[run]\nslots = 12\n",
    )?;
    cfg.run.grid = Grid::parse("1,2 x 2..4")?;
    let summary = sweep(&cfg, worker_count())?;
    write_csv(&summary.rows(), std::io::stdout().lock())?;
    if let Some(r) = summary.mean_ratio(1, 2) {
        eprintln!("mean throughput 2 / 1 clusters: {r:.2}");
    }
    Ok(())
}
