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


//! Baseline, multi-threading, and multi-threading with lazy deletion, on
//! the 3C4T system and on twelve tiles under one scheduler.

use wbpsim::config::ExperimentConfig;
use wbpsim::report::ablation;

fn main() -> wbpsim::Result<()> {
    let cfg = ExperimentConfig::parse(include_str!("../data/3c4t.conf"))?;
    println!("{:<8} {:>10} {:>10}", "variant", "flat", "3C4T");
    for row in ablation(&cfg)? {
        println!(
            "{:<8} {:>10.2} {:>10.2}",
            row.variant, row.flat.throughput_mbps, row.hierarchical.throughput_mbps
        );
    }
    Ok(())
}
