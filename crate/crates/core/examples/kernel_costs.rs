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


//! Cycle costs from the shipped anchors, at anchor sizes, in between, and on
//! both tile classes.

use wbpsim::cost::{bp_anchor_from_throughput, kernel_cycles, CostParams, KernelKind, TileTiming};

fn main() -> wbpsim::Result<()> {
    let params = CostParams::calibrated();
    let reference = TileTiming::reference(64);
    let large = TileTiming::large();
    let small = TileTiming::small();

    println!("{:<12} {:>6} {:>10} {:>10} {:>10}", "kernel", "N", "64 lanes", "L tile", "S tile");
    for (kind, n) in [
        (KernelKind::Fft, 128),
        (KernelKind::Fft, 256),
        (KernelKind::Fft, 512),
        (KernelKind::Fft, 2048),
        (KernelKind::BpDecode, 512),
        (KernelKind::BpDecode, 1024),
        (KernelKind::Scramble, 512),
    ] {
        println!(
            "{:<12} {:>6} {:>10} {:>10} {:>10}",
            kind.to_string(),
            n,
            kernel_cycles(kind, n, &reference, &params)?,
            kernel_cycles(kind, n, &large, &params)?,
            kernel_cycles(kind, n, &small, &params)?,
        );
    }

    // Decoder anchors come from normalized throughput figures.
    for (thrpt, n) in [(0.54, 512), (0.53, 1024)] {
        let a = bp_anchor_from_throughput(thrpt, n, 64)?;
        println!("{thrpt} Mbps/lane/GHz at N={n} -> {} cycles", a.cycles);
    }
    Ok(())
}
