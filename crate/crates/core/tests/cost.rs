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


use approx::assert_relative_eq;
use wbpsim::cost::{
    dma_cycles, fit_scaling, format_anchors, kernel_cycles, parse_anchors, CostParams, CycleAnchor, DmaTiming,
    KernelKind, TileTiming, DEFAULT_ANCHORS,
};

#[test]
fn lane_scaling_against_reference_tiles() {
    let p = CostParams::calibrated();
    // 0.2 + 0.8 * 64 / lanes
    for (tile, factor) in [(TileTiming::large(), 3.4), (TileTiming::small(), 6.6)] {
        let got = kernel_cycles(KernelKind::Fft, 512, &tile, &p).unwrap();
        assert_eq!(got, (1122.0f64 * factor).round() as u64);
    }
    let at_ref = kernel_cycles(KernelKind::BpDecode, 512, &TileTiming::reference(64), &p).unwrap();
    let wider = kernel_cycles(KernelKind::BpDecode, 512, &TileTiming::reference(128), &p).unwrap();
    assert_eq!(at_ref, 14815);
    assert_eq!(wider, (14815.0 * 0.6f64).round() as u64);
}

#[test]
fn fitted_costs_are_monotone_in_size() {
    let p = CostParams::calibrated();
    let tile = TileTiming::large();
    for kind in [KernelKind::Fft, KernelKind::BpDecode, KernelKind::OfdmDemod] {
        let costs: Vec<u64> = (3..=12)
            .map(|k| kernel_cycles(kind, 1 << k, &tile, &p).unwrap())
            .collect();
        assert!(costs.windows(2).all(|w| w[0] <= w[1]), "{kind}: {costs:?}");
    }
}

#[test]
fn fit_through_two_points_is_exact() {
    // a * N log2 N + b through (8, 100) and (16, 260): a = 160 / 40, b = 4.
    let anchors = [
        CycleAnchor { kernel: KernelKind::Fft, size: 8, cycles: 100, ref_lanes: 64 },
        CycleAnchor { kernel: KernelKind::Fft, size: 16, cycles: 260, ref_lanes: 64 },
    ];
    let p = fit_scaling(&anchors).unwrap();
    let law = p.laws[&KernelKind::Fft];
    assert_relative_eq!(law.a, 4.0, epsilon = 1e-9);
    assert_relative_eq!(law.b, 4.0, epsilon = 1e-9);
    assert_relative_eq!(law.eval(32), 4.0 * 160.0 + 4.0, epsilon = 1e-9);
}

#[test]
fn shipped_anchor_file_round_trips() {
    let anchors = parse_anchors(DEFAULT_ANCHORS).unwrap();
    assert_eq!(anchors.len(), 5);
    assert_eq!(parse_anchors(&format_anchors(&anchors)).unwrap(), anchors);
}

#[test]
fn dma_latency() {
    let t = DmaTiming::default();
    assert_eq!(dma_cycles(0, &t), 20);
    assert_eq!(dma_cycles(16, &t), 21);
    assert_eq!(dma_cycles(17, &t), 22);
    assert_eq!(dma_cycles(30816, &t), 20 + 1926);
}

#[test]
fn rejects_bad_inputs() {
    let p = CostParams::calibrated();
    assert!(kernel_cycles(KernelKind::Fft, 0, &TileTiming::large(), &p).is_err());
    assert!(CostParams::calibrated().with_serial_fraction(1.5).is_err());
    assert!(parse_anchors("kernel,size,cycles,ref_lanes\nfft,128,abc,64\n").is_err());
}
