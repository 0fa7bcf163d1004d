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

//! Kernel and transfer cycle costs.
//!
//! Measured single-tile cycle counts are served exactly at their anchor
//! points. Everything else comes from a fitted `a * N * log2(N) + b` law,
//! clamped between neighbouring anchors so costs stay monotone in `N`, then
//! scaled by lane count with an Amdahl-style serial fraction.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model clock shared by tiles and the system, in Hz.
pub const MODEL_CLOCK_HZ: f64 = 500e6;

/// Lane count the measured anchors are attributed to.
pub const DEFAULT_REF_LANES: u32 = 64;

pub const DEFAULT_SERIAL_FRACTION: f64 = 0.2;

/// The shipped calibration table.
pub const DEFAULT_ANCHORS: &str = include_str!("../data/anchors.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Fft,
    BpDecode,
    PolarEncode,
    RateMatch,
    RateRecover,
    Scramble,
    Descramble,
    QpskMod,
    QpskDemod,
    OfdmMod,
    OfdmDemod,
    LsEstimate,
    ZfEqualize,
    BlindDetect,
    SlotAssembly,
    Aggregate,
}

impl KernelKind {
    pub const ALL: [KernelKind; 16] = [
        KernelKind::Fft,
        KernelKind::BpDecode,
        KernelKind::PolarEncode,
        KernelKind::RateMatch,
        KernelKind::RateRecover,
        KernelKind::Scramble,
        KernelKind::Descramble,
        KernelKind::QpskMod,
        KernelKind::QpskDemod,
        KernelKind::OfdmMod,
        KernelKind::OfdmDemod,
        KernelKind::LsEstimate,
        KernelKind::ZfEqualize,
        KernelKind::BlindDetect,
        KernelKind::SlotAssembly,
        KernelKind::Aggregate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Fft => "fft",
            KernelKind::BpDecode => "bp_decode",
            KernelKind::PolarEncode => "polar_encode",
            KernelKind::RateMatch => "rate_match",
            KernelKind::RateRecover => "rate_recover",
            KernelKind::Scramble => "scramble",
            KernelKind::Descramble => "descramble",
            KernelKind::QpskMod => "qpsk_mod",
            KernelKind::QpskDemod => "qpsk_demod",
            KernelKind::OfdmMod => "ofdm_mod",
            KernelKind::OfdmDemod => "ofdm_demod",
            KernelKind::LsEstimate => "ls_estimate",
            KernelKind::ZfEqualize => "zf_equalize",
            KernelKind::BlindDetect => "blind_detect",
            KernelKind::SlotAssembly => "slot_assembly",
            KernelKind::Aggregate => "aggregate",
        }
    }

    /// OFDM (de)modulation is charged as one FFT per symbol.
    fn cost_alias(self) -> KernelKind {
        match self {
            KernelKind::OfdmMod | KernelKind::OfdmDemod => KernelKind::Fft,
            k => k,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown kernel kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TileTiming {
    pub lanes: u32,
    pub vrf_count: u32,
    pub clock_hz: f64,
}

impl TileTiming {
    /// 16-lane VXU with 32 vector registers.
    pub fn large() -> Self {
        TileTiming {
            lanes: 16,
            vrf_count: 32,
            clock_hz: MODEL_CLOCK_HZ,
        }
    }

    /// 8-lane VXU with 64 vector registers.
    pub fn small() -> Self {
        TileTiming {
            lanes: 8,
            vrf_count: 64,
            clock_hz: MODEL_CLOCK_HZ,
        }
    }

    pub fn reference(lanes: u32) -> Self {
        TileTiming {
            lanes,
            vrf_count: 32,
            clock_hz: MODEL_CLOCK_HZ,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lanes == 0 || !self.lanes.is_power_of_two() {
            return Err(Error::invalid(format!("lanes {} is not a power of two", self.lanes)));
        }
        if !(self.clock_hz > 0.0) {
            return Err(Error::invalid("tile clock must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleAnchor {
    pub kernel: KernelKind,
    pub size: u64,
    pub cycles: u64,
    pub ref_lanes: u32,
}

/// Converts a per-lane, per-GHz normalized decoding throughput (Mbps) into a
/// cycle count, reading the throughput as coded bits per second at 1 GHz.
pub fn bp_anchor_from_throughput(norm_thrpt: f64, size: u64, lanes: u32) -> Result<CycleAnchor> {
    if !(norm_thrpt > 0.0) {
        return Err(Error::invalid("normalized throughput must be > 0"));
    }
    let cycles = size as f64 * 1e3 / (norm_thrpt * lanes as f64);
    Ok(CycleAnchor {
        kernel: KernelKind::BpDecode,
        size,
        cycles: cycles.round().max(1.0) as u64,
        ref_lanes: lanes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmaTiming {
    pub setup_cycles: u64,
    pub bytes_per_cycle: u64,
    pub csr_write_cycles: u64,
}

impl Default for DmaTiming {
    fn default() -> Self {
        DmaTiming {
            setup_cycles: 20,
            bytes_per_cycle: 16,
            csr_write_cycles: 4,
        }
    }
}

impl DmaTiming {
    pub fn validate(&self) -> Result<()> {
        if self.setup_cycles == 0 || self.bytes_per_cycle == 0 || self.csr_write_cycles == 0 {
            return Err(Error::invalid("DMA timing values must all be > 0"));
        }
        Ok(())
    }
}

/// Burst transfer latency: fixed setup plus one cycle per bus beat.
pub fn dma_cycles(bytes: u64, timing: &DmaTiming) -> u64 {
    timing.setup_cycles + bytes.div_ceil(timing.bytes_per_cycle)
}

/// Scheduler decision overheads, charged to the scheduler core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerTiming {
    /// Per thread evaluated by the thread-level scheduler.
    pub thread_eval_cycles: u64,
    /// Per DAG node visited by a task-level scan.
    pub node_visit_cycles: u64,
    /// Period of the thread-level re-evaluation tick.
    pub tick_interval: u64,
}

impl Default for SchedulerTiming {
    fn default() -> Self {
        SchedulerTiming {
            thread_eval_cycles: 50,
            node_visit_cycles: 10,
            tick_interval: 1000,
        }
    }
}

/// `cycles(N) = a * N * log2(N) + b` at the reference lane count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingLaw {
    pub a: f64,
    pub b: f64,
    /// False when the law is an estimate rather than a fit to measurements.
    pub fitted: bool,
}

impl ScalingLaw {
    pub fn eval(&self, size: u64) -> f64 {
        self.a * nlogn(size) + self.b
    }
}

fn nlogn(size: u64) -> f64 {
    let n = size as f64;
    if size <= 1 {
        n
    } else {
        n * n.log2()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResidual {
    pub kernel: KernelKind,
    pub size: u64,
    pub measured: u64,
    pub predicted: f64,
}

impl FitResidual {
    pub fn relative(&self) -> f64 {
        (self.predicted - self.measured as f64) / self.measured as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostParams {
    pub laws: BTreeMap<KernelKind, ScalingLaw>,
    pub anchors: BTreeMap<(KernelKind, u64), CycleAnchor>,
    pub residuals: Vec<FitResidual>,
    pub serial_fraction: f64,
    /// Reference lanes for kernels without anchors.
    pub ref_lanes: u32,
}

/// Estimated laws for kernels the measurements do not cover.
const ESTIMATED_LAWS: [(KernelKind, f64, f64); 13] = [
    (KernelKind::PolarEncode, 0.02, 40.0),
    (KernelKind::RateMatch, 0.01, 20.0),
    (KernelKind::RateRecover, 0.02, 20.0),
    (KernelKind::Scramble, 0.02, 30.0),
    (KernelKind::Descramble, 0.02, 30.0),
    (KernelKind::QpskMod, 0.02, 20.0),
    (KernelKind::QpskDemod, 0.02, 20.0),
    (KernelKind::LsEstimate, 0.05, 30.0),
    (KernelKind::ZfEqualize, 0.05, 30.0),
    (KernelKind::BlindDetect, 0.01, 50.0),
    (KernelKind::SlotAssembly, 0.005, 20.0),
    (KernelKind::Aggregate, 0.005, 20.0),
    // Only used if no BP anchors are supplied.
    (KernelKind::BpDecode, 3.2, 0.0),
];

impl CostParams {
    /// Fit of the shipped anchors plus estimated laws for the rest.
    pub fn calibrated() -> Self {
        let anchors = parse_anchors(DEFAULT_ANCHORS).expect("shipped anchors parse");
        Self::from_anchors(&anchors).expect("shipped anchors fit")
    }

    /// Fits every kernel with two or more anchors and fills the remaining
    /// kernels with estimated laws.
    pub fn from_anchors(anchors: &[CycleAnchor]) -> Result<Self> {
        let mut params = fit_scaling(anchors)?;
        for (kind, a, b) in ESTIMATED_LAWS {
            params.laws.entry(kind).or_insert(ScalingLaw {
                a,
                b,
                fitted: false,
            });
        }
        Ok(params)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_anchors(&parse_anchors(&text)?)
    }

    pub fn with_serial_fraction(mut self, serial_fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&serial_fraction) {
            return Err(Error::invalid(format!(
                "serial fraction {serial_fraction} outside [0, 1]"
            )));
        }
        self.serial_fraction = serial_fraction;
        Ok(self)
    }

    /// Re-attributes every anchor (and the default) to `lanes` reference lanes.
    pub fn with_ref_lanes(mut self, lanes: u32) -> Self {
        self.ref_lanes = lanes;
        for anchor in self.anchors.values_mut() {
            anchor.ref_lanes = lanes;
        }
        self
    }

    fn ref_lanes_for(&self, kind: KernelKind) -> u32 {
        self.anchors
            .range((kind, 0)..=(kind, u64::MAX))
            .next()
            .map(|(_, a)| a.ref_lanes)
            .unwrap_or(self.ref_lanes)
    }

    /// Cycles at the reference lane count.
    pub fn base_cycles(&self, kind: KernelKind, size: u64) -> Result<f64> {
        let kind = kind.cost_alias();
        if let Some(anchor) = self.anchors.get(&(kind, size)) {
            return Ok(anchor.cycles as f64);
        }
        let law = self
            .laws
            .get(&kind)
            .ok_or_else(|| Error::invalid(format!("no cost law for kernel `{kind}`")))?;
        let mut value = law.eval(size);
        let below = self.anchors.range((kind, 0)..(kind, size)).next_back();
        let above = self.anchors.range((kind, size)..=(kind, u64::MAX)).next();
        if let Some((_, a)) = below {
            value = value.max(a.cycles as f64);
        }
        if let Some((_, a)) = above {
            value = value.min(a.cycles as f64);
        }
        Ok(value.max(1.0))
    }
}

/// Cycles for one kernel invocation of problem size `size` on `tile`.
pub fn kernel_cycles(
    kind: KernelKind,
    size: u64,
    tile: &TileTiming,
    params: &CostParams,
) -> Result<u64> {
    if size == 0 {
        return Err(Error::invalid("kernel size must be > 0"));
    }
    let base = params.base_cycles(kind, size)?;
    let ref_lanes = params.ref_lanes_for(kind.cost_alias()) as f64;
    let sf = params.serial_fraction;
    let scaled = base * (sf + (1.0 - sf) * ref_lanes / tile.lanes as f64);
    Ok(scaled.round().max(1.0) as u64)
}

/// Least-squares fit of `a * N log2 N + b` per kernel. Anchors are kept for
/// exact lookup; the fit only serves sizes in between.
pub fn fit_scaling(anchors: &[CycleAnchor]) -> Result<CostParams> {
    let mut by_kind: BTreeMap<KernelKind, Vec<&CycleAnchor>> = BTreeMap::new();
    for a in anchors {
        if a.cycles == 0 || a.size == 0 {
            return Err(Error::invalid(format!("anchor {a:?} must have size, cycles > 0")));
        }
        by_kind.entry(a.kernel).or_default().push(a);
    }
    if by_kind.is_empty() {
        return Err(Error::InsufficientData("no anchors supplied".into()));
    }

    let mut laws = BTreeMap::new();
    let mut residuals = Vec::new();
    let mut anchor_map = BTreeMap::new();
    for (kind, list) in by_kind {
        if list.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "kernel `{kind}` has {} anchor(s); at least 2 are needed",
                list.len()
            )));
        }
        let m = list.len() as f64;
        let xs: Vec<f64> = list.iter().map(|a| nlogn(a.size)).collect();
        let ys: Vec<f64> = list.iter().map(|a| a.cycles as f64).collect();
        let mx = xs.iter().sum::<f64>() / m;
        let my = ys.iter().sum::<f64>() / m;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::InsufficientData(format!(
                "kernel `{kind}` anchors share a single size"
            )));
        }
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let a = sxy / sxx;
        let b = my - a * mx;
        let law = ScalingLaw { a, b, fitted: true };
        for anchor in &list {
            residuals.push(FitResidual {
                kernel: kind,
                size: anchor.size,
                measured: anchor.cycles,
                predicted: law.eval(anchor.size),
            });
            anchor_map.insert((kind, anchor.size), **anchor);
        }
        laws.insert(kind, law);
    }
    let ref_lanes = anchor_map
        .values()
        .next()
        .map(|a| a.ref_lanes)
        .unwrap_or(DEFAULT_REF_LANES);
    Ok(CostParams {
        laws,
        anchors: anchor_map,
        residuals,
        serial_fraction: DEFAULT_SERIAL_FRACTION,
        ref_lanes,
    })
}

/// Parses `kernel,size,cycles,ref_lanes` lines; `#` starts a comment.
pub fn parse_anchors(text: &str) -> Result<Vec<CycleAnchor>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: idx + 1, msg };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(parse_err(format!("expected 4 fields, found {}", fields.len())));
        }
        let kernel = fields[0]
            .parse::<KernelKind>()
            .map_err(|e| parse_err(e.to_string()))?;
        let num = |i: usize| {
            fields[i]
                .parse::<u64>()
                .map_err(|e| parse_err(format!("field {}: {e}", i + 1)))
        };
        let ref_lanes = num(3)?;
        out.push(CycleAnchor {
            kernel,
            size: num(1)?,
            cycles: num(2)?,
            ref_lanes: u32::try_from(ref_lanes).map_err(|e| parse_err(e.to_string()))?,
        });
    }
    Ok(out)
}

pub fn format_anchors(anchors: &[CycleAnchor]) -> String {
    let mut s = String::from("# kernel,size,cycles,ref_lanes\n");
    for a in anchors {
        s.push_str(&format!("{},{},{},{}\n", a.kernel, a.size, a.cycles, a.ref_lanes));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> TileTiming {
        TileTiming::reference(64)
    }

    #[test]
    fn fft_anchors_exact() {
        let p = CostParams::calibrated();
        let t = reference();
        assert_eq!(kernel_cycles(KernelKind::Fft, 128, &t, &p).unwrap(), 251);
        assert_eq!(kernel_cycles(KernelKind::Fft, 512, &t, &p).unwrap(), 1122);
        assert_eq!(kernel_cycles(KernelKind::Fft, 2048, &t, &p).unwrap(), 5073);
    }

    #[test]
    fn fft_256_from_fit() {
        // Least-squares through (896, 251), (4608, 1122), (22528, 5073) in
        // (N log2 N, cycles): a = 0.2221397, b = 72.99341; 256 -> 527.94.
        let p = CostParams::calibrated();
        let law = p.laws[&KernelKind::Fft];
        assert!((law.a - 0.222_139_689).abs() < 1e-6);
        assert!((law.b - 72.993_408).abs() < 1e-3);
        assert_eq!(kernel_cycles(KernelKind::Fft, 256, &reference(), &p).unwrap(), 528);
    }

    #[test]
    fn fft_fit_residuals_under_ten_percent() {
        let p = CostParams::calibrated();
        let fft: Vec<_> = p.residuals.iter().filter(|r| r.kernel == KernelKind::Fft).collect();
        assert_eq!(fft.len(), 3);
        for r in fft {
            assert!(r.relative().abs() < 0.10, "{r:?}");
        }
    }

    #[test]
    fn bp_anchor_derivation() {
        let a = bp_anchor_from_throughput(0.53, 1024, 64).unwrap();
        assert_eq!(a.cycles, 30_189);
        let b = bp_anchor_from_throughput(0.54, 512, 64).unwrap();
        assert_eq!(b.cycles, 14_815);
        let doubled = bp_anchor_from_throughput(0.54, 512, 128).unwrap();
        assert!((doubled.cycles as f64 - 14_815.0 / 2.0).abs() <= 1.0);
        assert!(bp_anchor_from_throughput(0.0, 512, 64).is_err());
    }

    #[test]
    fn dma_cost() {
        let t = DmaTiming::default();
        assert_eq!(dma_cycles(0, &t), 20);
        assert_eq!(dma_cycles(16, &t), 21);
        assert_eq!(dma_cycles(1000, &t), 83);
    }

    #[test]
    fn fit_needs_two_anchors() {
        let one = [CycleAnchor {
            kernel: KernelKind::Fft,
            size: 128,
            cycles: 251,
            ref_lanes: 64,
        }];
        assert!(matches!(fit_scaling(&one), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn exact_line_has_zero_residual() {
        let anchors: Vec<_> = [64u64, 256, 1024]
            .iter()
            .map(|&n| CycleAnchor {
                kernel: KernelKind::Scramble,
                size: n,
                cycles: (2.0 * nlogn(n) + 10.0) as u64,
                ref_lanes: 64,
            })
            .collect();
        let p = fit_scaling(&anchors).unwrap();
        for r in &p.residuals {
            assert!(r.relative().abs() < 1e-12);
        }
    }

    #[test]
    fn lane_scaling() {
        let p = CostParams::calibrated();
        let base = p.base_cycles(KernelKind::Fft, 1024).unwrap();
        let l = kernel_cycles(KernelKind::Fft, 1024, &TileTiming::large(), &p).unwrap();
        let s = kernel_cycles(KernelKind::Fft, 1024, &TileTiming::small(), &p).unwrap();
        assert!(l < s);
        assert!(l as f64 >= p.serial_fraction * base);
        let wide = kernel_cycles(KernelKind::Fft, 1024, &TileTiming::reference(4096), &p).unwrap();
        assert!(wide as f64 >= (p.serial_fraction * base).floor());
    }

    #[test]
    fn unknown_kernel_and_zero_size() {
        assert!("nope".parse::<KernelKind>().is_err());
        let p = fit_scaling(&[
            CycleAnchor {
                kernel: KernelKind::Fft,
                size: 128,
                cycles: 251,
                ref_lanes: 64,
            },
            CycleAnchor {
                kernel: KernelKind::Fft,
                size: 512,
                cycles: 1122,
                ref_lanes: 64,
            },
        ])
        .unwrap();
        assert!(kernel_cycles(KernelKind::Scramble, 64, &reference(), &p).is_err());
        assert!(kernel_cycles(KernelKind::Fft, 0, &reference(), &p).is_err());
    }

    #[test]
    fn anchor_file_round_trip() {
        let anchors = parse_anchors(DEFAULT_ANCHORS).unwrap();
        assert_eq!(parse_anchors(&format_anchors(&anchors)).unwrap(), anchors);
        assert!(matches!(
            parse_anchors("fft,128,251\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
