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


//! Experiment drivers (single run, sweep, ablation, calibration) and CSV
//! output.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, RunConfig};
use crate::cost::{kernel_cycles, parse_anchors, CostParams, TileTiming};
use crate::error::{Error, Result};
use crate::machine::TileClass;
use crate::workload::{run_experiment, ExperimentOptions, ThroughputReport};

/// Environment variable capping sweep parallelism.
pub const WORKERS_ENV: &str = "WBPSIM_WORKERS";

pub const CSV_HEADER: [&str; 17] = [
    "config_id",
    "clusters",
    "tiles",
    "l_tiles",
    "s_tiles",
    "slots",
    "seed",
    "mt",
    "ld",
    "throughput_mbps",
    "tile_util",
    "dma_bytes",
    "dag_transfers",
    "evictions",
    "residency_hits",
    "dismissed_tasks",
    "digest",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub config_id: String,
    pub clusters: usize,
    pub tiles: usize,
    pub l_tiles: usize,
    pub s_tiles: usize,
    pub slots: usize,
    pub seed: u64,
    pub mt: bool,
    pub ld: bool,
    pub throughput_mbps: f64,
    pub tile_util: f64,
    pub dma_bytes: u64,
    pub dag_transfers: u64,
    pub evictions: u64,
    pub residency_hits: u64,
    pub dismissed_tasks: u64,
    pub digest: String,
}

impl CsvRow {
    pub fn new(config_id: impl Into<String>, run: &RunConfig, report: &ThroughputReport) -> Self {
        let l = run.mix.iter().filter(|&&c| c == TileClass::Large).count();
        let m = &report.metrics;
        CsvRow {
            config_id: config_id.into(),
            clusters: run.clusters,
            tiles: run.mix.len(),
            l_tiles: l,
            s_tiles: run.mix.len() - l,
            slots: run.slots,
            seed: run.seed,
            mt: run.features.multithreading,
            ld: run.features.lazy_deletion,
            // Rounded so that rows are stable text.
            throughput_mbps: round_to(report.throughput_mbps, 6),
            tile_util: round_to(report.mean_utilization, 6),
            dma_bytes: m.dma_bytes,
            dag_transfers: m.dag_transfers,
            evictions: m.evictions,
            residency_hits: m.residency_hits,
            dismissed_tasks: m.dismissed_tasks,
            digest: report.digest.clone(),
        }
    }
}

fn round_to(v: f64, digits: i32) -> f64 {
    let p = 10f64.powi(digits);
    (v * p).round() / p
}

/// Writes the header and `rows` as RFC 4180 CSV.
pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn emit_csv(rows: &[CsvRow], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(rows, std::io::BufWriter::new(f))
}

pub fn read_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::invalid(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Identifier such as `3C4T-2L2S`, or `12T-6L6S` for a flat system.
pub fn config_id(run: &RunConfig) -> String {
    let l = run.mix.iter().filter(|&&c| c == TileClass::Large).count();
    let s = run.mix.len() - l;
    if run.hierarchical {
        format!("{}C{}T-{l}L{s}S", run.clusters, run.mix.len())
    } else {
        format!("{}T-{l}L{s}S", run.mix.len())
    }
}

/// Runs `cfg` once and returns its CSV row alongside the full report.
pub fn run_once(cfg: &ExperimentConfig, cost: Arc<CostParams>, opts: ExperimentOptions) -> Result<(CsvRow, ThroughputReport)> {
    let report = run_experiment(
        &cfg.run.system(),
        &cfg.link,
        &cfg.tdd,
        cfg.run.slots,
        cfg.run.seed,
        cost,
        opts,
    )?;
    let row = CsvRow::new(config_id(&cfg.run), &cfg.run, &report);
    Ok((row, report))
}

fn verify_opts(cfg: &ExperimentConfig) -> ExperimentOptions {
    ExperimentOptions {
        verify: cfg.link.noiseless(),
        ..ExperimentOptions::default()
    }
}

/// Worker count: `WBPSIM_WORKERS` if set and positive, else all cores.
pub fn worker_count() -> usize {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(cores)
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub clusters: usize,
    pub tiles: usize,
    pub row: CsvRow,
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub points: Vec<SweepPoint>,
}

impl SweepSummary {
    pub fn rows(&self) -> Vec<CsvRow> {
        self.points.iter().map(|p| p.row.clone()).collect()
    }

    pub fn throughput(&self, clusters: usize, tiles: usize) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.clusters == clusters && p.tiles == tiles)
            .map(|p| p.row.throughput_mbps)
    }

    /// Adjacent grid pairs `(from, to, drop)` where throughput decreased
    /// along either axis.
    pub fn monotonicity_violations(&self) -> Vec<((usize, usize), (usize, usize), f64)> {
        let mut out = Vec::new();
        let mut cs: Vec<usize> = self.points.iter().map(|p| p.clusters).collect();
        let mut ts: Vec<usize> = self.points.iter().map(|p| p.tiles).collect();
        cs.sort_unstable();
        cs.dedup();
        ts.sort_unstable();
        ts.dedup();
        let mut check = |a: (usize, usize), b: (usize, usize)| {
            if let (Some(x), Some(y)) = (self.throughput(a.0, a.1), self.throughput(b.0, b.1)) {
                if y < x {
                    out.push((a, b, x - y));
                }
            }
        };
        for &c in &cs {
            for w in ts.windows(2) {
                check((c, w[0]), (c, w[1]));
            }
        }
        for &t in &ts {
            for w in cs.windows(2) {
                check((w[0], t), (w[1], t));
            }
        }
        out
    }

    /// Mean over tiles of `throughput(hi, t) / throughput(lo, t)`.
    pub fn cluster_ratio(&self, lo: usize, hi: usize) -> Option<f64> {
        let ratios: Vec<f64> = self
            .points
            .iter()
            .filter(|p| p.clusters == lo)
            .filter_map(|p| Some(self.throughput(hi, p.tiles)? / p.row.throughput_mbps))
            .collect();
        (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64)
    }

    /// Ratio of the mean throughput at `hi` clusters to that at `lo`.
    pub fn mean_ratio(&self, lo: usize, hi: usize) -> Option<f64> {
        let mean = |c: usize| {
            let v: Vec<f64> = self
                .points
                .iter()
                .filter(|p| p.clusters == c)
                .map(|p| p.row.throughput_mbps)
                .collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        Some(mean(hi)? / mean(lo)?)
    }

    pub fn peak(&self) -> Option<&SweepPoint> {
        self.points
            .iter()
            .max_by(|a, b| a.row.throughput_mbps.total_cmp(&b.row.throughput_mbps))
    }
}

/// Runs every grid point of `cfg.run.grid` with the default mix for each
/// tile count. Rows come back in grid order regardless of worker count.
pub fn sweep(cfg: &ExperimentConfig, workers: usize) -> Result<SweepSummary> {
    let points = cfg.run.grid.points();
    if points.is_empty() {
        return Err(Error::invalid("empty sweep grid"));
    }
    let cost = cfg.run.cost()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    let points: Vec<SweepPoint> = pool.install(|| {
        points
            .par_iter()
            .map(|&(c, t)| {
                let point = ExperimentConfig {
                    run: RunConfig {
                        hierarchical: true,
                        ..cfg.run.with_shape(c, t)
                    },
                    ..cfg.clone()
                };
                let (row, _) = run_once(&point, cost.clone(), verify_opts(&point))?;
                Ok(SweepPoint { clusters: c, tiles: t, row })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepSummary { points })
}

/// Feature combinations of the ablation, in row order.
pub const ABLATION_VARIANTS: [(&str, bool, bool); 3] = [
    ("base", false, false),
    ("mt", true, false),
    ("mt+ld", true, true),
];

#[derive(Debug, Clone)]
pub struct AblationRow {
    pub variant: &'static str,
    pub flat: CsvRow,
    pub hierarchical: CsvRow,
}

impl AblationRow {
    pub fn ratio(&self) -> f64 {
        self.hierarchical.throughput_mbps / self.flat.throughput_mbps
    }
}

/// The three feature variants on the configured hierarchical system and on
/// its flat counterpart with the same tiles.
pub fn ablation(cfg: &ExperimentConfig) -> Result<Vec<AblationRow>> {
    let cost = cfg.run.cost()?;
    let hier = RunConfig {
        hierarchical: true,
        ..cfg.run.clone()
    };
    let flat = hier.flattened();
    let mut rows = Vec::new();
    for (name, mt, ld) in ABLATION_VARIANTS {
        let one = |run: &RunConfig| -> Result<CsvRow> {
            let mut run = run.clone();
            run.features.multithreading = mt;
            run.features.lazy_deletion = ld;
            let point = ExperimentConfig { run, ..cfg.clone() };
            let (mut row, _) = run_once(&point, cost.clone(), verify_opts(&point))?;
            row.config_id = format!("{}/{name}", row.config_id);
            Ok(row)
        };
        rows.push(AblationRow {
            variant: name,
            flat: one(&flat)?,
            hierarchical: one(&hier)?,
        });
    }
    Ok(rows)
}

pub fn ablation_csv_rows(rows: &[AblationRow]) -> Vec<CsvRow> {
    let mut flat: Vec<CsvRow> = rows.iter().map(|r| r.flat.clone()).collect();
    flat.extend(rows.iter().map(|r| r.hierarchical.clone()));
    flat
}

/// One line of a calibration report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationLine {
    pub kernel: String,
    pub size: u64,
    pub ref_lanes: u32,
    pub anchor_cycles: u64,
    /// What the cost model returns at the anchor's reference lane count.
    pub model_cycles: u64,
    /// The fitted `a N log2 N + b` law alone.
    pub fit_cycles: f64,
    pub fit_rel_error: f64,
}

/// Fits an anchor file and checks the model against every anchor.
pub fn calibrate(anchors_text: &str) -> Result<(CostParams, Vec<CalibrationLine>)> {
    let anchors = parse_anchors(anchors_text)?;
    let params = CostParams::from_anchors(&anchors)?;
    let mut lines = Vec::new();
    for a in &anchors {
        let law = params.laws[&a.kernel];
        let fit = law.eval(a.size);
        lines.push(CalibrationLine {
            kernel: a.kernel.to_string(),
            size: a.size,
            ref_lanes: a.ref_lanes,
            anchor_cycles: a.cycles,
            model_cycles: kernel_cycles(a.kernel, a.size, &TileTiming::reference(a.ref_lanes), &params)?,
            fit_cycles: round_to(fit, 3),
            fit_rel_error: round_to((fit - a.cycles as f64) / a.cycles as f64, 6),
        });
    }
    Ok((params, lines))
}

pub fn write_calibration<W: Write>(lines: &[CalibrationLine], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for l in lines {
        w.serialize(l)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
