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


use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wbpsim::config::{ExperimentConfig, Grid};
use wbpsim::machine::TraceWriter;
use wbpsim::report::{self, CsvRow};
use wbpsim::workload::ExperimentOptions;
use wbpsim::Error;

/// Peak throughput reported for 5 clusters of 9 tiles, in Mbps.
const REFERENCE_PEAK_MBPS: f64 = 288.0;
const REFERENCE_CLUSTER_RATIO: f64 = 1.23;

#[derive(Parser)]
#[command(name = "wbpsim", version, about = "Hierarchical dataflow manycore simulator for baseband workloads")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and write one CSV row.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Write the event trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Force a tile port fault (test hook).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Run the cluster x tile grid.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// `CLUSTERS x TILES`, e.g. `4,5 x 3..9`.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Feature ablation on the configured system and its flat counterpart.
    Ablation {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fit an anchor file and report the model at each anchor.
    Calibrate {
        anchors: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    /// Abort on protocol violations.
    #[arg(long, overrides_with = "lenient")]
    strict: bool,
    /// Count protocol violations and keep going.
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    no_multithreading: bool,
    #[arg(long)]
    no_lazy_deletion: bool,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if self.strict {
            cfg.run.strict = true;
        }
        if self.lenient {
            cfg.run.strict = false;
        }
        if self.no_multithreading {
            cfg.run.features.multithreading = false;
        }
        if self.no_lazy_deletion {
            cfg.run.features.lazy_deletion = false;
        }
        if let Some(o) = &self.out {
            cfg.run.out = Some(o.clone());
        }
    }
}

fn load(path: &Path, common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(path).map_err(|e| match e {
        Error::Parse { line, msg } => Error::InvalidArgument(format!("{}: line {line}: {msg}", path.display())),
        other => other,
    })?;
    common.apply(&mut cfg);
    Ok(cfg)
}

fn echo(cfg: &ExperimentConfig) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "# effective configuration");
    for line in cfg.effective().lines() {
        let _ = writeln!(err, "# {line}");
    }
}

fn emit(rows: &[CsvRow], out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => report::emit_csv(rows, p),
        None => report::write_csv(rows, std::io::stdout().lock()),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Run {
            config,
            common,
            trace,
            inject_fault,
        } => {
            let mut cfg = load(&config, &common)?;
            if let Some(t) = trace {
                cfg.run.trace = Some(t);
            }
            echo(&cfg);
            let mut opts = ExperimentOptions {
                verify: cfg.link.noiseless(),
                inject_fault,
                ..ExperimentOptions::default()
            };
            if let Some(t) = &cfg.run.trace {
                let f = std::fs::File::create(t).map_err(|e| Error::Io {
                    path: t.clone(),
                    source: e,
                })?;
                opts.trace = Some(TraceWriter::new(Box::new(std::io::BufWriter::new(f))));
            }
            let (row, rep) = report::run_once(&cfg, cfg.run.cost()?, opts)?;
            if rep.metrics.protocol_violations > 0 {
                eprintln!("warning: {} protocol violation(s)", rep.metrics.protocol_violations);
            }
            emit(&[row], cfg.run.out.as_deref())
        }
        Cmd::Sweep { config, common, grid } => {
            let mut cfg = load(&config, &common)?;
            if let Some(g) = grid {
                cfg.run.grid = Grid::parse(&g)?;
            }
            echo(&cfg);
            let summary = report::sweep(&cfg, report::worker_count())?;
            emit(&summary.rows(), cfg.run.out.as_deref())?;
            if let Some(r) = summary.mean_ratio(4, 5) {
                eprintln!("mean throughput 5 / 4 clusters: {r:.3} (reference {REFERENCE_CLUSTER_RATIO})");
            }
            if let Some(p) = summary.peak() {
                let dev = (p.row.throughput_mbps - REFERENCE_PEAK_MBPS) / REFERENCE_PEAK_MBPS;
                eprintln!(
                    "peak {:.2} Mbps at {}C{}T ({:+.1}% from {REFERENCE_PEAK_MBPS} Mbps)",
                    p.row.throughput_mbps,
                    p.clusters,
                    p.tiles,
                    dev * 100.0
                );
            }
            for (a, b, drop) in summary.monotonicity_violations() {
                eprintln!("throughput drops {drop:.3} Mbps from {}C{}T to {}C{}T", a.0, a.1, b.0, b.1);
            }
            Ok(())
        }
        Cmd::Ablation { config, common } => {
            let cfg = load(&config, &common)?;
            echo(&cfg);
            let rows = report::ablation(&cfg)?;
            emit(&report::ablation_csv_rows(&rows), cfg.run.out.as_deref())?;
            eprintln!("{:<8} {:>12} {:>12} {:>7}", "variant", "flat Mbps", "hier Mbps", "ratio");
            for r in &rows {
                eprintln!(
                    "{:<8} {:>12.2} {:>12.2} {:>7.2}",
                    r.variant,
                    r.flat.throughput_mbps,
                    r.hierarchical.throughput_mbps,
                    r.ratio()
                );
            }
            Ok(())
        }
        Cmd::Calibrate { anchors, out } => {
            let text = std::fs::read_to_string(&anchors).map_err(|e| Error::Io {
                path: anchors.clone(),
                source: e,
            })?;
            let (params, lines) = report::calibrate(&text)?;
            for (kind, law) in &params.laws {
                if law.fitted {
                    eprintln!("{kind}: cycles = {:.6} N log2 N + {:.3}", law.a, law.b);
                }
            }
            match out {
                Some(p) => {
                    let f = std::fs::File::create(&p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
                    report::write_calibration(&lines, f)
                }
                None => report::write_calibration(&lines, std::io::stdout().lock()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Fidelity(_) => 2,
                Error::ProtocolViolation(_) => 3,
                _ => 1,
            })
        }
    }
}
