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


//! Sectioned `key = value` experiment configuration.
//!
//! ```text
//! [system]
//! clusters = 3
//! mix = L,L,S,S
//!
//! [run]
//! slots = 16
//! ```
//!
//! Sections are `[system]`, `[link]`, `[tdd]`, `[cost]` and `[run]`. `#`
//! starts a comment. Omitted keys take their defaults; unknown keys are
//! rejected with the line they appear on.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::cost::{CostParams, DmaTiming, SchedulerTiming, TileTiming, DEFAULT_REF_LANES, DEFAULT_SERIAL_FRACTION};
use crate::error::{Error, Result};
use crate::machine::{ClusterConfig, SectionSizes, TileClass};
use crate::sched::SchedulerFeatures;
use crate::signal::OfdmConfig;
use crate::sim::SystemConfig;
use crate::workload::{LinkConfig, TddPattern};

/// Cluster and tile-count axes of a sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub clusters: Vec<usize>,
    pub tiles: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            clusters: vec![4, 5],
            tiles: (3..=9).collect(),
        }
    }
}

impl Grid {
    /// Parses `CLUSTERS x TILES`, each side a comma list of numbers or
    /// `a..b` inclusive ranges, e.g. `4,5 x 3..9`.
    pub fn parse(s: &str) -> Result<Self> {
        let (c, t) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::invalid(format!("grid `{s}` is not of the form CLUSTERS x TILES")))?;
        let grid = Grid {
            clusters: parse_axis(c)?,
            tiles: parse_axis(t)?,
        };
        if grid.clusters.contains(&0) || grid.tiles.contains(&0) {
            return Err(Error::invalid(format!("grid `{s}` contains a zero")));
        }
        Ok(grid)
    }

    pub fn points(&self) -> Vec<(usize, usize)> {
        self.clusters
            .iter()
            .flat_map(|&c| self.tiles.iter().map(move |&t| (c, t)))
            .collect()
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let j = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{} x {}", j(&self.clusters), j(&self.tiles))
    }
}

fn parse_axis(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (parse_num::<usize>(a.trim())?, parse_num::<usize>(b.trim())?);
            if a > b {
                return Err(Error::invalid(format!("empty range `{part}`")));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_num(part)?);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("empty grid axis"));
    }
    Ok(out)
}

/// Default mix for `t` tiles: `ceil(t/2)` large then `floor(t/2)` small.
pub fn default_mix(t: usize) -> Vec<TileClass> {
    let mut v = vec![TileClass::Large; t.div_ceil(2)];
    v.extend(vec![TileClass::Small; t / 2]);
    v
}

/// Parses `L,L,S,S`, `LLSS` or `2L2S`.
pub fn parse_mix(s: &str) -> Result<Vec<TileClass>> {
    let mut out = Vec::new();
    let mut count = String::new();
    for c in s.chars().filter(|c| !c.is_whitespace() && *c != ',') {
        if c.is_ascii_digit() {
            count.push(c);
            continue;
        }
        let class = match c.to_ascii_uppercase() {
            'L' => TileClass::Large,
            'S' => TileClass::Small,
            other => return Err(Error::invalid(format!("unknown tile class `{other}`"))),
        };
        let n = if count.is_empty() { 1 } else { parse_num(&count)? };
        count.clear();
        out.extend(std::iter::repeat(class).take(n));
    }
    if !count.is_empty() {
        return Err(Error::invalid(format!("dangling count in mix `{s}`")));
    }
    Ok(out)
}

fn mix_string(mix: &[TileClass]) -> String {
    mix.iter().map(|c| c.letter().to_string()).collect::<Vec<_>>().join(",")
}

/// Everything the harness needs besides the link and TDD settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub clusters: usize,
    pub mix: Vec<TileClass>,
    /// False models one flat cluster with a single scheduler.
    pub hierarchical: bool,
    pub max_threads: usize,
    pub tspm_large: u64,
    pub tspm_small: u64,
    pub sections: SectionSizes,
    pub large: TileTiming,
    pub small: TileTiming,
    pub dma: DmaTiming,
    pub sched: SchedulerTiming,
    /// Anchor file; `None` uses the shipped anchors.
    pub anchors: Option<PathBuf>,
    pub serial_fraction: f64,
    pub ref_lanes: u32,
    pub features: SchedulerFeatures,
    /// Protocol violations abort the run.
    pub strict: bool,
    pub slots: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub grid: Grid,
}

impl Default for RunConfig {
    fn default() -> Self {
        let c = ClusterConfig::with_mix(2, 2);
        RunConfig {
            clusters: 3,
            mix: c.tiles,
            hierarchical: true,
            max_threads: c.max_threads,
            tspm_large: c.tspm_large,
            tspm_small: c.tspm_small,
            sections: c.sections,
            large: c.large_timing,
            small: c.small_timing,
            dma: c.dma,
            sched: SchedulerTiming::default(),
            anchors: None,
            serial_fraction: DEFAULT_SERIAL_FRACTION,
            ref_lanes: DEFAULT_REF_LANES,
            features: SchedulerFeatures::default(),
            strict: true,
            slots: 24,
            seed: 1,
            out: None,
            trace: None,
            grid: Grid::default(),
        }
    }
}

impl RunConfig {
    pub fn tiles_per_cluster(&self) -> usize {
        self.mix.len()
    }

    pub fn cluster_config(&self) -> ClusterConfig {
        ClusterConfig {
            tiles: self.mix.clone(),
            large_timing: self.large,
            small_timing: self.small,
            tspm_large: self.tspm_large,
            tspm_small: self.tspm_small,
            sections: self.sections,
            max_threads: self.max_threads,
            dma: self.dma,
        }
    }

    pub fn system(&self) -> SystemConfig {
        let mut sys = SystemConfig::hierarchical(self.clusters, 0, 0);
        sys.clusters = vec![self.cluster_config(); self.clusters];
        sys.hierarchical = self.hierarchical;
        sys.main_dma = self.dma;
        sys.sched = self.sched;
        sys.features = self.features;
        sys.strict = self.strict;
        sys
    }

    /// Same settings with `clusters` clusters of the default `tiles` mix.
    pub fn with_shape(&self, clusters: usize, tiles: usize) -> RunConfig {
        RunConfig {
            clusters,
            mix: default_mix(tiles),
            ..self.clone()
        }
    }

    /// The single-level counterpart: one flat cluster holding every tile.
    pub fn flattened(&self) -> RunConfig {
        let mut mix: Vec<TileClass> = (0..self.clusters).flat_map(|_| self.mix.iter().copied()).collect();
        mix.sort_by_key(|c| *c != TileClass::Large);
        RunConfig {
            clusters: 1,
            mix,
            hierarchical: false,
            ..self.clone()
        }
    }

    pub fn cost(&self) -> Result<Arc<CostParams>> {
        let base = match &self.anchors {
            Some(p) => CostParams::load(p)?,
            None => CostParams::calibrated(),
        };
        let mut params = base.with_serial_fraction(self.serial_fraction)?;
        if self.ref_lanes != DEFAULT_REF_LANES {
            params = params.with_ref_lanes(self.ref_lanes);
        }
        Ok(Arc::new(params))
    }
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub run: RunConfig,
    pub link: LinkConfig,
    pub tdd: TddPattern,
}

const SECTIONS: [&str; 5] = ["system", "link", "tdd", "cost", "run"];

struct Entry {
    line: usize,
    value: String,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<(String, String), Entry> = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| perr(line, format!("malformed section header `{body}`")))?
                    .trim()
                    .to_ascii_lowercase();
                if !SECTIONS.contains(&name.as_str()) {
                    return Err(perr(line, format!("unknown section [{name}]")));
                }
                section = Some(name);
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| perr(line, format!("expected key = value, got `{body}`")))?;
            let sec = section
                .clone()
                .ok_or_else(|| perr(line, "key outside of any section"))?;
            let key = k.trim().to_ascii_lowercase();
            if !known_key(&sec, &key) {
                return Err(perr(line, format!("unknown key `{key}` in [{sec}]")));
            }
            if let Some(prev) = entries.get(&(sec.clone(), key.clone())) {
                return Err(perr(line, format!("duplicate key `{key}` (first set on line {})", prev.line)));
            }
            entries.insert(
                (sec, key),
                Entry {
                    line,
                    value: v.trim().to_string(),
                },
            );
        }
        let mut p = Parser { entries };
        let cfg = p.build()?;
        Ok(cfg)
    }

    /// The full effective configuration, defaults included, in the same
    /// format [`ExperimentConfig::parse`] reads.
    pub fn effective(&self) -> String {
        let r = &self.run;
        let l = &self.link;
        let mut s = String::new();
        let b = |v: bool| if v { "true" } else { "false" };
        let _ = writeln!(s, "[system]");
        let _ = writeln!(s, "clusters = {}", r.clusters);
        let _ = writeln!(s, "tiles = {}", r.tiles_per_cluster());
        let _ = writeln!(s, "mix = {}", mix_string(&r.mix));
        let _ = writeln!(s, "hierarchical = {}", b(r.hierarchical));
        let _ = writeln!(s, "max_threads = {}", r.max_threads);
        let _ = writeln!(s, "tspm_large = {}", r.tspm_large);
        let _ = writeln!(s, "tspm_small = {}", r.tspm_small);
        let _ = writeln!(s, "task_code_pool = {}", r.sections.task_code_pool);
        let _ = writeln!(s, "fifo_lists = {}", r.sections.fifo_lists);
        let _ = writeln!(s, "load_indication = {}", r.sections.load_indication);
        let _ = writeln!(s, "compute_data = {}", r.sections.compute_data);
        let _ = writeln!(s, "large_lanes = {}", r.large.lanes);
        let _ = writeln!(s, "large_vrfs = {}", r.large.vrf_count);
        let _ = writeln!(s, "small_lanes = {}", r.small.lanes);
        let _ = writeln!(s, "small_vrfs = {}", r.small.vrf_count);
        let _ = writeln!(s, "dma_setup = {}", r.dma.setup_cycles);
        let _ = writeln!(s, "dma_bytes_per_cycle = {}", r.dma.bytes_per_cycle);
        let _ = writeln!(s, "csr_write = {}", r.dma.csr_write_cycles);
        let _ = writeln!(s, "\n[link]");
        let _ = writeln!(s, "users = {}", l.users_per_slot);
        let _ = writeln!(s, "block_len = {}", l.block_len);
        let _ = writeln!(s, "info_len = {}", l.info_len);
        let _ = writeln!(s, "rate_match_e = {}", l.rate_match_e);
        let _ = writeln!(s, "c_init = {:#x}", l.c_init);
        let _ = writeln!(s, "pilot_c_init = {:#x}", l.pilot_c_init);
        let _ = writeln!(s, "subcarriers = {}", l.ofdm.n_subcarriers);
        let _ = writeln!(s, "cp_len = {}", l.ofdm.cp_len);
        let _ = writeln!(s, "bp_iters = {}", l.bp_iters);
        let _ = writeln!(s, "snr_db = {}", l.snr_db);
        let _ = writeln!(s, "\n[tdd]");
        let _ = writeln!(s, "pattern = {}", self.tdd);
        let _ = writeln!(s, "slot_duration = {}", self.tdd.slot_duration);
        let _ = writeln!(s, "\n[cost]");
        match &r.anchors {
            Some(p) => {
                let _ = writeln!(s, "anchors = {}", p.display());
            }
            None => {
                let _ = writeln!(s, "# anchors = <shipped>");
            }
        }
        let _ = writeln!(s, "serial_fraction = {}", r.serial_fraction);
        let _ = writeln!(s, "ref_lanes = {}", r.ref_lanes);
        let _ = writeln!(s, "thread_eval = {}", r.sched.thread_eval_cycles);
        let _ = writeln!(s, "node_visit = {}", r.sched.node_visit_cycles);
        let _ = writeln!(s, "tick_interval = {}", r.sched.tick_interval);
        let _ = writeln!(s, "\n[run]");
        let _ = writeln!(s, "slots = {}", r.slots);
        let _ = writeln!(s, "seed = {}", r.seed);
        let _ = writeln!(s, "multithreading = {}", b(r.features.multithreading));
        let _ = writeln!(s, "lazy_deletion = {}", b(r.features.lazy_deletion));
        let _ = writeln!(s, "strict_algorithm = {}", b(r.features.strict_algorithm));
        let _ = writeln!(s, "strict = {}", b(r.strict));
        let _ = writeln!(s, "grid = {}", r.grid);
        if let Some(p) = &r.out {
            let _ = writeln!(s, "out = {}", p.display());
        }
        if let Some(p) = &r.trace {
            let _ = writeln!(s, "trace = {}", p.display());
        }
        s
    }
}

fn known_key(section: &str, key: &str) -> bool {
    let keys: &[&str] = match section {
        "system" => &[
            "clusters",
            "tiles",
            "mix",
            "hierarchical",
            "max_threads",
            "tspm_large",
            "tspm_small",
            "task_code_pool",
            "fifo_lists",
            "load_indication",
            "compute_data",
            "large_lanes",
            "large_vrfs",
            "small_lanes",
            "small_vrfs",
            "dma_setup",
            "dma_bytes_per_cycle",
            "csr_write",
        ],
        "link" => &[
            "users",
            "block_len",
            "info_len",
            "rate_match_e",
            "c_init",
            "pilot_c_init",
            "subcarriers",
            "cp_len",
            "bp_iters",
            "snr_db",
        ],
        "tdd" => &["pattern", "slot_duration"],
        "cost" => &[
            "anchors",
            "serial_fraction",
            "ref_lanes",
            "thread_eval",
            "node_visit",
            "tick_interval",
        ],
        "run" => &[
            "slots",
            "seed",
            "multithreading",
            "lazy_deletion",
            "strict_algorithm",
            "strict",
            "grid",
            "out",
            "trace",
        ],
        _ => &[],
    };
    keys.contains(&key)
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    let t = s.replace('_', "");
    let parsed = if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
            .ok()
            .and_then(|v| v.to_string().parse::<T>().ok())
    } else {
        t.parse::<T>().ok()
    };
    parsed.ok_or_else(|| Error::invalid(format!("`{s}` is not a valid number")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::invalid(format!("`{s}` is not a boolean"))),
    }
}

struct Parser {
    entries: BTreeMap<(String, String), Entry>,
}

impl Parser {
    fn line(&self, sec: &str, key: &str) -> usize {
        self.entries
            .get(&(sec.to_string(), key.to_string()))
            .map_or(0, |e| e.line)
    }

    /// Applies `f` to the value of `sec.key` if present.
    fn get<T>(&mut self, sec: &str, key: &str, f: impl Fn(&str) -> Result<T>) -> Result<Option<T>> {
        match self.entries.get(&(sec.to_string(), key.to_string())) {
            None => Ok(None),
            Some(e) => f(&e.value).map(Some).map_err(|err| {
                let msg = match err {
                    Error::InvalidArgument(m) => m,
                    other => other.to_string(),
                };
                perr(e.line, format!("{key}: {msg}"))
            }),
        }
    }

    fn num<T: std::str::FromStr>(&mut self, sec: &str, key: &str, into: &mut T) -> Result<()> {
        if let Some(v) = self.get(sec, key, parse_num::<T>)? {
            *into = v;
        }
        Ok(())
    }

    fn flag(&mut self, sec: &str, key: &str, into: &mut bool) -> Result<()> {
        if let Some(v) = self.get(sec, key, parse_bool)? {
            *into = v;
        }
        Ok(())
    }

    fn positive(&self, sec: &str, key: &str, v: u64) -> Result<()> {
        if v == 0 {
            return Err(perr(self.line(sec, key), format!("{key} must be > 0")));
        }
        Ok(())
    }

    fn build(&mut self) -> Result<ExperimentConfig> {
        let mut r = RunConfig::default();
        let mut link = LinkConfig::default();
        let mut tdd = TddPattern::default();

        self.num("system", "clusters", &mut r.clusters)?;
        let tiles = self.get("system", "tiles", |s| parse_num::<usize>(s))?;
        let mix = self.get("system", "mix", parse_mix)?;
        r.mix = match (tiles, mix) {
            (_, Some(m)) => m,
            (Some(t), None) => default_mix(t),
            (None, None) => r.mix,
        };
        if let Some(t) = tiles {
            if t != r.mix.len() {
                return Err(perr(
                    self.line("system", "tiles"),
                    format!("tiles = {t} but mix lists {} tiles", r.mix.len()),
                ));
            }
        }
        self.flag("system", "hierarchical", &mut r.hierarchical)?;
        self.num("system", "max_threads", &mut r.max_threads)?;
        self.num("system", "tspm_large", &mut r.tspm_large)?;
        self.num("system", "tspm_small", &mut r.tspm_small)?;
        self.num("system", "task_code_pool", &mut r.sections.task_code_pool)?;
        self.num("system", "fifo_lists", &mut r.sections.fifo_lists)?;
        self.num("system", "load_indication", &mut r.sections.load_indication)?;
        self.num("system", "compute_data", &mut r.sections.compute_data)?;
        self.num("system", "large_lanes", &mut r.large.lanes)?;
        self.num("system", "large_vrfs", &mut r.large.vrf_count)?;
        self.num("system", "small_lanes", &mut r.small.lanes)?;
        self.num("system", "small_vrfs", &mut r.small.vrf_count)?;
        self.num("system", "dma_setup", &mut r.dma.setup_cycles)?;
        self.num("system", "dma_bytes_per_cycle", &mut r.dma.bytes_per_cycle)?;
        self.num("system", "csr_write", &mut r.dma.csr_write_cycles)?;

        if r.clusters == 0 {
            return Err(perr(self.line("system", "clusters"), "clusters must be >= 1"));
        }
        if r.mix.is_empty() {
            return Err(perr(self.line("system", "mix").max(self.line("system", "tiles")), "tiles must be >= 1"));
        }
        if !r.hierarchical && r.clusters != 1 {
            return Err(perr(
                self.line("system", "hierarchical"),
                "a flat system has exactly one cluster",
            ));
        }
        for (key, v) in [
            ("max_threads", r.max_threads as u64),
            ("tspm_large", r.tspm_large),
            ("tspm_small", r.tspm_small),
            ("task_code_pool", r.sections.task_code_pool),
            ("fifo_lists", r.sections.fifo_lists),
            ("load_indication", r.sections.load_indication),
            ("compute_data", r.sections.compute_data),
            ("dma_setup", r.dma.setup_cycles),
            ("dma_bytes_per_cycle", r.dma.bytes_per_cycle),
            ("csr_write", r.dma.csr_write_cycles),
        ] {
            self.positive("system", key, v)?;
        }
        for (key, t) in [("large_lanes", r.large), ("small_lanes", r.small)] {
            t.validate()
                .map_err(|e| perr(self.line("system", key), e.to_string()))?;
        }

        self.num("link", "users", &mut link.users_per_slot)?;
        self.num("link", "block_len", &mut link.block_len)?;
        self.num("link", "info_len", &mut link.info_len)?;
        self.num("link", "rate_match_e", &mut link.rate_match_e)?;
        self.num("link", "c_init", &mut link.c_init)?;
        self.num("link", "pilot_c_init", &mut link.pilot_c_init)?;
        let mut ofdm = OfdmConfig::default();
        self.num("link", "subcarriers", &mut ofdm.n_subcarriers)?;
        self.num("link", "cp_len", &mut ofdm.cp_len)?;
        link.ofdm = ofdm;
        self.num("link", "bp_iters", &mut link.bp_iters)?;
        if let Some(v) = self.get("link", "snr_db", |s| match s.to_ascii_lowercase().as_str() {
            "inf" | "noiseless" => Ok(f64::INFINITY),
            _ => parse_num::<f64>(s),
        })? {
            link.snr_db = v;
        }
        if let Err(e) = link.validate() {
            let line = ["users", "block_len", "info_len", "rate_match_e", "subcarriers", "cp_len", "bp_iters", "snr_db", "c_init"]
                .iter()
                .map(|k| self.line("link", k))
                .max()
                .unwrap_or(0);
            return Err(perr(line, e.to_string()));
        }

        if let Some(p) = self.get("tdd", "pattern", |s| s.parse::<TddPattern>())? {
            tdd.slots = p.slots;
        }
        self.num("tdd", "slot_duration", &mut tdd.slot_duration)?;
        self.positive("tdd", "slot_duration", tdd.slot_duration)?;

        if let Some(p) = self.get("cost", "anchors", |s| Ok(PathBuf::from(s)))? {
            r.anchors = Some(p);
        }
        self.num("cost", "serial_fraction", &mut r.serial_fraction)?;
        if !(0.0..=1.0).contains(&r.serial_fraction) {
            return Err(perr(self.line("cost", "serial_fraction"), "serial_fraction must be within [0, 1]"));
        }
        self.num("cost", "ref_lanes", &mut r.ref_lanes)?;
        self.positive("cost", "ref_lanes", r.ref_lanes as u64)?;
        self.num("cost", "thread_eval", &mut r.sched.thread_eval_cycles)?;
        self.num("cost", "node_visit", &mut r.sched.node_visit_cycles)?;
        self.num("cost", "tick_interval", &mut r.sched.tick_interval)?;
        self.positive("cost", "tick_interval", r.sched.tick_interval)?;

        self.num("run", "slots", &mut r.slots)?;
        self.positive("run", "slots", r.slots as u64)?;
        self.num("run", "seed", &mut r.seed)?;
        self.flag("run", "multithreading", &mut r.features.multithreading)?;
        self.flag("run", "lazy_deletion", &mut r.features.lazy_deletion)?;
        self.flag("run", "strict_algorithm", &mut r.features.strict_algorithm)?;
        self.flag("run", "strict", &mut r.strict)?;
        if let Some(g) = self.get("run", "grid", Grid::parse)? {
            r.grid = g;
        }
        r.out = self.get("run", "out", |s| Ok(PathBuf::from(s)))?;
        r.trace = self.get("run", "trace", |s| Ok(PathBuf::from(s)))?;

        Ok(ExperimentConfig { run: r, link, tdd })
    }
}
