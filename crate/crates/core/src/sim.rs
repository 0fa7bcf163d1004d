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

//! Event-driven simulation of a clustered machine running DAG threads.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use crate::cost::{kernel_cycles, CostParams, DmaTiming, KernelKind, SchedulerTiming};
use crate::dag::{DagId, DagInstance, Endpoint, Payload, TaskIdx, Token, ValidDag};
use crate::error::{Error, Result};
use crate::machine::{
    ClusterConfig, ClusterState, Cycle, DmaEngine, EventKind, EventQueue, Processor, RegionId, SectionKind,
    TraceDigest, TraceRecord, TraceWriter,
};
use crate::sched::{
    effective_attr, has_room_for, on_task_complete, task_scan, thread_schedule, CodeSource, Decision, DeploymentTable, Placement,
    SchedulerFeatures, TaskOutput, ThreadDescriptor, ThreadId, ThreadStatus,
};

/// Bytes per load indication record.
pub const LOAD_INDICATION_BYTES: u64 = 16;

#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub clusters: Vec<ClusterConfig>,
    /// Separate main scheduler and main DMA. When false the system is one
    /// flat cluster whose single scheduler also places threads.
    pub hierarchical: bool,
    pub main_dma: DmaTiming,
    pub sched: SchedulerTiming,
    pub features: SchedulerFeatures,
    /// Protocol violations abort the run.
    pub strict: bool,
    pub check_invariants: bool,
}

impl SystemConfig {
    pub fn hierarchical(clusters: usize, large: usize, small: usize) -> Self {
        SystemConfig {
            clusters: vec![ClusterConfig::with_mix(large, small); clusters],
            hierarchical: true,
            main_dma: DmaTiming::default(),
            sched: SchedulerTiming::default(),
            features: SchedulerFeatures::default(),
            strict: true,
            check_invariants: true,
        }
    }

    pub fn flat(large: usize, small: usize) -> Self {
        SystemConfig {
            hierarchical: false,
            ..Self::hierarchical(1, large, small)
        }
    }

    pub fn tile_count(&self) -> usize {
        self.clusters.iter().map(|c| c.tiles.len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters.is_empty() {
            return Err(Error::invalid("system needs at least one cluster"));
        }
        if !self.hierarchical && self.clusters.len() != 1 {
            return Err(Error::invalid("a flat system has exactly one cluster"));
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.tiles.is_empty() {
                return Err(Error::invalid(format!("cluster {i} has no tiles")));
            }
            if c.max_threads == 0 {
                return Err(Error::invalid("max_threads must be positive"));
            }
            c.dma.validate()?;
            c.large_timing.validate()?;
            c.small_timing.validate()?;
        }
        self.main_dma.validate()
    }
}

/// One unit of kernel work performed by a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkItem {
    pub kind: KernelKind,
    pub size: u64,
    pub count: u64,
}

#[derive(Debug, Clone, Default)]
pub struct Execution {
    pub output: TaskOutput,
    pub work: Vec<WorkItem>,
}

#[derive(Debug, Clone, Copy)]
pub struct ThreadContext {
    pub tid: ThreadId,
    pub arrival: Cycle,
}

/// Computes what a task produces. Called once per dispatched task.
pub trait TaskExecutor {
    fn execute(&self, ctx: &ThreadContext, dag: &ValidDag, task: TaskIdx, inputs: &[Option<Token>]) -> Result<Execution>;
}

/// Produces placeholder tokens sized after each task's kernel. Dismissal
/// producers report `keep` members (all of the group when `None`).
#[derive(Debug, Clone, Default)]
pub struct SyntheticExecutor {
    pub keep: Option<usize>,
}

impl TaskExecutor for SyntheticExecutor {
    fn execute(&self, _ctx: &ThreadContext, dag: &ValidDag, task: TaskIdx, _inputs: &[Option<Token>]) -> Result<Execution> {
        let spec = &dag.tasks()[task];
        let outs = &dag.topology.outputs[task];
        let rule = dag.topology.producer_rule[task].map(|r| &dag.dag.dismissal_rules()[r]);
        let keep = rule.map(|r| self.keep.unwrap_or(r.max_count).min(r.max_count));
        let outputs = outs
            .iter()
            .map(|&e| {
                let dropped = match (rule, dag.edges()[e].dst) {
                    (Some(r), Endpoint::Task(d)) => r.group.iter().position(|&g| g == d).is_some_and(|j| j >= keep.unwrap_or(0)),
                    _ => false,
                };
                (!dropped).then(|| Payload::Bits(vec![0; spec.kernel.size as usize]))
            })
            .collect();
        Ok(Execution {
            output: TaskOutput {
                outputs,
                result: outs.is_empty().then_some(Payload::Scalar(0)),
                ret: keep.map(|k| k as i64),
            },
            work: vec![WorkItem {
                kind: spec.kernel.kind,
                size: spec.kernel.size,
                count: 1,
            }],
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Metrics {
    pub dag_transfers: u64,
    pub dag_bytes: u64,
    pub data_transfers: u64,
    pub data_bytes: u64,
    pub result_bytes: u64,
    pub evictions: u64,
    pub residency_hits: u64,
    pub backpressure_events: u64,
    pub retrieval_stalls: u64,
    pub deployment_failures: u64,
    pub dispatched_tasks: u64,
    pub dismissed_tasks: u64,
    /// Executed tasks by kernel kind.
    pub executed: BTreeMap<KernelKind, u64>,
    pub attribute_violations: u64,
    pub protocol_violations: u64,
    pub max_threads_seen: Vec<usize>,
    /// `[cluster][tile]` cycles spent executing kernels.
    pub tile_busy: Vec<Vec<u64>>,
    pub tile_tasks: Vec<Vec<u64>>,
    pub main_sched_busy: u64,
    pub l2_sched_busy: Vec<u64>,
    pub dma_bytes: u64,
    pub decisions: Vec<Decision>,
    /// `(cluster, dag)` pairs that received a DAG transfer, in order.
    pub dag_deployments: Vec<(usize, DagId)>,
}

impl Metrics {
    pub fn total_tile_busy(&self) -> u64 {
        self.tile_busy.iter().flatten().sum()
    }
}

#[derive(Debug, Clone)]
pub struct ThreadSummary {
    pub tid: ThreadId,
    pub dag_id: DagId,
    pub cluster: Option<usize>,
    pub arrival: Cycle,
    pub installed: Option<Cycle>,
    pub completed: Option<Cycle>,
    pub outputs: Vec<Payload>,
    pub dismissed: usize,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub makespan: Cycle,
    pub threads: Vec<ThreadSummary>,
    pub metrics: Metrics,
    pub digest: String,
    pub events: u64,
}

impl SimOutcome {
    /// Mean fraction of the makespan that tiles spent executing.
    pub fn tile_utilization(&self) -> f64 {
        let tiles: usize = self.metrics.tile_busy.iter().map(Vec::len).sum();
        if self.makespan == 0 || tiles == 0 {
            return 0.0;
        }
        self.metrics.total_tile_busy() as f64 / (self.makespan as f64 * tiles as f64)
    }
}

#[derive(Debug, Clone, Copy)]
enum SimEvent {
    ThreadArrival { thread: ThreadId },
    MainTick,
    MainDmaIn { thread: ThreadId },
    L2Tick { cluster: usize },
    DeployDone { cluster: usize, tile: usize },
    TileDone { cluster: usize, tile: usize },
    Interrupt { cluster: usize, tile: usize },
    RetrieveDone { cluster: usize, tile: usize },
    MainDmaOut { thread: ThreadId },
}

impl SimEvent {
    fn kind(&self) -> EventKind {
        match self {
            SimEvent::ThreadArrival { .. } => EventKind::ThreadArrival,
            SimEvent::MainTick | SimEvent::L2Tick { .. } => EventKind::SchedTick,
            SimEvent::MainDmaIn { .. }
            | SimEvent::DeployDone { .. }
            | SimEvent::RetrieveDone { .. }
            | SimEvent::MainDmaOut { .. } => EventKind::DmaDone,
            SimEvent::TileDone { .. } => EventKind::TileDone,
            SimEvent::Interrupt { .. } => EventKind::Interrupt,
        }
    }
}

struct InFlight {
    thread: ThreadId,
    task: TaskIdx,
    output: TaskOutput,
    cycles: u64,
    running_at: Cycle,
    input_regions: Vec<RegionId>,
    li_region: RegionId,
    bytes_in: u64,
    out_regions: Vec<RegionId>,
}

struct ThreadRuntime {
    desc: ThreadDescriptor,
    placement: Option<Placement>,
    instance: Option<DagInstance>,
    /// COMPUTE_DATA region of each queued token, mirroring the FIFOs.
    token_regions: Vec<VecDeque<RegionId>>,
    held_regions: Vec<RegionId>,
    outputs: Vec<Payload>,
    installed: Option<Cycle>,
    completed: Option<Cycle>,
}

/// Deterministic simulator. Add threads, then [`run`](Simulator::run).
pub struct Simulator<X: TaskExecutor> {
    cfg: SystemConfig,
    cost: Arc<CostParams>,
    executor: X,
    queue: EventQueue<SimEvent>,
    clusters: Vec<ClusterState>,
    main_dma: Option<DmaEngine>,
    procs: Vec<Processor>,
    table: DeploymentTable,
    threads: Vec<ThreadRuntime>,
    residents: Vec<Vec<ThreadId>>,
    in_flight: Vec<Vec<Option<InFlight>>>,
    stalled: Vec<VecDeque<usize>>,
    main_tick_pending: bool,
    /// Non-tick events handled so far; periodic ticks stop when this stalls.
    progress: u64,
    progress_at_last_tick: u64,
    l2_tick_pending: Vec<bool>,
    metrics: Metrics,
    digest: TraceDigest,
    trace: Option<TraceWriter>,
    inject_port_fault: bool,
}

impl<X: TaskExecutor> Simulator<X> {
    pub fn new(cfg: SystemConfig, cost: Arc<CostParams>, executor: X) -> Result<Self> {
        cfg.validate()?;
        let mut cluster_cfgs = cfg.clusters.clone();
        if !cfg.features.multithreading {
            for c in &mut cluster_cfgs {
                c.max_threads = 1;
            }
        }
        let clusters: Vec<_> = cluster_cfgs
            .iter()
            .enumerate()
            .map(|(i, c)| ClusterState::new(i, c))
            .collect();
        let n = clusters.len();
        let metrics = Metrics {
            tile_busy: clusters.iter().map(|c| vec![0; c.tiles.len()]).collect(),
            tile_tasks: clusters.iter().map(|c| vec![0; c.tiles.len()]).collect(),
            l2_sched_busy: vec![0; n],
            max_threads_seen: vec![0; n],
            ..Metrics::default()
        };
        Ok(Simulator {
            main_dma: cfg.hierarchical.then(|| DmaEngine::new(cfg.main_dma)),
            procs: vec![Processor::default(); n + usize::from(cfg.hierarchical)],
            in_flight: clusters
                .iter()
                .map(|c| (0..c.tiles.len()).map(|_| None).collect())
                .collect(),
            residents: vec![Vec::new(); n],
            stalled: vec![VecDeque::new(); n],
            l2_tick_pending: vec![false; n],
            clusters,
            cfg,
            cost,
            executor,
            queue: EventQueue::new(),
            table: DeploymentTable::new(),
            threads: Vec::new(),
            main_tick_pending: false,
            progress: 0,
            progress_at_last_tick: u64::MAX,
            metrics,
            digest: TraceDigest::default(),
            trace: None,
            inject_port_fault: false,
        })
    }

    pub fn set_trace(&mut self, writer: TraceWriter) {
        self.trace = Some(writer);
    }

    /// Test hook: attempt an illegal port flip on the first running tile.
    pub fn inject_port_fault(&mut self) {
        self.inject_port_fault = true;
    }

    pub fn clusters(&self) -> &[ClusterState] {
        &self.clusters
    }

    pub fn table(&self) -> &DeploymentTable {
        &self.table
    }

    /// Queues a thread arriving at `arrival` with one token per external
    /// input edge of `dag`.
    pub fn add_thread(&mut self, arrival: Cycle, dag: Arc<ValidDag>, data: Vec<Token>) -> Result<ThreadId> {
        if data.len() != dag.topology.external_inputs.len() {
            return Err(Error::invalid(format!(
                "thread carries {} tokens for {} external inputs",
                data.len(),
                dag.topology.external_inputs.len()
            )));
        }
        let tid = self.threads.len() as ThreadId;
        let edges = dag.edges().len();
        self.threads.push(ThreadRuntime {
            desc: ThreadDescriptor::new(tid, dag, data, arrival),
            placement: None,
            instance: None,
            token_regions: vec![VecDeque::new(); edges],
            held_regions: Vec::new(),
            outputs: Vec::new(),
            installed: None,
            completed: None,
        });
        self.queue.post(arrival, SimEvent::ThreadArrival { thread: tid })?;
        Ok(tid)
    }

    fn main_proc(&self) -> usize {
        if self.cfg.hierarchical {
            self.clusters.len()
        } else {
            0
        }
    }

    fn main_dma_transfer(&mut self, now: Cycle, bytes: u64) -> Cycle {
        let csr = self.cfg.main_dma.csr_write_cycles;
        self.metrics.dma_bytes += bytes;
        match &mut self.main_dma {
            Some(d) => d.transfer(now + csr, bytes).end,
            None => self.clusters[0].dma.transfer(now + csr, bytes).end,
        }
    }

    fn post(&mut self, time: Cycle, ev: SimEvent) -> Result<()> {
        self.queue.post(time, ev).map(|_| ())
    }

    fn post_main_tick(&mut self, time: Cycle) -> Result<()> {
        if !self.main_tick_pending {
            self.main_tick_pending = true;
            self.post(time, SimEvent::MainTick)?;
        }
        Ok(())
    }

    fn post_l2_tick(&mut self, cluster: usize, time: Cycle) -> Result<()> {
        if !self.l2_tick_pending[cluster] {
            self.l2_tick_pending[cluster] = true;
            self.post(time, SimEvent::L2Tick { cluster })?;
        }
        Ok(())
    }

    fn violation(&mut self, err: Error) -> Result<()> {
        self.metrics.protocol_violations += 1;
        if self.cfg.strict {
            Err(err)
        } else {
            log::warn!("{err}");
            Ok(())
        }
    }

    fn record(&mut self, time: Cycle, seq: u64, ev: &SimEvent, bytes: u64) -> Result<()> {
        let (cluster, tile, thread, task) = match *ev {
            SimEvent::ThreadArrival { thread } | SimEvent::MainDmaIn { thread } | SimEvent::MainDmaOut { thread } => {
                let c = self.threads[thread as usize].placement.as_ref().map(|p| p.cluster);
                (c, None, Some(thread), None)
            }
            SimEvent::MainTick => (None, None, None, None),
            SimEvent::L2Tick { cluster } => (Some(cluster), None, None, None),
            SimEvent::DeployDone { cluster, tile }
            | SimEvent::TileDone { cluster, tile }
            | SimEvent::Interrupt { cluster, tile }
            | SimEvent::RetrieveDone { cluster, tile } => {
                let f = self.in_flight[cluster][tile].as_ref();
                (Some(cluster), Some(tile), f.map(|f| f.thread), f.map(|f| f.task))
            }
        };
        let rec = TraceRecord {
            t: time,
            seq,
            kind: ev.kind(),
            cluster,
            tile,
            thread,
            task,
            bytes,
        };
        self.digest.record(&rec);
        if let Some(w) = &mut self.trace {
            w.write(&rec).map_err(|e| Error::io("trace", e))?;
        }
        Ok(())
    }

    fn event_bytes(&self, ev: &SimEvent) -> u64 {
        match *ev {
            SimEvent::MainDmaIn { thread } => self.threads[thread as usize]
                .placement
                .as_ref()
                .map_or(0, |p| p.transfer_bytes),
            SimEvent::DeployDone { cluster, tile } => self.in_flight[cluster][tile].as_ref().map_or(0, |f| f.bytes_in),
            SimEvent::RetrieveDone { cluster, tile } | SimEvent::TileDone { cluster, tile } => self.in_flight[cluster]
                [tile]
                .as_ref()
                .map_or(0, |f| f.output.byte_size()),
            _ => 0,
        }
    }

    /// Runs to completion and returns the outcome.
    pub fn run(mut self) -> Result<SimOutcome> {
        let mut last_time = 0;
        while let Some(ev) = self.queue.pop() {
            if ev.time < last_time {
                return Err(Error::ProtocolViolation("event causality violated".into()));
            }
            last_time = ev.time;
            if !matches!(ev.event, SimEvent::MainTick | SimEvent::L2Tick { .. }) {
                self.progress += 1;
            }
            let bytes = self.event_bytes(&ev.event);
            self.handle(ev.time, ev.event)?;
            self.record(ev.time, ev.seq, &ev.event, bytes)?;
            if self.cfg.check_invariants {
                self.check_invariants()?;
            }
        }
        if let Some(w) = &mut self.trace {
            w.flush().map_err(|e| Error::io("trace", e))?;
        }
        let unfinished = self.threads.iter().filter(|t| t.completed.is_none()).count();
        if unfinished > 0 {
            let usage: Vec<String> = self
                .clusters
                .iter()
                .map(|c| {
                    let s: Vec<String> = SectionKind::ALL
                        .iter()
                        .map(|&k| format!("{k}={}/{}", c.section(k).used(), c.section(k).capacity()))
                        .collect();
                    format!("cluster {}: {} threads, {}", c.cluster_id, c.thread_manager.active().len(), s.join(" "))
                })
                .collect();
            return Err(Error::ProtocolViolation(format!(
                "simulation stalled at cycle {} with {unfinished} unfinished threads ({})",
                self.queue.now(),
                usage.join("; ")
            )));
        }
        self.metrics.main_sched_busy = if self.cfg.hierarchical {
            self.procs[self.main_proc()].busy_cycles
        } else {
            0
        };
        for (i, p) in self.procs.iter().take(self.clusters.len()).enumerate() {
            self.metrics.l2_sched_busy[i] = p.busy_cycles;
        }
        for (i, c) in self.clusters.iter().enumerate() {
            self.metrics.tile_tasks[i] = c.tiles.iter().map(|t| t.tasks_run).collect();
            self.metrics.dma_bytes += c.dma.bytes();
        }
        let makespan = self.threads.iter().filter_map(|t| t.completed).max().unwrap_or(0);
        let threads = self
            .threads
            .into_iter()
            .map(|t| ThreadSummary {
                tid: t.desc.tid,
                dag_id: t.desc.dag.id,
                cluster: t.placement.as_ref().map(|p| p.cluster),
                arrival: t.desc.arrival_time,
                installed: t.installed,
                completed: t.completed,
                dismissed: t.instance.as_ref().map_or(0, |i| i.dismissed_count()),
                outputs: t.outputs,
            })
            .collect();
        Ok(SimOutcome {
            makespan,
            threads,
            metrics: self.metrics,
            digest: self.digest.hex(),
            events: self.queue.dispatched(),
        })
    }

    fn check_invariants(&mut self) -> Result<()> {
        for i in 0..self.clusters.len() {
            let c = &self.clusters[i];
            let (spm_ok, tiles_ok) = (c.spm_consistent(), c.tiles_consistent());
            let active = c.thread_manager.active().len();
            if !spm_ok {
                self.violation(Error::ProtocolViolation(format!("scratchpad overlap in cluster {i}")))?;
            }
            if !tiles_ok {
                self.violation(Error::ProtocolViolation(format!("port state violated in cluster {i}")))?;
            }
            self.metrics.max_threads_seen[i] = self.metrics.max_threads_seen[i].max(active);
        }
        Ok(())
    }

    fn handle(&mut self, now: Cycle, ev: SimEvent) -> Result<()> {
        match ev {
            SimEvent::ThreadArrival { .. } => self.post_main_tick(now),
            SimEvent::MainTick => self.on_main_tick(now),
            SimEvent::MainDmaIn { thread } => self.on_install(now, thread),
            SimEvent::L2Tick { cluster } => self.on_l2_tick(now, cluster),
            SimEvent::DeployDone { cluster, tile } => self.on_deploy_done(now, cluster, tile),
            SimEvent::TileDone { cluster, tile } => self.on_tile_done(now, cluster, tile),
            SimEvent::Interrupt { cluster, tile } => self.on_interrupt(now, cluster, tile),
            SimEvent::RetrieveDone { cluster, tile } => self.on_retrieve_done(now, cluster, tile),
            SimEvent::MainDmaOut { thread } => self.on_thread_complete(now, thread),
        }
    }

    fn on_main_tick(&mut self, now: Cycle) -> Result<()> {
        let mp = self.main_proc();
        if self.procs[mp].is_busy(now) {
            let at = self.procs[mp].busy_until;
            return self.post(at, SimEvent::MainTick);
        }
        self.main_tick_pending = false;
        let mut ready: Vec<&mut ThreadDescriptor> = self
            .threads
            .iter_mut()
            .filter(|t| t.desc.status == ThreadStatus::Ready && t.desc.arrival_time <= now)
            .map(|t| &mut t.desc)
            .collect();
        if ready.is_empty() {
            return Ok(());
        }
        let out = thread_schedule(&mut ready, &mut self.clusters, &mut self.table, self.cfg.features, now)?;
        let cost = self.cfg.sched.thread_eval_cycles * out.evaluated as u64;
        let issue = self.procs[mp].occupy(now, cost);
        self.metrics.evictions += out.evictions.len() as u64;
        for d in &out.log {
            if matches!(d, Decision::Hit { .. }) {
                self.metrics.residency_hits += 1;
            }
        }
        let waiting = out.log.iter().any(|d| matches!(d, Decision::Wait { .. }));
        self.metrics.decisions.extend(out.log);
        for p in out.placements {
            let th = &self.threads[p.tid as usize];
            let data_bytes = th.desc.data_bytes();
            if p.code.ships_dag() {
                self.metrics.dag_transfers += 1;
                self.metrics.dag_bytes += p.transfer_bytes - data_bytes;
                self.metrics.dag_deployments.push((p.cluster, th.desc.dag.id));
            }
            self.metrics.data_transfers += 1;
            self.metrics.data_bytes += data_bytes;
            let done = self.main_dma_transfer(issue, p.transfer_bytes);
            let tid = p.tid;
            self.threads[tid as usize].placement = Some(p);
            self.post(done, SimEvent::MainDmaIn { thread: tid })?;
        }
        let progressed = self.progress != self.progress_at_last_tick || !self.queue.is_empty();
        if waiting && progressed {
            self.progress_at_last_tick = self.progress;
            self.post_main_tick(issue + self.cfg.sched.tick_interval)?;
        }
        Ok(())
    }

    fn on_install(&mut self, now: Cycle, tid: ThreadId) -> Result<()> {
        let th = &mut self.threads[tid as usize];
        let p = th.placement.clone().expect("placed thread");
        th.desc.advance(ThreadStatus::Running)?;
        th.installed = Some(now);
        let mut inst = DagInstance::new(th.desc.dag.clone());
        let ext = th.desc.dag.topology.external_inputs.clone();
        for ((e, tok), region) in ext.iter().zip(th.desc.data.drain(..)).zip(p.data_regions.iter()) {
            inst.push_token(*e, tok)
                .map_err(|b| Error::ProtocolViolation(format!("install: {b}")))?;
            th.token_regions[*e].push_back(*region);
        }
        th.instance = Some(inst);
        self.residents[p.cluster].push(tid);
        self.post_l2_tick(p.cluster, now)
    }

    fn on_l2_tick(&mut self, now: Cycle, c: usize) -> Result<()> {
        if self.procs[c].is_busy(now) {
            let at = self.procs[c].busy_until;
            return self.post(at, SimEvent::L2Tick { cluster: c });
        }
        self.l2_tick_pending[c] = false;
        let csr = self.clusters[c].csr_cycles();

        // Stalled retrievals first.
        let mut retry = std::mem::take(&mut self.stalled[c]);
        while let Some(tile) = retry.pop_front() {
            let issue = self.procs[c].occupy(now, csr);
            if !self.try_retrieve(c, tile, issue)? {
                self.stalled[c].push_back(tile);
            }
        }

        let residents = self.residents[c].clone();
        let mut insts: Vec<(ThreadId, &mut DagInstance)> = Vec::with_capacity(residents.len());
        {
            let mut by_id: BTreeMap<ThreadId, &mut DagInstance> = self
                .threads
                .iter_mut()
                .filter(|t| residents.contains(&t.desc.tid))
                .map(|t| (t.desc.tid, t.instance.as_mut().expect("installed")))
                .collect();
            for tid in &residents {
                let inst = by_id.remove(tid).expect("resident instance");
                insts.push((*tid, inst));
            }
        }
        let scan = task_scan(&mut insts, &self.clusters[c].tiles)?;
        drop(insts);
        let cost = self.cfg.sched.node_visit_cycles * scan.visits;
        let issue = self.procs[c].occupy(now, cost);

        for li in scan.indications {
            let th = &mut self.threads[li.thread as usize];
            let dag = th.desc.dag.clone();
            let spec = dag.tasks()[li.task].clone();
            let tile_class = self.clusters[c].tiles[li.tile].class;
            if !tile_class.matches(effective_attr(spec.attr, &self.clusters[c].tiles)) {
                self.metrics.attribute_violations += 1;
            }
            let inputs_bytes: u64 = li.inputs.iter().flatten().map(|t| t.byte_size).sum();
            let li_region = match self.clusters[c]
                .section_mut(SectionKind::LoadIndication)
                .alloc(LOAD_INDICATION_BYTES)
            {
                Ok(r) => r,
                Err(_) => {
                    self.metrics.backpressure_events += 1;
                    let th = &mut self.threads[li.thread as usize];
                    th.instance.as_mut().expect("installed").undispatch(li.task, li.inputs)?;
                    continue;
                }
            };
            match self.clusters[c].deploy_to_tile(li.tile, spec.code_bytes, inputs_bytes, issue) {
                Ok(timing) => {
                    let ctx = ThreadContext {
                        tid: li.thread,
                        arrival: self.threads[li.thread as usize].desc.arrival_time,
                    };
                    let exec = self.executor.execute(&ctx, &dag, li.task, &li.inputs)?;
                    let timing_t = self.clusters[c].tiles[li.tile].timing;
                    let mut cycles = 0;
                    for w in &exec.work {
                        if w.count > 0 && w.size > 0 {
                            cycles += w.count * kernel_cycles(w.kind, w.size, &timing_t, &self.cost)?;
                        }
                    }
                    *self.metrics.executed.entry(spec.kernel.kind).or_default() += 1;
                    let th = &mut self.threads[li.thread as usize];
                    let mut input_regions = Vec::new();
                    for (&e, tok) in dag.topology.inputs[li.task].iter().zip(&li.inputs) {
                        if tok.is_some() {
                            input_regions.push(th.token_regions[e].pop_front().expect("token region"));
                        }
                    }
                    self.metrics.dispatched_tasks += 1;
                    self.metrics.dma_bytes += spec.code_bytes + inputs_bytes;
                    self.in_flight[c][li.tile] = Some(InFlight {
                        thread: li.thread,
                        task: li.task,
                        output: exec.output,
                        cycles: cycles.max(1),
                        running_at: timing.running_at,
                        input_regions,
                        li_region,
                        bytes_in: spec.code_bytes + inputs_bytes,
                        out_regions: Vec::new(),
                    });
                    self.post(timing.dma.end, SimEvent::DeployDone { cluster: c, tile: li.tile })?;
                }
                Err(Error::DeploymentFailure { .. }) => {
                    self.metrics.deployment_failures += 1;
                    self.clusters[c].section_mut(SectionKind::LoadIndication).free(li_region)?;
                    th.instance.as_mut().expect("installed").undispatch(li.task, li.inputs)?;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    fn on_deploy_done(&mut self, now: Cycle, c: usize, tile: usize) -> Result<()> {
        self.clusters[c].begin_run(tile)?;
        if self.inject_port_fault {
            self.inject_port_fault = false;
            let csr = self.clusters[c].csr_cycles();
            if let Err(e) = self.clusters[c].tiles[tile].set_port_direction(crate::machine::PortDirection::Bus, csr) {
                self.violation(e)?;
            }
        }
        let f = self.in_flight[c][tile].as_mut().expect("in-flight task");
        let (thread, task, cycles, running_at) = (f.thread, f.task, f.cycles, f.running_at);
        let li = f.li_region;
        let inputs = std::mem::take(&mut f.input_regions);
        self.clusters[c].section_mut(SectionKind::LoadIndication).free(li)?;
        for r in inputs {
            self.clusters[c].section_mut(SectionKind::ComputeData).free(r)?;
        }
        self.threads[thread as usize]
            .instance
            .as_mut()
            .expect("installed")
            .set_running(task)?;
        self.metrics.tile_busy[c][tile] += cycles;
        self.clusters[c].tiles[tile].busy_cycles += cycles;
        if !self.stalled[c].is_empty() {
            self.post_l2_tick(c, now)?;
        }
        self.post(running_at.max(now) + cycles, SimEvent::TileDone { cluster: c, tile })
    }

    fn on_tile_done(&mut self, now: Cycle, c: usize, tile: usize) -> Result<()> {
        let n = self.in_flight[c][tile].as_ref().expect("in-flight task").output.return_tokens();
        let irq = self.clusters[c].complete_from_tile(tile, n, now)?;
        self.post(irq, SimEvent::Interrupt { cluster: c, tile })
    }

    fn on_interrupt(&mut self, now: Cycle, c: usize, tile: usize) -> Result<()> {
        let csr = self.clusters[c].csr_cycles();
        let issue = self.procs[c].occupy(now, csr);
        if !self.try_retrieve(c, tile, issue)? {
            self.stalled[c].push_back(tile);
        }
        Ok(())
    }

    /// Books the retrieval DMA if COMPUTE_DATA and the output FIFOs have
    /// room; otherwise counts a stall.
    fn try_retrieve(&mut self, c: usize, tile: usize, issue: Cycle) -> Result<bool> {
        let f = self.in_flight[c][tile].as_ref().expect("in-flight task");
        let th = &self.threads[f.thread as usize];
        let inst = th.instance.as_ref().expect("installed");
        if !has_room_for(inst, f.task, &f.output) {
            self.metrics.backpressure_events += 1;
            return Ok(false);
        }
        let sizes: Vec<u64> = f
            .output
            .outputs
            .iter()
            .flatten()
            .chain(f.output.result.iter())
            .map(Payload::byte_size)
            .collect();
        let cd = self.clusters[c].section_mut(SectionKind::ComputeData);
        if !cd.can_fit_all(&sizes) {
            self.metrics.retrieval_stalls += 1;
            return Ok(false);
        }
        let regions = sizes.iter().map(|&s| cd.alloc(s)).collect::<Result<Vec<_>>>()?;
        let bytes: u64 = sizes.iter().sum();
        let booking = self.clusters[c].retrieve(tile, bytes, issue)?;
        self.metrics.dma_bytes += bytes;
        self.in_flight[c][tile].as_mut().expect("in-flight").out_regions = regions;
        self.post(booking.end, SimEvent::RetrieveDone { cluster: c, tile })?;
        Ok(true)
    }

    fn on_retrieve_done(&mut self, now: Cycle, c: usize, tile: usize) -> Result<()> {
        let f = self.in_flight[c][tile].take().expect("in-flight task");
        self.clusters[c].release_tile(tile, now);
        let th = &mut self.threads[f.thread as usize];
        let inst = th.instance.as_mut().expect("installed");
        let done = on_task_complete(inst, f.task, &f.output)?;
        let mut regions = f.out_regions.into_iter();
        let mut freed = Vec::new();
        for (e, stored) in &done.pushed {
            let r = regions.next().expect("output region");
            if *stored {
                th.token_regions[*e].push_back(r);
            } else {
                freed.push(r);
            }
        }
        if let Some(p) = f.output.result.clone() {
            th.held_regions.push(regions.next().expect("result region"));
            th.outputs.push(p);
        }
        for (e, tok) in inst.take_external_outputs() {
            th.held_regions.extend(th.token_regions[e].pop_front());
            th.outputs.push(tok.payload);
        }
        let dag = th.desc.dag.clone();
        for &v in &done.dismissed {
            for &e in &dag.topology.inputs[v] {
                freed.extend(th.token_regions[e].drain(..));
            }
        }
        self.metrics.dismissed_tasks += done.dismissed.len() as u64;
        let complete = inst.is_complete();
        let result_bytes: u64 = th.outputs.iter().map(Payload::byte_size).sum();
        for r in freed {
            self.clusters[c].section_mut(SectionKind::ComputeData).free(r)?;
        }
        if complete {
            self.metrics.result_bytes += result_bytes;
            let done_at = self.main_dma_transfer(now, result_bytes);
            self.post(done_at, SimEvent::MainDmaOut { thread: f.thread })?;
        }
        self.post_l2_tick(c, now)
    }

    fn on_thread_complete(&mut self, now: Cycle, tid: ThreadId) -> Result<()> {
        let th = &mut self.threads[tid as usize];
        let p = th.placement.clone().expect("placed thread");
        let c = p.cluster;
        let mut to_free: Vec<RegionId> = std::mem::take(&mut th.held_regions);
        for q in th.token_regions.iter_mut() {
            to_free.extend(q.drain(..));
        }
        th.desc.advance(ThreadStatus::Done)?;
        th.completed = Some(now);
        let dag_id = th.desc.dag.id;
        let cluster = &mut self.clusters[c];
        for r in to_free {
            cluster.section_mut(SectionKind::ComputeData).free(r)?;
        }
        cluster.section_mut(SectionKind::FifoLists).free(p.fifo_region)?;
        match p.code {
            CodeSource::Owned(r) => {
                cluster.section_mut(SectionKind::TaskCodePool).free(r)?;
            }
            CodeSource::Registered(_) | CodeSource::Resident => self.table.detach(dag_id, c, now)?,
        }
        if !self.clusters[c].thread_manager.release(tid) {
            return Err(Error::ProtocolViolation(format!("thread {tid} not active on cluster {c}")));
        }
        self.residents[c].retain(|&t| t != tid);
        if !self.stalled[c].is_empty() {
            self.post_l2_tick(c, now)?;
        }
        self.post_main_tick(now)
    }
}
