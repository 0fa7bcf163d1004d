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

//! Thread-level scheduling on the main scheduler.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::dag::write_dag;
use crate::dag::{DagId, Payload, Token, ValidDag};
use crate::error::{Error, Result};
use crate::machine::{ClusterState, Cycle, RegionId, SectionKind};

pub type ThreadId = u64;

/// Bytes of FIFO descriptor state per DAG edge.
pub const FIFO_DESCRIPTOR_BYTES: u64 = 16;
/// Fixed payload header size.
pub const PAYLOAD_HEADER_BYTES: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ThreadStatus {
    Ready,
    Registered,
    Running,
    Done,
}

#[derive(Debug, Clone)]
pub struct ThreadDescriptor {
    pub tid: ThreadId,
    pub dag: Arc<ValidDag>,
    pub data: Vec<Token>,
    pub status: ThreadStatus,
    pub arrival_time: Cycle,
}

impl ThreadDescriptor {
    pub fn new(tid: ThreadId, dag: Arc<ValidDag>, data: Vec<Token>, arrival_time: Cycle) -> Self {
        ThreadDescriptor {
            tid,
            dag,
            data,
            status: ThreadStatus::Ready,
            arrival_time,
        }
    }

    pub fn data_sizes(&self) -> Vec<u64> {
        self.data.iter().map(|t| t.byte_size).collect()
    }

    pub fn data_bytes(&self) -> u64 {
        self.data.iter().map(|t| t.byte_size).sum()
    }

    pub fn fifo_bytes(&self) -> u64 {
        FIFO_DESCRIPTOR_BYTES * self.dag.edges().len().max(1) as u64
    }

    /// Moves the status forward; going backwards is a contract violation.
    pub fn advance(&mut self, to: ThreadStatus) -> Result<()> {
        if to <= self.status {
            return Err(Error::ProtocolViolation(format!(
                "thread {} status {:?} -> {to:?}",
                self.tid, self.status
            )));
        }
        self.status = to;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    pub cluster: usize,
    pub last_used: Cycle,
    pub code_region: RegionId,
    /// Live threads running this DAG on this cluster.
    pub active: usize,
}

/// Which clusters hold which DAG code, keyed by `(dag, cluster)`.
#[derive(Debug, Clone, Default)]
pub struct DeploymentTable {
    entries: BTreeMap<(DagId, usize), TableEntry>,
}

impl DeploymentTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lowest-numbered cluster holding `dag`, if any.
    pub fn code_deployed(&self, dag: DagId) -> Option<usize> {
        self.resident_clusters(dag).into_iter().next()
    }

    pub fn resident_clusters(&self, dag: DagId) -> Vec<usize> {
        self.entries
            .range((dag, 0)..=(dag, usize::MAX))
            .map(|(&(_, c), _)| c)
            .collect()
    }

    pub fn entry(&self, dag: DagId, cluster: usize) -> Option<&TableEntry> {
        self.entries.get(&(dag, cluster))
    }

    pub fn entries(&self) -> impl Iterator<Item = (DagId, &TableEntry)> {
        self.entries.iter().map(|(&(d, _), e)| (d, e))
    }

    pub fn register(&mut self, dag: DagId, cluster: usize, code_region: RegionId, now: Cycle) -> Result<()> {
        if self.entries.contains_key(&(dag, cluster)) {
            return Err(Error::ProtocolViolation(format!(
                "DAG {dag} registered twice on cluster {cluster}"
            )));
        }
        self.entries.insert(
            (dag, cluster),
            TableEntry {
                cluster,
                last_used: now,
                code_region,
                active: 1,
            },
        );
        Ok(())
    }

    /// A new thread starts using a resident copy.
    pub fn attach(&mut self, dag: DagId, cluster: usize, now: Cycle) -> Result<()> {
        let e = self.entry_mut(dag, cluster)?;
        e.active += 1;
        e.last_used = e.last_used.max(now);
        Ok(())
    }

    /// A thread using a resident copy finished.
    pub fn detach(&mut self, dag: DagId, cluster: usize, now: Cycle) -> Result<()> {
        let e = self.entry_mut(dag, cluster)?;
        if e.active == 0 {
            return Err(Error::ProtocolViolation(format!("detach from idle entry {dag}@{cluster}")));
        }
        e.active -= 1;
        e.last_used = e.last_used.max(now);
        Ok(())
    }

    fn entry_mut(&mut self, dag: DagId, cluster: usize) -> Result<&mut TableEntry> {
        self.entries
            .get_mut(&(dag, cluster))
            .ok_or_else(|| Error::ProtocolViolation(format!("no table entry for {dag}@{cluster}")))
    }

    pub fn remove(&mut self, dag: DagId, cluster: usize) -> Option<TableEntry> {
        self.entries.remove(&(dag, cluster))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchedulerFeatures {
    pub multithreading: bool,
    pub lazy_deletion: bool,
    /// Literal control flow: no registration on the multi-threading path.
    pub strict_algorithm: bool,
}

impl Default for SchedulerFeatures {
    fn default() -> Self {
        SchedulerFeatures {
            multithreading: true,
            lazy_deletion: true,
            strict_algorithm: false,
        }
    }
}

/// Where a placed thread's DAG code lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeSource {
    /// Already resident; nothing shipped.
    Resident,
    /// Shipped and recorded in the deployment table.
    Registered(RegionId),
    /// Shipped and owned by the thread; freed when it completes.
    Owned(RegionId),
}

impl CodeSource {
    pub fn ships_dag(self) -> bool {
        !matches!(self, CodeSource::Resident)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub tid: ThreadId,
    pub cluster: usize,
    pub code: CodeSource,
    pub data_regions: Vec<RegionId>,
    pub fifo_region: RegionId,
    /// Start address of the data portion within COMPUTE_DATA.
    pub data_addr: u64,
    /// Bytes the main DMA moves for this placement.
    pub transfer_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Hit { tid: ThreadId, cluster: usize },
    MultiThread { tid: ThreadId, cluster: usize, registered: bool },
    Evicted { tid: ThreadId, cluster: usize, evicted: DagId },
    Wait { tid: ThreadId },
}

#[derive(Debug, Clone, Default)]
pub struct ScheduleOutcome {
    /// tID → (cluster, data start address).
    pub aset: BTreeMap<ThreadId, (usize, u64)>,
    pub placements: Vec<Placement>,
    pub log: Vec<Decision>,
    pub evaluated: usize,
    pub evictions: Vec<(usize, DagId)>,
}

/// Regions produced by [`mem_alloc`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub code_region: Option<RegionId>,
    pub data_regions: Vec<RegionId>,
    pub fifo_region: RegionId,
    pub data_addr: u64,
}

/// Slot plus scratchpad headroom for a candidate payload.
pub fn thread_manager_query(cluster: &ClusterState, code_bytes: Option<u64>, data: &[u64], fifo_bytes: u64) -> bool {
    cluster.thread_manager.has_slot() && fits(cluster, code_bytes, data, fifo_bytes, None)
}

fn fits(cluster: &ClusterState, code_bytes: Option<u64>, data: &[u64], fifo_bytes: u64, freed: Option<RegionId>) -> bool {
    let code_ok = match code_bytes {
        Some(b) => cluster
            .section(SectionKind::TaskCodePool)
            .can_fit_all_without(&[b.max(1)], freed),
        None => true,
    };
    code_ok
        && cluster.section(SectionKind::ComputeData).can_fit_all(data)
        && cluster.section(SectionKind::FifoLists).can_fit_all(&[fifo_bytes.max(1)])
}

/// Places the DAG portion (if any) in TASK_CODE_POOL, data in COMPUTE_DATA
/// and FIFO descriptors in FIFO_LISTS. All or nothing.
pub fn mem_alloc(cluster: &mut ClusterState, code_bytes: Option<u64>, data: &[u64], fifo_bytes: u64) -> Result<Allocation> {
    if !fits(cluster, code_bytes, data, fifo_bytes, None) {
        let (section, requested) = if code_bytes.is_some_and(|b| {
            !cluster.section(SectionKind::TaskCodePool).can_fit_all(&[b.max(1)])
        }) {
            (SectionKind::TaskCodePool, code_bytes.unwrap_or(0))
        } else if !cluster.section(SectionKind::ComputeData).can_fit_all(data) {
            (SectionKind::ComputeData, data.iter().sum())
        } else {
            (SectionKind::FifoLists, fifo_bytes)
        };
        return Err(Error::AllocationFailure {
            section: section.to_string(),
            requested,
        });
    }
    let code_region = match code_bytes {
        Some(b) => Some(cluster.section_mut(SectionKind::TaskCodePool).alloc(b.max(1))?),
        None => None,
    };
    let cd = cluster.section_mut(SectionKind::ComputeData);
    let data_regions = data.iter().map(|&s| cd.alloc(s.max(1))).collect::<Result<Vec<_>>>()?;
    let data_addr = data_regions.first().and_then(|&r| cd.offset(r)).unwrap_or(0);
    let fifo_region = cluster.section_mut(SectionKind::FifoLists).alloc(fifo_bytes.max(1))?;
    Ok(Allocation {
        code_region,
        data_regions,
        fifo_region,
        data_addr,
    })
}

/// Picks the eviction victim: the least recently used entry with no live
/// threads whose cluster has a free slot and room for the candidate once the
/// entry is freed. Ties go to the lowest cluster id.
pub fn get_cluster_lru(
    table: &DeploymentTable,
    clusters: &[ClusterState],
    code_bytes: u64,
    data: &[u64],
    fifo_bytes: u64,
) -> Option<(usize, DagId)> {
    table
        .entries()
        .filter(|(_, e)| {
            let c = &clusters[e.cluster];
            e.active == 0
                && c.thread_manager.has_slot()
                && fits(c, Some(code_bytes), data, fifo_bytes, Some(e.code_region))
        })
        .min_by_key(|(_, e)| (e.last_used, e.cluster))
        .map(|(d, e)| (e.cluster, d))
}

fn serialize_dag(dag: &ValidDag) -> Vec<u8> {
    let mut records = write_dag(&dag.dag).into_bytes();
    let len = (records.len() as u64).max(dag.total_code_bytes()) as usize;
    records.resize(len, 0);
    records
}

/// DAG portion size: the code image, or the record table when larger.
pub fn dag_section_bytes(dag: &ValidDag) -> u64 {
    (write_dag(&dag.dag).len() as u64).max(dag.total_code_bytes())
}

/// Size of a packed DAG+data payload.
pub fn packed_size(dag: &ValidDag, data_bytes: u64) -> u64 {
    PAYLOAD_HEADER_BYTES + dag_section_bytes(dag) + data_bytes
}

/// Scratchpad encoding of a token; exactly `byte_size` bytes long.
pub fn token_bytes(token: &Token) -> Vec<u8> {
    let mut out = match &token.payload {
        Payload::Bits(b) => {
            let mut v = vec![0u8; b.len().div_ceil(8)];
            for (i, &bit) in b.iter().enumerate() {
                v[i / 8] |= (bit & 1) << (7 - i % 8);
            }
            v
        }
        Payload::Cplx(c) => c
            .iter()
            .flat_map(|z| [(z.re as f32).to_le_bytes(), (z.im as f32).to_le_bytes()])
            .flatten()
            .collect(),
        Payload::Llr(l) => l.iter().flat_map(|&x| (x as f32).to_le_bytes()).collect(),
        Payload::Scalar(s) => (*s as i32).to_le_bytes().to_vec(),
    };
    if out.is_empty() {
        out.push(0);
    }
    out
}

/// Header + DAG records + data tokens as one contiguous buffer.
pub fn mem_pack(data: &[Token], dag: &ValidDag) -> Vec<u8> {
    let dag_bytes = serialize_dag(dag);
    let data_offset = PAYLOAD_HEADER_BYTES as usize + dag_bytes.len();
    let mut out = Vec::with_capacity(data_offset + data.iter().map(|t| t.byte_size as usize).sum::<usize>());
    out.extend_from_slice(&dag.id.0.to_le_bytes());
    out.extend_from_slice(&(dag.len() as u32).to_le_bytes());
    out.extend_from_slice(&(dag.edges().len() as u32).to_le_bytes());
    out.extend_from_slice(&(dag.dag.dismissal_rules().len() as u16).to_le_bytes());
    out.extend_from_slice(&(data.len() as u16).to_le_bytes());
    out.extend_from_slice(&(PAYLOAD_HEADER_BYTES as u32).to_le_bytes());
    out.extend_from_slice(&(dag_bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(&(data_offset as u32).to_le_bytes());
    debug_assert_eq!(out.len() as u64, PAYLOAD_HEADER_BYTES);
    out.extend_from_slice(&dag_bytes);
    for t in data {
        out.extend_from_slice(&token_bytes(t));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unpacked {
    pub dag_id: DagId,
    pub n_tasks: u32,
    pub n_edges: u32,
    pub n_rules: u16,
    pub n_tokens: u16,
    /// DAG records as text, padding stripped.
    pub dag_text: String,
    pub data: Vec<u8>,
}

pub fn mem_unpack(bytes: &[u8]) -> Result<Unpacked> {
    if bytes.len() < PAYLOAD_HEADER_BYTES as usize {
        return Err(Error::invalid("payload shorter than its header"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let u16_at = |o: usize| u16::from_le_bytes(bytes[o..o + 2].try_into().expect("2 bytes"));
    let dag_id = DagId(u64::from_le_bytes(bytes[0..8].try_into().expect("8 bytes")));
    let dag_off = u32_at(20) as usize;
    let dag_len = u32_at(24) as usize;
    let data_off = u32_at(28) as usize;
    if dag_off + dag_len != data_off || data_off > bytes.len() {
        return Err(Error::invalid("inconsistent payload section offsets"));
    }
    let raw = &bytes[dag_off..dag_off + dag_len];
    let end = raw.iter().position(|&b| b == 0).unwrap_or(raw.len());
    let dag_text = String::from_utf8(raw[..end].to_vec()).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(Unpacked {
        dag_id,
        n_tasks: u32_at(8),
        n_edges: u32_at(12),
        n_rules: u16_at(16),
        n_tokens: u16_at(18),
        dag_text,
        data: bytes[data_off..].to_vec(),
    })
}

/// Runs the thread-level algorithm over every READY thread in `threads`
/// (in order). Placed threads become REGISTERED; the rest stay READY.
pub fn thread_schedule(
    threads: &mut [&mut ThreadDescriptor],
    clusters: &mut [ClusterState],
    table: &mut DeploymentTable,
    features: SchedulerFeatures,
    now: Cycle,
) -> Result<ScheduleOutcome> {
    let mut out = ScheduleOutcome::default();
    for th in threads.iter_mut() {
        if th.status != ThreadStatus::Ready {
            continue;
        }
        out.evaluated += 1;
        let dag_id = th.dag.id;
        let data = th.data_sizes();
        let data_bytes = th.data_bytes();
        let fifo = th.fifo_bytes();
        let code_bytes = dag_section_bytes(&th.dag);
        let ship_bytes = PAYLOAD_HEADER_BYTES + code_bytes + data_bytes;

        let mut placed: Option<(usize, Allocation, CodeSource, Decision)> = None;

        // Residency lookup.
        if features.lazy_deletion {
            let candidates = if features.strict_algorithm {
                table.code_deployed(dag_id).into_iter().collect()
            } else {
                table.resident_clusters(dag_id)
            };
            let strict_hit = features.strict_algorithm && !candidates.is_empty();
            for c in candidates {
                if thread_manager_query(&clusters[c], None, &data, fifo) {
                    let alloc = mem_alloc(&mut clusters[c], None, &data, fifo)?;
                    table.attach(dag_id, c, now)?;
                    placed = Some((c, alloc, CodeSource::Resident, Decision::Hit { tid: th.tid, cluster: c }));
                    break;
                }
            }
            if placed.is_none() && strict_hit {
                out.log.push(Decision::Wait { tid: th.tid });
                continue;
            }
        }

        // Per-cluster inquiry.
        if placed.is_none() {
            for c in 0..clusters.len() {
                if table.entry(dag_id, c).is_some() {
                    continue;
                }
                if thread_manager_query(&clusters[c], Some(code_bytes), &data, fifo) {
                    let alloc = mem_alloc(&mut clusters[c], Some(code_bytes), &data, fifo)?;
                    let region = alloc.code_region.expect("code placed");
                    let register = features.lazy_deletion && !features.strict_algorithm;
                    let code = if register {
                        table.register(dag_id, c, region, now)?;
                        CodeSource::Registered(region)
                    } else {
                        CodeSource::Owned(region)
                    };
                    placed = Some((
                        c,
                        alloc,
                        code,
                        Decision::MultiThread {
                            tid: th.tid,
                            cluster: c,
                            registered: register,
                        },
                    ));
                    break;
                }
            }
        }

        // Eviction.
        if placed.is_none() && features.lazy_deletion {
            if let Some((c, victim)) = get_cluster_lru(table, clusters, code_bytes, &data, fifo) {
                let entry = table.remove(victim, c).expect("victim entry");
                clusters[c].section_mut(SectionKind::TaskCodePool).free(entry.code_region)?;
                out.evictions.push((c, victim));
                let alloc = mem_alloc(&mut clusters[c], Some(code_bytes), &data, fifo)?;
                let region = alloc.code_region.expect("code placed");
                table.register(dag_id, c, region, now)?;
                placed = Some((
                    c,
                    alloc,
                    CodeSource::Registered(region),
                    Decision::Evicted {
                        tid: th.tid,
                        cluster: c,
                        evicted: victim,
                    },
                ));
            }
        }

        match placed {
            Some((c, alloc, code, decision)) => {
                clusters[c].thread_manager.admit(th.tid)?;
                th.advance(ThreadStatus::Registered)?;
                out.aset.insert(th.tid, (c, alloc.data_addr));
                out.log.push(decision);
                out.placements.push(Placement {
                    tid: th.tid,
                    cluster: c,
                    code,
                    data_regions: alloc.data_regions,
                    fifo_region: alloc.fifo_region,
                    data_addr: alloc.data_addr,
                    transfer_bytes: if code.ships_dag() { ship_bytes } else { data_bytes },
                });
            }
            None => out.log.push(Decision::Wait { tid: th.tid }),
        }
    }
    Ok(out)
}
