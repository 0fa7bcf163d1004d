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

//! Task-level scheduling on the per-cluster L2 scheduler.

use crate::dag::{DagInstance, Endpoint, Payload, TaskIdx, TaskState, TileAttr, Token};
use crate::error::{Error, Result};
use crate::machine::TileState;

use super::thread::ThreadId;

#[derive(Debug, Clone)]
pub struct LoadIndication {
    pub thread: ThreadId,
    pub task: TaskIdx,
    pub tile: usize,
    /// Popped input tokens, one per input edge (`None` for dismissed producers).
    pub inputs: Vec<Option<Token>>,
}

#[derive(Debug, Clone, Default)]
pub struct ScanResult {
    pub indications: Vec<LoadIndication>,
    pub visits: u64,
}

/// IDLE tiles of a matching class not in `reserved`: least recently finished
/// first, then lowest id. Never-used tiles count as oldest.
pub fn select_tile(attr: TileAttr, tiles: &[TileState], reserved: &[bool]) -> Option<usize> {
    tiles
        .iter()
        .filter(|t| t.is_idle() && !reserved.get(t.tile_id).copied().unwrap_or(false) && t.class.matches(attr))
        .min_by_key(|t| (t.last_finished.map_or(0, |c| c + 1), t.tile_id))
        .map(|t| t.tile_id)
}

/// A class-specific attribute falls back to ANY when the cluster has no
/// tile of that class at all, so such tasks are not stranded.
pub fn effective_attr(attr: TileAttr, tiles: &[TileState]) -> TileAttr {
    if attr == TileAttr::Any || tiles.iter().any(|t| t.class.matches(attr)) {
        attr
    } else {
        TileAttr::Any
    }
}

/// Walks every resident instance (registration order) and every task
/// (topological order). Ready tasks with a free matching tile are dispatched.
pub fn task_scan(instances: &mut [(ThreadId, &mut DagInstance)], tiles: &[TileState]) -> Result<ScanResult> {
    let mut reserved = vec![false; tiles.len()];
    let mut out = ScanResult::default();
    for (tid, inst) in instances.iter_mut() {
        let order = inst.dag().topology.order.clone();
        for t in order {
            out.visits += 1;
            if !inst.is_ready(t) {
                continue;
            }
            if inst.state(t) == TaskState::Waiting {
                inst.mark_ready(t)?;
            }
            let attr = effective_attr(inst.dag().tasks()[t].attr, tiles);
            if let Some(tile) = select_tile(attr, tiles, &reserved) {
                reserved[tile] = true;
                let inputs = inst.pop_inputs(t)?;
                out.indications.push(LoadIndication {
                    thread: *tid,
                    task: t,
                    tile,
                    inputs,
                });
            }
        }
    }
    Ok(out)
}

/// What a finished task produced.
#[derive(Debug, Clone, Default)]
pub struct TaskOutput {
    /// One entry per output edge, aligned with the task's output edge list.
    pub outputs: Vec<Option<Payload>>,
    /// Result of a task without output edges.
    pub result: Option<Payload>,
    /// Scalar return value (dismissal producers report a count here).
    pub ret: Option<i64>,
}

impl TaskOutput {
    pub fn return_tokens(&self) -> u32 {
        (self.outputs.iter().filter(|o| o.is_some()).count() + usize::from(self.result.is_some())) as u32
    }

    pub fn byte_size(&self) -> u64 {
        self.outputs
            .iter()
            .flatten()
            .chain(self.result.iter())
            .map(Payload::byte_size)
            .sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Completion {
    /// `(edge, stored)`: stored is false when the token was discarded
    /// because its consumer was already dismissed.
    pub pushed: Vec<(usize, bool)>,
    pub dismissed: Vec<TaskIdx>,
}

/// Applies a returned task to its instance: pushes outputs, marks the task
/// done and fires its dismissal rule. Fails without side effects on
/// backpressure.
pub fn on_task_complete(inst: &mut DagInstance, task: TaskIdx, out: &TaskOutput) -> Result<Completion> {
    let dag = inst.dag().clone();
    let edges = &dag.topology.outputs[task];
    if edges.len() != out.outputs.len() {
        return Err(Error::ProtocolViolation(format!(
            "task `{}` returned {} outputs for {} edges",
            dag.tasks()[task].id,
            out.outputs.len(),
            edges.len()
        )));
    }
    for (&e, o) in edges.iter().zip(&out.outputs) {
        if o.is_some() && !inst.has_room(e) {
            let to_dismissed = matches!(dag.edges()[e].dst, Endpoint::Task(d) if inst.state(d) == TaskState::Dismissed);
            if !to_dismissed {
                return Err(Error::ProtocolViolation(format!("backpressure on edge {e}")));
            }
        }
    }
    inst.set_done(task)?;
    let mut done = Completion::default();
    for (&e, o) in edges.iter().zip(&out.outputs) {
        if let Some(p) = o {
            let stored = !matches!(dag.edges()[e].dst, Endpoint::Task(d) if inst.state(d) == TaskState::Dismissed);
            inst.push_token(e, Token::new(p.clone()))
                .map_err(|b| Error::ProtocolViolation(b.to_string()))?;
            done.pushed.push((e, stored));
        }
    }
    if let Some(rule) = dag.topology.producer_rule[task] {
        let max = dag.dag.dismissal_rules()[rule].max_count;
        let observed = out.ret.unwrap_or(max as i64).clamp(0, max as i64) as usize;
        done.dismissed = inst.apply_dismissal(rule, observed)?;
    }
    Ok(done)
}

/// Whether every output edge that will receive a token has room.
pub fn has_room_for(inst: &DagInstance, task: TaskIdx, out: &TaskOutput) -> bool {
    let dag = inst.dag();
    dag.topology.outputs[task].iter().zip(&out.outputs).all(|(&e, o)| {
        o.is_none()
            || inst.has_room(e)
            || matches!(dag.edges()[e].dst, Endpoint::Task(d) if inst.state(d) == TaskState::Dismissed)
    })
}
