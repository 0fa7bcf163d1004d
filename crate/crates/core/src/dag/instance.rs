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

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use super::{EdgeIdx, Endpoint, TaskIdx, Token, ValidDag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskState {
    Waiting,
    Ready,
    Dispatched,
    Running,
    Done,
    Dismissed,
}

/// A push hit a full FIFO; the caller retries later.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Backpressure {
    pub edge: EdgeIdx,
}

impl fmt::Display for Backpressure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FIFO of edge {} is full", self.edge)
    }
}

/// Per-thread execution state of a DAG: task states and FIFO contents.
#[derive(Debug, Clone)]
pub struct DagInstance {
    dag: Arc<ValidDag>,
    states: Vec<TaskState>,
    fifos: Vec<VecDeque<Token>>,
    pushes: Vec<u64>,
    pops: Vec<u64>,
}

impl DagInstance {
    pub fn new(dag: Arc<ValidDag>) -> Self {
        let n = dag.len();
        let e = dag.edges().len();
        DagInstance {
            dag,
            states: vec![TaskState::Waiting; n],
            fifos: vec![VecDeque::new(); e],
            pushes: vec![0; e],
            pops: vec![0; e],
        }
    }

    pub fn dag(&self) -> &Arc<ValidDag> {
        &self.dag
    }

    pub fn state(&self, task: TaskIdx) -> TaskState {
        self.states[task]
    }

    pub fn states(&self) -> &[TaskState] {
        &self.states
    }

    fn input_satisfied(&self, edge: EdgeIdx) -> bool {
        match self.dag.edges()[edge].src {
            Endpoint::Task(s) if self.states[s] == TaskState::Dismissed => true,
            _ => !self.fifos[edge].is_empty(),
        }
    }

    pub fn is_ready(&self, task: TaskIdx) -> bool {
        matches!(self.states[task], TaskState::Waiting | TaskState::Ready)
            && self.dag.topology.inputs[task]
                .iter()
                .all(|&e| self.input_satisfied(e))
    }

    /// Undispatched tasks whose inputs are all available, in topological
    /// order. Inputs from dismissed producers count as satisfied.
    pub fn ready_tasks(&self) -> Vec<TaskIdx> {
        self.dag
            .topology
            .order
            .iter()
            .copied()
            .filter(|&t| self.is_ready(t))
            .collect()
    }

    pub fn mark_ready(&mut self, task: TaskIdx) -> Result<()> {
        if !self.is_ready(task) {
            return Err(self.contract(task, "mark ready"));
        }
        self.states[task] = TaskState::Ready;
        Ok(())
    }

    pub fn push_token(&mut self, edge: EdgeIdx, token: Token) -> std::result::Result<(), Backpressure> {
        let e = self.dag.edges()[edge];
        if let Endpoint::Task(d) = e.dst {
            if self.states[d] == TaskState::Dismissed {
                self.pushes[edge] += 1;
                self.pops[edge] += 1;
                return Ok(());
            }
        }
        if self.fifos[edge].len() >= e.capacity {
            return Err(Backpressure { edge });
        }
        self.fifos[edge].push_back(token);
        self.pushes[edge] += 1;
        Ok(())
    }

    /// Whether a push on `edge` would currently succeed.
    pub fn has_room(&self, edge: EdgeIdx) -> bool {
        self.fifos[edge].len() < self.dag.edges()[edge].capacity
    }

    /// Removes one token from every input FIFO of a ready task and marks it
    /// dispatched. Entries for dismissed producers are `None`.
    pub fn pop_inputs(&mut self, task: TaskIdx) -> Result<Vec<Option<Token>>> {
        if !self.is_ready(task) {
            return Err(self.contract(task, "pop inputs"));
        }
        let inputs = self.dag.topology.inputs[task].clone();
        let mut out = Vec::with_capacity(inputs.len());
        for e in inputs {
            let tok = self.fifos[e].pop_front();
            if tok.is_some() {
                self.pops[e] += 1;
            }
            out.push(tok);
        }
        self.states[task] = TaskState::Dispatched;
        Ok(out)
    }

    /// Puts a dispatched task back in the ready pool with its inputs restored
    /// (a failed deployment).
    pub fn undispatch(&mut self, task: TaskIdx, inputs: Vec<Option<Token>>) -> Result<()> {
        if self.states[task] != TaskState::Dispatched {
            return Err(self.contract(task, "undispatch"));
        }
        let edges = self.dag.topology.inputs[task].clone();
        for (e, tok) in edges.into_iter().zip(inputs) {
            if let Some(tok) = tok {
                self.fifos[e].push_front(tok);
                self.pops[e] -= 1;
            }
        }
        self.states[task] = TaskState::Ready;
        Ok(())
    }

    pub fn set_running(&mut self, task: TaskIdx) -> Result<()> {
        self.transition(task, TaskState::Dispatched, TaskState::Running)
    }

    pub fn set_done(&mut self, task: TaskIdx) -> Result<()> {
        self.transition(task, TaskState::Running, TaskState::Done)
    }

    fn transition(&mut self, task: TaskIdx, from: TaskState, to: TaskState) -> Result<()> {
        if self.states[task] != from {
            return Err(self.contract(task, &format!("{from:?} -> {to:?}")));
        }
        self.states[task] = to;
        Ok(())
    }

    fn contract(&self, task: TaskIdx, what: &str) -> Error {
        Error::ProtocolViolation(format!(
            "{what} on task `{}` in state {:?}",
            self.dag.tasks()[task].id,
            self.states[task]
        ))
    }

    /// Dismisses the tail `max_count - observed` members of the producer's
    /// group. Their pending input tokens are drained.
    pub fn apply_dismissal(&mut self, rule: usize, observed: usize) -> Result<Vec<TaskIdx>> {
        let r = self
            .dag
            .dag
            .dismissal_rules()
            .get(rule)
            .ok_or_else(|| Error::invalid(format!("no dismissal rule {rule}")))?
            .clone();
        if observed > r.max_count {
            return Err(Error::invalid(format!(
                "observed count {observed} exceeds group size {}",
                r.max_count
            )));
        }
        if self.states[r.producer] != TaskState::Done {
            return Err(self.contract(r.producer, "apply dismissal before producer done"));
        }
        let victims: Vec<TaskIdx> = r.group[observed..].to_vec();
        for &v in &victims {
            if !matches!(self.states[v], TaskState::Waiting | TaskState::Ready) {
                return Err(self.contract(v, "dismiss"));
            }
        }
        for &v in &victims {
            self.states[v] = TaskState::Dismissed;
            for &e in &self.dag.topology.inputs[v] {
                let drained = self.fifos[e].len() as u64;
                self.fifos[e].clear();
                self.pops[e] += drained;
            }
        }
        Ok(victims)
    }

    pub fn is_complete(&self) -> bool {
        self.states
            .iter()
            .all(|s| matches!(s, TaskState::Done | TaskState::Dismissed))
    }

    pub fn pushes(&self, edge: EdgeIdx) -> u64 {
        self.pushes[edge]
    }

    pub fn pops(&self, edge: EdgeIdx) -> u64 {
        self.pops[edge]
    }

    pub fn queue_len(&self, edge: EdgeIdx) -> usize {
        self.fifos[edge].len()
    }

    /// Drains tokens that reached `EXTERNAL` sinks.
    pub fn take_external_outputs(&mut self) -> Vec<(EdgeIdx, Token)> {
        let mut out = Vec::new();
        for (ei, e) in self.dag.edges().iter().enumerate() {
            if e.dst == Endpoint::External {
                while let Some(t) = self.fifos[ei].pop_front() {
                    self.pops[ei] += 1;
                    out.push((ei, t));
                }
            }
        }
        out
    }

    pub fn dismissed_count(&self) -> usize {
        self.states
            .iter()
            .filter(|&&s| s == TaskState::Dismissed)
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn spec(id: &str) -> TaskSpec {
        TaskSpec::new(id, KernelRef::new(KernelKind::Scramble, 64), TileAttr::Any, 64)
    }

    fn tok(v: i64) -> Token {
        Token::new(Payload::Scalar(v))
    }

    fn diamond() -> Arc<ValidDag> {
        let mut dag = Dag::new();
        for id in ["s", "l", "r", "j"] {
            dag.add_task(spec(id)).unwrap();
        }
        dag.add_edge("EXTERNAL", "s", 4).unwrap();
        dag.add_edge("s", "l", 4).unwrap();
        dag.add_edge("s", "r", 4).unwrap();
        dag.add_edge("l", "j", 4).unwrap();
        dag.add_edge("r", "j", 4).unwrap();
        dag.validated().unwrap()
    }

    fn run(inst: &mut DagInstance, t: TaskIdx) {
        inst.pop_inputs(t).unwrap();
        inst.set_running(t).unwrap();
        inst.set_done(t).unwrap();
        for e in inst.dag().topology.outputs[t].clone() {
            inst.push_token(e, tok(t as i64)).unwrap();
        }
    }

    #[test]
    fn ready_sets_follow_fifos() {
        let mut inst = DagInstance::new(diamond());
        assert!(inst.ready_tasks().is_empty());
        inst.push_token(0, tok(1)).unwrap();
        assert_eq!(inst.ready_tasks(), vec![0]);
        run(&mut inst, 0);
        assert_eq!(inst.ready_tasks(), vec![1, 2]);
        run(&mut inst, 1);
        // Only one parent of the join has finished.
        assert_eq!(inst.ready_tasks(), vec![2]);
        run(&mut inst, 2);
        assert_eq!(inst.ready_tasks(), vec![3]);
        run(&mut inst, 3);
        assert!(inst.is_complete());
    }

    #[test]
    fn fifo_order_and_backpressure() {
        let mut dag = Dag::new();
        dag.add_task(spec("a")).unwrap();
        dag.add_edge("EXTERNAL", "a", 2).unwrap();
        let mut inst = DagInstance::new(dag.validated().unwrap());
        inst.push_token(0, tok(1)).unwrap();
        inst.push_token(0, tok(2)).unwrap();
        assert_eq!(inst.push_token(0, tok(3)), Err(Backpressure { edge: 0 }));
        let got = inst.pop_inputs(0).unwrap();
        assert_eq!(got, vec![Some(tok(1))]);
        assert_eq!(inst.pushes(0), inst.pops(0) + inst.queue_len(0) as u64);
        assert!(inst.pop_inputs(0).is_err());
    }

    #[test]
    fn complete_flags() {
        let mut inst = DagInstance::new(diamond());
        assert!(!inst.is_complete());
        inst.push_token(0, tok(0)).unwrap();
        for t in 0..4 {
            run(&mut inst, t);
        }
        assert!(inst.is_complete());
    }

    fn fan_out(width: usize) -> Arc<ValidDag> {
        let mut dag = Dag::new();
        dag.add_task(spec("bd")).unwrap();
        dag.add_task(spec("sink")).unwrap();
        dag.add_edge("EXTERNAL", "bd", 4).unwrap();
        let mut names = Vec::new();
        for i in 0..width {
            let id = format!("dec{i}");
            dag.add_task(spec(&id)).unwrap();
            dag.add_edge("bd", &id, 4).unwrap();
            dag.add_edge(&id, "sink", 4).unwrap();
            names.push(id);
        }
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        dag.add_dismissal("bd", &refs).unwrap();
        dag.validated().unwrap()
    }

    fn dismissal_run(k: usize) -> (usize, usize) {
        let dag = fan_out(20);
        let mut inst = DagInstance::new(dag.clone());
        inst.push_token(0, tok(0)).unwrap();
        inst.pop_inputs(0).unwrap();
        inst.set_running(0).unwrap();
        inst.set_done(0).unwrap();
        let dismissed = inst.apply_dismissal(0, k).unwrap();
        for &e in &dag.topology.outputs[0] {
            if let Endpoint::Task(d) = dag.edges()[e].dst {
                if inst.state(d) != TaskState::Dismissed {
                    inst.push_token(e, tok(1)).unwrap();
                }
            }
        }
        let mut decoded = 0;
        loop {
            let ready = inst.ready_tasks();
            if ready.is_empty() {
                break;
            }
            for t in ready {
                if t >= 2 {
                    decoded += 1;
                }
                run(&mut inst, t);
            }
        }
        assert!(inst.is_complete());
        (decoded, dismissed.len())
    }

    #[test]
    fn dismissal_counts() {
        assert_eq!(dismissal_run(20), (20, 0));
        assert_eq!(dismissal_run(0), (0, 20));
        assert_eq!(dismissal_run(3), (3, 17));
    }

    #[test]
    fn dismissal_preconditions() {
        let mut inst = DagInstance::new(fan_out(4));
        assert!(inst.apply_dismissal(0, 2).is_err());
        inst.push_token(0, tok(0)).unwrap();
        inst.pop_inputs(0).unwrap();
        inst.set_running(0).unwrap();
        inst.set_done(0).unwrap();
        assert!(inst.apply_dismissal(0, 5).is_err());
        let v = inst.apply_dismissal(0, 1).unwrap();
        assert_eq!(v, vec![3, 4, 5]);
        // The tail members never appear as ready.
        let ready = inst.ready_tasks();
        assert!(ready.iter().all(|t| !v.contains(t)));
    }
}
