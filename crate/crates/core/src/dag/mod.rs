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

//! Worst-case dataflow graphs of attribute-tagged tasks joined by software
//! FIFOs, with runtime dismissal of conditional task groups.

mod instance;
mod text;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use instance::{Backpressure, DagInstance, TaskState};
pub use text::{parse_dag, write_dag};

use crate::cost::KernelKind;
use crate::error::{Error, Result};
use crate::signal::{BitVec, CplxVec, LlrVec};

pub const DEFAULT_FIFO_CAPACITY: usize = 4;

pub type TaskIdx = usize;
pub type EdgeIdx = usize;

/// Preferred tile class of a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TileAttr {
    Large,
    Small,
    Any,
}

impl fmt::Display for TileAttr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TileAttr::Large => "LARGE",
            TileAttr::Small => "SMALL",
            TileAttr::Any => "ANY",
        })
    }
}

impl FromStr for TileAttr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LARGE" | "L" => Ok(TileAttr::Large),
            "SMALL" | "S" => Ok(TileAttr::Small),
            "ANY" => Ok(TileAttr::Any),
            _ => Err(Error::invalid(format!("unknown tile attribute `{s}`"))),
        }
    }
}

/// Kernel identity plus its nominal problem size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelRef {
    pub kind: KernelKind,
    pub size: u64,
}

impl KernelRef {
    pub fn new(kind: KernelKind, size: u64) -> Self {
        KernelRef { kind, size }
    }
}

impl fmt::Display for KernelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub id: String,
    pub kernel: KernelRef,
    pub attr: TileAttr,
    pub code_bytes: u64,
}

impl TaskSpec {
    pub fn new(id: impl Into<String>, kernel: KernelRef, attr: TileAttr, code_bytes: u64) -> Self {
        TaskSpec {
            id: id.into(),
            kernel,
            attr,
            code_bytes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    External,
    Task(TaskIdx),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub src: Endpoint,
    pub dst: Endpoint,
    pub capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DismissalRule {
    pub producer: TaskIdx,
    pub group: Vec<TaskIdx>,
    pub max_count: usize,
}

/// Data carried by a FIFO token.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Bits(BitVec),
    Cplx(CplxVec),
    Llr(LlrVec),
    Scalar(i64),
}

impl Payload {
    /// Scratchpad footprint: packed bits, 8-byte complex words, 4-byte LLR
    /// and scalar words.
    pub fn byte_size(&self) -> u64 {
        let raw = match self {
            Payload::Bits(b) => (b.len() as u64).div_ceil(8),
            Payload::Cplx(c) => 8 * c.len() as u64,
            Payload::Llr(l) => 4 * l.len() as u64,
            Payload::Scalar(_) => 4,
        };
        raw.max(1)
    }

    pub fn as_bits(&self) -> Option<&[u8]> {
        match self {
            Payload::Bits(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_cplx(&self) -> Option<&[crate::signal::Complex64]> {
        match self {
            Payload::Cplx(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_llr(&self) -> Option<&[f64]> {
        match self {
            Payload::Llr(l) => Some(l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub payload: Payload,
    pub byte_size: u64,
}

impl Token {
    pub fn new(payload: Payload) -> Self {
        let byte_size = payload.byte_size();
        Token { payload, byte_size }
    }
}

/// Content hash of a DAG's structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DagId(pub u64);

impl fmt::Display for DagId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    SelfLoop(String),
    Cycle(Vec<String>),
    NoInput(String),
    BadDismissal(String),
    Unreachable { producer: String, member: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => f.write_str("DAG has no tasks"),
            Violation::SelfLoop(t) => write!(f, "self-loop on `{t}`"),
            Violation::Cycle(ts) => write!(f, "cycle through {}", ts.join(", ")),
            Violation::NoInput(t) => write!(f, "task `{t}` has no input edge"),
            Violation::BadDismissal(msg) => write!(f, "dismissal rule: {msg}"),
            Violation::Unreachable { producer, member } => {
                write!(f, "`{member}` is not reachable from producer `{producer}`")
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Dag {
    tasks: Vec<TaskSpec>,
    index: HashMap<String, TaskIdx>,
    edges: Vec<Edge>,
    rules: Vec<DismissalRule>,
}

impl Dag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_task(&mut self, spec: TaskSpec) -> Result<TaskIdx> {
        if self.index.contains_key(&spec.id) {
            return Err(Error::invalid(format!("duplicate task id `{}`", spec.id)));
        }
        if spec.code_bytes == 0 {
            return Err(Error::invalid(format!("task `{}` has zero code bytes", spec.id)));
        }
        if spec.id.is_empty() || spec.id.eq_ignore_ascii_case("EXTERNAL") || spec.id.contains(char::is_whitespace) {
            return Err(Error::invalid(format!("`{}` is not a valid task id", spec.id)));
        }
        let idx = self.tasks.len();
        self.index.insert(spec.id.clone(), idx);
        self.tasks.push(spec);
        Ok(idx)
    }

    pub fn endpoint(&self, id: &str) -> Result<Endpoint> {
        if id == "EXTERNAL" {
            return Ok(Endpoint::External);
        }
        self.index
            .get(id)
            .map(|&i| Endpoint::Task(i))
            .ok_or_else(|| Error::invalid(format!("unknown task `{id}`")))
    }

    /// Registers an edge; structural checks are deferred to [`Dag::validate`].
    pub fn add_edge(&mut self, src: &str, dst: &str, capacity: usize) -> Result<EdgeIdx> {
        let src = self.endpoint(src)?;
        let dst = self.endpoint(dst)?;
        if capacity == 0 {
            return Err(Error::invalid("FIFO capacity must be >= 1"));
        }
        if src == Endpoint::External && dst == Endpoint::External {
            return Err(Error::invalid("an edge needs at least one task endpoint"));
        }
        self.edges.push(Edge { src, dst, capacity });
        Ok(self.edges.len() - 1)
    }

    pub fn add_dismissal(&mut self, producer: &str, group: &[&str]) -> Result<usize> {
        let producer = match self.endpoint(producer)? {
            Endpoint::Task(i) => i,
            Endpoint::External => return Err(Error::invalid("producer cannot be EXTERNAL")),
        };
        let group = group
            .iter()
            .map(|id| match self.endpoint(id)? {
                Endpoint::Task(i) => Ok(i),
                Endpoint::External => Err(Error::invalid("group member cannot be EXTERNAL")),
            })
            .collect::<Result<Vec<_>>>()?;
        self.rules.push(DismissalRule {
            producer,
            max_count: group.len(),
            group,
        });
        Ok(self.rules.len() - 1)
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn task(&self, idx: TaskIdx) -> &TaskSpec {
        &self.tasks[idx]
    }

    pub fn task_index(&self, id: &str) -> Option<TaskIdx> {
        self.index.get(id).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn dismissal_rules(&self) -> &[DismissalRule] {
        &self.rules
    }

    pub fn total_code_bytes(&self) -> u64 {
        self.tasks.iter().map(|t| t.code_bytes).sum()
    }

    fn endpoint_name(&self, e: Endpoint) -> &str {
        match e {
            Endpoint::External => "EXTERNAL",
            Endpoint::Task(i) => &self.tasks[i].id,
        }
    }

    /// Content hash over a canonical (sorted) rendering of the structure, so
    /// insertion order does not matter.
    pub fn id(&self) -> DagId {
        let mut lines: Vec<String> = self
            .tasks
            .iter()
            .map(|t| format!("task {} {} {} {}", t.id, t.kernel, t.attr, t.code_bytes))
            .collect();
        lines.extend(self.edges.iter().map(|e| {
            format!(
                "edge {} {} {}",
                self.endpoint_name(e.src),
                self.endpoint_name(e.dst),
                e.capacity
            )
        }));
        lines.extend(self.rules.iter().map(|r| {
            let members: Vec<&str> = r.group.iter().map(|&g| self.tasks[g].id.as_str()).collect();
            format!(
                "dismiss {} {} {}",
                self.tasks[r.producer].id,
                r.max_count,
                members.join(" ")
            )
        }));
        lines.sort();
        let mut hasher = Sha256::new();
        for line in &lines {
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        DagId(u64::from_be_bytes(digest[..8].try_into().expect("8 bytes")))
    }

    /// Checks acyclicity, input coverage and dismissal-rule sanity. Never
    /// fails; returns every violation found.
    pub fn validate(&self) -> Vec<Violation> {
        self.analyze().err().unwrap_or_default()
    }

    /// Validates and freezes the graph for execution.
    pub fn validated(self) -> std::result::Result<Arc<ValidDag>, Vec<Violation>> {
        let topology = self.analyze()?;
        let id = self.id();
        Ok(Arc::new(ValidDag {
            dag: self,
            id,
            topology,
        }))
    }

    fn analyze(&self) -> std::result::Result<Topology, Vec<Violation>> {
        let n = self.tasks.len();
        let mut violations = Vec::new();
        if n == 0 {
            violations.push(Violation::Empty);
        }
        let mut inputs = vec![Vec::new(); n];
        let mut outputs = vec![Vec::new(); n];
        let mut external_inputs = Vec::new();
        let mut succ: Vec<BTreeSet<TaskIdx>> = vec![BTreeSet::new(); n];
        for (ei, e) in self.edges.iter().enumerate() {
            match e.dst {
                Endpoint::Task(d) => inputs[d].push(ei),
                Endpoint::External => {}
            }
            match e.src {
                Endpoint::Task(s) => outputs[s].push(ei),
                Endpoint::External => external_inputs.push(ei),
            }
            if let (Endpoint::Task(s), Endpoint::Task(d)) = (e.src, e.dst) {
                if s == d {
                    violations.push(Violation::SelfLoop(self.tasks[s].id.clone()));
                } else {
                    succ[s].insert(d);
                }
            }
        }
        for (t, ins) in inputs.iter().enumerate() {
            if ins.is_empty() {
                violations.push(Violation::NoInput(self.tasks[t].id.clone()));
            }
        }

        // Kahn's algorithm; ties resolved by insertion index.
        let mut indegree = vec![0usize; n];
        for s in &succ {
            for &d in s {
                indegree[d] += 1;
            }
        }
        let mut frontier: BTreeSet<TaskIdx> = (0..n).filter(|&t| indegree[t] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(t) = frontier.pop_first() {
            order.push(t);
            for &d in &succ[t] {
                indegree[d] -= 1;
                if indegree[d] == 0 {
                    frontier.insert(d);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n)
                .filter(|&t| indegree[t] > 0)
                .map(|t| self.tasks[t].id.clone())
                .collect();
            violations.push(Violation::Cycle(stuck));
        }

        let mut producer_rule = vec![None; n];
        for (ri, rule) in self.rules.iter().enumerate() {
            let pname = &self.tasks[rule.producer].id;
            if rule.group.len() != rule.max_count {
                violations.push(Violation::BadDismissal(format!(
                    "group of `{pname}` has {} members but max_count {}",
                    rule.group.len(),
                    rule.max_count
                )));
            }
            let distinct: BTreeSet<_> = rule.group.iter().collect();
            if distinct.len() != rule.group.len() {
                violations.push(Violation::BadDismissal(format!(
                    "group of `{pname}` repeats a member"
                )));
            }
            if rule.group.contains(&rule.producer) {
                violations.push(Violation::BadDismissal(format!(
                    "producer `{pname}` is in its own group"
                )));
            }
            if producer_rule[rule.producer].replace(ri).is_some() {
                violations.push(Violation::BadDismissal(format!(
                    "`{pname}` produces more than one rule"
                )));
            }
            let reach = reachable(&succ, rule.producer);
            for &m in &rule.group {
                if m != rule.producer && !reach[m] {
                    violations.push(Violation::Unreachable {
                        producer: pname.clone(),
                        member: self.tasks[m].id.clone(),
                    });
                }
            }
        }

        if !violations.is_empty() {
            return Err(violations);
        }
        let mut dismissible = vec![None; n];
        for (ri, rule) in self.rules.iter().enumerate() {
            for &m in &rule.group {
                dismissible[m] = Some(ri);
            }
        }
        Ok(Topology {
            order,
            inputs,
            outputs,
            external_inputs,
            producer_rule,
            dismissible,
        })
    }
}

fn reachable(succ: &[BTreeSet<TaskIdx>], from: TaskIdx) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut queue = VecDeque::from([from]);
    while let Some(t) = queue.pop_front() {
        for &d in &succ[t] {
            if !seen[d] {
                seen[d] = true;
                queue.push_back(d);
            }
        }
    }
    seen
}

/// Derived adjacency of a validated DAG.
#[derive(Debug, Clone)]
pub struct Topology {
    pub order: Vec<TaskIdx>,
    pub inputs: Vec<Vec<EdgeIdx>>,
    pub outputs: Vec<Vec<EdgeIdx>>,
    pub external_inputs: Vec<EdgeIdx>,
    pub producer_rule: Vec<Option<usize>>,
    pub dismissible: Vec<Option<usize>>,
}

/// An immutable, validated DAG template shared by every thread that runs it.
#[derive(Debug)]
pub struct ValidDag {
    pub dag: Dag,
    pub id: DagId,
    pub topology: Topology,
}

impl ValidDag {
    pub fn tasks(&self) -> &[TaskSpec] {
        self.dag.tasks()
    }

    pub fn edges(&self) -> &[Edge] {
        self.dag.edges()
    }

    pub fn len(&self) -> usize {
        self.dag.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dag.tasks.is_empty()
    }

    pub fn total_code_bytes(&self) -> u64 {
        self.dag.total_code_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(id: &str) -> TaskSpec {
        TaskSpec::new(id, KernelRef::new(KernelKind::Scramble, 64), TileAttr::Any, 128)
    }

    #[test]
    fn add_tasks() {
        let mut dag = Dag::new();
        dag.add_task(spec("a")).unwrap();
        assert_eq!(dag.tasks().len(), 1);
        assert!(dag.add_task(spec("a")).is_err());
        dag.add_task(spec("b")).unwrap();
        assert_eq!(dag.task_index("a"), Some(0));
        assert_eq!(dag.task_index("b"), Some(1));
        assert!(dag
            .add_task(TaskSpec::new("z", KernelRef::new(KernelKind::Fft, 8), TileAttr::Any, 0))
            .is_err());
    }

    #[test]
    fn add_edges() {
        let mut dag = Dag::new();
        dag.add_task(spec("t0")).unwrap();
        dag.add_edge("EXTERNAL", "t0", 4).unwrap();
        dag.add_edge("t0", "t0", 4).unwrap();
        assert!(dag.add_edge("t0", "nope", 4).is_err());
        assert!(dag.validate().contains(&Violation::SelfLoop("t0".into())));
    }

    #[test]
    fn chain_is_valid() {
        let mut dag = Dag::new();
        dag.add_task(spec("a")).unwrap();
        dag.add_task(spec("b")).unwrap();
        dag.add_edge("EXTERNAL", "a", 4).unwrap();
        dag.add_edge("a", "b", 4).unwrap();
        assert!(dag.validate().is_empty());
    }

    #[test]
    fn detects_cycle_and_missing_input() {
        let mut dag = Dag::new();
        for id in ["a", "b", "c", "d"] {
            dag.add_task(spec(id)).unwrap();
        }
        dag.add_edge("EXTERNAL", "a", 4).unwrap();
        dag.add_edge("a", "b", 4).unwrap();
        dag.add_edge("b", "c", 4).unwrap();
        dag.add_edge("c", "b", 4).unwrap();
        let v = dag.validate();
        assert!(v.iter().any(|v| matches!(v, Violation::Cycle(_))));
        assert!(v.contains(&Violation::NoInput("d".into())));
    }

    #[test]
    fn dismissal_reachability() {
        let mut dag = Dag::new();
        for id in ["p", "x", "y"] {
            dag.add_task(spec(id)).unwrap();
        }
        dag.add_edge("EXTERNAL", "p", 4).unwrap();
        dag.add_edge("p", "x", 4).unwrap();
        dag.add_edge("EXTERNAL", "y", 4).unwrap();
        dag.add_dismissal("p", &["x", "y"]).unwrap();
        let v = dag.validate();
        assert_eq!(
            v,
            vec![Violation::Unreachable {
                producer: "p".into(),
                member: "y".into()
            }]
        );
    }

    #[test]
    fn id_ignores_insertion_order() {
        let mut a = Dag::new();
        a.add_task(spec("x")).unwrap();
        a.add_task(spec("y")).unwrap();
        a.add_edge("EXTERNAL", "x", 4).unwrap();
        a.add_edge("x", "y", 4).unwrap();

        let mut b = Dag::new();
        b.add_task(spec("y")).unwrap();
        b.add_task(spec("x")).unwrap();
        b.add_edge("x", "y", 4).unwrap();
        b.add_edge("EXTERNAL", "x", 4).unwrap();
        assert_eq!(a.id(), b.id());

        b.add_edge("EXTERNAL", "y", 2).unwrap();
        assert_ne!(a.id(), b.id());
    }

    #[test]
    fn payload_sizes() {
        assert_eq!(Payload::Bits(vec![1; 9]).byte_size(), 2);
        assert_eq!(Payload::Bits(vec![]).byte_size(), 1);
        assert_eq!(Payload::Llr(vec![0.0; 10]).byte_size(), 40);
        assert_eq!(Payload::Scalar(3).byte_size(), 4);
    }
}
