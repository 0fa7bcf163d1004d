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

//! Line-oriented DAG description:
//!
//! ```text
//! task <id> <kernel>[:<size>] <LARGE|SMALL|ANY> <code_bytes>
//! edge <src|EXTERNAL> <dst|EXTERNAL> <capacity>
//! dismiss <producer> <max_count> <member>...
//! ```

use super::{Dag, Endpoint, KernelRef, TaskSpec};
use crate::cost::KernelKind;
use crate::error::{Error, Result};

pub fn parse_dag(text: &str) -> Result<Dag> {
    let mut dag = Dag::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |e: Error| Error::Parse {
            line: idx + 1,
            msg: match e {
                Error::InvalidArgument(m) => m,
                other => other.to_string(),
            },
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let want = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "`{}` expects {} fields, found {}",
                    fields[0],
                    n - 1,
                    fields.len() - 1
                )))
            }
        };
        let number = |s: &str| {
            s.parse::<u64>()
                .map_err(|e| Error::invalid(format!("`{s}`: {e}")))
        };
        match fields[0] {
            "task" => {
                want(5).map_err(at)?;
                let kernel = parse_kernel(fields[2]).map_err(at)?;
                let attr = fields[3].parse().map_err(at)?;
                let code = number(fields[4]).map_err(at)?;
                dag.add_task(TaskSpec::new(fields[1], kernel, attr, code))
                    .map_err(at)?;
            }
            "edge" => {
                want(4).map_err(at)?;
                let cap = number(fields[3]).map_err(at)?;
                dag.add_edge(fields[1], fields[2], cap as usize).map_err(at)?;
            }
            "dismiss" => {
                if fields.len() < 3 {
                    return Err(at(Error::invalid("`dismiss` needs a producer and a count")));
                }
                let max = number(fields[2]).map_err(at)? as usize;
                let group = &fields[3..];
                if group.len() != max {
                    return Err(at(Error::invalid(format!(
                        "max_count {max} but {} members listed",
                        group.len()
                    ))));
                }
                dag.add_dismissal(fields[1], group).map_err(at)?;
            }
            other => return Err(at(Error::invalid(format!("unknown record `{other}`")))),
        }
    }
    Ok(dag)
}

fn parse_kernel(s: &str) -> Result<KernelRef> {
    let (kind, size) = match s.split_once(':') {
        Some((k, n)) => (
            k,
            n.parse::<u64>()
                .map_err(|e| Error::invalid(format!("kernel size `{n}`: {e}")))?,
        ),
        None => (s, 1),
    };
    Ok(KernelRef::new(kind.parse::<KernelKind>()?, size))
}

pub fn write_dag(dag: &Dag) -> String {
    let name = |e: Endpoint| match e {
        Endpoint::External => "EXTERNAL".to_string(),
        Endpoint::Task(i) => dag.task(i).id.clone(),
    };
    let mut out = String::new();
    for t in dag.tasks() {
        out.push_str(&format!(
            "task {} {} {} {}\n",
            t.id, t.kernel, t.attr, t.code_bytes
        ));
    }
    for e in dag.edges() {
        out.push_str(&format!("edge {} {} {}\n", name(e.src), name(e.dst), e.capacity));
    }
    for r in dag.dismissal_rules() {
        let members: Vec<&str> = r.group.iter().map(|&g| dag.task(g).id.as_str()).collect();
        out.push_str(&format!(
            "dismiss {} {} {}\n",
            dag.task(r.producer).id,
            r.max_count,
            members.join(" ")
        ));
    }
    out
}
