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


use std::sync::Arc;

use wbpsim::cost::KernelKind;
use wbpsim::dag::{parse_dag, write_dag, Dag, DagInstance, Payload, TaskState, Token, ValidDag, Violation};
use wbpsim::sched::{has_room_for, on_task_complete, TaskOutput};

const FAN: &str = "\
task src fft:128 LARGE 6144
task dec0 bp_decode:512 LARGE 8192
task dec1 bp_decode:512 LARGE 8192
task dec2 bp_decode:512 LARGE 8192
task sink aggregate:256 ANY 1024
edge EXTERNAL src 2
edge src dec0 1
edge src dec1 1
edge src dec2 1
edge dec0 sink 1
edge dec1 sink 1
edge dec2 sink 1
edge sink EXTERNAL 1
dismiss src 3 dec0 dec1 dec2
";

fn fan() -> Arc<ValidDag> {
    parse_dag(FAN).unwrap().validated().unwrap()
}

fn bits() -> Payload {
    Payload::Bits(vec![1; 16])
}

fn run(inst: &mut DagInstance, task: usize, out: TaskOutput) {
    inst.pop_inputs(task).unwrap();
    inst.set_running(task).unwrap();
    on_task_complete(inst, task, &out).unwrap();
}

#[test]
fn text_round_trip_keeps_identity() {
    let dag = parse_dag(FAN).unwrap();
    let again = parse_dag(&write_dag(&dag)).unwrap();
    assert_eq!(dag.id(), again.id());
    assert_eq!(again.dismissal_rules()[0].max_count, 3);
    assert_eq!(dag.task(1).kernel.kind, KernelKind::BpDecode);
}

#[test]
fn validation_rejects_cycles() {
    let mut dag = Dag::new();
    for line in ["task a fft:8 ANY 1", "task b fft:8 ANY 1"] {
        let d = parse_dag(line).unwrap();
        dag.add_task(d.tasks()[0].clone()).unwrap();
    }
    dag.add_edge("EXTERNAL", "a", 1).unwrap();
    dag.add_edge("a", "b", 1).unwrap();
    dag.add_edge("b", "a", 1).unwrap();
    let v = dag.validate();
    assert!(v.iter().any(|x| matches!(x, Violation::Cycle(_))), "{v:?}");
}

#[test]
fn full_group_runs_every_member() {
    let dag = fan();
    let mut inst = DagInstance::new(dag.clone());
    inst.push_token(dag.topology.external_inputs[0], Token::new(bits())).unwrap();
    run(&mut inst, 0, TaskOutput { outputs: vec![Some(bits()); 3], result: None, ret: Some(3) });
    assert_eq!(inst.ready_tasks(), vec![1, 2, 3]);
    for d in 1..=3 {
        run(&mut inst, d, TaskOutput { outputs: vec![Some(bits())], ..TaskOutput::default() });
    }
    run(&mut inst, 4, TaskOutput { outputs: vec![Some(bits())], ..TaskOutput::default() });
    assert!(inst.is_complete());
    assert_eq!(inst.dismissed_count(), 0);
    assert_eq!(inst.take_external_outputs().len(), 1);
}

#[test]
fn partial_group_dismisses_the_tail() {
    let dag = fan();
    let mut inst = DagInstance::new(dag.clone());
    inst.push_token(dag.topology.external_inputs[0], Token::new(bits())).unwrap();
    let done = {
        inst.pop_inputs(0).unwrap();
        inst.set_running(0).unwrap();
        on_task_complete(
            &mut inst,
            0,
            &TaskOutput { outputs: vec![Some(bits()), None, None], result: None, ret: Some(1) },
        )
        .unwrap()
    };
    assert_eq!(done.dismissed, vec![2, 3]);
    assert_eq!(inst.state(2), TaskState::Dismissed);
    assert_eq!(inst.ready_tasks(), vec![1]);
    run(&mut inst, 1, TaskOutput { outputs: vec![Some(bits())], ..TaskOutput::default() });
    // The sink only waits on surviving producers.
    assert_eq!(inst.ready_tasks(), vec![4]);
    run(&mut inst, 4, TaskOutput { outputs: vec![Some(bits())], ..TaskOutput::default() });
    assert!(inst.is_complete());
    assert_eq!(inst.dismissed_count(), 2);
}

#[test]
fn backpressure_blocks_completion() {
    let dag = fan();
    let mut inst = DagInstance::new(dag.clone());
    let ext = dag.topology.external_inputs[0];
    inst.push_token(ext, Token::new(bits())).unwrap();
    inst.push_token(ext, Token::new(bits())).unwrap();
    assert!(inst.push_token(ext, Token::new(bits())).is_err());
    // Edge 1 (src -> dec0) has capacity 1; occupy it.
    inst.push_token(1, Token::new(bits())).unwrap();
    inst.pop_inputs(0).unwrap();
    inst.set_running(0).unwrap();
    let out = TaskOutput { outputs: vec![Some(bits()); 3], result: None, ret: Some(3) };
    assert!(!has_room_for(&inst, 0, &out));
    assert!(on_task_complete(&mut inst, 0, &out).is_err());
    assert_eq!(inst.state(0), TaskState::Running);
    assert_eq!(inst.queue_len(2), 0);
}
