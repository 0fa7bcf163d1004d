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


use wbpsim::cost::{dma_cycles, DmaTiming};
use wbpsim::machine::{
    ClusterConfig, ClusterState, DmaEngine, EventQueue, PortDirection, RunState, SectionKind, SpmSection, TileClass,
};

#[test]
fn events_fire_by_time_then_post_order() {
    let mut q = EventQueue::new();
    q.post(30, 'a').unwrap();
    q.post(10, 'b').unwrap();
    q.post(30, 'c').unwrap();
    q.post(10, 'd').unwrap();
    let order: Vec<char> = std::iter::from_fn(|| q.pop().map(|e| e.event)).collect();
    assert_eq!(order, vec!['b', 'd', 'a', 'c']);
    assert_eq!(q.now(), 30);
    assert!(q.post(5, 'x').is_err());
}

#[test]
fn scratchpad_first_fit() {
    let mut s = SpmSection::new(SectionKind::ComputeData, 100);
    let a = s.alloc(40).unwrap();
    let b = s.alloc(30).unwrap();
    let c = s.alloc(30).unwrap();
    assert!(s.alloc(1).is_err());
    s.free(b).unwrap();
    assert!(!s.can_fit_all(&[20, 20]));
    // Freeing c merges 40..100 into one 60-byte hole.
    assert!(s.can_fit_all_without(&[20, 20, 20], Some(c)));
    assert!(!s.can_fit_all_without(&[20, 20, 21], Some(c)));
    let d = s.alloc(20).unwrap();
    assert_eq!(s.offset(d), Some(40));
    assert_eq!(s.offset(a), Some(0));
    assert!(s.check());
    assert!(s.free(b).is_err());
}

#[test]
fn deploy_run_retrieve_sequence() {
    let mut c = ClusterState::new(0, &ClusterConfig::with_mix(1, 1));
    assert_eq!(c.tiles[1].class, TileClass::Small);
    let csr = DmaTiming::default().csr_write_cycles;
    let t = c.deploy_to_tile(0, 1000, 200, 50).unwrap();
    // CSR write, burst, then two CSR writes (port to core, reset released).
    assert_eq!(t.dma.start, 50 + csr);
    assert_eq!(t.dma.end, t.dma.start + dma_cycles(1200, &DmaTiming::default()));
    assert_eq!(t.running_at, t.dma.end + 2 * csr);
    c.begin_run(0).unwrap();
    assert_eq!(c.tiles[0].port(), PortDirection::Core);
    assert_eq!(c.tiles[0].run_state(), RunState::Running);
    assert!(c.tiles[0].set_port_direction(PortDirection::Bus, csr).is_err());
    assert!(c.retrieve(0, 64, 2000).is_err());
    let irq = c.complete_from_tile(0, 2, 2000).unwrap();
    assert_eq!(irq, 2000 + csr);
    assert_eq!(c.tiles[0].csr().return_value_count, 2);
    let back = c.retrieve(0, 64, irq).unwrap();
    assert_eq!(back.end - back.start, dma_cycles(64, &DmaTiming::default()));
    c.release_tile(0, back.end);
    assert!(c.tiles[0].is_idle());
    assert_eq!(c.tiles[0].last_finished, Some(back.end));
    assert!(c.tiles_consistent() && c.spm_consistent());
}

#[test]
fn oversized_deploy_is_refused() {
    let mut c = ClusterState::new(0, &ClusterConfig::with_mix(0, 1));
    let cap = c.tiles[0].tspm_capacity;
    assert!(c.deploy_to_tile(0, cap, 1, 0).is_err());
    assert!(c.tiles[0].is_idle());
}

#[test]
fn dma_queue_serializes() {
    let mut d = DmaEngine::new(DmaTiming::default());
    let a = d.transfer(0, 160);
    let b = d.transfer(5, 16);
    assert_eq!((a.start, a.end), (0, 30));
    assert_eq!((b.start, b.end), (30, 51));
    assert_eq!(d.transfers(), 2);
    assert_eq!(d.bytes(), 176);
}
