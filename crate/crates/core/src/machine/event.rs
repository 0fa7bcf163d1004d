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

//! Deterministic event queue and trace digest.
//!
//! Events are totally ordered by `(time, seq)` where `seq` is assigned at
//! post time, so simultaneous events fire in the order they were posted.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type Cycle = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    DmaDone,
    TileDone,
    Interrupt,
    SchedTick,
    ThreadArrival,
}

#[derive(Debug, Clone)]
pub struct Scheduled<E> {
    pub time: Cycle,
    pub seq: u64,
    pub event: E,
}

impl<E> PartialEq for Scheduled<E> {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl<E> Eq for Scheduled<E> {}

impl<E> PartialOrd for Scheduled<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Scheduled<E> {
    // Reversed so the max-heap pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

#[derive(Debug)]
pub struct EventQueue<E> {
    heap: BinaryHeap<Scheduled<E>>,
    now: Cycle,
    next_seq: u64,
    dispatched: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            now: 0,
            next_seq: 0,
            dispatched: 0,
        }
    }

    pub fn now(&self) -> Cycle {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    /// Posts `event` at `time`; posting into the past is a contract violation.
    pub fn post(&mut self, time: Cycle, event: E) -> Result<u64> {
        if time < self.now {
            return Err(Error::ProtocolViolation(format!(
                "event posted at {time} before current time {}",
                self.now
            )));
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Scheduled { time, seq, event });
        Ok(seq)
    }

    pub fn peek_time(&self) -> Option<Cycle> {
        self.heap.peek().map(|s| s.time)
    }

    /// Removes the earliest event and advances the clock to it.
    pub fn pop(&mut self) -> Option<Scheduled<E>> {
        let next = self.heap.pop()?;
        debug_assert!(next.time >= self.now);
        self.now = next.time;
        self.dispatched += 1;
        Some(next)
    }

    /// Dispatches every event with `time <= until` through `handler`, then
    /// sets the clock to `until`. Handlers may post further events.
    pub fn run_until<F>(&mut self, until: Cycle, mut handler: F) -> Result<()>
    where
        F: FnMut(&mut Self, Scheduled<E>) -> Result<()>,
    {
        while self.peek_time().is_some_and(|t| t <= until) {
            let ev = self.pop().expect("peeked");
            handler(self, ev)?;
        }
        self.now = self.now.max(until);
        Ok(())
    }
}

/// One dispatched event as it appears in traces.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub t: Cycle,
    pub seq: u64,
    pub kind: EventKind,
    pub cluster: Option<usize>,
    pub tile: Option<usize>,
    pub thread: Option<u64>,
    pub task: Option<usize>,
    pub bytes: u64,
}

/// Rolling SHA-256 over the ordered event stream.
#[derive(Clone)]
pub struct TraceDigest {
    hasher: Sha256,
    events: u64,
}

impl Default for TraceDigest {
    fn default() -> Self {
        TraceDigest {
            hasher: Sha256::new(),
            events: 0,
        }
    }
}

impl std::fmt::Debug for TraceDigest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TraceDigest")
            .field("events", &self.events)
            .field("hex", &self.hex())
            .finish()
    }
}

impl TraceDigest {
    pub fn record(&mut self, r: &TraceRecord) {
        let opt = |v: Option<u64>| v.map_or(u64::MAX, |x| x);
        self.hasher.update(r.t.to_le_bytes());
        self.hasher.update(r.seq.to_le_bytes());
        self.hasher.update([r.kind as u8]);
        self.hasher.update(opt(r.cluster.map(|c| c as u64)).to_le_bytes());
        self.hasher.update(opt(r.tile.map(|c| c as u64)).to_le_bytes());
        self.hasher.update(opt(r.thread).to_le_bytes());
        self.hasher.update(opt(r.task.map(|c| c as u64)).to_le_bytes());
        self.hasher.update(r.bytes.to_le_bytes());
        self.events += 1;
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Lowercase hex of the digest so far.
    pub fn hex(&self) -> String {
        hex::encode(self.hasher.clone().finalize())
    }
}

/// Writes trace records as JSON lines.
pub struct TraceWriter {
    out: Box<dyn Write + Send>,
}

impl TraceWriter {
    pub fn new(out: Box<dyn Write + Send>) -> Self {
        TraceWriter { out }
    }

    pub fn write(&mut self, r: &TraceRecord) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.out, r)?;
        self.out.write_all(b"\n")
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_time_fires_in_post_order() {
        let mut q = EventQueue::new();
        q.post(5, "a").unwrap();
        q.post(5, "b").unwrap();
        q.post(3, "c").unwrap();
        let order: Vec<_> = std::iter::from_fn(|| q.pop().map(|s| s.event)).collect();
        assert_eq!(order, vec!["c", "a", "b"]);
    }

    #[test]
    fn run_until_empty_sets_clock() {
        let mut q: EventQueue<()> = EventQueue::new();
        q.run_until(42, |_, _| Ok(())).unwrap();
        assert_eq!(q.now(), 42);
    }

    #[test]
    fn past_post_rejected() {
        let mut q = EventQueue::new();
        q.post(10, 1).unwrap();
        q.pop();
        assert!(q.post(9, 2).is_err());
    }

    #[test]
    fn handlers_interleave_in_total_order() {
        // e1@10 posts e4@10 and e5@12; e2@10, e3@11 were posted up front.
        let mut q = EventQueue::new();
        q.post(10, 1).unwrap();
        q.post(10, 2).unwrap();
        q.post(11, 3).unwrap();
        let mut seen = Vec::new();
        q.run_until(100, |q, ev| {
            seen.push((ev.time, ev.event));
            if ev.event == 1 {
                q.post(10, 4)?;
                q.post(12, 5)?;
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, vec![(10, 1), (10, 2), (10, 4), (11, 3), (12, 5)]);
    }

    #[test]
    fn digest_is_order_sensitive() {
        let rec = |t, seq| TraceRecord {
            t,
            seq,
            kind: EventKind::SchedTick,
            cluster: Some(0),
            tile: None,
            thread: None,
            task: None,
            bytes: 0,
        };
        let mut a = TraceDigest::default();
        a.record(&rec(1, 0));
        a.record(&rec(2, 1));
        let mut b = TraceDigest::default();
        b.record(&rec(2, 1));
        b.record(&rec(1, 0));
        assert_ne!(a.hex(), b.hex());
        assert_eq!(a.hex().len(), 64);
        assert!(a.hex().chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
    }
}
