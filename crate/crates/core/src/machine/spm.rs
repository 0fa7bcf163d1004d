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

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RegionId = u64;

/// The four sections of a cluster-shared scratchpad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SectionKind {
    TaskCodePool,
    FifoLists,
    LoadIndication,
    ComputeData,
}

impl SectionKind {
    pub const ALL: [SectionKind; 4] = [
        SectionKind::TaskCodePool,
        SectionKind::FifoLists,
        SectionKind::LoadIndication,
        SectionKind::ComputeData,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SectionKind::TaskCodePool => "TASK_CODE_POOL",
            SectionKind::FifoLists => "FIFO_LISTS",
            SectionKind::LoadIndication => "LOAD_INDICATION",
            SectionKind::ComputeData => "COMPUTE_DATA",
        })
    }
}

/// First-fit allocator over one scratchpad section. Holes are implicit gaps
/// between live regions, so freeing a region coalesces with its neighbours.
#[derive(Debug, Clone)]
pub struct SpmSection {
    kind: SectionKind,
    capacity: u64,
    by_offset: BTreeMap<u64, (RegionId, u64)>,
    regions: HashMap<RegionId, (u64, u64)>,
    next_id: RegionId,
    used: u64,
}

impl SpmSection {
    pub fn new(kind: SectionKind, capacity: u64) -> Self {
        SpmSection {
            kind,
            capacity,
            by_offset: BTreeMap::new(),
            regions: HashMap::new(),
            next_id: 1,
            used: 0,
        }
    }

    pub fn kind(&self) -> SectionKind {
        self.kind
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn available(&self) -> u64 {
        self.capacity - self.used
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    fn find_hole(&self, bytes: u64) -> Option<u64> {
        let mut cursor = 0;
        for (&off, &(_, size)) in &self.by_offset {
            if off - cursor >= bytes {
                return Some(cursor);
            }
            cursor = off + size;
        }
        (self.capacity - cursor >= bytes).then_some(cursor)
    }

    pub fn alloc(&mut self, bytes: u64) -> Result<RegionId> {
        if bytes == 0 {
            return Err(Error::invalid("zero-byte scratchpad allocation"));
        }
        let offset = self.find_hole(bytes).ok_or_else(|| Error::AllocationFailure {
            section: self.kind.to_string(),
            requested: bytes,
        })?;
        let id = self.next_id;
        self.next_id += 1;
        self.by_offset.insert(offset, (id, bytes));
        self.regions.insert(id, (offset, bytes));
        self.used += bytes;
        Ok(id)
    }

    pub fn free(&mut self, id: RegionId) -> Result<u64> {
        let (offset, size) = self.regions.remove(&id).ok_or_else(|| {
            Error::ProtocolViolation(format!("free of unknown region {id} in {}", self.kind))
        })?;
        self.by_offset.remove(&offset);
        self.used -= size;
        Ok(size)
    }

    pub fn offset(&self, id: RegionId) -> Option<u64> {
        self.regions.get(&id).map(|&(o, _)| o)
    }

    pub fn size_of(&self, id: RegionId) -> Option<u64> {
        self.regions.get(&id).map(|&(_, s)| s)
    }

    pub fn contains(&self, id: RegionId) -> bool {
        self.regions.contains_key(&id)
    }

    /// Whether all `sizes` could be placed (first-fit, in order) right now.
    pub fn can_fit_all(&self, sizes: &[u64]) -> bool {
        self.can_fit_all_without(sizes, None)
    }

    /// As [`can_fit_all`](Self::can_fit_all), pretending `freed` is released.
    pub fn can_fit_all_without(&self, sizes: &[u64], freed: Option<RegionId>) -> bool {
        let total: u64 = sizes.iter().sum();
        let extra = freed.and_then(|id| self.size_of(id)).unwrap_or(0);
        if total > self.available() + extra {
            return false;
        }
        let mut scratch = self.clone();
        if let Some(id) = freed {
            let _ = scratch.free(id);
        }
        sizes.iter().filter(|&&s| s > 0).all(|&s| scratch.alloc(s).is_ok())
    }

    /// No overlaps, everything in bounds, bookkeeping consistent.
    pub fn check(&self) -> bool {
        let mut cursor = 0;
        let mut sum = 0;
        for (&off, &(_, size)) in &self.by_offset {
            if off < cursor {
                return false;
            }
            cursor = off + size;
            sum += size;
        }
        cursor <= self.capacity && sum == self.used && self.regions.len() == self.by_offset.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alloc_free_restores_capacity() {
        let mut s = SpmSection::new(SectionKind::ComputeData, 100);
        let a = s.alloc(40).unwrap();
        let b = s.alloc(60).unwrap();
        assert!(s.alloc(1).is_err());
        s.free(a).unwrap();
        s.free(b).unwrap();
        assert_eq!(s.available(), 100);
        assert!(s.check());
        assert!(s.free(a).is_err());
    }

    #[test]
    fn first_fit_reuses_middle_hole() {
        let mut s = SpmSection::new(SectionKind::TaskCodePool, 110);
        let a = s.alloc(20).unwrap();
        let b = s.alloc(30).unwrap();
        let c = s.alloc(20).unwrap();
        assert_eq!((s.offset(a), s.offset(b), s.offset(c)), (Some(0), Some(20), Some(50)));
        s.free(b).unwrap();
        let d = s.alloc(30).unwrap();
        assert_eq!(s.offset(d), Some(20));
        // A larger request skips the hole and goes after c.
        s.free(d).unwrap();
        let e = s.alloc(31).unwrap();
        assert_eq!(s.offset(e), Some(70));
    }

    #[test]
    fn coalesces_adjacent_holes() {
        let mut s = SpmSection::new(SectionKind::ComputeData, 90);
        let a = s.alloc(30).unwrap();
        let b = s.alloc(30).unwrap();
        let _c = s.alloc(30).unwrap();
        s.free(a).unwrap();
        s.free(b).unwrap();
        let d = s.alloc(60).unwrap();
        assert_eq!(s.offset(d), Some(0));
    }

    #[test]
    fn fit_checks() {
        let mut s = SpmSection::new(SectionKind::ComputeData, 100);
        let a = s.alloc(50).unwrap();
        assert!(s.can_fit_all(&[25, 25]));
        assert!(!s.can_fit_all(&[25, 26]));
        assert!(s.can_fit_all_without(&[100], Some(a)));
        assert_eq!(s.used(), 50);
    }
}
