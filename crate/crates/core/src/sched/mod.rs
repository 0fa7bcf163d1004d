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

//! Two-level scheduling: thread placement on the main scheduler and task
//! dispatch on each cluster's L2 scheduler.

pub mod task;
pub mod thread;

pub use task::{effective_attr, has_room_for, on_task_complete, select_tile, task_scan, Completion, LoadIndication, ScanResult, TaskOutput};
pub use thread::{
    dag_section_bytes, get_cluster_lru, mem_alloc, mem_pack, mem_unpack, packed_size, thread_manager_query,
    thread_schedule, token_bytes, Allocation, CodeSource, Decision, DeploymentTable, Placement, ScheduleOutcome,
    SchedulerFeatures, TableEntry, ThreadDescriptor, ThreadId, ThreadStatus, Unpacked, FIFO_DESCRIPTOR_BYTES,
    PAYLOAD_HEADER_BYTES,
};
