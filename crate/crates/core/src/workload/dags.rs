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

use crate::cost::KernelKind;
use crate::dag::{Dag, KernelRef, TaskSpec, TileAttr, ValidDag, DEFAULT_FIFO_CAPACITY};
use crate::error::{Error, Result};
use crate::signal::MAX_USERS;

use super::LinkConfig;

/// Estimated code image size of each kernel.
pub fn code_bytes(kind: KernelKind) -> u64 {
    use KernelKind::*;
    match kind {
        BpDecode => 8 * 1024,
        Fft | OfdmMod | OfdmDemod => 6 * 1024,
        PolarEncode => 3 * 1024,
        RateMatch | RateRecover | Scramble | Descramble | ZfEqualize => 2 * 1024,
        QpskMod | QpskDemod | LsEstimate => 1536,
        BlindDetect | SlotAssembly | Aggregate => 1024,
    }
}

fn attr(kind: KernelKind) -> TileAttr {
    use KernelKind::*;
    match kind {
        Fft | OfdmMod | OfdmDemod | BpDecode => TileAttr::Large,
        PolarEncode | RateMatch | RateRecover | Scramble | Descramble | QpskMod | QpskDemod => TileAttr::Small,
        LsEstimate | ZfEqualize | BlindDetect | SlotAssembly | Aggregate => TileAttr::Any,
    }
}

fn task(dag: &mut Dag, id: String, kind: KernelKind, size: usize) -> Result<()> {
    dag.add_task(TaskSpec::new(id, KernelRef::new(kind, size as u64), attr(kind), code_bytes(kind)))?;
    Ok(())
}

fn finish(dag: Dag) -> Result<Arc<ValidDag>> {
    dag.validated().map_err(|v| {
        let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
        Error::invalid(format!("invalid link DAG: {}", msgs.join("; ")))
    })
}

/// One encode → rate-match → scramble → modulate → OFDM chain per user,
/// joined at a slot-assembly sink.
pub fn build_tx_dag(cfg: &LinkConfig) -> Result<Arc<ValidDag>> {
    cfg.validate()?;
    if cfg.users_per_slot == 0 {
        return Err(Error::invalid("a transmit slot needs at least one user"));
    }
    let cap = DEFAULT_FIFO_CAPACITY;
    let nsc = cfg.ofdm.n_subcarriers;
    let mut dag = Dag::new();
    for j in 0..cfg.users_per_slot {
        task(&mut dag, format!("enc{j}"), KernelKind::PolarEncode, cfg.block_len)?;
        task(&mut dag, format!("rm{j}"), KernelKind::RateMatch, cfg.rate_match_e)?;
        task(&mut dag, format!("scr{j}"), KernelKind::Scramble, cfg.rate_match_e)?;
        task(&mut dag, format!("mod{j}"), KernelKind::QpskMod, cfg.rate_match_e / 2)?;
        task(&mut dag, format!("ofdm{j}"), KernelKind::OfdmMod, nsc)?;
    }
    task(&mut dag, "slot_assembly".into(), KernelKind::SlotAssembly, nsc)?;
    for j in 0..cfg.users_per_slot {
        dag.add_edge("EXTERNAL", &format!("enc{j}"), cap)?;
    }
    for j in 0..cfg.users_per_slot {
        let chain = [
            format!("enc{j}"),
            format!("rm{j}"),
            format!("scr{j}"),
            format!("mod{j}"),
            format!("ofdm{j}"),
            "slot_assembly".to_string(),
        ];
        for w in chain.windows(2) {
            dag.add_edge(&w[0], &w[1], cap)?;
        }
    }
    finish(dag)
}

/// Worst-case receive chain with twenty decoders behind blind detection.
pub fn build_rx_dag(cfg: &LinkConfig) -> Result<Arc<ValidDag>> {
    cfg.validate()?;
    let cap = DEFAULT_FIFO_CAPACITY;
    let nsc = cfg.ofdm.n_subcarriers;
    let e = cfg.rate_match_e;
    let mut dag = Dag::new();
    task(&mut dag, "ofdm_demod".into(), KernelKind::OfdmDemod, nsc)?;
    task(&mut dag, "ls_estimate".into(), KernelKind::LsEstimate, nsc)?;
    task(&mut dag, "zf_equalize".into(), KernelKind::ZfEqualize, e / 2)?;
    task(&mut dag, "qpsk_demod".into(), KernelKind::QpskDemod, e / 2)?;
    task(&mut dag, "descramble".into(), KernelKind::Descramble, e)?;
    task(&mut dag, "rate_recover".into(), KernelKind::RateRecover, e)?;
    task(&mut dag, "blind_detect".into(), KernelKind::BlindDetect, cfg.block_len)?;
    for j in 0..MAX_USERS {
        task(&mut dag, format!("bp_decode{j}"), KernelKind::BpDecode, cfg.block_len)?;
    }
    task(&mut dag, "aggregate".into(), KernelKind::Aggregate, cfg.info_len)?;
    dag.add_edge("EXTERNAL", "ofdm_demod", cap)?;
    dag.add_edge("ofdm_demod", "ls_estimate", cap)?;
    dag.add_edge("ofdm_demod", "zf_equalize", cap)?;
    for w in ["ls_estimate", "zf_equalize", "qpsk_demod", "descramble", "rate_recover", "blind_detect"].windows(2) {
        dag.add_edge(w[0], w[1], cap)?;
    }
    let decoders: Vec<String> = (0..MAX_USERS).map(|j| format!("bp_decode{j}")).collect();
    for d in &decoders {
        dag.add_edge("blind_detect", d, cap)?;
        dag.add_edge(d, "aggregate", cap)?;
    }
    let group: Vec<&str> = decoders.iter().map(String::as_str).collect();
    dag.add_dismissal("blind_detect", &group)?;
    finish(dag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tx_shapes() {
        let one = build_tx_dag(&LinkConfig {
            users_per_slot: 1,
            ..LinkConfig::default()
        })
        .unwrap();
        assert_eq!(one.len(), 6);
        assert_eq!(one.edges().len(), 6);
        let two = build_tx_dag(&LinkConfig {
            users_per_slot: 2,
            ..LinkConfig::default()
        })
        .unwrap();
        assert_eq!(two.len(), 11);
        let zero = LinkConfig {
            users_per_slot: 0,
            ..LinkConfig::default()
        };
        assert!(build_tx_dag(&zero).is_err());
    }

    #[test]
    fn rx_shape() {
        let rx = build_rx_dag(&LinkConfig::default()).unwrap();
        let decoders = rx
            .tasks()
            .iter()
            .filter(|t| t.kernel.kind == KernelKind::BpDecode)
            .count();
        assert_eq!(decoders, 20);
        assert_eq!(rx.dag.dismissal_rules()[0].max_count, 20);
        assert_eq!(rx.topology.order.len(), rx.len());
    }

    #[test]
    fn rx_dag_id_ignores_user_count() {
        let a = build_rx_dag(&LinkConfig::default()).unwrap();
        let b = build_rx_dag(&LinkConfig {
            users_per_slot: 9,
            ..LinkConfig::default()
        })
        .unwrap();
        assert_eq!(a.id, b.id);
    }
}
