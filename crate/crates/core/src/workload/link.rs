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

use crate::cost::KernelKind;
use crate::dag::{Endpoint, Payload, TaskIdx, Token, ValidDag};
use crate::error::{Error, Result};
use crate::signal::{
    bp_decode, descramble_llr, gold_sequence, ls_estimate, ofdm_demodulate, ofdm_modulate, polar_encode,
    qpsk_mod, qpsk_soft_demod, rate_match_rv0, rate_recover_rv0, scramble, zf_equalize, BitVec, Complex64,
    CplxVec, LlrVec, PolarCode,
};
use crate::sim::{Execution, TaskExecutor, ThreadContext, WorkItem};
use crate::sched::TaskOutput;

use super::LinkConfig;

/// Frequency-domain pilot: QPSK of a Gold sequence on every subcarrier.
pub fn pilot_symbol(cfg: &LinkConfig) -> Result<CplxVec> {
    qpsk_mod(&gold_sequence(cfg.pilot_c_init, 2 * cfg.ofdm.n_subcarriers)?)
}

fn noise_var(cfg: &LinkConfig) -> f64 {
    if cfg.noiseless() {
        1.0
    } else {
        10f64.powf(-cfg.snr_db / 10.0).max(1e-12)
    }
}

fn modulate_symbols(cfg: &LinkConfig, syms: &[Complex64]) -> Result<CplxVec> {
    let nsc = cfg.ofdm.n_subcarriers;
    let mut out = Vec::with_capacity(syms.len() / nsc * cfg.ofdm.symbol_len());
    for chunk in syms.chunks(nsc) {
        out.extend(ofdm_modulate(chunk, &cfg.ofdm)?);
    }
    Ok(out)
}

fn assemble(cfg: &LinkConfig, users: &[&[Complex64]]) -> Result<CplxVec> {
    let mut out = ofdm_modulate(&pilot_symbol(cfg)?, &cfg.ofdm)?;
    for u in users {
        out.extend_from_slice(u);
    }
    Ok(out)
}

/// Pilot grid and data grid of a received slot.
fn demodulate_slot(cfg: &LinkConfig, samples: &[Complex64]) -> Result<(CplxVec, CplxVec)> {
    let sl = cfg.ofdm.symbol_len();
    if samples.is_empty() || samples.len() % sl != 0 {
        return Err(Error::invalid(format!(
            "slot of {} samples is not a whole number of {sl}-sample symbols",
            samples.len()
        )));
    }
    let mut symbols = samples.chunks(sl);
    let pilot = ofdm_demodulate(symbols.next().expect("non-empty"), &cfg.ofdm)?;
    let mut data = Vec::with_capacity(samples.len());
    for s in symbols {
        data.extend(ofdm_demodulate(s, &cfg.ofdm)?);
    }
    Ok((pilot, data))
}

fn equalize(cfg: &LinkConfig, data: &[Complex64], h: &[Complex64]) -> Result<CplxVec> {
    let mut out = Vec::with_capacity(data.len());
    for chunk in data.chunks(cfg.ofdm.n_subcarriers) {
        out.extend(zf_equalize(chunk, h)?.symbols);
    }
    Ok(out)
}

fn per_user<F>(llr: &[f64], seg: usize, mut f: F) -> Result<LlrVec>
where
    F: FnMut(usize, &[f64]) -> Result<LlrVec>,
{
    let mut out = Vec::with_capacity(llr.len());
    for (j, chunk) in llr.chunks(seg).enumerate() {
        out.extend(f(j, chunk)?);
    }
    Ok(out)
}

fn descramble_all(cfg: &LinkConfig, llr: &[f64]) -> Result<LlrVec> {
    per_user(llr, cfg.rate_match_e, |j, c| descramble_llr(c, cfg.user_c_init(j)))
}

fn recover_all(cfg: &LinkConfig, llr: &[f64]) -> Result<LlrVec> {
    per_user(llr, cfg.rate_match_e, |_, c| rate_recover_rv0(c, cfg.block_len))
}

/// Reference transmitter: the same kernels the TX DAG runs, composed
/// directly.
pub fn transmit_slot(cfg: &LinkConfig, code: &PolarCode, users: &[BitVec]) -> Result<CplxVec> {
    let mut chains = Vec::with_capacity(users.len());
    for (j, info) in users.iter().enumerate() {
        let coded = polar_encode(info, code)?;
        let matched = rate_match_rv0(&coded, cfg.rate_match_e)?;
        let scrambled = scramble(&matched, cfg.user_c_init(j))?;
        chains.push(modulate_symbols(cfg, &qpsk_mod(&scrambled)?)?);
    }
    let refs: Vec<&[Complex64]> = chains.iter().map(Vec::as_slice).collect();
    assemble(cfg, &refs)
}

/// Reference receiver; returns decoded info bits per detected user.
pub fn receive_slot(cfg: &LinkConfig, code: &PolarCode, samples: &[Complex64]) -> Result<Vec<BitVec>> {
    let (pilot, data) = demodulate_slot(cfg, samples)?;
    let h = ls_estimate(&pilot, &pilot_symbol(cfg)?)?;
    let eq = equalize(cfg, &data, &h)?;
    let llr = qpsk_soft_demod(&eq, noise_var(cfg))?;
    let llr = recover_all(cfg, &descramble_all(cfg, &llr)?)?;
    llr.chunks(cfg.block_len)
        .map(|c| bp_decode(c, code, cfg.bp_iters))
        .collect()
}

/// Runs link-chain tasks functionally and reports their kernel work.
#[derive(Debug, Clone)]
pub struct LinkExecutor {
    cfg: LinkConfig,
    code: PolarCode,
    pilot: CplxVec,
}

impl LinkExecutor {
    pub fn new(cfg: &LinkConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(LinkExecutor {
            code: cfg.polar()?,
            pilot: pilot_symbol(cfg)?,
            cfg: cfg.clone(),
        })
    }
}

fn user_index(id: &str) -> usize {
    let digits = id.trim_start_matches(|c: char| !c.is_ascii_digit());
    digits.parse().unwrap_or(0)
}

fn input<'a>(inputs: &'a [Option<Token>], i: usize, what: &str) -> Result<&'a Payload> {
    inputs
        .get(i)
        .and_then(|t| t.as_ref())
        .map(|t| &t.payload)
        .ok_or_else(|| Error::ProtocolViolation(format!("{what}: missing input {i}")))
}

fn bits(p: &Payload) -> Result<&[u8]> {
    p.as_bits().ok_or_else(|| Error::ProtocolViolation("expected bit payload".into()))
}

fn cplx(p: &Payload) -> Result<&[Complex64]> {
    p.as_cplx().ok_or_else(|| Error::ProtocolViolation("expected complex payload".into()))
}

fn llrs(p: &Payload) -> Result<&[f64]> {
    p.as_llr().ok_or_else(|| Error::ProtocolViolation("expected LLR payload".into()))
}

fn work(kind: KernelKind, size: usize, count: usize) -> WorkItem {
    WorkItem {
        kind,
        size: size as u64,
        count: count as u64,
    }
}

impl TaskExecutor for LinkExecutor {
    fn execute(&self, _ctx: &ThreadContext, dag: &ValidDag, task: TaskIdx, inputs: &[Option<Token>]) -> Result<Execution> {
        let cfg = &self.cfg;
        let spec = &dag.tasks()[task];
        let out_edges = &dag.topology.outputs[task];
        let dst_kind = |e: usize| match dag.edges()[e].dst {
            Endpoint::Task(d) => Some(dag.tasks()[d].kernel.kind),
            Endpoint::External => None,
        };
        let nsc = cfg.ofdm.n_subcarriers;
        let e = cfg.rate_match_e;
        let single = |p: Payload| vec![Some(p); out_edges.len()];
        let mut ret = None;
        let (outputs, result, work_items): (Vec<Option<Payload>>, Option<Payload>, Vec<WorkItem>) = match spec.kernel.kind {
            KernelKind::PolarEncode => {
                let coded = polar_encode(bits(input(inputs, 0, &spec.id)?)?, &self.code)?;
                (single(Payload::Bits(coded)), None, vec![work(KernelKind::PolarEncode, cfg.block_len, 1)])
            }
            KernelKind::RateMatch => {
                let m = rate_match_rv0(bits(input(inputs, 0, &spec.id)?)?, e)?;
                (single(Payload::Bits(m)), None, vec![work(KernelKind::RateMatch, e, 1)])
            }
            KernelKind::Scramble => {
                let s = scramble(bits(input(inputs, 0, &spec.id)?)?, cfg.user_c_init(user_index(&spec.id)))?;
                (single(Payload::Bits(s)), None, vec![work(KernelKind::Scramble, e, 1)])
            }
            KernelKind::QpskMod => {
                let s = qpsk_mod(bits(input(inputs, 0, &spec.id)?)?)?;
                (single(Payload::Cplx(s)), None, vec![work(KernelKind::QpskMod, e / 2, 1)])
            }
            KernelKind::OfdmMod => {
                let syms = cplx(input(inputs, 0, &spec.id)?)?;
                let n = syms.len() / nsc;
                let t = modulate_symbols(cfg, syms)?;
                (single(Payload::Cplx(t)), None, vec![work(KernelKind::OfdmMod, nsc, n)])
            }
            KernelKind::SlotAssembly => {
                let users = inputs
                    .iter()
                    .flatten()
                    .map(|t| cplx(&t.payload))
                    .collect::<Result<Vec<_>>>()?;
                let slot = assemble(cfg, &users)?;
                let len = slot.len();
                // The pilot symbol is an inverse FFT of its own.
                let items = vec![
                    work(KernelKind::OfdmMod, nsc, 1),
                    work(KernelKind::SlotAssembly, len, 1),
                ];
                (vec![None; out_edges.len()], Some(Payload::Cplx(slot)), items)
            }
            KernelKind::OfdmDemod => {
                let samples = cplx(input(inputs, 0, &spec.id)?)?;
                let nsym = samples.len() / cfg.ofdm.symbol_len();
                let (pilot, data) = demodulate_slot(cfg, samples)?;
                let outs = out_edges
                    .iter()
                    .map(|&oe| match dst_kind(oe) {
                        Some(KernelKind::LsEstimate) => Some(Payload::Cplx(pilot.clone())),
                        _ => Some(Payload::Cplx(data.clone())),
                    })
                    .collect();
                (outs, None, vec![work(KernelKind::OfdmDemod, nsc, nsym)])
            }
            KernelKind::LsEstimate => {
                let h = ls_estimate(cplx(input(inputs, 0, &spec.id)?)?, &self.pilot)?;
                (single(Payload::Cplx(h)), None, vec![work(KernelKind::LsEstimate, nsc, 1)])
            }
            KernelKind::ZfEqualize => {
                let mut h = None;
                let mut data = None;
                for (&ie, tok) in dag.topology.inputs[task].iter().zip(inputs) {
                    let p = tok.as_ref().map(|t| &t.payload);
                    match dag.edges()[ie].src {
                        Endpoint::Task(s) if dag.tasks()[s].kernel.kind == KernelKind::LsEstimate => h = p,
                        _ => data = p,
                    }
                }
                let h = cplx(h.ok_or_else(|| Error::ProtocolViolation("zf: no channel estimate".into()))?)?;
                let data = cplx(data.ok_or_else(|| Error::ProtocolViolation("zf: no data grid".into()))?)?;
                let users = data.len() / (e / 2);
                let eq = equalize(cfg, data, h)?;
                (single(Payload::Cplx(eq)), None, vec![work(KernelKind::ZfEqualize, e / 2, users)])
            }
            KernelKind::QpskDemod => {
                let y = cplx(input(inputs, 0, &spec.id)?)?;
                let users = y.len() / (e / 2);
                let l = qpsk_soft_demod(y, noise_var(cfg))?;
                (single(Payload::Llr(l)), None, vec![work(KernelKind::QpskDemod, e / 2, users)])
            }
            KernelKind::Descramble => {
                let l = llrs(input(inputs, 0, &spec.id)?)?;
                let users = l.len() / e;
                let d = descramble_all(cfg, l)?;
                (single(Payload::Llr(d)), None, vec![work(KernelKind::Descramble, e, users)])
            }
            KernelKind::RateRecover => {
                let l = llrs(input(inputs, 0, &spec.id)?)?;
                let users = l.len() / e;
                let r = recover_all(cfg, l)?;
                (single(Payload::Llr(r)), None, vec![work(KernelKind::RateRecover, e, users)])
            }
            KernelKind::BlindDetect => {
                let l = llrs(input(inputs, 0, &spec.id)?)?;
                let k = crate::signal::blind_detect(l.len() / cfg.block_len)?;
                ret = Some(k as i64);
                let outs = out_edges
                    .iter()
                    .map(|&oe| {
                        let j = match dag.edges()[oe].dst {
                            Endpoint::Task(d) => user_index(&dag.tasks()[d].id),
                            Endpoint::External => usize::MAX,
                        };
                        (j < k).then(|| Payload::Llr(l[j * cfg.block_len..(j + 1) * cfg.block_len].to_vec()))
                    })
                    .collect();
                (outs, None, vec![work(KernelKind::BlindDetect, cfg.block_len, 1)])
            }
            KernelKind::BpDecode => {
                let l = llrs(input(inputs, 0, &spec.id)?)?;
                let b = bp_decode(l, &self.code, cfg.bp_iters)?;
                (single(Payload::Bits(b)), None, vec![work(KernelKind::BpDecode, cfg.block_len, 1)])
            }
            KernelKind::Aggregate => {
                let mut all = Vec::new();
                let mut n = 0;
                for t in inputs.iter().flatten() {
                    all.extend_from_slice(bits(&t.payload)?);
                    n += 1;
                }
                let items = vec![work(KernelKind::Aggregate, cfg.info_len, n)];
                if out_edges.is_empty() {
                    (Vec::new(), Some(Payload::Bits(all)), items)
                } else {
                    (single(Payload::Bits(all)), None, items)
                }
            }
            other => {
                return Err(Error::invalid(format!("kernel `{other}` is not part of the link chain")));
            }
        };
        let result = if out_edges.is_empty() && result.is_none() {
            outputs.first().cloned().flatten()
        } else {
            result
        };
        Ok(Execution {
            output: TaskOutput { outputs, result, ret },
            work: work_items,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_loopback_noiseless() {
        let cfg = LinkConfig {
            users_per_slot: 3,
            ..LinkConfig::default()
        };
        let code = cfg.polar().unwrap();
        let users: Vec<BitVec> = (0..3)
            .map(|j| (0..cfg.info_len).map(|i| ((i * 7 + j * 3) % 5 == 0) as u8).collect())
            .collect();
        let slot = transmit_slot(&cfg, &code, &users).unwrap();
        assert_eq!(slot.len(), (1 + 3 * cfg.symbols_per_user()) * cfg.ofdm.symbol_len());
        let back = receive_slot(&cfg, &code, &slot).unwrap();
        assert_eq!(back, users);
    }

    #[test]
    fn user_index_parses_suffix() {
        assert_eq!(user_index("bp_decode17"), 17);
        assert_eq!(user_index("scr0"), 0);
        assert_eq!(user_index("aggregate"), 0);
    }
}
