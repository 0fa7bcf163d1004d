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

use super::{check_bits, hard_decision, BitVec, LlrVec};
use crate::error::{Error, Result};

/// Prior LLR pinned on frozen positions; behaves as +inf under min-sum.
pub const FROZEN_PRIOR: f64 = 1e9;

/// Default design SNR for the Bhattacharyya construction, in dB.
pub const DESIGN_SNR_DB: f64 = 0.0;

/// A polar code in natural (non bit-reversed) order: `x = u * F^{(x)n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarCode {
    n: u32,
    k: usize,
    frozen_mask: BitVec,
    info_positions: Vec<usize>,
}

impl PolarCode {
    /// Constructs a length-`block_len` code with `k` information bits, freezing
    /// the `block_len - k` positions with the largest Bhattacharyya parameter
    /// at 0 dB design SNR.
    pub fn new(block_len: usize, k: usize) -> Result<Self> {
        Self::with_design_snr(block_len, k, DESIGN_SNR_DB)
    }

    pub fn with_design_snr(block_len: usize, k: usize, design_snr_db: f64) -> Result<Self> {
        let n = log2_exact(block_len)?;
        if k > block_len {
            return Err(Error::invalid(format!("K={k} exceeds N={block_len}")));
        }
        let z = bhattacharyya(n, design_snr_db);
        let mut order: Vec<usize> = (0..block_len).collect();
        // Least reliable first; ties broken by lower index so the set is deterministic.
        order.sort_by(|&a, &b| z[b].total_cmp(&z[a]).then(a.cmp(&b)));
        let mut mask = vec![0u8; block_len];
        for &i in &order[..block_len - k] {
            mask[i] = 1;
        }
        Self::from_frozen_mask(mask)
    }

    /// Builds a code from an explicit frozen mask (1 = frozen).
    pub fn from_frozen_mask(frozen_mask: BitVec) -> Result<Self> {
        let n = log2_exact(frozen_mask.len())?;
        check_bits(&frozen_mask)?;
        let info_positions: Vec<usize> = frozen_mask
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == 0)
            .map(|(i, _)| i)
            .collect();
        Ok(PolarCode {
            n,
            k: info_positions.len(),
            frozen_mask,
            info_positions,
        })
    }

    pub fn from_frozen_positions(block_len: usize, frozen: &[usize]) -> Result<Self> {
        let mut mask = vec![0u8; block_len];
        for &i in frozen {
            if i >= block_len {
                return Err(Error::invalid(format!("frozen index {i} >= N={block_len}")));
            }
            mask[i] = 1;
        }
        Self::from_frozen_mask(mask)
    }

    pub fn log2_len(&self) -> u32 {
        self.n
    }

    pub fn block_len(&self) -> usize {
        self.frozen_mask.len()
    }

    pub fn info_len(&self) -> usize {
        self.k
    }

    pub fn frozen_mask(&self) -> &[u8] {
        &self.frozen_mask
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen_mask[i] == 1
    }
}

fn log2_exact(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::invalid(format!("block length {len} is not a power of two")));
    }
    Ok(len.trailing_zeros())
}

fn bhattacharyya(n: u32, design_snr_db: f64) -> Vec<f64> {
    // Children land at 2j / 2j+1, which matches natural-order F^{(x)n}.
    let mut z = vec![(-(10f64.powf(design_snr_db / 10.0))).exp()];
    for _ in 0..n {
        z = z
            .iter()
            .flat_map(|&t| [2.0 * t - t * t, t * t])
            .collect();
    }
    z
}

/// Places `info` on the non-frozen positions and multiplies by `F^{(x)n}`
/// over GF(2). No bit-reversal permutation is applied.
pub fn polar_encode(info: &[u8], code: &PolarCode) -> Result<BitVec> {
    if info.len() != code.k {
        return Err(Error::invalid(format!(
            "info length {} != K={}",
            info.len(),
            code.k
        )));
    }
    check_bits(info)?;
    let mut u = vec![0u8; code.block_len()];
    for (&pos, &bit) in code.info_positions.iter().zip(info) {
        u[pos] = bit;
    }
    transform(&mut u);
    Ok(u)
}

/// In-place `v <- v * F^{(x)n}`; stage `s` pairs indices `j` and `j + 2^s`.
pub(crate) fn transform(v: &mut [u8]) {
    let len = v.len();
    let mut half = 1;
    while half < len {
        for start in (0..len).step_by(2 * half) {
            for j in start..start + half {
                v[j] ^= v[j + half];
            }
        }
        half <<= 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpOptions {
    pub max_iters: usize,
    /// Stop once the re-encoded u-domain decisions agree with the x-domain ones.
    pub early_exit: bool,
}

impl Default for BpOptions {
    fn default() -> Self {
        BpOptions {
            max_iters: 30,
            early_exit: false,
        }
    }
}

/// Min-sum belief propagation over the natural-order polar factor graph.
/// Returns the `K` information-bit decisions in ascending position order.
pub fn bp_decode(llr: &[f64], code: &PolarCode, max_iters: usize) -> Result<BitVec> {
    bp_decode_with(
        llr,
        code,
        BpOptions {
            max_iters,
            early_exit: false,
        },
    )
    .map(|(bits, _)| bits)
}

/// Like [`bp_decode`], also reporting the number of iterations run.
pub fn bp_decode_with(llr: &[f64], code: &PolarCode, opts: BpOptions) -> Result<(BitVec, usize)> {
    let len = code.block_len();
    if llr.len() != len {
        return Err(Error::invalid(format!(
            "LLR length {} != N={len}",
            llr.len()
        )));
    }
    if opts.max_iters == 0 {
        return Err(Error::invalid("max_iters must be >= 1"));
    }
    if code.k == 0 {
        return Ok((Vec::new(), 0));
    }
    let stages = code.n as usize;
    // left[s] / right[s]: messages at column s, column 0 = u, column n = x.
    let mut left: Vec<LlrVec> = vec![vec![0.0; len]; stages + 1];
    let mut right: Vec<LlrVec> = vec![vec![0.0; len]; stages + 1];
    left[stages].copy_from_slice(llr);
    for (i, r) in right[0].iter_mut().enumerate() {
        if code.is_frozen(i) {
            *r = FROZEN_PRIOR;
        }
    }

    let mut iters = 0;
    for _ in 0..opts.max_iters {
        iters += 1;
        for s in (0..stages).rev() {
            let half = 1usize << s;
            let (lo, hi) = left.split_at_mut(s + 1);
            let (l_in, l_out) = (&hi[0], &mut lo[s]);
            let r_in = &right[s];
            for start in (0..len).step_by(2 * half) {
                for a in start..start + half {
                    let b = a + half;
                    l_out[a] = min_sum(l_in[a], l_in[b] + r_in[b]);
                    l_out[b] = min_sum(r_in[a], l_in[a]) + l_in[b];
                }
            }
        }
        for s in 0..stages {
            let half = 1usize << s;
            let (lo, hi) = right.split_at_mut(s + 1);
            let (r_in, r_out) = (&lo[s], &mut hi[0]);
            let l_in = &left[s + 1];
            for start in (0..len).step_by(2 * half) {
                for a in start..start + half {
                    let b = a + half;
                    r_out[a] = min_sum(r_in[a], l_in[b] + r_in[b]);
                    r_out[b] = min_sum(r_in[a], l_in[a]) + r_in[b];
                }
            }
        }
        if opts.early_exit && consistent(&left, &right, stages) {
            break;
        }
    }

    let bits = code
        .info_positions
        .iter()
        .map(|&i| hard_decision(left[0][i] + right[0][i]))
        .collect();
    Ok((bits, iters))
}

#[inline]
fn min_sum(a: f64, b: f64) -> f64 {
    let mag = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -mag
    } else {
        mag
    }
}

fn consistent(left: &[LlrVec], right: &[LlrVec], stages: usize) -> bool {
    let mut u: BitVec = left[0]
        .iter()
        .zip(&right[0])
        .map(|(l, r)| hard_decision(l + r))
        .collect();
    transform(&mut u);
    u.iter()
        .zip(left[stages].iter().zip(&right[stages]))
        .all(|(&bit, (l, r))| bit == hard_decision(l + r))
}
