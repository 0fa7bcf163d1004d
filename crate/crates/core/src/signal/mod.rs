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

//! Bit-exact functional kernels for the link chain.
//!
//! Every kernel is a pure function of its inputs; randomness only enters
//! through a caller-supplied seeded generator ([`awgn_channel`]).

mod channel;
pub mod dump;
mod fft;
mod gold;
mod ofdm;
mod polar;
mod qpsk;
mod rate_match;

pub use channel::{awgn_channel, ls_estimate, zf_equalize, ZfOutput, DEGENERATE_EPS};
pub use fft::{fft, fft_in_place};
pub use gold::{descramble_llr, gold_sequence, scramble, GOLD_NC};
pub use ofdm::{ofdm_demodulate, ofdm_modulate, OfdmConfig};
pub use polar::{bp_decode, bp_decode_with, polar_encode, BpOptions, PolarCode, FROZEN_PRIOR};
pub use qpsk::{qpsk_mod, qpsk_soft_demod};
pub use rate_match::{rate_match_rv0, rate_recover_rv0};

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// Hard bits, one per element, each 0 or 1.
pub type BitVec = Vec<u8>;
/// Complex baseband samples.
pub type CplxVec = Vec<Complex64>;
/// Log-likelihood ratios; positive means bit 0 is more likely.
pub type LlrVec = Vec<f64>;

/// Largest number of users the receive chain can decode in one slot.
pub const MAX_USERS: usize = 20;

/// Blind detection is modeled as oracle-correct: it reports the true user
/// count of the slot so the runtime can dismiss unused decoders.
pub fn blind_detect(slot_users: usize) -> Result<usize> {
    if slot_users > MAX_USERS {
        return Err(Error::invalid(format!(
            "user count {slot_users} exceeds the {MAX_USERS}-user worst case"
        )));
    }
    Ok(slot_users)
}

/// Hard decision on a soft bit.
#[inline]
pub fn hard_decision(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

pub(crate) fn check_bits(bits: &[u8]) -> Result<()> {
    match bits.iter().position(|&b| b > 1) {
        Some(i) => Err(Error::invalid(format!("bit {i} is {} (not 0/1)", bits[i]))),
        None => Ok(()),
    }
}
