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

//! Length-31 Gold sequence and (de)scrambling.

use super::{BitVec, LlrVec};
use crate::error::{Error, Result};

/// Number of initial outputs discarded from both m-sequences.
pub const GOLD_NC: usize = 1600;

const MASK31: u32 = 0x7fff_ffff;

/// `c(n) = x1(n + Nc) xor x2(n + Nc)` with x1 taps `x^31 + x^3 + 1`
/// (seeded `1, 0, ..., 0`) and x2 taps `x^31 + x^3 + x^2 + x + 1`
/// (seeded from `c_init`).
pub fn gold_sequence(c_init: u32, length: usize) -> Result<BitVec> {
    if c_init > MASK31 {
        return Err(Error::invalid(format!("c_init {c_init:#x} exceeds 31 bits")));
    }
    // Bit i of each register holds x(n + i).
    let mut x1: u32 = 1;
    let mut x2: u32 = c_init;
    let step = |x1: &mut u32, x2: &mut u32| {
        let f1 = (*x1 ^ (*x1 >> 3)) & 1;
        let f2 = (*x2 ^ (*x2 >> 1) ^ (*x2 >> 2) ^ (*x2 >> 3)) & 1;
        *x1 = (*x1 >> 1) | (f1 << 30);
        *x2 = (*x2 >> 1) | (f2 << 30);
    };
    for _ in 0..GOLD_NC {
        step(&mut x1, &mut x2);
    }
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        out.push(((x1 ^ x2) & 1) as u8);
        step(&mut x1, &mut x2);
    }
    Ok(out)
}

pub fn scramble(bits: &[u8], c_init: u32) -> Result<BitVec> {
    let c = gold_sequence(c_init, bits.len())?;
    Ok(bits.iter().zip(c).map(|(b, g)| b ^ g).collect())
}

/// Soft-domain descrambling: flips the sign of every LLR whose Gold bit is 1.
pub fn descramble_llr(llr: &[f64], c_init: u32) -> Result<LlrVec> {
    let c = gold_sequence(c_init, llr.len())?;
    Ok(llr
        .iter()
        .zip(c)
        .map(|(&v, g)| if g == 1 { -v } else { v })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bit-serial reference: explicit arrays of both m-sequences.
    fn lfsr_oracle(c_init: u32, length: usize) -> (Vec<u8>, Vec<u8>) {
        let total = GOLD_NC + length + 31;
        let mut x1 = vec![0u8; total];
        let mut x2 = vec![0u8; total];
        x1[0] = 1;
        for i in 0..31 {
            x2[i] = ((c_init >> i) & 1) as u8;
        }
        for n in 0..total - 31 {
            x1[n + 31] = (x1[n + 3] + x1[n]) % 2;
            x2[n + 31] = (x2[n + 3] + x2[n + 2] + x2[n + 1] + x2[n]) % 2;
        }
        (
            x1[GOLD_NC..GOLD_NC + length].to_vec(),
            x2[GOLD_NC..GOLD_NC + length].to_vec(),
        )
    }

    #[test]
    fn zero_seed_is_pure_x1() {
        let (x1, x2) = lfsr_oracle(0, 200);
        assert!(x2.iter().all(|&b| b == 0));
        assert_eq!(gold_sequence(0, 200).unwrap(), x1);
    }

    #[test]
    fn matches_bit_serial_oracle() {
        for seed in [1u32, 0x1234_5678 & MASK31, MASK31, 51_966] {
            let (x1, x2) = lfsr_oracle(seed, 100);
            let expect: Vec<u8> = x1.iter().zip(&x2).map(|(a, b)| a ^ b).collect();
            assert_eq!(gold_sequence(seed, 100).unwrap(), expect, "seed {seed}");
        }
        let (x1, x2) = lfsr_oracle(1, 64);
        let expect: Vec<u8> = x1.iter().zip(&x2).map(|(a, b)| a ^ b).collect();
        assert_eq!(gold_sequence(1, 64).unwrap(), expect);
    }

    #[test]
    fn rejects_wide_seed() {
        assert!(gold_sequence(1 << 31, 4).is_err());
    }

    #[test]
    fn scramble_properties() {
        let bits: Vec<u8> = (0..256).map(|i| ((i * 7 + 3) % 5 % 2) as u8).collect();
        let s = scramble(&bits, 77).unwrap();
        assert_eq!(scramble(&s, 77).unwrap(), bits);
        let gold = gold_sequence(77, 256).unwrap();
        assert_eq!(scramble(&[0; 256], 77).unwrap(), gold);
        let xor: Vec<u8> = bits.iter().zip(&gold).map(|(a, b)| a ^ b).collect();
        assert_eq!(s, xor);
    }

    #[test]
    fn descramble_properties() {
        let llr: Vec<f64> = (0..64).map(|i| i as f64 - 31.5).collect();
        let gold = gold_sequence(9, 64).unwrap();
        let d = descramble_llr(&llr, 9).unwrap();
        for i in 0..64 {
            if gold[i] == 0 {
                assert_eq!(d[i], llr[i]);
            } else {
                assert_eq!(d[i], -llr[i]);
            }
        }
        assert_eq!(descramble_llr(&d, 9).unwrap(), llr);
    }
}
