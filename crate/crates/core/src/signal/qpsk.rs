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

use std::f64::consts::FRAC_1_SQRT_2;

use super::{check_bits, Complex64, CplxVec, LlrVec};
use crate::error::{Error, Result};

/// Gray-mapped QPSK: `((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)`.
pub fn qpsk_mod(bits: &[u8]) -> Result<CplxVec> {
    if bits.len() % 2 != 0 {
        return Err(Error::invalid(format!(
            "QPSK needs an even number of bits, got {}",
            bits.len()
        )));
    }
    check_bits(bits)?;
    Ok(bits
        .chunks_exact(2)
        .map(|p| {
            Complex64::new(
                (1.0 - 2.0 * p[0] as f64) * FRAC_1_SQRT_2,
                (1.0 - 2.0 * p[1] as f64) * FRAC_1_SQRT_2,
            )
        })
        .collect())
}

/// Max-log LLRs for the QPSK mapping above under noise variance `noise_var`.
pub fn qpsk_soft_demod(y: &[Complex64], noise_var: f64) -> Result<LlrVec> {
    if !(noise_var > 0.0) {
        return Err(Error::invalid(format!("noise variance {noise_var} must be > 0")));
    }
    let scale = 2.0 * std::f64::consts::SQRT_2 / noise_var;
    Ok(y.iter().flat_map(|s| [scale * s.re, scale * s.im]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::hard_decision;

    #[test]
    fn constellation() {
        let s = qpsk_mod(&[0, 0, 1, 1, 0, 1, 1, 0]).unwrap();
        assert!((s[0].re - FRAC_1_SQRT_2).abs() < 1e-15 && (s[0].im - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s[1].re + FRAC_1_SQRT_2).abs() < 1e-15 && (s[1].im + FRAC_1_SQRT_2).abs() < 1e-15);
        for v in &s {
            assert!((v.norm() - 1.0).abs() < 1e-15);
        }
        assert!(qpsk_mod(&[0, 1, 1]).is_err());
    }

    #[test]
    fn demod_round_trip_and_scaling() {
        let bits = [0, 0, 0, 1, 1, 0, 1, 1];
        let y = qpsk_mod(&bits).unwrap();
        let llr = qpsk_soft_demod(&y, 0.5).unwrap();
        assert!(llr[0] > 0.0 && llr[1] > 0.0);
        let hard: Vec<u8> = llr.iter().map(|&l| hard_decision(l)).collect();
        assert_eq!(hard, bits);
        let sharper = qpsk_soft_demod(&y, 0.25).unwrap();
        for (a, b) in llr.iter().zip(&sharper) {
            assert!((b - 2.0 * a).abs() < 1e-12);
        }
        assert!(qpsk_soft_demod(&y, 0.0).is_err());
        assert!(qpsk_soft_demod(&y, -1.0).is_err());
    }
}
