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

use super::{fft, Complex64, CplxVec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    pub cp_len: usize,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        OfdmConfig {
            n_subcarriers: 128,
            cp_len: 9,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers < 2 || !self.n_subcarriers.is_power_of_two() {
            return Err(Error::invalid(format!(
                "n_subcarriers {} is not a power of two",
                self.n_subcarriers
            )));
        }
        if self.cp_len >= self.n_subcarriers {
            return Err(Error::invalid(format!(
                "cp_len {} must be < n_subcarriers {}",
                self.cp_len, self.n_subcarriers
            )));
        }
        Ok(())
    }

    pub fn symbol_len(&self) -> usize {
        self.n_subcarriers + self.cp_len
    }
}

/// One OFDM symbol: inverse FFT followed by cyclic-prefix insertion.
pub fn ofdm_modulate(freq: &[Complex64], cfg: &OfdmConfig) -> Result<CplxVec> {
    cfg.validate()?;
    if freq.len() != cfg.n_subcarriers {
        return Err(Error::invalid(format!(
            "expected {} subcarriers, got {}",
            cfg.n_subcarriers,
            freq.len()
        )));
    }
    let body = fft(freq, true)?;
    let mut out = Vec::with_capacity(cfg.symbol_len());
    out.extend_from_slice(&body[cfg.n_subcarriers - cfg.cp_len..]);
    out.extend_from_slice(&body);
    Ok(out)
}

pub fn ofdm_demodulate(time: &[Complex64], cfg: &OfdmConfig) -> Result<CplxVec> {
    cfg.validate()?;
    if time.len() != cfg.symbol_len() {
        return Err(Error::invalid(format!(
            "expected {} time samples, got {}",
            cfg.symbol_len(),
            time.len()
        )));
    }
    fft(&time[cfg.cp_len..], false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> OfdmConfig {
        OfdmConfig {
            n_subcarriers: 128,
            cp_len: 16,
        }
    }

    fn ramp() -> Vec<Complex64> {
        (0..128)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect()
    }

    #[test]
    fn cyclic_prefix_copies_tail() {
        let t = ofdm_modulate(&ramp(), &cfg()).unwrap();
        assert_eq!(t.len(), 144);
        assert_eq!(&t[..16], &t[128..]);
    }

    #[test]
    fn round_trip() {
        let x = ramp();
        let back = ofdm_demodulate(&ofdm_modulate(&x, &cfg()).unwrap(), &cfg()).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_subcarrier_is_exponential() {
        let k = 5;
        let mut x = vec![Complex64::new(0.0, 0.0); 128];
        x[k] = Complex64::new(1.0, 0.0);
        let t = ofdm_modulate(&x, &cfg()).unwrap();
        for (n, v) in t[16..].iter().enumerate() {
            let expect = Complex64::from_polar(1.0 / 128.0, 2.0 * PI * (k * n) as f64 / 128.0);
            assert!((v - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn flat_channel_scales_spectrum() {
        let x = ramp();
        let c = Complex64::new(0.3, -1.2);
        let t: Vec<_> = ofdm_modulate(&x, &cfg()).unwrap().iter().map(|v| v * c).collect();
        let y = ofdm_demodulate(&t, &cfg()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a * c - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_inside_cp_rotates_phase() {
        let x = ramp();
        let t = ofdm_modulate(&x, &cfg()).unwrap();
        let s = 3;
        // Starting the FFT window s samples early is a cyclic delay by s.
        let mut shifted = vec![Complex64::new(0.0, 0.0); s];
        shifted.extend_from_slice(&t[..t.len() - s]);
        let y = ofdm_demodulate(&shifted, &cfg()).unwrap();
        for (k, (a, b)) in x.iter().zip(&y).enumerate() {
            let rot = Complex64::from_polar(1.0, -2.0 * PI * (k * s) as f64 / 128.0);
            assert!((a * rot - b).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn length_checks() {
        assert!(ofdm_modulate(&ramp()[..64], &cfg()).is_err());
        assert!(ofdm_demodulate(&ramp(), &cfg()).is_err());
        let bad = OfdmConfig {
            n_subcarriers: 100,
            cp_len: 4,
        };
        assert!(bad.validate().is_err());
    }
}
