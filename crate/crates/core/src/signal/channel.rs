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

use rand::Rng;
use rand_distr::StandardNormal;

use super::{Complex64, CplxVec};
use crate::error::{Error, Result};

/// Magnitude below which a pilot or channel coefficient counts as zero.
pub const DEGENERATE_EPS: f64 = 1e-12;

/// Least-squares estimate `H[k] = rx[k] / tx[k]`.
pub fn ls_estimate(rx_pilots: &[Complex64], tx_pilots: &[Complex64]) -> Result<CplxVec> {
    if rx_pilots.len() != tx_pilots.len() {
        return Err(Error::invalid(format!(
            "pilot length mismatch: {} received vs {} sent",
            rx_pilots.len(),
            tx_pilots.len()
        )));
    }
    rx_pilots
        .iter()
        .zip(tx_pilots)
        .enumerate()
        .map(|(index, (r, t))| {
            let magnitude = t.norm();
            if magnitude <= DEGENERATE_EPS {
                Err(Error::DegeneratePilot { index, magnitude })
            } else {
                Ok(r / t)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZfOutput {
    pub symbols: CplxVec,
    /// Subcarriers whose coefficient fell below [`DEGENERATE_EPS`]; zeroed.
    pub degenerate: usize,
}

/// Zero-forcing `x[k] = y[k] / H[k]`. Deep-faded subcarriers are zeroed
/// and counted rather than treated as errors.
pub fn zf_equalize(y: &[Complex64], h: &[Complex64]) -> Result<ZfOutput> {
    if y.len() != h.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} samples vs {} coefficients",
            y.len(),
            h.len()
        )));
    }
    let mut degenerate = 0;
    let symbols = y
        .iter()
        .zip(h)
        .map(|(y, h)| {
            if h.norm() < DEGENERATE_EPS {
                degenerate += 1;
                Complex64::new(0.0, 0.0)
            } else {
                y / h
            }
        })
        .collect();
    Ok(ZfOutput {
        symbols,
        degenerate,
    })
}

/// Adds circular complex Gaussian noise of variance
/// `mean|x|^2 / 10^(snr_db / 10)` per sample. `snr_db = +inf` is noiseless.
pub fn awgn_channel<R: Rng + ?Sized>(x: &[Complex64], snr_db: f64, rng: &mut R) -> CplxVec {
    if snr_db == f64::INFINITY || x.is_empty() {
        return x.to_vec();
    }
    let power = x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
    x.iter()
        .map(|v| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v + Complex64::new(re, im) * sigma
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_symbols(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|k| Complex64::from_polar(1.0, k as f64 * 0.7))
            .collect()
    }

    #[test]
    fn ls_identity_and_exact() {
        let tx = unit_symbols(16);
        let h = ls_estimate(&tx, &tx).unwrap();
        assert!(h.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));

        let h_true: Vec<_> = (0..16).map(|k| Complex64::new(0.5 + k as f64, -0.25)).collect();
        let rx: Vec<_> = tx.iter().zip(&h_true).map(|(t, h)| t * h).collect();
        let est = ls_estimate(&rx, &tx).unwrap();
        for (a, b) in est.iter().zip(&h_true) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn ls_rejects_zero_pilot() {
        let mut tx = unit_symbols(4);
        tx[2] = Complex64::new(0.0, 0.0);
        match ls_estimate(&tx, &tx) {
            Err(Error::DegeneratePilot { index, .. }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ls_noise_at_30db() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tx = unit_symbols(128);
        let h_true: Vec<_> = (0..128)
            .map(|k| Complex64::from_polar(0.5 + (k % 7) as f64 * 0.1, k as f64))
            .collect();
        let clean: Vec<_> = tx.iter().zip(&h_true).map(|(t, h)| t * h).collect();
        let ref_power = h_true.iter().map(|h| h.norm_sqr()).sum::<f64>() / 128.0;
        let mut mse = 0.0;
        for _ in 0..100 {
            let rx = awgn_channel(&clean, 30.0, &mut rng);
            let est = ls_estimate(&rx, &tx).unwrap();
            mse += est.iter().zip(&h_true).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / 128.0;
        }
        mse /= 100.0;
        assert!(mse < 1e-3 * ref_power, "mse {mse}");
    }

    #[test]
    fn zf_rules() {
        let x = unit_symbols(8);
        let ones = vec![Complex64::new(1.0, 0.0); 8];
        assert_eq!(zf_equalize(&x, &ones).unwrap().symbols, x);

        let h: Vec<_> = (0..8).map(|k| Complex64::new(1.0 + k as f64, 2.0)).collect();
        let y: Vec<_> = x.iter().zip(&h).map(|(a, b)| a * b).collect();
        let eq = zf_equalize(&y, &h).unwrap();
        for (a, b) in eq.symbols.iter().zip(&x) {
            assert!((a - b).norm() < 1e-14);
        }

        let mut faded = ones.clone();
        faded[3] = Complex64::new(0.0, 0.0);
        let out = zf_equalize(&x, &faded).unwrap();
        assert_eq!(out.degenerate, 1);
        assert_eq!(out.symbols[3], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn awgn_statistics_and_determinism() {
        let x = unit_symbols(100_000);
        let y = awgn_channel(&x, f64::INFINITY, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(y, x);

        let snr_db = 3.0;
        let y = awgn_channel(&x, snr_db, &mut ChaCha8Rng::seed_from_u64(1));
        let var = y.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / x.len() as f64;
        let expect = 1.0 / 10f64.powf(snr_db / 10.0);
        assert!((var - expect).abs() / expect < 0.05, "var {var} vs {expect}");

        let again = awgn_channel(&x, snr_db, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(y, again);
    }
}
