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


use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wbpsim::signal::{
    awgn_channel, bp_decode, descramble_llr, fft, hard_decision, ls_estimate, ofdm_demodulate, ofdm_modulate,
    polar_encode, qpsk_mod, qpsk_soft_demod, rate_match_rv0, rate_recover_rv0, scramble, zf_equalize, Complex64,
    OfdmConfig, PolarCode,
};

fn cplx(v: &[(f64, f64)]) -> Vec<Complex64> {
    v.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

proptest! {
    #[test]
    fn fft_parseval(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64)) {
        let x = cplx(&v);
        let y = fft(&x, false).unwrap();
        let ex: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0;
        prop_assert!((ex - ey).abs() < 1e-9);
    }

    #[test]
    fn ofdm_round_trip(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 128)) {
        let cfg = OfdmConfig::default();
        let x = cplx(&v);
        let back = ofdm_demodulate(&ofdm_modulate(&x, &cfg).unwrap(), &cfg).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn polar_encoding_is_linear(a in prop::collection::vec(0u8..2, 32), b in prop::collection::vec(0u8..2, 32)) {
        let code = PolarCode::new(64, 32).unwrap();
        let sum = polar_encode(&xor(&a, &b), &code).unwrap();
        let parts = xor(&polar_encode(&a, &code).unwrap(), &polar_encode(&b, &code).unwrap());
        prop_assert_eq!(sum, parts);
    }

    #[test]
    fn scramble_is_an_involution(bits in prop::collection::vec(0u8..2, 1..600), seed in 0u32..0x7fff_ffff) {
        prop_assert_eq!(scramble(&scramble(&bits, seed).unwrap(), seed).unwrap(), bits);
    }

    #[test]
    fn soft_descramble_matches_hard(bits in prop::collection::vec(0u8..2, 1..300), seed in 0u32..1000) {
        let s = scramble(&bits, seed).unwrap();
        let llr: Vec<f64> = s.iter().map(|&b| if b == 0 { 2.0 } else { -2.0 }).collect();
        let d = descramble_llr(&llr, seed).unwrap();
        let hard: Vec<u8> = d.iter().map(|&l| hard_decision(l)).collect();
        prop_assert_eq!(hard, bits);
    }

    #[test]
    fn rate_match_repeat_then_combine(bits in prop::collection::vec(0u8..2, 16), reps in 1usize..4) {
        let e = 16 * reps;
        let m = rate_match_rv0(&bits, e).unwrap();
        prop_assert_eq!(m.len(), e);
        let llr: Vec<f64> = m.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect();
        let r = rate_recover_rv0(&llr, 16).unwrap();
        for (v, &b) in r.iter().zip(&bits) {
            prop_assert_eq!(*v, if b == 0 { reps as f64 } else { -(reps as f64) });
        }
    }
}

#[test]
fn bp_recovers_clean_codewords() {
    let code = PolarCode::new(512, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let info: Vec<u8> = (0..256).map(|_| rng.gen_range(0..2u8)).collect();
        let x = polar_encode(&info, &code).unwrap();
        let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { 4.0 } else { -4.0 }).collect();
        assert_eq!(bp_decode(&llr, &code, 30).unwrap(), info);
    }
}

#[test]
fn bp_corrects_channel_errors() {
    // BPSK over AWGN at 3 dB Eb/N0, rate 1/2: at most one frame in twenty fails.
    let code = PolarCode::new(512, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sigma2 = 1.0 / 10f64.powf(0.3);
    let mut failures = 0;
    let mut raw_errors = 0;
    for _ in 0..20 {
        let info: Vec<u8> = (0..256).map(|_| rng.gen_range(0..2u8)).collect();
        let x = polar_encode(&info, &code).unwrap();
        let llr: Vec<f64> = x
            .iter()
            .map(|&b| {
                let n: f64 = rng.sample(rand_distr::StandardNormal);
                let y = 1.0 - 2.0 * b as f64 + n * sigma2.sqrt();
                2.0 * y / sigma2
            })
            .collect();
        raw_errors += llr.iter().zip(&x).filter(|(l, b)| hard_decision(**l) != **b).count();
        failures += usize::from(bp_decode(&llr, &code, 30).unwrap() != info);
    }
    assert!(raw_errors > 200, "channel too clean to test: {raw_errors}");
    assert!(failures <= 1, "{failures} of 20 frames failed");
}

#[test]
fn qpsk_hard_decisions_round_trip() {
    let bits: Vec<u8> = (0..64).map(|i| (i * 5 % 3 % 2) as u8).collect();
    let llr = qpsk_soft_demod(&qpsk_mod(&bits).unwrap(), 0.1).unwrap();
    let hard: Vec<u8> = llr.iter().map(|&l| hard_decision(l)).collect();
    assert_eq!(hard, bits);
}

#[test]
fn ls_zf_undo_a_frequency_selective_channel() {
    let pilots = qpsk_mod(&(0..256).map(|i| (i % 3 == 0) as u8).collect::<Vec<_>>()).unwrap();
    let h: Vec<Complex64> = (0..128).map(|k| Complex64::from_polar(0.5 + k as f64 / 256.0, k as f64 * 0.1)).collect();
    let rx: Vec<Complex64> = pilots.iter().zip(&h).map(|(p, c)| p * c).collect();
    let est = ls_estimate(&rx, &pilots).unwrap();
    for (a, b) in est.iter().zip(&h) {
        assert!((a - b).norm() < 1e-12);
    }
    let data = qpsk_mod(&(0..256).map(|i| (i % 5 == 1) as u8).collect::<Vec<_>>()).unwrap();
    let y: Vec<Complex64> = data.iter().zip(&h).map(|(d, c)| d * c).collect();
    let eq = zf_equalize(&y, &est).unwrap();
    assert_eq!(eq.degenerate, 0);
    for (a, b) in eq.symbols.iter().zip(&data) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn awgn_is_seeded() {
    let x = vec![Complex64::new(1.0, 0.0); 1000];
    let a = awgn_channel(&x, 10.0, &mut ChaCha8Rng::seed_from_u64(1));
    let b = awgn_channel(&x, 10.0, &mut ChaCha8Rng::seed_from_u64(1));
    assert_eq!(a, b);
    let noise: f64 = a.iter().map(|v| (v - 1.0).norm_sqr()).sum::<f64>() / 1000.0;
    assert!((noise - 0.1).abs() < 0.02, "noise power {noise}");
    assert_eq!(awgn_channel(&x, f64::INFINITY, &mut ChaCha8Rng::seed_from_u64(1)), x);
}
