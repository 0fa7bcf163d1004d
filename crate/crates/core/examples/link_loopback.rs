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


//! Sends four users through the full transmit chain and decodes them again,
//! first over a clean channel and then with noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wbpsim::signal::awgn_channel;
use wbpsim::workload::{receive_slot, transmit_slot, LinkConfig};

fn main() -> wbpsim::Result<()> {
    let mut cfg = LinkConfig::default();
    let code = cfg.polar()?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let users: Vec<Vec<u8>> = (0..cfg.users_per_slot)
        .map(|_| (0..cfg.info_len).map(|_| rng.gen_range(0..2u8)).collect())
        .collect();

    let samples = transmit_slot(&cfg, &code, &users)?;
    println!("{} users -> {} time-domain samples", users.len(), samples.len());

    let decoded = receive_slot(&cfg, &code, &samples)?;
    println!("noiseless: exact = {}", decoded == users);

    for snr in [0.0, 4.0, 8.0] {
        cfg.snr_db = snr;
        let noisy = awgn_channel(&samples, snr, &mut rng);
        let out = receive_slot(&cfg, &code, &noisy)?;
        let errors: usize = out
            .iter()
            .zip(&users)
            .map(|(a, b)| a.iter().zip(b).filter(|(x, y)| x != y).count())
            .sum();
        let bits = users.len() * cfg.info_len;
        println!("SNR {snr:>4} dB: {errors} / {bits} bit errors");
    }
    Ok(())
}
