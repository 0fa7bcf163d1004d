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

//! Hex dumps of kernel input/output arrays for golden-file tests.
//!
//! Reals are encoded as big-endian IEEE-754 doubles, complex samples as
//! `re` then `im`, bits as one byte each.

use super::Complex64;
use crate::error::{Error, Result};

pub fn bits_to_hex(bits: &[u8]) -> String {
    hex::encode(bits)
}

pub fn reals_to_hex(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_be_bytes()).collect();
    hex::encode(bytes)
}

pub fn complex_to_hex(values: &[Complex64]) -> String {
    let bytes: Vec<u8> = values
        .iter()
        .flat_map(|v| v.re.to_be_bytes().into_iter().chain(v.im.to_be_bytes()))
        .collect();
    hex::encode(bytes)
}

pub fn hex_to_bits(s: &str) -> Result<Vec<u8>> {
    hex::decode(s.trim()).map_err(|e| Error::invalid(format!("bad hex: {e}")))
}

pub fn hex_to_reals(s: &str) -> Result<Vec<f64>> {
    let bytes = hex_to_bits(s)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::invalid("real array hex length is not a multiple of 16"));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_be_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn hex_to_complex(s: &str) -> Result<Vec<Complex64>> {
    let reals = hex_to_reals(s)?;
    if reals.len() % 2 != 0 {
        return Err(Error::invalid("complex array has an odd number of reals"));
    }
    Ok(reals
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect())
}

/// One `name input_hex output_hex` line for a kernel invocation.
pub fn golden_line(name: &str, input_hex: &str, output_hex: &str) -> String {
    format!("{name} {input_hex} {output_hex}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn complex_hex_round_trip(v in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 0..32)) {
            let xs: Vec<Complex64> = v.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            prop_assert_eq!(hex_to_complex(&complex_to_hex(&xs)).unwrap(), xs);
        }
    }

    #[test]
    fn bits_hex() {
        assert_eq!(bits_to_hex(&[1, 0, 1]), "010001");
        assert_eq!(hex_to_bits("010001").unwrap(), vec![1, 0, 1]);
        assert!(hex_to_reals("00").is_err());
    }
}
