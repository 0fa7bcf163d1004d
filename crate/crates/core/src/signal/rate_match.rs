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

use super::{BitVec, LlrVec};
use crate::error::{Error, Result};

/// Redundancy version 0 selection: read the coded block cyclically from
/// offset zero, puncturing the tail when `e < N` and repeating when `e > N`.
pub fn rate_match_rv0(coded: &[u8], e: usize) -> Result<BitVec> {
    if coded.is_empty() {
        return Err(Error::invalid("rate matching needs a non-empty coded block"));
    }
    if e == 0 {
        return Err(Error::invalid("rate-matched length E must be >= 1"));
    }
    Ok(coded.iter().copied().cycle().take(e).collect())
}

/// Soft inverse of [`rate_match_rv0`]: repeated positions are combined by
/// summation and punctured positions are left at LLR 0.
pub fn rate_recover_rv0(llr: &[f64], n: usize) -> Result<LlrVec> {
    if n == 0 {
        return Err(Error::invalid("coded length N must be >= 1"));
    }
    if llr.is_empty() {
        return Err(Error::invalid("rate recovery needs at least one LLR"));
    }
    let mut out = vec![0.0; n];
    for (i, &v) in llr.iter().enumerate() {
        out[i % n] += v;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_rules() {
        let coded = [1, 0, 1, 1, 0, 0, 1, 0];
        assert_eq!(rate_match_rv0(&coded, 8).unwrap(), coded.to_vec());
        assert_eq!(rate_match_rv0(&coded, 4).unwrap(), vec![1, 0, 1, 1]);
        assert_eq!(rate_match_rv0(&[0, 1, 1, 0], 6).unwrap(), vec![0, 1, 1, 0, 0, 1]);
        assert!(rate_match_rv0(&coded, 0).is_err());
    }

    #[test]
    fn recovery_rules() {
        let llr = [0.5, -1.0, 2.0, 3.0];
        assert_eq!(rate_recover_rv0(&llr, 4).unwrap(), llr.to_vec());
        let punct = rate_recover_rv0(&llr, 8).unwrap();
        assert!(punct[4..].iter().all(|&v| v == 0.0));
        assert_eq!(rate_recover_rv0(&[1.0; 6], 4).unwrap(), vec![2.0, 2.0, 1.0, 1.0]);
        assert!(rate_recover_rv0(&llr, 0).is_err());
    }
}
