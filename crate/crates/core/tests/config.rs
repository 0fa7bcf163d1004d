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


use std::path::PathBuf;

use wbpsim::config::{parse_mix, ExperimentConfig, Grid};
use wbpsim::machine::TileClass;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn effective_echo_parses_back() {
    for name in ["3c4t.conf", "minimal.conf", "sweep.conf"] {
        let cfg = ExperimentConfig::load(&data(name)).unwrap();
        let again = ExperimentConfig::parse(&cfg.effective()).unwrap();
        assert_eq!(cfg, again, "{name}");
    }
}

#[test]
fn shipped_configs() {
    let c = ExperimentConfig::load(&data("3c4t.conf")).unwrap();
    assert_eq!((c.run.clusters, c.run.tiles_per_cluster()), (3, 4));
    assert_eq!(c.run.flattened().mix.len(), 12);
    let s = ExperimentConfig::load(&data("sweep.conf")).unwrap();
    assert_eq!(s.run.grid.points().len(), 14);
    assert_eq!(s.run.grid, Grid::parse("4,5 x 3..9").unwrap());
}

#[test]
fn mix_spellings_agree() {
    use TileClass::*;
    for s in ["L,L,S", "LLS", "2L1S"] {
        assert_eq!(parse_mix(s).unwrap(), vec![Large, Large, Small], "{s}");
    }
    assert!(parse_mix("L,Q").is_err());
}

#[test]
fn errors_carry_line_numbers() {
    let e = ExperimentConfig::parse("[system]\nclusters = 2\nclusters = 3\n").unwrap_err();
    assert!(e.to_string().contains("line 3"), "{e}");
    let e = ExperimentConfig::parse("slots = 2\n").unwrap_err();
    assert!(e.to_string().contains("line 1"), "{e}");
    let e = ExperimentConfig::parse("[bogus]\n").unwrap_err();
    assert!(e.to_string().contains("bogus"), "{e}");
    assert!(ExperimentConfig::parse("[system]\nhierarchical = false\nclusters = 2\n").is_err());
    assert!(ExperimentConfig::parse("[link]\nsnr_db = inf\n").unwrap().link.noiseless());
}
