// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{golden_diff, CORPUS};

#[test]
fn corpus_matches_goldens() {
    let mut bad = Vec::new();
    for name in CORPUS {
        let (missing, extra) = golden_diff(name);
        if !missing.is_empty() || !extra.is_empty() {
            bad.push(format!("{name}:\n  missing {missing:#?}\n  extra {extra:#?}"));
        }
    }
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}
