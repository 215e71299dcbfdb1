// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use hyperflow::flow::{FlowKind, Timing};
use hyperflow::property::{IftProperty, Objective};
use hyperflow::graph::Time;
use hyperflow::rtl::ast::Direction;
use hyperflow::sim::{ClockSpec, Drive, Stimulus};
use hyperflow::{ElaboratedDesign, HyperflowGraph, SignalId, SourceUnit};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const CORPUS: &[&str] = &[
    "alu", "cnt", "diamond", "fsm", "hier", "packer", "pipe", "sel", "shifter", "vault",
];

pub fn corpus_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus").join(file)
}

pub fn corpus_text(file: &str) -> String {
    fs::read_to_string(corpus_path(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

pub fn build_src(src: &str, top: &str) -> (ElaboratedDesign, HyperflowGraph) {
    hyperflow::build(&SourceUnit::single(format!("{top}.sv"), src, top))
        .unwrap_or_else(|e| panic!("{top}: {e}"))
}

pub fn build_corpus(name: &str) -> (ElaboratedDesign, HyperflowGraph) {
    build_src(&corpus_text(&format!("{name}.sv")), name)
}

fn short<'a>(g: &HyperflowGraph, name: &'a str) -> &'a str {
    name.strip_prefix(g.top()).and_then(|n| n.strip_prefix('/')).unwrap_or(name)
}

/// The graph in golden-file notation, sorted.
pub fn golden_lines(g: &HyperflowGraph) -> Vec<String> {
    let mut out = vec![format!("# top {}", g.top())];
    for v in g.vertices() {
        let dir = match v.signal.direction {
            Some(Direction::Input) => "input",
            Some(Direction::Output) => "output",
            None => "-",
        };
        out.push(format!("V {} {} {dir}", short(g, &v.signal.name), v.signal.width));
    }
    let names = |s: SignalId| short(g, g.name(s)).to_string();
    for e in g.edges() {
        let kind = if e.clock_sensitivity {
            'C'
        } else if e.kind == FlowKind::Explicit {
            'E'
        } else {
            'I'
        };
        let ff = if matches!(e.timing, Timing::Clocked { .. }) { " ff" } else { "" };
        out.push(format!(
            "{kind} {} -> {} @{} [{}]{ff}",
            names(e.tail),
            names(e.head),
            e.site.line,
            e.predicate.render(&names)
        ));
    }
    out.sort();
    out
}

/// Non-empty lines of a golden file, sorted.
pub fn golden_file(name: &str) -> Vec<String> {
    let mut v: Vec<String> = corpus_text(&format!("{name}.golden"))
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    v.sort();
    v
}

/// Lines only in the golden file and lines only in the built graph.
pub fn golden_diff(name: &str) -> (Vec<String>, Vec<String>) {
    let (_, g) = build_corpus(name);
    let want: BTreeSet<String> = golden_file(name).into_iter().collect();
    let got: BTreeSet<String> = golden_lines(&g).into_iter().collect();
    (
        want.difference(&got).cloned().collect(),
        got.difference(&want).cloned().collect(),
    )
}

/// Confidentiality property with `asset` as the only source.
pub fn leak_property(d: &ElaboratedDesign, asset: SignalId) -> IftProperty {
    IftProperty {
        objective: Objective::Confidentiality,
        sources: BTreeSet::from([asset]),
        sinks: d.ids().filter(|s| *s != asset).collect(),
    }
}

/// Random drives for every top-level input; an input named `clk` becomes
/// the generated clock.
pub fn random_stimulus(d: &ElaboratedDesign, rng: &mut ChaCha8Rng, duration: Time) -> Stimulus {
    let mut clock = None;
    let mut drives = Vec::new();
    for id in d.ids() {
        let s = d.signal(id);
        if s.direction != Some(Direction::Input) {
            continue;
        }
        let short = s.name.rsplit('/').next().unwrap().to_string();
        if short == "clk" && s.width == 1 {
            clock = Some(ClockSpec {
                signal: short,
                period: 2,
            });
            continue;
        }
        let max = if s.width >= 64 { u64::MAX } else { (1u64 << s.width) - 1 };
        let mut times = vec![0];
        for _ in 0..rng.random_range(0..5) {
            times.push(rng.random_range(1..duration));
        }
        times.sort_unstable();
        times.dedup();
        for t in times {
            drives.push(Drive {
                t,
                signal: short.clone(),
                value: rng.random_range(0..=max),
            });
        }
    }
    drives.sort_by_key(|d| d.t);
    Stimulus {
        clock,
        drives,
        duration,
    }
}
