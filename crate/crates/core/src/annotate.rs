// SPDX-License-Identifier: Apache-2.0

//! Attaches trace data to a hyperflow graph: value and taint change-points
//! on vertices, predicate activation windows on edges.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::flow::Predicate;
use crate::graph::{ActivationWindow, HyperflowGraph, Time, TraceInfo, VertexSample};
use crate::sim::SimTrace;
use crate::vcd::{self, WaveVar, Waveform, TAINT_SUFFIX};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotateError {
    #[error("functional trace ends at {func} but taint trace ends at {taint}")]
    TimebaseMismatch { func: Time, taint: Time },
    #[error("functional timescale `{func}` differs from taint timescale `{taint}`")]
    TimescaleMismatch { func: String, taint: String },
    #[error("`{signal}` is {design} bits wide in the design but {trace} bits in the {which} trace")]
    WidthMismatch {
        signal: String,
        design: u32,
        trace: u32,
        which: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnotateWarning {
    MissingFunctional(String),
    MissingTaint(String),
}

impl fmt::Display for AnnotateWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnotateWarning::MissingFunctional(s) => {
                write!(f, "no functional trace for `{s}`; assuming constant 0")
            }
            AnnotateWarning::MissingTaint(s) => {
                write!(f, "no taint trace for `{s}`; assuming untainted")
            }
        }
    }
}

/// Name lookup tolerant of extra enclosing scopes (for example a testbench
/// wrapper). Exact matches win over suffix matches.
fn name_index<'a>(w: &'a Waveform, strip: &str) -> HashMap<&'a str, &'a WaveVar> {
    let mut exact = HashMap::new();
    let mut suffix: HashMap<&str, &WaveVar> = HashMap::new();
    for v in &w.vars {
        let Some(name) = v.name.strip_suffix(strip) else {
            continue;
        };
        if strip.is_empty() && v.name.ends_with(TAINT_SUFFIX) {
            continue;
        }
        exact.insert(name, v);
        for (i, c) in name.char_indices() {
            if c == '/' {
                suffix.entry(&name[i + 1..]).or_insert(v);
            }
        }
    }
    for (k, v) in suffix {
        exact.entry(k).or_insert(v);
    }
    exact
}

fn merge(func: Option<&WaveVar>, taint: Option<&WaveVar>) -> Vec<VertexSample> {
    let mut times: Vec<Time> = vec![0];
    for v in [func, taint].into_iter().flatten() {
        times.extend(v.changes.iter().map(|c| c.0));
    }
    times.sort_unstable();
    times.dedup();
    let mut out: Vec<VertexSample> = Vec::with_capacity(times.len());
    for t in times {
        let val = func.map_or(0, |v| v.at(t));
        let val_taint = taint.map_or(0, |v| v.at(t));
        if out
            .last()
            .is_some_and(|l| l.val == val && l.val_taint == val_taint)
        {
            continue;
        }
        out.push(VertexSample { t, val, val_taint });
    }
    out
}

/// Maximal windows during which `p` holds, given annotated vertices.
pub fn activation_windows(g: &HyperflowGraph, p: &Predicate) -> Vec<ActivationWindow> {
    if p.is_true() {
        return vec![ActivationWindow {
            start: 0,
            end: None,
        }];
    }
    let sigs = p.signals();
    let mut times: Vec<Time> = vec![0];
    for s in &sigs {
        times.extend(g.vertex(*s).vmeta.iter().map(|x| x.t));
    }
    times.sort_unstable();
    times.dedup();
    let widths = |s| g.width(s);
    let mut out = Vec::new();
    let mut open: Option<Time> = None;
    for t in times {
        let holds = p.eval(&|s| g.vertex(s).at(t).0, &widths);
        match (holds, open) {
            (true, None) => open = Some(t),
            (false, Some(start)) => {
                out.push(ActivationWindow {
                    start,
                    end: Some(t),
                });
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        out.push(ActivationWindow { start, end: None });
    }
    out
}

/// Returns an annotated copy of `g`. Existing annotations are replaced, so
/// annotating twice with the same traces is the same as annotating once.
pub fn annotate_graph(
    g: &HyperflowGraph,
    func: &Waveform,
    taint: &Waveform,
    trace_id: &str,
) -> Result<(HyperflowGraph, Vec<AnnotateWarning>), AnnotateError> {
    if func.end != taint.end {
        return Err(AnnotateError::TimebaseMismatch {
            func: func.end,
            taint: taint.end,
        });
    }
    if func.timescale != taint.timescale {
        return Err(AnnotateError::TimescaleMismatch {
            func: func.timescale.clone(),
            taint: taint.timescale.clone(),
        });
    }
    let fidx = name_index(func, "");
    let tidx = name_index(taint, TAINT_SUFFIX);
    let mut out = g.clone();
    let mut warnings = Vec::new();
    for s in g.vertex_ids() {
        let name = g.name(s);
        let width = g.width(s);
        let fv = fidx.get(name).copied();
        let tv = tidx.get(name).copied();
        for (v, which) in [(fv, "functional"), (tv, "taint")] {
            if let Some(v) = v {
                if v.width != width {
                    return Err(AnnotateError::WidthMismatch {
                        signal: name.to_string(),
                        design: width,
                        trace: v.width,
                        which,
                    });
                }
            }
        }
        if fv.is_none() {
            warnings.push(AnnotateWarning::MissingFunctional(name.to_string()));
        }
        if tv.is_none() {
            warnings.push(AnnotateWarning::MissingTaint(name.to_string()));
        }
        out.vertex_mut(s).vmeta = merge(fv, tv);
    }
    let mut cache: HashMap<Predicate, Vec<ActivationWindow>> = HashMap::new();
    for e in g.edge_ids() {
        let p = &g.edge(e).predicate;
        let windows = match cache.get(p) {
            Some(w) => w.clone(),
            None => {
                let w = activation_windows(&out, p);
                cache.insert(p.clone(), w.clone());
                w
            }
        };
        out.edge_mut(e).emeta = windows;
    }
    out.trace = Some(TraceInfo {
        id: trace_id.to_string(),
        end: func.end,
        timescale: func.timescale.clone(),
    });
    Ok((out, warnings))
}

/// Annotates directly from a simulation result.
pub fn annotate_from_trace(g: &HyperflowGraph, trace: &SimTrace, trace_id: &str) -> Result<HyperflowGraph, AnnotateError> {
    let (f, t) = vcd::from_trace(trace, "1ns");
    annotate_graph(g, &f, &t, trace_id).map(|r| r.0)
}
