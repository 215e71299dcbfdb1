// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference implementations of the graph metrics.

use hyperflow::flow::{BitRange, FlowKind, FlowRecord, Predicate, Signal, Timing};
use hyperflow::graph::{EdgeId, Time, VertexSample};
use hyperflow::metrics::Distance;
use hyperflow::sim::{SimTrace, TraceSignal};
use hyperflow::site::SourceSite;
use hyperflow::{build_graph, HyperflowGraph, SignalId};

/// Graph over signals `top/s<i>` with unconditional continuous edges.
pub fn synthetic_graph(top: &str, widths: &[u32], edges: &[(usize, usize)]) -> HyperflowGraph {
    let signals: Vec<Signal> = widths
        .iter()
        .enumerate()
        .map(|(i, w)| Signal {
            id: SignalId(i as u32),
            name: format!("{top}/s{i}"),
            width: *w,
            direction: None,
        })
        .collect();
    let flows: Vec<FlowRecord> = edges
        .iter()
        .enumerate()
        .map(|(k, &(t, h))| FlowRecord {
            tail: SignalId(t as u32),
            head: SignalId(h as u32),
            kind: FlowKind::Explicit,
            predicate: Predicate::TRUE,
            site: SourceSite::new("synthetic.sv", k as u32 + 1, 1),
            timing: Timing::Continuous,
            bits: BitRange { lo: 0, width: widths[h] },
            clock_sensitivity: false,
        })
        .collect();
    build_graph(&signals, &flows).expect("well-formed synthetic graph")
}

/// A trace with zero functional values and the given taint change lists
/// (`(t, taint)` pairs, any order, later duplicates win).
pub fn taint_trace(g: &HyperflowGraph, end: Time, taint: &[Vec<(Time, u64)>]) -> SimTrace {
    let signals = g
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut pts: Vec<(Time, u64)> = taint.get(i).cloned().unwrap_or_default();
            pts.sort_by_key(|p| p.0);
            let mut changes = vec![VertexSample {
                t: 0,
                val: 0,
                val_taint: 0,
            }];
            for (t, x) in pts {
                let last = changes.last_mut().unwrap();
                if last.t == t {
                    last.val_taint = x;
                } else if last.val_taint != x {
                    changes.push(VertexSample {
                        t,
                        val: 0,
                        val_taint: x,
                    });
                }
            }
            changes.dedup_by(|b, a| a.val_taint == b.val_taint);
            TraceSignal {
                name: v.signal.name.clone(),
                width: v.signal.width,
                changes,
            }
        })
        .collect();
    SimTrace { signals, end }
}

/// All-pairs hop distances over the edges (clock-sensitivity edges skipped
/// unless `include_clocked`).
pub fn floyd_warshall(g: &HyperflowGraph, include_clocked: bool) -> Vec<Vec<Option<u32>>> {
    let n = g.vertices().len();
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for e in g.edges() {
        if e.clock_sensitivity && !include_clocked {
            continue;
        }
        let (t, h) = (e.tail.index(), e.head.index());
        if t != h {
            d[t][h] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k] else { continue };
            let via = d[k].clone();
            for (j, kj) in via.into_iter().enumerate() {
                if let Some(kj) = kj {
                    if d[i][j].is_none_or(|x| ik + kj < x) {
                        d[i][j] = Some(ik + kj);
                    }
                }
            }
        }
    }
    d
}

/// Shortest distance to `b` from `a` or from any vertex reachable from `a`
/// that is tainted at `t`; zero when `b` itself is tainted.
pub fn spm_oracle(g: &HyperflowGraph, d: &[Vec<Option<u32>>], a: SignalId, b: SignalId, t: Time) -> Distance {
    let tainted = |v: usize| g.vertices()[v].taint_at(t) != 0;
    if tainted(b.index()) {
        return Distance::Finite(0);
    }
    let n = g.vertices().len();
    (0..n)
        .filter(|&v| v != b.index())
        .filter(|&v| v == a.index() || (tainted(v) && d[a.index()][v].is_some()))
        .filter_map(|v| d[v][b.index()])
        .min()
        .map_or(Distance::Infinite, Distance::Finite)
}

/// Simple paths from `a` to `b` as edge lists, clock-sensitivity edges
/// excluded.
pub fn simple_paths(g: &HyperflowGraph, a: SignalId, b: SignalId) -> Vec<Vec<EdgeId>> {
    fn go(
        g: &HyperflowGraph,
        v: SignalId,
        b: SignalId,
        on: &mut Vec<bool>,
        cur: &mut Vec<EdgeId>,
        out: &mut Vec<Vec<EdgeId>>,
    ) {
        if v == b {
            out.push(cur.clone());
            return;
        }
        for (k, e) in g.edges().iter().enumerate() {
            if e.tail != v || e.clock_sensitivity || on[e.head.index()] {
                continue;
            }
            on[e.head.index()] = true;
            cur.push(EdgeId(k as u32));
            go(g, e.head, b, on, cur, out);
            cur.pop();
            on[e.head.index()] = false;
        }
    }
    let mut on = vec![false; g.vertices().len()];
    on[a.index()] = true;
    let mut out = Vec::new();
    if a != b {
        go(g, a, b, &mut on, &mut Vec::new(), &mut out);
    }
    out
}

/// Replays a path forward in time. The tainted set starts as the times `a`
/// is tainted; a continuous edge keeps the times where it is active and the
/// head is tainted; a clocked edge moves each qualifying read at `s - 1` to
/// the head's tainted run starting at posedge `s`. The path is activated
/// when the final set meets a taint rise of the target.
pub fn path_activated(g: &HyperflowGraph, path: &[EdgeId]) -> bool {
    let end = g.trace.as_ref().expect("annotated").end as usize;
    let v = |s: SignalId| &g.vertices()[s.index()];
    let tainted = |s: SignalId, t: usize| v(s).taint_at(t as Time) != 0;
    let active = |e: EdgeId, t: usize| g.edge(e).emeta.iter().any(|w| w.covers(t as Time));
    let first = g.edge(path[0]).tail;
    let mut h: Vec<bool> = (0..end).map(|t| tainted(first, t)).collect();
    for &e in path {
        let edge = g.edge(e);
        let head = edge.head;
        let mut next = vec![false; end];
        match edge.timing {
            Timing::Continuous => {
                for t in 0..end {
                    next[t] = h[t] && active(e, t) && tainted(head, t);
                }
            }
            Timing::Clocked { clock } => {
                let bit = |t: usize| v(clock).at(t as Time).0 & 1;
                for s in 1..end {
                    let posedge = bit(s) == 1 && bit(s - 1) == 0;
                    if posedge && h[s - 1] && active(e, s - 1) && tainted(head, s) {
                        let mut t = s;
                        while t < end && tainted(head, t) {
                            next[t] = true;
                            t += 1;
                        }
                    }
                }
            }
        }
        h = next;
    }
    let target = g.edge(*path.last().unwrap()).head;
    (0..end).any(|t| {
        let now = v(target).taint_at(t as Time);
        let before = if t == 0 { 0 } else { v(target).taint_at(t as Time - 1) };
        h[t] && now & !before != 0
    })
}

/// `(activated, total)` over all simple paths.
pub fn pam_oracle(g: &HyperflowGraph, a: SignalId, b: SignalId) -> (usize, usize) {
    let paths = simple_paths(g, a, b);
    let hit = paths.iter().filter(|p| path_activated(g, p)).count();
    (hit, paths.len())
}
