// SPDX-License-Identifier: Apache-2.0

//! Static queries: reachability, shortest distances and simple-path
//! enumeration.

use std::collections::VecDeque;

use super::{EdgeId, HyperflowGraph};
use crate::rtl::ir::SignalId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathOptions {
    /// Follow clock-sensitivity edges.
    pub include_clocked: bool,
    pub max_paths: usize,
    /// Maximum number of edges per path; `None` means the vertex count.
    pub max_len: Option<usize>,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            include_clocked: false,
            max_paths: 10_000,
            max_len: None,
        }
    }
}

/// A walk given as its start vertex and edge sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub start: SignalId,
    pub edges: Vec<EdgeId>,
}

impl Path {
    pub fn vertices(&self, g: &HyperflowGraph) -> Vec<SignalId> {
        let mut v = vec![self.start];
        v.extend(self.edges.iter().map(|e| g.edge(*e).head));
        v
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathSet {
    pub paths: Vec<Path>,
    /// Enumeration stopped at `max_paths` or skipped paths longer than
    /// `max_len`.
    pub truncated: bool,
}

impl HyperflowGraph {
    pub(crate) fn edge_enabled(&self, e: EdgeId, include_clocked: bool) -> bool {
        include_clocked || !self.edge(e).clock_sensitivity
    }
}

/// True iff a directed path from `a` to `b` exists; `reachable(a, a)` holds.
pub fn reachable(g: &HyperflowGraph, a: SignalId, b: SignalId, include_clocked: bool) -> bool {
    if a == b {
        return true;
    }
    let mut seen = vec![false; g.vertices().len()];
    let mut stack = vec![a];
    seen[a.index()] = true;
    while let Some(v) = stack.pop() {
        for &e in g.out_edges(v) {
            if !g.edge_enabled(e, include_clocked) {
                continue;
            }
            let h = g.edge(e).head;
            if h == b {
                return true;
            }
            if !seen[h.index()] {
                seen[h.index()] = true;
                stack.push(h);
            }
        }
    }
    false
}

/// Edge-count distance from every vertex to `b` (reverse BFS).
pub fn distances_to(g: &HyperflowGraph, b: SignalId, include_clocked: bool) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.vertices().len()];
    dist[b.index()] = Some(0);
    let mut queue = VecDeque::from([b]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v.index()].unwrap_or(0);
        for &e in g.in_edges(v) {
            if !g.edge_enabled(e, include_clocked) {
                continue;
            }
            let t = g.edge(e).tail;
            if dist[t.index()].is_none() {
                dist[t.index()] = Some(d + 1);
                queue.push_back(t);
            }
        }
    }
    dist
}

/// Enumerates simple (vertex non-repeating) paths from `a` to `b`.
///
/// Parallel edges yield distinct paths. Output order follows the forward
/// adjacency order, so it is deterministic.
pub fn paths(g: &HyperflowGraph, a: SignalId, b: SignalId, opts: &PathOptions) -> PathSet {
    let n = g.vertices().len();
    let max_len = opts.max_len.unwrap_or(n);
    let mut out = PathSet::default();
    if a == b {
        out.paths.push(Path {
            start: a,
            edges: Vec::new(),
        });
        return out;
    }
    let dist = distances_to(g, b, opts.include_clocked);
    if dist[a.index()].is_none() {
        return out;
    }
    let mut on_path = vec![false; n];
    on_path[a.index()] = true;
    let mut edges: Vec<EdgeId> = Vec::new();
    // Each frame: vertex and index of the next out-edge to try.
    let mut stack: Vec<(SignalId, usize)> = vec![(a, 0)];
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        let outs = g.out_edges(v);
        if *next >= outs.len() {
            stack.pop();
            on_path[v.index()] = false;
            edges.pop();
            continue;
        }
        let e = outs[*next];
        *next += 1;
        if !g.edge_enabled(e, opts.include_clocked) {
            continue;
        }
        let h = g.edge(e).head;
        if on_path[h.index()] {
            continue;
        }
        let Some(dh) = dist[h.index()] else { continue };
        let shortest = edges.len() + 1 + dh as usize;
        if shortest > max_len {
            // Longer than any simple path can be: nothing lost.
            if shortest < n {
                out.truncated = true;
            }
            continue;
        }
        if h == b {
            if out.paths.len() >= opts.max_paths {
                out.truncated = true;
                return out;
            }
            let mut p = edges.clone();
            p.push(e);
            out.paths.push(Path { start: a, edges: p });
            continue;
        }
        on_path[h.index()] = true;
        edges.push(e);
        stack.push((h, 0));
    }
    out
}
