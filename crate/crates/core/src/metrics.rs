// SPDX-License-Identifier: Apache-2.0

//! Coverage metrics over an annotated hyperflow graph.
//!
//! A sequential edge `u -> v` fires at a rising edge `s` of its clock when its
//! predicate held at `s - 1`, `u` was tainted at `s - 1` and `v` is tainted at
//! `s`. A continuous edge fires at `t` when its predicate holds at `t` and
//! both endpoints are tainted at `t`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::flow::Timing;
use crate::graph::{paths, reachable, EdgeId, HyperflowGraph, Path, PathOptions, PathSet, Time};
use crate::rtl::ir::SignalId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("graph has no trace annotation")]
    NotAnnotated,
    #[error("time {t} is outside the trace (which ends at {end})")]
    TimeOutOfRange { t: Time, end: Time },
    #[error("window [{t1}, {t2}) is empty")]
    EmptyWindow { t1: Time, t2: Time },
}

/// Shortest path length, or unbounded when no tainted vertex can reach the
/// target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Distance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Distance::Finite(d) => s.serialize_u32(*d),
            Distance::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Distance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Distance::Finite(n)),
            Raw::S(s) if s == "inf" => Ok(Distance::Infinite),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad distance `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PamOptions {
    pub include_clocked: bool,
    pub max_paths: usize,
    pub max_len: Option<usize>,
    /// Budget for the activation search, in visited states.
    pub max_steps: u64,
}

impl Default for PamOptions {
    fn default() -> Self {
        PamOptions {
            include_clocked: false,
            max_paths: 10_000,
            max_len: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PamResult {
    pub activated: usize,
    pub total: usize,
    /// Path enumeration or activation search hit a limit; `activated` is a
    /// lower bound and `total` may be too.
    pub truncated: bool,
}

impl PamResult {
    /// `None` when there is no structural path.
    pub fn ratio(&self) -> Option<f64> {
        (self.total > 0).then(|| self.activated as f64 / self.total as f64)
    }
}

fn trace_end(g: &HyperflowGraph) -> Result<Time, MetricError> {
    g.trace.as_ref().map(|t| t.end).ok_or(MetricError::NotAnnotated)
}

/// Structural coverage: some path exists from `a` to `b`.
pub fn scm(g: &HyperflowGraph, a: SignalId, b: SignalId, include_clocked: bool) -> bool {
    reachable(g, a, b, include_clocked)
}

/// Times at which some taint bit of `s` goes from 0 to 1.
pub fn rise_times(g: &HyperflowGraph, s: SignalId) -> Vec<Time> {
    let mut prev = 0u64;
    let mut out = Vec::new();
    for x in &g.vertex(s).vmeta {
        if x.val_taint & !prev != 0 {
            out.push(x.t);
        }
        prev = x.val_taint;
    }
    out
}

/// Rising edges of bit 0 of `clk` after time 0.
pub fn posedges(g: &HyperflowGraph, clk: SignalId) -> Vec<Time> {
    let mut prev = 0u64;
    let mut out = Vec::new();
    for x in &g.vertex(clk).vmeta {
        let b = x.val & 1;
        if b == 1 && prev == 0 && x.t > 0 {
            out.push(x.t);
        }
        prev = b;
    }
    out
}

/// Taint observed at the target during the trace.
pub fn scm_observed(g: &HyperflowGraph, b: SignalId) -> Result<bool, MetricError> {
    trace_end(g)?;
    Ok(!rise_times(g, b).is_empty())
}

/// Sorted, disjoint, half-open time intervals.
type Times = Vec<(Time, Time)>;

fn intersect(a: &Times, b: &Times) -> Times {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo < hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn contains(ts: &Times, t: Time) -> bool {
    let i = ts.partition_point(|x| x.0 <= t);
    i > 0 && t < ts[i - 1].1
}

/// Maximal intervals during which `v` carries any taint.
pub fn tainted_runs(g: &HyperflowGraph, v: SignalId, end: Time) -> Vec<(Time, Time)> {
    let vm = &g.vertex(v).vmeta;
    let mut out: Times = Vec::new();
    for (i, s) in vm.iter().enumerate() {
        if s.val_taint == 0 || s.t >= end {
            continue;
        }
        let hi = vm.get(i + 1).map_or(end, |n| n.t.min(end));
        match out.last_mut() {
            Some(l) if l.1 == s.t => l.1 = hi,
            _ => out.push((s.t, hi)),
        }
    }
    out
}

struct Frame {
    /// In-edges that fired, with their tail and the tail's read times.
    next: Vec<(EdgeId, SignalId, Times)>,
    i: usize,
}

struct Search<'g> {
    g: &'g HyperflowGraph,
    end: Time,
    a: SignalId,
    include_clocked: bool,
    max_len: usize,
    from_a: Vec<bool>,
    tainted: Vec<Option<Times>>,
    active: Vec<Option<Times>>,
    posedges: HashMap<SignalId, Vec<Time>>,
    found: HashSet<Vec<EdgeId>>,
    steps: u64,
    max_steps: u64,
    truncated: bool,
}

impl Search<'_> {
    fn tainted(&mut self, v: SignalId) -> &Times {
        let (g, end) = (self.g, self.end);
        self.tainted[v.index()].get_or_insert_with(|| tainted_runs(g, v, end))
    }

    fn active(&mut self, e: EdgeId) -> &Times {
        let (g, end) = (self.g, self.end);
        self.active[e.index()].get_or_insert_with(|| {
            g.edge(e)
                .emeta
                .iter()
                .map(|w| (w.start.min(end), w.end.unwrap_or(end).min(end)))
                .filter(|w| w.0 < w.1)
                .collect()
        })
    }

    /// For each enabled in-edge of `v`, the times at which its tail was read
    /// by a firing that leaves `v` tainted at some time in `at`.
    fn fired_in_edges(&mut self, v: SignalId, at: &Times, on_path: &[bool]) -> Vec<(EdgeId, SignalId, Times)> {
        let g = self.g;
        let mut out = Vec::new();
        for &e in g.in_edges(v) {
            if !g.edge_enabled(e, self.include_clocked) {
                continue;
            }
            let edge = g.edge(e);
            let u = edge.tail;
            if on_path[u.index()] || !self.from_a[u.index()] {
                continue;
            }
            let read = match edge.timing {
                Timing::Continuous => {
                    let x = intersect(at, &self.active(e).clone());
                    intersect(&x, self.tainted(u))
                }
                Timing::Clocked { clock } => {
                    let runs = self.tainted(v).clone();
                    let active = self.active(e).clone();
                    let tu = self.tainted(u).clone();
                    let edges = self
                        .posedges
                        .entry(clock)
                        .or_insert_with(|| posedges(g, clock));
                    let mut read: Times = Vec::new();
                    for r in &runs {
                        // Latest requested time inside this run.
                        let hit = intersect(at, &vec![*r]);
                        let Some(last) = hit.last().map(|x| x.1 - 1) else {
                            continue;
                        };
                        let from = edges.partition_point(|s| *s < r.0.max(1));
                        for &s in &edges[from..] {
                            if s > last {
                                break;
                            }
                            if contains(&active, s - 1) && contains(&tu, s - 1) {
                                read.push((s - 1, s));
                            }
                        }
                    }
                    read
                }
            };
            if !read.is_empty() {
                out.push((e, u, read));
            }
        }
        out
    }

    /// Walks backwards from the taint rises of `b` along simple paths whose
    /// edges fired in sequence, recording every path that reaches `a`.
    fn run(&mut self, b: SignalId) {
        let at: Times = rise_times(self.g, b)
            .into_iter()
            .filter(|t| *t < self.end)
            .map(|t| (t, t + 1))
            .collect();
        if at.is_empty() {
            return;
        }
        if b == self.a {
            self.found.insert(Vec::new());
            return;
        }
        let mut on_path = vec![false; self.g.vertices().len()];
        on_path[b.index()] = true;
        let first = self.fired_in_edges(b, &at, &on_path);
        let mut stack = vec![Frame { next: first, i: 0 }];
        let mut verts: Vec<SignalId> = Vec::new();
        let mut edges: Vec<EdgeId> = Vec::new();
        while let Some(f) = stack.last_mut() {
            if f.i >= f.next.len() {
                stack.pop();
                if let Some(v) = verts.pop() {
                    on_path[v.index()] = false;
                }
                edges.pop();
                continue;
            }
            let (e, u) = (f.next[f.i].0, f.next[f.i].1);
            let read = std::mem::take(&mut f.next[f.i].2);
            f.i += 1;
            self.steps += 1;
            if self.steps > self.max_steps {
                self.truncated = true;
                return;
            }
            edges.push(e);
            if u == self.a {
                self.found.insert(edges.iter().rev().copied().collect());
                edges.pop();
                continue;
            }
            if edges.len() >= self.max_len {
                edges.pop();
                continue;
            }
            on_path[u.index()] = true;
            verts.push(u);
            let next = self.fired_in_edges(u, &read, &on_path);
            stack.push(Frame { next, i: 0 });
        }
    }
}

/// Simple paths from `a` to `b` and the subset classified activated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activation {
    pub all: PathSet,
    pub activated: Vec<Path>,
    /// The activation search ran out of budget.
    pub search_truncated: bool,
}

/// Classifies every enumerated path by walking backwards from each rise of
/// taint at `b`, following every in-edge that fired.
pub fn activated_paths(g: &HyperflowGraph, a: SignalId, b: SignalId, opts: &PamOptions) -> Result<Activation, MetricError> {
    let end = trace_end(g)?;
    let all = paths(
        g,
        a,
        b,
        &PathOptions {
            include_clocked: opts.include_clocked,
            max_paths: opts.max_paths,
            max_len: opts.max_len,
        },
    );
    if all.paths.is_empty() {
        return Ok(Activation {
            all,
            activated: Vec::new(),
            search_truncated: false,
        });
    }
    let n = g.vertices().len();
    let mut from_a = vec![false; n];
    from_a[a.index()] = true;
    let mut queue = VecDeque::from([a]);
    while let Some(v) = queue.pop_front() {
        for &e in g.out_edges(v) {
            let h = g.edge(e).head;
            if g.edge_enabled(e, opts.include_clocked) && !from_a[h.index()] {
                from_a[h.index()] = true;
                queue.push_back(h);
            }
        }
    }
    let mut search = Search {
        g,
        end,
        a,
        include_clocked: opts.include_clocked,
        max_len: opts.max_len.unwrap_or(n),
        from_a,
        tainted: vec![None; n],
        active: vec![None; g.edges().len()],
        posedges: HashMap::new(),
        found: HashSet::new(),
        steps: 0,
        max_steps: opts.max_steps,
        truncated: false,
    };
    search.run(b);
    let activated = all
        .paths
        .iter()
        .filter(|p| search.found.contains(&p.edges))
        .cloned()
        .collect();
    Ok(Activation {
        all,
        activated,
        search_truncated: search.truncated,
    })
}

/// Path activation: the share of simple paths from `a` to `b` whose edges
/// fired in sequence, starting from taint at `a` and ending in a rise of
/// taint at `b`.
pub fn pam(g: &HyperflowGraph, a: SignalId, b: SignalId, opts: &PamOptions) -> Result<PamResult, MetricError> {
    let r = activated_paths(g, a, b, opts)?;
    Ok(PamResult {
        activated: r.activated.len(),
        total: r.all.paths.len(),
        truncated: r.all.truncated || r.search_truncated,
    })
}

/// Shortest distance from information derived from `a` to `b` at time `t`.
/// Zero when `b` is tainted at `t`; otherwise the least number of edges from
/// `a` or any tainted vertex reachable from `a`.
pub fn spm(g: &HyperflowGraph, a: SignalId, b: SignalId, t: Time, include_clocked: bool) -> Result<Distance, MetricError> {
    let end = trace_end(g)?;
    if t >= end {
        return Err(MetricError::TimeOutOfRange { t, end });
    }
    if g.vertex(b).taint_at(t) != 0 {
        return Ok(Distance::Finite(0));
    }
    let dist = crate::graph::distances_to(g, b, include_clocked);
    let n = g.vertices().len();
    let mut seen = vec![false; n];
    seen[a.index()] = true;
    let mut queue = VecDeque::from([a]);
    let mut best: Option<u32> = None;
    while let Some(v) = queue.pop_front() {
        if v != b && (v == a || g.vertex(v).taint_at(t) != 0) {
            if let Some(d) = dist[v.index()] {
                best = Some(best.map_or(d, |x| x.min(d)));
            }
        }
        for &e in g.out_edges(v) {
            let h = g.edge(e).head;
            if g.edge_enabled(e, include_clocked) && !seen[h.index()] {
                seen[h.index()] = true;
                queue.push_back(h);
            }
        }
    }
    Ok(best.map_or(Distance::Infinite, Distance::Finite))
}

fn check_window(g: &HyperflowGraph, t1: Time, t2: Time) -> Result<(), MetricError> {
    let end = trace_end(g)?;
    if t2 > end {
        return Err(MetricError::TimeOutOfRange { t: t2, end });
    }
    if t1 > t2 {
        return Err(MetricError::EmptyWindow { t1, t2 });
    }
    Ok(())
}

/// Number of taint bits of `b` switching 0 to 1 within `[t1, t2)`.
pub fn slbt(g: &HyperflowGraph, b: SignalId, t1: Time, t2: Time) -> Result<u64, MetricError> {
    check_window(g, t1, t2)?;
    Ok(slbt_unchecked(g, b, t1, t2))
}

fn slbt_unchecked(g: &HyperflowGraph, b: SignalId, t1: Time, t2: Time) -> u64 {
    let vm = &g.vertex(b).vmeta;
    let start = vm.partition_point(|s| s.t < t1);
    let mut prev = if start == 0 { 0 } else { vm[start - 1].val_taint };
    let mut n = 0u64;
    for s in &vm[start..] {
        if s.t >= t2 {
            break;
        }
        n += (s.val_taint & !prev).count_ones() as u64;
        prev = s.val_taint;
    }
    n
}

/// Local information flow rate: switching taint bits of `b` per time step.
pub fn lifr(g: &HyperflowGraph, b: SignalId, t1: Time, t2: Time) -> Result<f64, MetricError> {
    check_window(g, t1, t2)?;
    if t1 == t2 {
        return Err(MetricError::EmptyWindow { t1, t2 });
    }
    Ok(slbt_unchecked(g, b, t1, t2) as f64 / (t2 - t1) as f64)
}

/// Sum of switching taint bits over every vertex of the design.
pub fn total_slbt(g: &HyperflowGraph, t1: Time, t2: Time) -> Result<u64, MetricError> {
    check_window(g, t1, t2)?;
    Ok(g.vertex_ids().map(|v| slbt_unchecked(g, v, t1, t2)).sum())
}

/// Global information flow rate: design-wide switching taint bits per step.
pub fn gifr(g: &HyperflowGraph, t1: Time, t2: Time) -> Result<f64, MetricError> {
    let total = total_slbt(g, t1, t2)?;
    if t1 == t2 {
        return Err(MetricError::EmptyWindow { t1, t2 });
    }
    Ok(total as f64 / (t2 - t1) as f64)
}
