// SPDX-License-Identifier: Apache-2.0

//! The hyperflow graph: signals as vertices, extracted flows as edges, with
//! simulation metadata attached to both.

mod query;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{BitRange, FlowKind, FlowRecord, Predicate, Signal, Timing};
use crate::rtl::ir::SignalId;
use crate::site::SourceSite;

pub use query::{paths, reachable, distances_to, Path, PathOptions, PathSet};

pub type Time = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexSample {
    pub t: Time,
    pub val: u64,
    pub val_taint: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub signal: Signal,
    /// Change-points, strictly increasing in time.
    pub vmeta: Vec<VertexSample>,
}

impl Vertex {
    /// Value and taint in effect at `t` (zero before the first sample).
    pub fn at(&self, t: Time) -> (u64, u64) {
        let i = self.vmeta.partition_point(|s| s.t <= t);
        if i == 0 {
            (0, 0)
        } else {
            let s = &self.vmeta[i - 1];
            (s.val, s.val_taint)
        }
    }

    pub fn taint_at(&self, t: Time) -> u64 {
        self.at(t).1
    }
}

/// A maximal interval `[start, end)` during which an edge's predicate holds.
/// `end == None` marks a window that stays open until the end of the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActivationWindow {
    pub start: Time,
    pub end: Option<Time>,
}

impl ActivationWindow {
    pub fn covers(&self, t: Time) -> bool {
        t >= self.start && self.end.is_none_or(|e| t < e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub tail: SignalId,
    pub head: SignalId,
    pub kind: FlowKind,
    pub predicate: Predicate,
    pub site: SourceSite,
    pub timing: Timing,
    pub bits: BitRange,
    pub clock_sensitivity: bool,
    pub emeta: Vec<ActivationWindow>,
}

impl Edge {
    pub fn active_at(&self, t: Time) -> bool {
        let i = self.emeta.partition_point(|w| w.start <= t);
        i > 0 && self.emeta[i - 1].covers(t)
    }
}

/// Where the annotation data came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceInfo {
    pub id: String,
    /// First time step past the end of the trace.
    pub end: Time,
    pub timescale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("flow {index} references unknown signal id {signal}")]
    DanglingEndpoint { index: usize, signal: u32 },
    #[error("signal list is not in id order at position {0}")]
    SignalOrder(usize),
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperflowGraph {
    top: String,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    fwd: Vec<Vec<EdgeId>>,
    rev: Vec<Vec<EdgeId>>,
    by_name: HashMap<String, SignalId>,
    pub trace: Option<TraceInfo>,
}

pub fn build_graph(signals: &[Signal], flows: &[FlowRecord]) -> Result<HyperflowGraph, GraphError> {
    for (i, s) in signals.iter().enumerate() {
        if s.id.index() != i {
            return Err(GraphError::SignalOrder(i));
        }
    }
    let n = signals.len();
    let mut edges = Vec::with_capacity(flows.len());
    for (index, f) in flows.iter().enumerate() {
        let refs = [f.tail, f.head].into_iter().chain(f.predicate.signals());
        for s in refs {
            if s.index() >= n {
                return Err(GraphError::DanglingEndpoint { index, signal: s.0 });
            }
        }
        edges.push(Edge {
            tail: f.tail,
            head: f.head,
            kind: f.kind,
            predicate: f.predicate.clone(),
            site: f.site.clone(),
            timing: f.timing,
            bits: f.bits,
            clock_sensitivity: f.clock_sensitivity,
            emeta: Vec::new(),
        });
    }
    let top = signals
        .first()
        .and_then(|s| s.name.split('/').next())
        .unwrap_or_default()
        .to_string();
    let vertices = signals
        .iter()
        .map(|s| Vertex {
            signal: s.clone(),
            vmeta: Vec::new(),
        })
        .collect();
    Ok(HyperflowGraph::from_parts(top, vertices, edges, None))
}

impl HyperflowGraph {
    pub(crate) fn from_parts(
        top: String,
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        trace: Option<TraceInfo>,
    ) -> Self {
        let n = vertices.len();
        let mut fwd = vec![Vec::new(); n];
        let mut rev = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            fwd[e.tail.index()].push(EdgeId(i as u32));
            rev[e.head.index()].push(EdgeId(i as u32));
        }
        let by_name = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.signal.name.clone(), SignalId(i as u32)))
            .collect();
        HyperflowGraph {
            top,
            vertices,
            edges,
            fwd,
            rev,
            by_name,
            trace,
        }
    }

    pub fn top(&self) -> &str {
        &self.top
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, s: SignalId) -> &Vertex {
        &self.vertices[s.index()]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.index()]
    }

    pub(crate) fn vertex_mut(&mut self, s: SignalId) -> &mut Vertex {
        &mut self.vertices[s.index()]
    }

    pub(crate) fn edge_mut(&mut self, e: EdgeId) -> &mut Edge {
        &mut self.edges[e.index()]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = SignalId> {
        (0..self.vertices.len() as u32).map(SignalId)
    }

    pub fn out_edges(&self, s: SignalId) -> &[EdgeId] {
        &self.fwd[s.index()]
    }

    pub fn in_edges(&self, s: SignalId) -> &[EdgeId] {
        &self.rev[s.index()]
    }

    pub fn name(&self, s: SignalId) -> &str {
        &self.vertices[s.index()].signal.name
    }

    pub fn width(&self, s: SignalId) -> u32 {
        self.vertices[s.index()].signal.width
    }

    /// Finds a vertex by hierarchical name, or by a name relative to the top.
    pub fn lookup(&self, name: &str) -> Option<SignalId> {
        self.by_name
            .get(name)
            .or_else(|| self.by_name.get(&format!("{}/{}", self.top, name)))
            .copied()
    }

    pub fn resolve(&self, name: &str) -> Result<SignalId, GraphError> {
        self.lookup(name)
            .ok_or_else(|| GraphError::UnknownSignal(name.to_string()))
    }

    pub fn is_annotated(&self) -> bool {
        self.trace.is_some()
    }

    /// Top-level output ports, in declaration order.
    pub fn outputs(&self) -> Vec<SignalId> {
        self.vertex_ids()
            .filter(|s| self.vertex(*s).signal.direction == Some(crate::rtl::ast::Direction::Output))
            .collect()
    }

    /// Predicate renderer using hierarchical names.
    pub fn render_predicate(&self, p: &Predicate) -> String {
        p.render(&|s| self.name(s).to_string())
    }

    /// Checks that the reverse index is the transpose of the forward index.
    pub fn transpose_coherent(&self) -> bool {
        let mut a: Vec<(u32, u32)> = Vec::new();
        let mut b: Vec<(u32, u32)> = Vec::new();
        for v in self.vertex_ids() {
            for e in self.out_edges(v) {
                if self.edge(*e).tail != v {
                    return false;
                }
                a.push((e.0, v.0));
            }
            for e in self.in_edges(v) {
                if self.edge(*e).head != v {
                    return false;
                }
                b.push((e.0, self.edge(*e).tail.0));
            }
        }
        a.sort_unstable();
        b.sort_unstable();
        a == b && a.len() == self.edges.len()
    }
}
