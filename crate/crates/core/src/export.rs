// SPDX-License-Identifier: Apache-2.0

//! Graph persistence and visualization exports.
//!
//! The graph file is a versioned JSON document:
//!
//! ```json
//! { "format": "hyperflow-graph", "version": 1, "top": "m", "trace": null,
//!   "vertices": [ { "id": 0, "name": "m/a", "width": 1, "direction": "input",
//!                   "vmeta": [[t, value, taint], ...] } ],
//!   "edges": [ { "id": 0, "tail": 0, "head": 1, "kind": "explicit", ... ,
//!                "emeta": [[start, end_or_null], ...] } ] }
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::flow::{BitRange, FlowKind, Predicate, Signal, Timing};
use crate::graph::{ActivationWindow, Edge, EdgeId, HyperflowGraph, Time, TraceInfo, Vertex, VertexSample};
use crate::metrics::{activated_paths, MetricError, PamOptions};
use crate::rtl::ast::Direction;
use crate::rtl::ir::SignalId;
use crate::site::SourceSite;

pub const GRAPH_FORMAT: &str = "hyperflow-graph";
pub const GRAPH_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphFileError {
    #[error("malformed graph file: {0}")]
    Parse(String),
    #[error("not a graph file (format `{0}`)")]
    Format(String),
    #[error("unsupported graph file version {0} (expected {GRAPH_VERSION})")]
    Version(u32),
    #[error("{what} {index} has id {id}; ids must be dense and in order")]
    BadId { what: &'static str, index: usize, id: u32 },
    #[error("edge {edge} references missing vertex {vertex}")]
    Dangling { edge: u32, vertex: u32 },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    format: String,
    version: u32,
    top: String,
    trace: Option<TraceInfo>,
    vertices: Vec<VertexRec>,
    edges: Vec<EdgeRec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexRec {
    id: u32,
    name: String,
    width: u32,
    direction: Option<Direction>,
    vmeta: Vec<(Time, u64, u64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRec {
    id: u32,
    tail: u32,
    head: u32,
    kind: FlowKind,
    predicate: Predicate,
    /// Rendered form of `predicate`; ignored on import.
    predicate_text: String,
    site: SourceSite,
    timing: Timing,
    bits: BitRange,
    clock_sensitivity: bool,
    emeta: Vec<(Time, Option<Time>)>,
}

pub fn write_graph(g: &HyperflowGraph) -> String {
    let file = GraphFile {
        format: GRAPH_FORMAT.into(),
        version: GRAPH_VERSION,
        top: g.top().to_string(),
        trace: g.trace.clone(),
        vertices: g
            .vertices()
            .iter()
            .map(|v| VertexRec {
                id: v.signal.id.0,
                name: v.signal.name.clone(),
                width: v.signal.width,
                direction: v.signal.direction,
                vmeta: v.vmeta.iter().map(|s| (s.t, s.val, s.val_taint)).collect(),
            })
            .collect(),
        edges: g
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| EdgeRec {
                id: i as u32,
                tail: e.tail.0,
                head: e.head.0,
                kind: e.kind,
                predicate: e.predicate.clone(),
                predicate_text: g.render_predicate(&e.predicate),
                site: e.site.clone(),
                timing: e.timing,
                bits: e.bits,
                clock_sensitivity: e.clock_sensitivity,
                emeta: e.emeta.iter().map(|w| (w.start, w.end)).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("graph serializes") + "\n"
}

pub fn read_graph(text: &str) -> Result<HyperflowGraph, GraphFileError> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| GraphFileError::Parse(e.to_string()))?;
    if file.format != GRAPH_FORMAT {
        return Err(GraphFileError::Format(file.format));
    }
    if file.version != GRAPH_VERSION {
        return Err(GraphFileError::Version(file.version));
    }
    let n = file.vertices.len() as u32;
    let mut vertices = Vec::with_capacity(file.vertices.len());
    for (i, v) in file.vertices.into_iter().enumerate() {
        if v.id as usize != i {
            return Err(GraphFileError::BadId {
                what: "vertex",
                index: i,
                id: v.id,
            });
        }
        vertices.push(Vertex {
            signal: Signal {
                id: SignalId(v.id),
                name: v.name,
                width: v.width,
                direction: v.direction,
            },
            vmeta: v
                .vmeta
                .into_iter()
                .map(|(t, val, val_taint)| VertexSample { t, val, val_taint })
                .collect(),
        });
    }
    let mut edges = Vec::with_capacity(file.edges.len());
    for (i, e) in file.edges.into_iter().enumerate() {
        if e.id as usize != i {
            return Err(GraphFileError::BadId {
                what: "edge",
                index: i,
                id: e.id,
            });
        }
        for vertex in [e.tail, e.head] {
            if vertex >= n {
                return Err(GraphFileError::Dangling { edge: e.id, vertex });
            }
        }
        edges.push(Edge {
            tail: SignalId(e.tail),
            head: SignalId(e.head),
            kind: e.kind,
            predicate: e.predicate,
            site: e.site,
            timing: e.timing,
            bits: e.bits,
            clock_sensitivity: e.clock_sensitivity,
            emeta: e
                .emeta
                .into_iter()
                .map(|(start, end)| ActivationWindow { start, end })
                .collect(),
        });
    }
    Ok(HyperflowGraph::from_parts(file.top, vertices, edges, file.trace))
}

/// Which parts of the graph an export shows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExportFilter {
    pub explicit_only: bool,
    pub implicit_only: bool,
    pub include_clocked: bool,
    /// Restrict to paths between two vertices; on an annotated graph only
    /// activated paths are kept.
    pub path: Option<(SignalId, SignalId)>,
}

/// The vertices and edges selected by a filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct View {
    pub vertices: Vec<SignalId>,
    pub edges: Vec<EdgeId>,
}

pub fn select(g: &HyperflowGraph, f: &ExportFilter) -> Result<View, MetricError> {
    let kind_ok = |e: &Edge| match e.kind {
        FlowKind::Explicit => !f.implicit_only,
        FlowKind::Implicit => !f.explicit_only,
    };
    let keep = |id: EdgeId| {
        let e = g.edge(id);
        kind_ok(e) && (f.include_clocked || !e.clock_sensitivity)
    };
    let Some((a, b)) = f.path else {
        return Ok(View {
            vertices: g.vertex_ids().collect(),
            edges: g.edge_ids().filter(|e| keep(*e)).collect(),
        });
    };
    let opts = PamOptions {
        include_clocked: f.include_clocked,
        ..Default::default()
    };
    let paths = if g.is_annotated() {
        activated_paths(g, a, b, &opts)?.activated
    } else {
        crate::graph::paths(
            g,
            a,
            b,
            &crate::graph::PathOptions {
                include_clocked: f.include_clocked,
                ..Default::default()
            },
        )
        .paths
    };
    let mut edges = BTreeSet::new();
    let mut vertices = BTreeSet::new();
    for p in &paths {
        if !p.edges.iter().all(|e| keep(*e)) {
            continue;
        }
        edges.extend(p.edges.iter().copied());
        vertices.extend(p.vertices(g));
    }
    Ok(View {
        vertices: vertices.into_iter().collect(),
        edges: edges.into_iter().collect(),
    })
}

fn short(g: &HyperflowGraph, s: SignalId) -> &str {
    let name = g.name(s);
    name.strip_prefix(g.top())
        .and_then(|r| r.strip_prefix('/'))
        .unwrap_or(name)
}

fn ever_tainted(g: &HyperflowGraph, s: SignalId) -> bool {
    g.vertex(s).vmeta.iter().any(|x| x.val_taint != 0)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering: explicit flows solid, implicit flows dashed, clock
/// sensitivity dotted.
pub fn to_dot(g: &HyperflowGraph, view: &View) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", dot_escape(g.top()));
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  node [shape=box, fontname=\"monospace\"];");
    for &v in &view.vertices {
        let w = g.width(v);
        let label = if w > 1 {
            format!("{} [{}:0]", short(g, v), w - 1)
        } else {
            short(g, v).to_string()
        };
        let fill = if ever_tainted(g, v) {
            ", style=filled, fillcolor=\"#f4cccc\""
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "  \"{}\" [label=\"{}\"{}];",
            dot_escape(g.name(v)),
            dot_escape(&label),
            fill
        );
    }
    for &e in &view.edges {
        let edge = g.edge(e);
        let style = if edge.clock_sensitivity {
            "dotted"
        } else if edge.kind == FlowKind::Explicit {
            "solid"
        } else {
            "dashed"
        };
        let mut attrs = format!("style={style}");
        if !edge.predicate.is_true() {
            let p = edge.predicate.render(&|s| short(g, s).to_string());
            let _ = write!(attrs, ", label=\"{}\"", dot_escape(&p));
        }
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [{}];",
            dot_escape(g.name(edge.tail)),
            dot_escape(g.name(edge.head)),
            attrs
        );
    }
    out.push_str("}\n");
    out
}

/// Node and edge element lists in the layout used by common web graph
/// viewers (`{"elements": {"nodes": [{"data": ...}], "edges": [...]}}`).
pub fn to_elements(g: &HyperflowGraph, view: &View) -> serde_json::Value {
    let nodes: Vec<_> = view
        .vertices
        .iter()
        .map(|&v| {
            let s = &g.vertex(v).signal;
            json!({ "data": {
                "id": s.name,
                "label": short(g, v),
                "width": s.width,
                "direction": s.direction,
                "tainted": ever_tainted(g, v),
            }})
        })
        .collect();
    let edges: Vec<_> = view
        .edges
        .iter()
        .map(|&e| {
            let edge = g.edge(e);
            json!({ "data": {
                "id": format!("e{}", e.0),
                "source": g.name(edge.tail),
                "target": g.name(edge.head),
                "kind": edge.kind,
                "predicate": g.render_predicate(&edge.predicate),
                "site": edge.site.to_string(),
                "clocked": edge.timing.clock().is_some(),
                "clock_sensitivity": edge.clock_sensitivity,
                "windows": edge.emeta.len(),
                "tainted": ever_tainted(g, edge.tail) && ever_tainted(g, edge.head),
            }})
        })
        .collect();
    json!({ "elements": { "nodes": nodes, "edges": edges } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::graph;

    const DIAMOND: &str = "module diamond(input clk, input [3:0] a, input g1, input g2, output [3:0] d);
  logic [3:0] b, c;
  always @(posedge clk) if (g1) b <= a;
  always @(posedge clk) if (g2) c <= a;
  assign d = b ^ c;
endmodule
";

    #[test]
    fn graph_file_roundtrip() {
        let mut g = graph(DIAMOND, "diamond");
        g.trace = Some(TraceInfo {
            id: "x".into(),
            end: 4,
            timescale: "1ns".into(),
        });
        let text = write_graph(&g);
        let back = read_graph(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(write_graph(&back), text);
    }

    #[test]
    fn graph_file_errors() {
        let g = graph(DIAMOND, "diamond");
        let text = write_graph(&g);
        assert!(matches!(
            read_graph(&text.replace("\"version\": 1", "\"version\": 9")),
            Err(GraphFileError::Version(9))
        ));
        assert!(matches!(read_graph("{"), Err(GraphFileError::Parse(_))));
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["edges"][0]["head"] = json!(99);
        assert!(matches!(
            read_graph(&v.to_string()),
            Err(GraphFileError::Dangling { vertex: 99, .. })
        ));
    }

    #[test]
    fn filters() {
        let g = graph(DIAMOND, "diamond");
        let implicit = select(
            &g,
            &ExportFilter {
                implicit_only: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(implicit.edges.len(), 2);
        let all = select(&g, &ExportFilter::default()).unwrap();
        assert_eq!((all.vertices.len(), all.edges.len()), (7, 6));
        let clocked = select(
            &g,
            &ExportFilter {
                include_clocked: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(clocked.edges.len(), 8);
        let (a, d, g1) = (g.lookup("a").unwrap(), g.lookup("d").unwrap(), g.lookup("g1").unwrap());
        let p = select(
            &g,
            &ExportFilter {
                explicit_only: true,
                path: Some((a, d)),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!((p.vertices.len(), p.edges.len()), (4, 4));
        let none = select(
            &g,
            &ExportFilter {
                path: Some((d, g1)),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(none.edges.is_empty());
        let dot = to_dot(&g, &none);
        assert!(dot.starts_with("digraph \"diamond\" {") && dot.ends_with("}\n"));
    }

    #[test]
    fn dot_and_elements() {
        let g = graph(DIAMOND, "diamond");
        let v = select(&g, &ExportFilter::default()).unwrap();
        let dot = to_dot(&g, &v);
        assert!(dot.contains("\"diamond/a\" -> \"diamond/b\" [style=solid, label=\"g1\"];"));
        assert!(dot.contains("\"diamond/g1\" -> \"diamond/b\" [style=dashed, label=\"g1\"];"));
        let el = to_elements(&g, &v);
        assert_eq!(el["elements"]["nodes"].as_array().unwrap().len(), 7);
        assert_eq!(el["elements"]["edges"][0]["data"]["windows"], 0);
    }
}
