// SPDX-License-Identifier: Apache-2.0

//! Browser entry points. Each exported function takes source text and
//! returns a JSON string; errors come back as a string message.

use std::collections::BTreeSet;

use hyperflow::annotate::annotate_from_trace;
use hyperflow::export::{self, ExportFilter};
use hyperflow::property::{IftProperty, Objective};
use hyperflow::report::{self, ReportOptions};
use hyperflow::sim::{self, Stimulus};
use hyperflow::{HyperflowGraph, SourceUnit};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Summary {
    vertices: usize,
    edges: usize,
    explicit: usize,
    implicit: usize,
    clock_edges: usize,
}

fn summary(g: &HyperflowGraph) -> Summary {
    let explicit = g
        .edges()
        .iter()
        .filter(|e| e.kind == hyperflow::flow::FlowKind::Explicit)
        .count();
    let clock_edges = g.edges().iter().filter(|e| e.clock_sensitivity).count();
    Summary {
        vertices: g.vertices().len(),
        edges: g.edges().len(),
        explicit,
        implicit: g.edges().len() - explicit,
        clock_edges,
    }
}

fn build(src: &str, top: &str) -> Result<HyperflowGraph, String> {
    let unit = SourceUnit::single("design.sv", src, top);
    hyperflow::build(&unit).map(|(_, g)| g).map_err(|e| e.to_string())
}

/// Simulates with `asset` as the only taint source and annotates the graph.
fn annotated(src: &str, top: &str, stimulus: &str, asset: &str) -> Result<HyperflowGraph, String> {
    let unit = SourceUnit::single("design.sv", src, top);
    let (d, g) = hyperflow::build(&unit).map_err(|e| e.to_string())?;
    let a = d.lookup(asset).ok_or_else(|| format!("unknown signal `{asset}`"))?;
    let prop = IftProperty {
        objective: Objective::Confidentiality,
        sources: BTreeSet::from([a]),
        sinks: d.ids().filter(|s| *s != a).collect(),
    };
    let stim = Stimulus::parse("stimulus", stimulus).map_err(|e| e.to_string())?;
    let trace = sim::simulate(&d, &prop, &stim).map_err(|e| e.to_string())?;
    annotate_from_trace(&g, &trace, "browser").map_err(|e| e.to_string())
}

/// Graph structure of a design as viewer elements plus edge counts.
pub fn graph_view(src: &str, top: &str) -> Result<String, String> {
    let g = build(src, top)?;
    let view = export::select(&g, &ExportFilter::default()).map_err(|e| e.to_string())?;
    let out = serde_json::json!({
        "summary": summary(&g),
        "elements": export::to_elements(&g, &view)["elements"],
    });
    Ok(out.to_string())
}

/// Metric rows for every top-level output, with the annotated graph.
pub fn analysis(src: &str, top: &str, stimulus: &str, asset: &str) -> Result<String, String> {
    let g = annotated(src, top, stimulus, asset)?;
    let a = g.lookup(asset).ok_or_else(|| format!("unknown signal `{asset}`"))?;
    let rows = report::report(&g, a, &g.outputs(), &ReportOptions::default()).map_err(|e| e.to_string())?;
    let view = export::select(&g, &ExportFilter::default()).map_err(|e| e.to_string())?;
    let out = serde_json::json!({
        "summary": summary(&g),
        "rows": rows,
        "table": report::render_table(&rows),
        "elements": export::to_elements(&g, &view)["elements"],
    });
    Ok(out.to_string())
}

/// Filtered view. `kinds` is `all`, `explicit` or `implicit`; a non-empty
/// `to` keeps only activated paths from `asset` to `to`.
pub fn filtered_view(src: &str, top: &str, stimulus: &str, asset: &str, kinds: &str, to: &str) -> Result<String, String> {
    let g = annotated(src, top, stimulus, asset)?;
    let path = if to.is_empty() {
        None
    } else {
        let a = g.lookup(asset).ok_or_else(|| format!("unknown signal `{asset}`"))?;
        let b = g.lookup(to).ok_or_else(|| format!("unknown signal `{to}`"))?;
        Some((a, b))
    };
    let filter = ExportFilter {
        explicit_only: kinds == "explicit",
        implicit_only: kinds == "implicit",
        include_clocked: false,
        path,
    };
    let view = export::select(&g, &filter).map_err(|e| e.to_string())?;
    Ok(serde_json::json!({
        "elements": export::to_elements(&g, &view)["elements"],
        "dot": export::to_dot(&g, &view),
    })
    .to_string())
}

#[wasm_bindgen(js_name = graphView)]
pub fn graph_view_js(src: &str, top: &str) -> Result<String, JsValue> {
    graph_view(src, top).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = analyze)]
pub fn analysis_js(src: &str, top: &str, stimulus: &str, asset: &str) -> Result<String, JsValue> {
    analysis(src, top, stimulus, asset).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = filteredView)]
pub fn filtered_view_js(src: &str, top: &str, stimulus: &str, asset: &str, kinds: &str, to: &str) -> Result<String, JsValue> {
    filtered_view(src, top, stimulus, asset, kinds, to).map_err(|e| JsValue::from_str(&e))
}
