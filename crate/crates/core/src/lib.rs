// SPDX-License-Identifier: Apache-2.0

//! Hyperflow graphs for RTL designs: construction from source, annotation
//! with functional and taint traces, and information flow coverage metrics.

pub mod annotate;
pub mod bits;
pub mod export;
pub mod flow;
pub mod graph;
pub mod metrics;
pub mod property;
pub mod report;
pub mod rtl;
pub mod sim;
pub mod site;
pub mod vcd;

use thiserror::Error;

pub use graph::{build_graph, HyperflowGraph};
pub use rtl::{ElaboratedDesign, SignalId, SourceUnit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error(transparent)]
    Frontend(#[from] rtl::FrontendError),
    #[error(transparent)]
    Elaboration(#[from] rtl::ElaborationError),
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
}

/// Parses, elaborates and extracts the flow graph of `src`.
pub fn build(src: &SourceUnit) -> Result<(ElaboratedDesign, HyperflowGraph), BuildError> {
    let ast = rtl::parse_rtl(src)?;
    let design = rtl::elaborate(&ast, &src.top_module)?;
    let g = build_graph(&flow::extract_signals(&design), &flow::extract_flows(&design))?;
    Ok((design, g))
}
