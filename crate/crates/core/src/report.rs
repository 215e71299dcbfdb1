// SPDX-License-Identifier: Apache-2.0

//! Per-target metric reports in table and JSON form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{HyperflowGraph, Time};
use crate::metrics::{self, Distance, MetricError, PamOptions};
use crate::rtl::ir::SignalId;

pub const DEFAULT_FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    /// Cumulative windows `[0, ceil(f * end))`.
    pub fractions: Vec<f64>,
    pub include_clocked: bool,
    pub max_paths: usize,
    pub max_steps: u64,
    /// Query time for SPM; the last trace step when unset.
    pub spm_time: Option<Time>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        let p = PamOptions::default();
        ReportOptions {
            fractions: DEFAULT_FRACTIONS.to_vec(),
            include_clocked: false,
            max_paths: p.max_paths,
            max_steps: p.max_steps,
            spm_time: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PamSummary {
    /// `activated / total`, or 0 without any path.
    pub fraction: f64,
    pub activated: usize,
    pub total: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMetric {
    pub fraction: f64,
    pub t1: Time,
    pub t2: Time,
    pub slbt: u64,
    /// Bits per time step.
    pub lifr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub asset: String,
    pub target: String,
    pub scm: bool,
    pub scm_observed: bool,
    pub pam: PamSummary,
    pub spm: Distance,
    pub spm_time: Time,
    pub lifr: Vec<WindowMetric>,
    /// Design-wide rate over the whole trace.
    pub gifr: f64,
    pub trace_id: String,
}

/// End of the window for fraction `f` of a trace ending at `end`.
pub fn window_end(f: f64, end: Time) -> Time {
    ((f * end as f64).ceil() as Time).clamp(1, end.max(1))
}

/// Computes the report row for one target. `gifr` is passed in because it
/// does not depend on the target.
pub fn report_one(
    g: &HyperflowGraph,
    asset: SignalId,
    target: SignalId,
    opts: &ReportOptions,
    gifr: f64,
) -> Result<MetricReport, MetricError> {
    let trace = g.trace.as_ref().ok_or(MetricError::NotAnnotated)?;
    let end = trace.end;
    let scm = metrics::scm(g, asset, target, opts.include_clocked);
    let pam = metrics::pam(
        g,
        asset,
        target,
        &PamOptions {
            include_clocked: opts.include_clocked,
            max_paths: opts.max_paths,
            max_len: None,
            max_steps: opts.max_steps,
        },
    )?;
    let spm_time = opts.spm_time.unwrap_or(end.saturating_sub(1));
    let spm = metrics::spm(g, asset, target, spm_time, opts.include_clocked)?;
    let mut lifr = Vec::new();
    for &f in &opts.fractions {
        let t2 = window_end(f, end);
        lifr.push(WindowMetric {
            fraction: f,
            t1: 0,
            t2,
            slbt: metrics::slbt(g, target, 0, t2)?,
            lifr: metrics::lifr(g, target, 0, t2)?,
        });
    }
    Ok(MetricReport {
        asset: g.name(asset).to_string(),
        target: g.name(target).to_string(),
        scm,
        scm_observed: metrics::scm_observed(g, target)?,
        pam: PamSummary {
            fraction: pam.ratio().unwrap_or(0.0),
            activated: pam.activated,
            total: pam.total,
            truncated: pam.truncated,
        },
        spm,
        spm_time,
        lifr,
        gifr,
        trace_id: trace.id.clone(),
    })
}

/// One row per target, in the order given.
pub fn report(
    g: &HyperflowGraph,
    asset: SignalId,
    targets: &[SignalId],
    opts: &ReportOptions,
) -> Result<Vec<MetricReport>, MetricError> {
    let end = g.trace.as_ref().ok_or(MetricError::NotAnnotated)?.end;
    if end == 0 {
        return Err(MetricError::EmptyWindow { t1: 0, t2: 0 });
    }
    let gifr = metrics::gifr(g, 0, end)?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        targets
            .par_iter()
            .map(|t| report_one(g, asset, *t, opts, gifr))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        targets
            .iter()
            .map(|t| report_one(g, asset, *t, opts, gifr))
            .collect()
    }
}

fn pct(f: f64) -> String {
    let p = f * 100.0;
    if (p - p.round()).abs() < 1e-9 {
        format!("{}%", p.round() as i64)
    } else {
        format!("{p}%")
    }
}

/// Human-readable table. Window columns show cumulative SLBT counts.
pub fn render_table(rows: &[MetricReport]) -> String {
    let mut header: Vec<String> = ["No.", "Target", "SCM", "PAM", "Paths", "SPM"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if let Some(r) = rows.first() {
        for w in &r.lifr {
            header.push(format!("LIFR({})", pct(w.fraction)));
        }
    }
    let mut cells: Vec<Vec<String>> = vec![header];
    for (i, r) in rows.iter().enumerate() {
        let mut row = vec![
            (i + 1).to_string(),
            r.target.clone(),
            if r.scm { "TRUE" } else { "FALSE" }.to_string(),
            format!("{:.2}{}", r.pam.fraction, if r.pam.truncated { "*" } else { "" }),
            format!("{}/{}", r.pam.activated, r.pam.total),
            r.spm.to_string(),
        ];
        row.extend(r.lifr.iter().map(|w| w.slbt.to_string()));
        cells.push(row);
    }
    let cols = cells.iter().map(|r| r.len()).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| cells.iter().filter_map(|r| r.get(c)).map(|s| s.len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in &cells {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    if let Some(r) = rows.first() {
        let _ = writeln!(out, "GIFR {:.6} bits/step (trace {})", r.gifr, r.trace_id);
    }
    out
}

pub fn render_json(rows: &[MetricReport]) -> String {
    serde_json::to_string_pretty(rows).expect("report serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_ends() {
        assert_eq!(window_end(0.25, 10), 3);
        assert_eq!(window_end(1.0, 10), 10);
        assert_eq!(window_end(0.01, 10), 1);
        assert_eq!(window_end(0.5, 1), 1);
    }

    #[test]
    fn table_shape() {
        let row = MetricReport {
            asset: "m/k".into(),
            target: "m/x".into(),
            scm: false,
            scm_observed: false,
            pam: PamSummary {
                fraction: 0.0,
                activated: 0,
                total: 0,
                truncated: false,
            },
            spm: Distance::Infinite,
            spm_time: 9,
            lifr: DEFAULT_FRACTIONS
                .iter()
                .map(|f| WindowMetric {
                    fraction: *f,
                    t1: 0,
                    t2: window_end(*f, 10),
                    slbt: 0,
                    lifr: 0.0,
                })
                .collect(),
            gifr: 0.0,
            trace_id: "t".into(),
        };
        let t = render_table(std::slice::from_ref(&row));
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[0].starts_with("No.  Target  SCM"));
        assert!(lines[0].ends_with("LIFR(100%)"));
        let cols: Vec<&str> = lines[1].split_whitespace().collect();
        assert_eq!(cols, ["1", "m/x", "FALSE", "0.00", "0/0", "inf", "0", "0", "0", "0"]);
        let back: Vec<MetricReport> = serde_json::from_str(&render_json(std::slice::from_ref(&row))).unwrap();
        assert_eq!(back, vec![row]);
    }
}
