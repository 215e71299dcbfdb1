// SPDX-License-Identifier: Apache-2.0

//! Signal and information-flow extraction over an elaborated design.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::rtl::ast::{BinaryOp, Direction, UnaryOp};
use crate::rtl::ir::{ElaboratedDesign, Expr, Lhs, Process, SignalId, Stmt};
use crate::site::SourceSite;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signal {
    pub id: SignalId,
    pub name: String,
    pub width: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum Timing {
    Continuous,
    /// Committed on the rising edge of `clock`.
    Clocked { clock: SignalId },
}

impl Timing {
    pub fn clock(self) -> Option<SignalId> {
        match self {
            Timing::Continuous => None,
            Timing::Clocked { clock } => Some(clock),
        }
    }
}

/// Bits of the head signal written by the assignment behind a flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitRange {
    pub lo: u32,
    pub width: u32,
}

impl From<&Lhs> for BitRange {
    fn from(l: &Lhs) -> Self {
        BitRange {
            lo: l.lo,
            width: l.width,
        }
    }
}

/// Conjunction of guard conditions; the empty conjunction is true.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Predicate {
    pub conjuncts: Vec<Expr>,
}

impl Predicate {
    pub const TRUE: Predicate = Predicate {
        conjuncts: Vec::new(),
    };

    pub fn is_true(&self) -> bool {
        self.conjuncts.is_empty()
    }

    pub fn and(&self, e: Expr) -> Predicate {
        let mut conjuncts = self.conjuncts.clone();
        conjuncts.push(e);
        Predicate { conjuncts }
    }

    pub fn eval(&self, value: &dyn Fn(SignalId) -> u64, widths: &dyn Fn(SignalId) -> u32) -> bool {
        self.conjuncts.iter().all(|c| {
            let w = c.self_width(widths);
            c.eval(w, value, widths) != 0
        })
    }

    /// Distinct signals referenced, in first-occurrence order.
    pub fn signals(&self) -> Vec<SignalId> {
        let mut out = Vec::new();
        for c in &self.conjuncts {
            c.for_each_signal(&mut |s| {
                if !out.contains(&s) {
                    out.push(s);
                }
            });
        }
        out
    }

    pub fn render(&self, names: &dyn Fn(SignalId) -> String) -> String {
        if self.is_true() {
            return "1".to_string();
        }
        if let [only] = self.conjuncts.as_slice() {
            return only.render(names);
        }
        let parts: Vec<String> = self
            .conjuncts
            .iter()
            .map(|c| match c {
                Expr::Binary(..) | Expr::Ternary(..) => format!("({})", c.render(names)),
                _ => c.render(names),
            })
            .collect();
        parts.join(" && ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub tail: SignalId,
    pub head: SignalId,
    pub kind: FlowKind,
    pub predicate: Predicate,
    pub site: SourceSite,
    pub timing: Timing,
    pub bits: BitRange,
    /// The implicit `clock -> head` flow of a clocked assignment.
    #[serde(default)]
    pub clock_sensitivity: bool,
}

pub fn extract_signals(design: &ElaboratedDesign) -> Vec<Signal> {
    design
        .ids()
        .map(|id| {
            let s = design.signal(id);
            Signal {
                id,
                name: s.name.clone(),
                width: s.width,
                direction: s.direction,
            }
        })
        .collect()
}

pub fn extract_flows(design: &ElaboratedDesign) -> Vec<FlowRecord> {
    let mut out = Vec::new();
    for p in &design.processes {
        match p {
            Process::Assign { lhs, rhs, site } => {
                emit(&mut out, lhs, rhs, &Predicate::TRUE, site, Timing::Continuous);
            }
            Process::Comb { body, .. } => walk(&mut out, body, &Predicate::TRUE, Timing::Continuous),
            Process::Clocked { clock, body, .. } => {
                walk(&mut out, body, &Predicate::TRUE, Timing::Clocked { clock: *clock })
            }
        }
    }
    let names = |s: SignalId| design.signal(s).name.as_str();
    out.sort_by(|x, y| {
        (&x.site, names(x.head), x.kind, x.clock_sensitivity, names(x.tail)).cmp(&(
            &y.site,
            names(y.head),
            y.kind,
            y.clock_sensitivity,
            names(y.tail),
        ))
    });
    out
}

fn emit(
    out: &mut Vec<FlowRecord>,
    lhs: &Lhs,
    rhs: &Expr,
    pred: &Predicate,
    site: &SourceSite,
    timing: Timing,
) {
    let record = |tail, kind, predicate: &Predicate, clock_sensitivity| FlowRecord {
        tail,
        head: lhs.signal,
        kind,
        predicate: predicate.clone(),
        site: site.clone(),
        timing,
        bits: lhs.into(),
        clock_sensitivity,
    };
    for s in rhs.signals() {
        out.push(record(s, FlowKind::Explicit, pred, false));
    }
    let guards = pred.signals();
    for &s in &guards {
        out.push(record(s, FlowKind::Implicit, pred, false));
    }
    if let Timing::Clocked { clock } = timing {
        if !guards.contains(&clock) {
            out.push(record(clock, FlowKind::Implicit, &Predicate::TRUE, true));
        }
    }
}

fn not(e: Expr) -> Expr {
    Expr::Unary(UnaryOp::LogNot, Box::new(e))
}

/// `selector` matches any of `labels`.
pub(crate) fn case_match(selector: &Expr, labels: &[Expr]) -> Expr {
    let mut it = labels
        .iter()
        .map(|l| Expr::Binary(BinaryOp::Eq, Box::new(selector.clone()), Box::new(l.clone())));
    let first = it.next().unwrap_or(Expr::const_bool(false));
    it.fold(first, |acc, e| Expr::Binary(BinaryOp::LogOr, Box::new(acc), Box::new(e)))
}

fn walk(out: &mut Vec<FlowRecord>, s: &Stmt, pred: &Predicate, timing: Timing) {
    match s {
        Stmt::Block(b) => b.iter().for_each(|x| walk(out, x, pred, timing)),
        Stmt::Assign { lhs, rhs, site, .. } => emit(out, lhs, rhs, pred, site, timing),
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            walk(out, then_branch, &pred.and(cond.clone()), timing);
            if let Some(e) = else_branch {
                walk(out, e, &pred.and(not(cond.clone())), timing);
            }
        }
        Stmt::Case {
            selector,
            items,
            default,
        } => {
            let mut prior = pred.clone();
            for (labels, body) in items {
                let m = case_match(selector, labels);
                walk(out, body, &prior.and(m.clone()), timing);
                prior = prior.and(not(m));
            }
            if let Some(d) = default {
                walk(out, d, &prior, timing);
            }
        }
        Stmt::Nop => {}
    }
}

/// Number of distinct (tail, head, kind, site, clock flag) keys; equals the
/// record count for well-formed output.
pub fn distinct_keys(flows: &[FlowRecord]) -> usize {
    flows
        .iter()
        .map(|f| (f.tail, f.head, f.kind, &f.site, f.clock_sensitivity))
        .collect::<BTreeSet<_>>()
        .len()
}
