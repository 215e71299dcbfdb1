// SPDX-License-Identifier: Apache-2.0

//! Flat, elaborated design representation shared by flow extraction, the
//! simulator and predicate evaluation.

use std::collections::HashMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::ast::{BinaryOp, Direction, NetKind, UnaryOp};
use crate::bits::{mask, shl, shr};
use crate::site::SourceSite;

/// Index of a signal in an [`ElaboratedDesign`] (and of the corresponding
/// vertex in a hyperflow graph).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignalId(pub u32);

impl SignalId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalInfo {
    /// Hierarchical name, `<top>/<name>` or `<top>/<inst>/<name>`.
    pub name: String,
    pub width: u32,
    /// Port direction; only set for ports of the top module.
    pub direction: Option<Direction>,
    pub kind: NetKind,
    pub site: SourceSite,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Const {
        width: u32,
        value: u64,
    },
    /// `'0` / `'1`, filling the context width.
    Fill(bool),
    Signal(SignalId),
    /// Single-bit select; `offset` is the declared lsb of the base signal.
    Index {
        base: SignalId,
        index: Box<Expr>,
        offset: i64,
    },
    /// Constant part-select, normalized to a 0-based bit range.
    Slice {
        base: SignalId,
        lo: u32,
        width: u32,
    },
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Concat(Vec<Expr>),
    Repeat(u32, Box<Expr>),
}

impl Expr {
    pub fn const_bool(b: bool) -> Expr {
        Expr::Const {
            width: 1,
            value: b as u64,
        }
    }

    /// Self-determined width under the usual Verilog sizing rules.
    pub fn self_width(&self, widths: &dyn Fn(SignalId) -> u32) -> u32 {
        match self {
            Expr::Const { width, .. } => *width,
            Expr::Fill(_) | Expr::Index { .. } => 1,
            Expr::Signal(s) => widths(*s),
            Expr::Slice { width, .. } => *width,
            Expr::Unary(UnaryOp::Not | UnaryOp::Neg, a) => a.self_width(widths),
            Expr::Unary(_, _) => 1,
            Expr::Binary(op, a, b) => {
                if op.is_boolean() {
                    1
                } else if matches!(op, BinaryOp::Shl | BinaryOp::Shr) {
                    a.self_width(widths)
                } else {
                    a.self_width(widths).max(b.self_width(widths))
                }
            }
            Expr::Ternary(_, a, b) => a.self_width(widths).max(b.self_width(widths)),
            Expr::Concat(es) => es.iter().map(|e| e.self_width(widths)).sum(),
            Expr::Repeat(n, e) => n * e.self_width(widths),
        }
    }

    /// Calls `f` for every signal read by this expression (select bases and
    /// index operands included), in left-to-right order, with repeats.
    pub fn for_each_signal(&self, f: &mut impl FnMut(SignalId)) {
        match self {
            Expr::Const { .. } | Expr::Fill(_) => {}
            Expr::Signal(s) | Expr::Slice { base: s, .. } => f(*s),
            Expr::Index { base, index, .. } => {
                f(*base);
                index.for_each_signal(f);
            }
            Expr::Unary(_, a) | Expr::Repeat(_, a) => a.for_each_signal(f),
            Expr::Binary(_, a, b) => {
                a.for_each_signal(f);
                b.for_each_signal(f);
            }
            Expr::Ternary(c, a, b) => {
                c.for_each_signal(f);
                a.for_each_signal(f);
                b.for_each_signal(f);
            }
            Expr::Concat(es) => es.iter().for_each(|e| e.for_each_signal(f)),
        }
    }

    /// Distinct signals read, in first-occurrence order.
    pub fn signals(&self) -> Vec<SignalId> {
        let mut out = Vec::new();
        self.for_each_signal(&mut |s| {
            if !out.contains(&s) {
                out.push(s);
            }
        });
        out
    }

    /// Evaluates the expression in a context of `ctx` bits, reading signal
    /// values through `value`. The result is masked to `ctx` bits.
    pub fn eval(&self, ctx: u32, value: &dyn Fn(SignalId) -> u64, widths: &dyn Fn(SignalId) -> u32) -> u64 {
        let m = mask(ctx);
        match self {
            Expr::Const { value: v, .. } => v & m,
            Expr::Fill(one) => {
                if *one {
                    m
                } else {
                    0
                }
            }
            Expr::Signal(s) => value(*s) & m,
            Expr::Index {
                base,
                index,
                offset,
            } => {
                let iw = index.self_width(widths);
                let i = index.eval(iw, value, widths) as i64 - offset;
                if i < 0 || i >= widths(*base) as i64 {
                    0
                } else {
                    (value(*base) >> i) & 1
                }
            }
            Expr::Slice { base, lo, width } => (value(*base) >> lo) & mask(*width) & m,
            Expr::Unary(op, a) => match op {
                UnaryOp::Not => !a.eval(ctx, value, widths) & m,
                UnaryOp::Neg => a.eval(ctx, value, widths).wrapping_neg() & m,
                UnaryOp::LogNot => (a.eval(a.self_width(widths), value, widths) == 0) as u64,
                UnaryOp::RedAnd => {
                    let w = a.self_width(widths);
                    (a.eval(w, value, widths) == mask(w)) as u64
                }
                UnaryOp::RedOr => (a.eval(a.self_width(widths), value, widths) != 0) as u64,
                UnaryOp::RedXor => {
                    (a.eval(a.self_width(widths), value, widths).count_ones() & 1) as u64
                }
            },
            Expr::Binary(op, a, b) => match op {
                BinaryOp::And => a.eval(ctx, value, widths) & b.eval(ctx, value, widths),
                BinaryOp::Or => a.eval(ctx, value, widths) | b.eval(ctx, value, widths),
                BinaryOp::Xor => a.eval(ctx, value, widths) ^ b.eval(ctx, value, widths),
                BinaryOp::Add => {
                    a.eval(ctx, value, widths)
                        .wrapping_add(b.eval(ctx, value, widths))
                        & m
                }
                BinaryOp::Sub => {
                    a.eval(ctx, value, widths)
                        .wrapping_sub(b.eval(ctx, value, widths))
                        & m
                }
                BinaryOp::Shl => {
                    let amt = b.eval(b.self_width(widths), value, widths);
                    shl(a.eval(ctx, value, widths), amt) & m
                }
                BinaryOp::Shr => {
                    let amt = b.eval(b.self_width(widths), value, widths);
                    shr(a.eval(ctx, value, widths), amt)
                }
                BinaryOp::LogAnd => {
                    let x = a.eval(a.self_width(widths), value, widths) != 0;
                    let y = b.eval(b.self_width(widths), value, widths) != 0;
                    (x && y) as u64
                }
                BinaryOp::LogOr => {
                    let x = a.eval(a.self_width(widths), value, widths) != 0;
                    let y = b.eval(b.self_width(widths), value, widths) != 0;
                    (x || y) as u64
                }
                cmp => {
                    let w = a.self_width(widths).max(b.self_width(widths));
                    let x = a.eval(w, value, widths);
                    let y = b.eval(w, value, widths);
                    (match cmp {
                        BinaryOp::Eq => x == y,
                        BinaryOp::Ne => x != y,
                        BinaryOp::Lt => x < y,
                        BinaryOp::Le => x <= y,
                        BinaryOp::Gt => x > y,
                        BinaryOp::Ge => x >= y,
                        _ => unreachable!(),
                    }) as u64
                }
            },
            Expr::Ternary(c, a, b) => {
                if c.eval(c.self_width(widths), value, widths) != 0 {
                    a.eval(ctx, value, widths)
                } else {
                    b.eval(ctx, value, widths)
                }
            }
            Expr::Concat(es) => {
                let mut acc = 0u64;
                for e in es {
                    let w = e.self_width(widths);
                    acc = shl(acc, w as u64) | e.eval(w, value, widths);
                }
                acc & m
            }
            Expr::Repeat(n, e) => {
                let w = e.self_width(widths);
                let v = e.eval(w, value, widths);
                let mut acc = 0u64;
                for _ in 0..*n {
                    acc = shl(acc, w as u64) | v;
                }
                acc & m
            }
        }
    }

    /// Renders the expression using hierarchical signal names.
    pub fn render(&self, names: &dyn Fn(SignalId) -> String) -> String {
        let mut s = String::new();
        self.render_into(&mut s, names);
        s
    }

    fn render_into(&self, out: &mut String, names: &dyn Fn(SignalId) -> String) {
        let sub = |e: &Expr, out: &mut String| {
            if matches!(e, Expr::Unary(..) | Expr::Binary(..) | Expr::Ternary(..)) {
                out.push('(');
                e.render_into(out, names);
                out.push(')');
            } else {
                e.render_into(out, names);
            }
        };
        match self {
            Expr::Const { width, value } => {
                let _ = write!(out, "{width}'d{value}");
            }
            Expr::Fill(one) => out.push_str(if *one { "'1" } else { "'0" }),
            Expr::Signal(s) => out.push_str(&names(*s)),
            Expr::Index {
                base,
                index,
                offset,
            } => {
                out.push_str(&names(*base));
                out.push('[');
                index.render_into(out, names);
                if *offset != 0 {
                    let _ = write!(out, " - {offset}");
                }
                out.push(']');
            }
            Expr::Slice { base, lo, width } => {
                let _ = write!(out, "{}[{}:{}]", names(*base), lo + width - 1, lo);
            }
            Expr::Unary(op, a) => {
                out.push_str(op.symbol());
                sub(a, out);
            }
            Expr::Binary(op, a, b) => {
                sub(a, out);
                let _ = write!(out, " {} ", op.symbol());
                sub(b, out);
            }
            Expr::Ternary(c, a, b) => {
                sub(c, out);
                out.push_str(" ? ");
                sub(a, out);
                out.push_str(" : ");
                sub(b, out);
            }
            Expr::Concat(es) => {
                out.push('{');
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    e.render_into(out, names);
                }
                out.push('}');
            }
            Expr::Repeat(n, e) => {
                let _ = write!(out, "{{{n}{{");
                e.render_into(out, names);
                out.push_str("}}");
            }
        }
    }
}

/// Target bits of an assignment, as a 0-based range of `signal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lhs {
    pub signal: SignalId,
    pub lo: u32,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Block(Vec<Stmt>),
    Assign {
        lhs: Lhs,
        rhs: Expr,
        blocking: bool,
        site: SourceSite,
    },
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    Case {
        selector: Expr,
        items: Vec<(Vec<Expr>, Stmt)>,
        default: Option<Box<Stmt>>,
    },
    Nop,
}

impl Stmt {
    /// Every assignment target in this statement, statically.
    pub fn for_each_lhs(&self, f: &mut impl FnMut(&Lhs)) {
        match self {
            Stmt::Block(b) => b.iter().for_each(|s| s.for_each_lhs(f)),
            Stmt::Assign { lhs, .. } => f(lhs),
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.for_each_lhs(f);
                if let Some(e) = else_branch {
                    e.for_each_lhs(f);
                }
            }
            Stmt::Case { items, default, .. } => {
                items.iter().for_each(|(_, s)| s.for_each_lhs(f));
                if let Some(d) = default {
                    d.for_each_lhs(f);
                }
            }
            Stmt::Nop => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Process {
    /// Continuous assignment (including instance port connections).
    Assign {
        lhs: Lhs,
        rhs: Expr,
        site: SourceSite,
    },
    /// `always @(*)` / `always_comb`.
    Comb { body: Stmt, site: SourceSite },
    /// `always @(posedge clock)` / `always_ff`.
    Clocked {
        clock: SignalId,
        body: Stmt,
        site: SourceSite,
    },
}

impl Process {
    pub fn site(&self) -> &SourceSite {
        match self {
            Process::Assign { site, .. } | Process::Comb { site, .. } | Process::Clocked { site, .. } => {
                site
            }
        }
    }

    pub fn for_each_lhs(&self, f: &mut impl FnMut(&Lhs)) {
        match self {
            Process::Assign { lhs, .. } => f(lhs),
            Process::Comb { body, .. } | Process::Clocked { body, .. } => body.for_each_lhs(f),
        }
    }

    /// Signals read anywhere in the process (excluding the clock).
    pub fn reads(&self) -> Vec<SignalId> {
        let mut out = Vec::new();
        let mut push = |s: SignalId| {
            if !out.contains(&s) {
                out.push(s);
            }
        };
        fn stmt(s: &Stmt, push: &mut impl FnMut(SignalId)) {
            match s {
                Stmt::Block(b) => b.iter().for_each(|s| stmt(s, push)),
                Stmt::Assign { rhs, .. } => rhs.for_each_signal(push),
                Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    cond.for_each_signal(push);
                    stmt(then_branch, push);
                    if let Some(e) = else_branch {
                        stmt(e, push);
                    }
                }
                Stmt::Case {
                    selector,
                    items,
                    default,
                } => {
                    selector.for_each_signal(push);
                    for (labels, body) in items {
                        labels.iter().for_each(|l| l.for_each_signal(push));
                        stmt(body, push);
                    }
                    if let Some(d) = default {
                        stmt(d, push);
                    }
                }
                Stmt::Nop => {}
            }
        }
        match self {
            Process::Assign { rhs, .. } => rhs.for_each_signal(&mut push),
            Process::Comb { body, .. } | Process::Clocked { body, .. } => stmt(body, &mut push),
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ElaboratedDesign {
    pub top: String,
    pub signals: Vec<SignalInfo>,
    pub processes: Vec<Process>,
    by_name: HashMap<String, SignalId>,
}

impl ElaboratedDesign {
    pub(crate) fn new(top: String, signals: Vec<SignalInfo>, processes: Vec<Process>) -> Self {
        let by_name = signals
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.clone(), SignalId(i as u32)))
            .collect();
        ElaboratedDesign {
            top,
            signals,
            processes,
            by_name,
        }
    }

    pub fn signal(&self, id: SignalId) -> &SignalInfo {
        &self.signals[id.index()]
    }

    pub fn width(&self, id: SignalId) -> u32 {
        self.signals[id.index()].width
    }

    /// Looks a signal up by hierarchical name; a bare name is also tried
    /// under the top module prefix.
    pub fn lookup(&self, name: &str) -> Option<SignalId> {
        self.by_name
            .get(name)
            .or_else(|| self.by_name.get(&format!("{}/{}", self.top, name)))
            .copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = SignalId> {
        (0..self.signals.len() as u32).map(SignalId)
    }

    pub fn inputs(&self) -> impl Iterator<Item = SignalId> + '_ {
        self.ids()
            .filter(|s| self.signal(*s).direction == Some(Direction::Input))
    }

    pub fn outputs(&self) -> impl Iterator<Item = SignalId> + '_ {
        self.ids()
            .filter(|s| self.signal(*s).direction == Some(Direction::Output))
    }

    pub fn expr_width(&self, e: &Expr) -> u32 {
        e.self_width(&|s| self.width(s))
    }
}
