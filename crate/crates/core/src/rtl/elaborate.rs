// SPDX-License-Identifier: Apache-2.0

//! Flattens the top module and its direct sub-module instances into one
//! namespace of signals and a list of processes.

use std::collections::HashMap;

use thiserror::Error;

use super::ast::{self, Direction, ExprKind, ModuleDecl, ModuleItem, Range, Select, StmtKind};
use super::ir::{ElaboratedDesign, Expr, Lhs, Process, SignalId, SignalInfo, Stmt};
use crate::bits::MAX_WIDTH;
use crate::site::SourceSite;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ElaborationError {
    #[error("{site}: module `{name}` is not declared")]
    MissingModule { site: SourceSite, name: String },
    #[error("{site}: port mismatch: {detail}")]
    PortMismatch { site: SourceSite, detail: String },
    #[error("{site}: combinational cycle through continuous assignments: {path}")]
    CombinationalCycle { site: SourceSite, path: String },
    #[error("{site}: bits of `{name}` are driven by more than one process")]
    MultipleDrivers { site: SourceSite, name: String },
    #[error("{site}: top-level input `{name}` is driven inside the design")]
    DrivenInput { site: SourceSite, name: String },
    #[error("{site}: `{name}` is {width} bits wide; at most 64 are supported")]
    TooWide {
        site: SourceSite,
        name: String,
        width: u32,
    },
    #[error("{site}: clock `{name}` must be a 1-bit top-level input")]
    UnsupportedClock { site: SourceSite, name: String },
}

impl ElaborationError {
    pub fn site(&self) -> &SourceSite {
        match self {
            ElaborationError::MissingModule { site, .. }
            | ElaborationError::PortMismatch { site, .. }
            | ElaborationError::CombinationalCycle { site, .. }
            | ElaborationError::MultipleDrivers { site, .. }
            | ElaborationError::DrivenInput { site, .. }
            | ElaborationError::TooWide { site, .. }
            | ElaborationError::UnsupportedClock { site, .. } => site,
        }
    }
}

#[derive(Clone, Copy)]
struct Slot {
    id: SignalId,
    range: Range,
}

/// Name scope of one module instance.
struct Scope<'a> {
    module: &'a ModuleDecl,
    slots: HashMap<&'a str, Slot>,
}

impl<'a> Scope<'a> {
    fn slot(&self, name: &str) -> Slot {
        self.slots[name]
    }

    fn const_value(&self, e: &ast::Expr) -> Option<i64> {
        match &e.kind {
            ExprKind::Literal { value, .. } => Some(*value as i64),
            ExprKind::Ident(n) if !self.slots.contains_key(n.as_str()) => {
                self.module.param(n).map(|p| p.value as i64)
            }
            _ => None,
        }
    }

    fn expr(&self, e: &ast::Expr) -> Expr {
        let b = |x: &ast::Expr| Box::new(self.expr(x));
        match &e.kind {
            ExprKind::Ident(n) => match self.slots.get(n.as_str()) {
                Some(s) => Expr::Signal(s.id),
                None => Expr::Const {
                    width: 32,
                    value: self.module.param(n).map_or(0, |p| p.value),
                },
            },
            ExprKind::Literal { width, value } => Expr::Const {
                width: width.unwrap_or(32),
                value: *value,
            },
            ExprKind::Fill(one) => Expr::Fill(*one),
            ExprKind::Index { name, index } => {
                let s = self.slot(name);
                match self.const_value(index) {
                    Some(i) if i >= s.range.lsb && i <= s.range.msb => Expr::Slice {
                        base: s.id,
                        lo: (i - s.range.lsb) as u32,
                        width: 1,
                    },
                    Some(_) => Expr::Const { width: 1, value: 0 },
                    None => Expr::Index {
                        base: s.id,
                        index: b(index),
                        offset: s.range.lsb,
                    },
                }
            }
            ExprKind::Slice { name, msb, lsb } => {
                let s = self.slot(name);
                Expr::Slice {
                    base: s.id,
                    lo: (lsb - s.range.lsb) as u32,
                    width: (msb - lsb + 1) as u32,
                }
            }
            ExprKind::Unary(op, a) => Expr::Unary(*op, b(a)),
            ExprKind::Binary(op, x, y) => Expr::Binary(*op, b(x), b(y)),
            ExprKind::Ternary(c, x, y) => Expr::Ternary(b(c), b(x), b(y)),
            ExprKind::Concat(es) => Expr::Concat(es.iter().map(|x| self.expr(x)).collect()),
            ExprKind::Repeat(n, x) => Expr::Repeat(*n, b(x)),
        }
    }

    fn lhs(&self, l: &ast::LValue) -> Lhs {
        let s = self.slot(&l.name);
        match l.select {
            None => Lhs {
                signal: s.id,
                lo: 0,
                width: s.range.width(),
            },
            Some(Select::Bit(i)) => Lhs {
                signal: s.id,
                lo: (i - s.range.lsb) as u32,
                width: 1,
            },
            Some(Select::Part(hi, lo)) => Lhs {
                signal: s.id,
                lo: (lo - s.range.lsb) as u32,
                width: (hi - lo + 1) as u32,
            },
        }
    }

    fn stmt(&self, s: &ast::Stmt) -> Stmt {
        match &s.kind {
            StmtKind::Block(b) => Stmt::Block(b.iter().map(|x| self.stmt(x)).collect()),
            StmtKind::Assign { lhs, rhs, blocking } => Stmt::Assign {
                lhs: self.lhs(lhs),
                rhs: self.expr(rhs),
                blocking: *blocking,
                site: s.site.clone(),
            },
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => Stmt::If {
                cond: self.expr(cond),
                then_branch: Box::new(self.stmt(then_branch)),
                else_branch: else_branch.as_ref().map(|e| Box::new(self.stmt(e))),
            },
            StmtKind::Case {
                selector,
                items,
                default,
            } => Stmt::Case {
                selector: self.expr(selector),
                items: items
                    .iter()
                    .map(|it| {
                        (
                            it.labels.iter().map(|l| self.expr(l)).collect(),
                            self.stmt(&it.body),
                        )
                    })
                    .collect(),
                default: default.as_ref().map(|d| Box::new(self.stmt(d))),
            },
            StmtKind::Null => Stmt::Nop,
        }
    }
}

struct Builder<'a> {
    top: &'a str,
    signals: Vec<SignalInfo>,
    processes: Vec<Process>,
}

impl<'a> Builder<'a> {
    fn declare(
        &mut self,
        module: &'a ModuleDecl,
        prefix: &str,
        is_top: bool,
    ) -> Result<Scope<'a>, ElaborationError> {
        let mut slots = HashMap::new();
        let ports = module.ports.iter().map(|p| {
            (
                &p.name,
                p.range,
                p.kind,
                is_top.then_some(p.direction),
                &p.site,
            )
        });
        let decls = module
            .decls
            .iter()
            .map(|d| (&d.name, d.range, d.kind, None, &d.site));
        for (name, range, kind, direction, site) in ports.chain(decls) {
            let full = format!("{prefix}/{name}");
            let width = range.width();
            if width > MAX_WIDTH {
                return Err(ElaborationError::TooWide {
                    site: site.clone(),
                    name: full,
                    width,
                });
            }
            let id = SignalId(self.signals.len() as u32);
            self.signals.push(SignalInfo {
                name: full,
                width,
                direction,
                kind,
                site: site.clone(),
            });
            slots.insert(name.as_str(), Slot { id, range });
        }
        Ok(Scope { module, slots })
    }

    fn widths(&self) -> impl Fn(SignalId) -> u32 + '_ {
        |s| self.signals[s.index()].width
    }

    fn check_width(&self, e: &Expr, site: &SourceSite) -> Result<(), ElaborationError> {
        let w = self.widths();
        let mut bad = None;
        fn walk(e: &Expr, w: &dyn Fn(SignalId) -> u32, bad: &mut Option<u32>) {
            let sw = e.self_width(w);
            if sw > MAX_WIDTH {
                *bad = Some(sw);
                return;
            }
            match e {
                Expr::Index { index, .. } => walk(index, w, bad),
                Expr::Unary(_, a) | Expr::Repeat(_, a) => walk(a, w, bad),
                Expr::Binary(_, a, b) => {
                    walk(a, w, bad);
                    walk(b, w, bad);
                }
                Expr::Ternary(c, a, b) => {
                    walk(c, w, bad);
                    walk(a, w, bad);
                    walk(b, w, bad);
                }
                Expr::Concat(es) => es.iter().for_each(|x| walk(x, w, bad)),
                _ => {}
            }
        }
        walk(e, &w, &mut bad);
        match bad {
            Some(width) => Err(ElaborationError::TooWide {
                site: site.clone(),
                name: "expression".into(),
                width,
            }),
            None => Ok(()),
        }
    }

    fn items(&mut self, scope: &Scope<'a>) -> Result<(), ElaborationError> {
        for item in &scope.module.items {
            match item {
                ModuleItem::Assign { lhs, rhs, site } => {
                    let rhs = scope.expr(rhs);
                    self.check_width(&rhs, site)?;
                    self.processes.push(Process::Assign {
                        lhs: scope.lhs(lhs),
                        rhs,
                        site: site.clone(),
                    });
                }
                ModuleItem::Always {
                    sensitivity,
                    body,
                    site,
                    ..
                } => {
                    let body = scope.stmt(body);
                    let mut err = Ok(());
                    visit_stmt_exprs(&body, &mut |e| {
                        if err.is_ok() {
                            err = self.check_width(e, site);
                        }
                    });
                    err?;
                    let p = match sensitivity {
                        ast::Sensitivity::Posedge { clock, .. } => Process::Clocked {
                            clock: scope.slot(clock).id,
                            body,
                            site: site.clone(),
                        },
                        ast::Sensitivity::Star => Process::Comb {
                            body,
                            site: site.clone(),
                        },
                    };
                    self.processes.push(p);
                }
                ModuleItem::Instance(_) => {}
            }
        }
        Ok(())
    }

    fn connect(
        &mut self,
        parent: &Scope<'a>,
        child: &Scope<'a>,
        inst: &ast::Instance,
    ) -> Result<(), ElaborationError> {
        let module = child.module;
        let mut bound: Vec<(&ast::PortDecl, &ast::PortConnection)> = Vec::new();
        let positional = inst.connections.iter().any(|c| c.port.is_none());
        if positional && inst.connections.len() > module.ports.len() {
            return Err(ElaborationError::PortMismatch {
                site: inst.site.clone(),
                detail: format!(
                    "`{}` has {} ports but {} connections were given",
                    module.name,
                    module.ports.len(),
                    inst.connections.len()
                ),
            });
        }
        for (i, c) in inst.connections.iter().enumerate() {
            let port = match &c.port {
                Some(name) => module.port(name).ok_or_else(|| ElaborationError::PortMismatch {
                    site: c.site.clone(),
                    detail: format!("`{}` has no port `{name}`", module.name),
                })?,
                None => &module.ports[i],
            };
            if bound.iter().any(|(p, _)| p.name == port.name) {
                return Err(ElaborationError::PortMismatch {
                    site: c.site.clone(),
                    detail: format!("port `{}` connected twice", port.name),
                });
            }
            bound.push((port, c));
        }
        for (port, c) in bound {
            let Some(e) = &c.expr else { continue };
            let slot = child.slot(&port.name);
            let pw = port.range.width();
            let port_lhs = Lhs {
                signal: slot.id,
                lo: 0,
                width: pw,
            };
            match port.direction {
                Direction::Input => {
                    let rhs = parent.expr(e);
                    self.check_width(&rhs, &c.site)?;
                    let free = matches!(
                        e.kind,
                        ExprKind::Literal { width: None, .. } | ExprKind::Fill(_)
                    );
                    let ew = rhs.self_width(&self.widths());
                    if !free && ew != pw {
                        return Err(ElaborationError::PortMismatch {
                            site: c.site.clone(),
                            detail: format!(
                                "input `{}` of `{}` is {pw} bits, connection is {ew} bits",
                                port.name, inst.name
                            ),
                        });
                    }
                    self.processes.push(Process::Assign {
                        lhs: port_lhs,
                        rhs,
                        site: c.site.clone(),
                    });
                }
                Direction::Output => {
                    let lv = match &e.kind {
                        ExprKind::Ident(n) if parent.slots.contains_key(n.as_str()) => {
                            Some(ast::LValue {
                                name: n.clone(),
                                select: None,
                                site: e.site.clone(),
                            })
                        }
                        ExprKind::Slice { name, msb, lsb } => Some(ast::LValue {
                            name: name.clone(),
                            select: Some(Select::Part(*msb, *lsb)),
                            site: e.site.clone(),
                        }),
                        ExprKind::Index { name, index } => {
                            parent.const_value(index).and_then(|i| {
                                let r = parent.slot(name).range;
                                (i >= r.lsb && i <= r.msb).then(|| ast::LValue {
                                    name: name.clone(),
                                    select: Some(Select::Bit(i)),
                                    site: e.site.clone(),
                                })
                            })
                        }
                        _ => None,
                    };
                    let Some(lv) = lv else {
                        return Err(ElaborationError::PortMismatch {
                            site: c.site.clone(),
                            detail: format!(
                                "output `{}` of `{}` must connect to a signal or constant select",
                                port.name, inst.name
                            ),
                        });
                    };
                    let lhs = parent.lhs(&lv);
                    if lhs.width != pw {
                        return Err(ElaborationError::PortMismatch {
                            site: c.site.clone(),
                            detail: format!(
                                "output `{}` of `{}` is {pw} bits, connection is {} bits",
                                port.name, inst.name, lhs.width
                            ),
                        });
                    }
                    self.processes.push(Process::Assign {
                        lhs,
                        rhs: Expr::Signal(slot.id),
                        site: c.site.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn visit_stmt_exprs(s: &Stmt, f: &mut impl FnMut(&Expr)) {
    match s {
        Stmt::Block(b) => b.iter().for_each(|x| visit_stmt_exprs(x, f)),
        Stmt::Assign { rhs, .. } => f(rhs),
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            f(cond);
            visit_stmt_exprs(then_branch, f);
            if let Some(e) = else_branch {
                visit_stmt_exprs(e, f);
            }
        }
        Stmt::Case {
            selector,
            items,
            default,
        } => {
            f(selector);
            for (labels, body) in items {
                labels.iter().for_each(&mut *f);
                visit_stmt_exprs(body, f);
            }
            if let Some(d) = default {
                visit_stmt_exprs(d, f);
            }
        }
        Stmt::Nop => {}
    }
}

/// Elaborates `top` and its direct instances into a flat design.
pub fn elaborate(ast: &ast::Ast, top: &str) -> Result<ElaboratedDesign, ElaborationError> {
    let Some(top_mod) = ast.module(top) else {
        let file = ast
            .modules
            .first()
            .map_or_else(|| "<input>".to_string(), |m| m.site.file.clone());
        return Err(ElaborationError::MissingModule {
            site: SourceSite::new(file, 1, 1),
            name: top.to_string(),
        });
    };
    let mut b = Builder {
        top,
        signals: Vec::new(),
        processes: Vec::new(),
    };
    let top_scope = b.declare(top_mod, top, true)?;
    let mut children = Vec::new();
    for item in &top_mod.items {
        if let ModuleItem::Instance(inst) = item {
            let child = ast
                .module(&inst.module)
                .ok_or_else(|| ElaborationError::MissingModule {
                    site: inst.site.clone(),
                    name: inst.module.clone(),
                })?;
            let scope = b.declare(child, &format!("{top}/{}", inst.name), false)?;
            children.push((inst, scope));
        }
    }
    // Processes follow source order: the top module's own items, then each
    // instance's port connections and body.
    b.items(&top_scope)?;
    for (inst, scope) in &children {
        b.connect(&top_scope, scope, inst)?;
        b.items(scope)?;
    }
    resolve_clocks(&mut b)?;
    check_drivers(&b)?;
    check_cycles(&b)?;
    Ok(ElaboratedDesign::new(b.top.to_string(), b.signals, b.processes))
}

/// Rewrites clocks that are plain aliases of another signal (port
/// connections, `wire c = clk;`) to the root signal, which must be a 1-bit
/// top-level input.
fn resolve_clocks(b: &mut Builder<'_>) -> Result<(), ElaborationError> {
    let mut alias: HashMap<SignalId, SignalId> = HashMap::new();
    for p in &b.processes {
        if let Process::Assign {
            lhs,
            rhs: Expr::Signal(src),
            ..
        } = p
        {
            let lw = b.signals[lhs.signal.index()].width;
            if lhs.lo == 0 && lhs.width == lw && b.signals[src.index()].width == lw {
                alias.insert(lhs.signal, *src);
            }
        }
    }
    for p in &mut b.processes {
        if let Process::Clocked { clock, site, .. } = p {
            let mut c = *clock;
            let mut hops = 0;
            while let Some(next) = alias.get(&c) {
                c = *next;
                hops += 1;
                if hops > alias.len() {
                    break;
                }
            }
            let info = &b.signals[c.index()];
            if info.direction != Some(Direction::Input) || info.width != 1 {
                return Err(ElaborationError::UnsupportedClock {
                    site: site.clone(),
                    name: b.signals[clock.index()].name.clone(),
                });
            }
            *clock = c;
        }
    }
    Ok(())
}

fn check_drivers(b: &Builder<'_>) -> Result<(), ElaborationError> {
    let mut driven: Vec<Vec<(usize, u64)>> = vec![Vec::new(); b.signals.len()];
    for (pi, p) in b.processes.iter().enumerate() {
        let mut err = None;
        p.for_each_lhs(&mut |l| {
            if err.is_some() {
                return;
            }
            let info = &b.signals[l.signal.index()];
            if info.direction == Some(Direction::Input) {
                err = Some(ElaborationError::DrivenInput {
                    site: p.site().clone(),
                    name: info.name.clone(),
                });
                return;
            }
            let m = crate::bits::field_mask(l.lo, l.width);
            let slot = &mut driven[l.signal.index()];
            if slot.iter().any(|(other, om)| *other != pi && om & m != 0) {
                err = Some(ElaborationError::MultipleDrivers {
                    site: p.site().clone(),
                    name: info.name.clone(),
                });
                return;
            }
            slot.push((pi, m));
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(())
}

fn check_cycles(b: &Builder<'_>) -> Result<(), ElaborationError> {
    let n = b.signals.len();
    let mut succ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (pi, p) in b.processes.iter().enumerate() {
        if let Process::Assign { lhs, rhs, .. } = p {
            for s in rhs.signals() {
                succ[s.index()].push((lhs.signal.index(), pi));
            }
        }
    }
    // Iterative DFS with colors; on a back edge, reconstruct the cycle.
    let mut color = vec![0u8; n];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        color[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < succ[v].len() {
                let (w, pi) = succ[v][*next];
                *next += 1;
                match color[w] {
                    0 => {
                        color[w] = 1;
                        parent[w] = Some((v, pi));
                        stack.push((w, 0));
                    }
                    1 => {
                        let mut names = vec![b.signals[w].name.clone()];
                        let mut cur = v;
                        while cur != w {
                            names.push(b.signals[cur].name.clone());
                            cur = parent[cur].map_or(w, |(p, _)| p);
                        }
                        names.push(b.signals[w].name.clone());
                        names.reverse();
                        return Err(ElaborationError::CombinationalCycle {
                            site: b.processes[pi].site().clone(),
                            path: names.join(" -> "),
                        });
                    }
                    _ => {}
                }
            } else {
                color[v] = 2;
                stack.pop();
            }
        }
    }
    Ok(())
}
