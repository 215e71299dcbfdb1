// SPDX-License-Identifier: Apache-2.0

//! Canonical pretty-printer. Reparsing the output yields a tree that is
//! structurally identical to the input (sites aside).

use std::fmt::{self, Write};

use super::ast::*;

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.modules.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write_module(f, m)?;
        }
        Ok(())
    }
}

fn range(r: Range) -> String {
    if r == Range::SCALAR {
        String::new()
    } else {
        format!(" [{}:{}]", r.msb, r.lsb)
    }
}

fn write_module(f: &mut fmt::Formatter<'_>, m: &ModuleDecl) -> fmt::Result {
    write!(f, "module {}", m.name)?;
    if !m.ports.is_empty() {
        writeln!(f, " (")?;
        for (i, p) in m.ports.iter().enumerate() {
            let dir = match p.direction {
                Direction::Input => "input",
                Direction::Output => "output",
            };
            let sep = if i + 1 == m.ports.len() { "" } else { "," };
            writeln!(
                f,
                "  {dir} {}{} {}{sep}",
                p.kind.keyword(),
                range(p.range),
                p.name
            )?;
        }
        write!(f, ")")?;
    }
    writeln!(f, ";")?;
    for p in &m.params {
        let kw = if p.local { "localparam" } else { "parameter" };
        writeln!(f, "  {kw} {} = {};", p.name, p.value)?;
    }
    for d in &m.decls {
        writeln!(f, "  {}{} {};", d.kind.keyword(), range(d.range), d.name)?;
    }
    for item in &m.items {
        match item {
            ModuleItem::Assign { lhs, rhs, .. } => {
                writeln!(f, "  assign {} = {};", lvalue(lhs), expr(rhs))?;
            }
            ModuleItem::Always {
                kind,
                sensitivity,
                body,
                ..
            } => {
                let head = match (kind, sensitivity) {
                    (AlwaysKind::Comb, _) => "always_comb".to_string(),
                    (AlwaysKind::Ff, Sensitivity::Posedge { clock, .. }) => {
                        format!("always_ff @(posedge {clock})")
                    }
                    (_, Sensitivity::Posedge { clock, .. }) => format!("always @(posedge {clock})"),
                    (_, Sensitivity::Star) => "always @(*)".to_string(),
                };
                let mut s = String::new();
                write_stmt(&mut s, body, 1)?;
                write!(f, "  {head}")?;
                writeln!(f, "{}", s.trim_start_matches(' ').trim_end())?;
            }
            ModuleItem::Instance(inst) => {
                let conns: Vec<String> = inst
                    .connections
                    .iter()
                    .map(|c| {
                        let e = c.expr.as_ref().map(expr).unwrap_or_default();
                        match &c.port {
                            Some(p) => format!(".{p}({e})"),
                            None => e,
                        }
                    })
                    .collect();
                writeln!(f, "  {} {} ({});", inst.module, inst.name, conns.join(", "))?;
            }
        }
    }
    writeln!(f, "endmodule")
}

fn lvalue(l: &LValue) -> String {
    match &l.select {
        None => l.name.clone(),
        Some(Select::Bit(i)) => format!("{}[{i}]", l.name),
        Some(Select::Part(h, lo)) => format!("{}[{h}:{lo}]", l.name),
    }
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize) -> fmt::Result {
    let pad = "  ".repeat(depth);
    match &s.kind {
        StmtKind::Null => writeln!(out, " ;"),
        StmtKind::Block(b) => {
            writeln!(out, " begin")?;
            for st in b {
                write!(out, "{pad}  ")?;
                let mut inner = String::new();
                write_stmt(&mut inner, st, depth + 1)?;
                out.push_str(inner.trim_start_matches(' '));
            }
            writeln!(out, "{pad}end")
        }
        StmtKind::Assign { lhs, rhs, blocking } => {
            let op = if *blocking { "=" } else { "<=" };
            writeln!(out, " {} {op} {};", lvalue(lhs), expr(rhs))
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            write!(out, " if ({})", expr(cond))?;
            let mut t = String::new();
            write_stmt(&mut t, then_branch, depth)?;
            out.push_str(&t);
            if let Some(e) = else_branch {
                write!(out, "{pad}else")?;
                write_stmt(out, e, depth)?;
            }
            Ok(())
        }
        StmtKind::Case {
            selector,
            items,
            default,
        } => {
            writeln!(out, " case ({})", expr(selector))?;
            for it in items {
                let labels: Vec<String> = it.labels.iter().map(expr).collect();
                write!(out, "{pad}  {}:", labels.join(", "))?;
                write_stmt(out, &it.body, depth + 1)?;
            }
            if let Some(d) = default {
                write!(out, "{pad}  default:")?;
                write_stmt(out, d, depth + 1)?;
            }
            writeln!(out, "{pad}endcase")
        }
    }
}

/// Renders an expression with every compound operand parenthesized.
pub fn expr(e: &Expr) -> String {
    fn sub(e: &Expr) -> String {
        match &e.kind {
            ExprKind::Unary(..) | ExprKind::Binary(..) | ExprKind::Ternary(..) => {
                format!("({})", expr(e))
            }
            _ => expr(e),
        }
    }
    match &e.kind {
        ExprKind::Ident(n) => n.clone(),
        ExprKind::Literal { width: None, value } => value.to_string(),
        ExprKind::Literal {
            width: Some(w),
            value,
        } => format!("{w}'d{value}"),
        ExprKind::Fill(one) => if *one { "'1" } else { "'0" }.to_string(),
        ExprKind::Index { name, index } => format!("{name}[{}]", expr(index)),
        ExprKind::Slice { name, msb, lsb } => format!("{name}[{msb}:{lsb}]"),
        ExprKind::Unary(op, a) => format!("{}{}", op.symbol(), sub(a)),
        ExprKind::Binary(op, a, b) => format!("{} {} {}", sub(a), op.symbol(), sub(b)),
        ExprKind::Ternary(c, a, b) => format!("{} ? {} : {}", sub(c), sub(a), sub(b)),
        ExprKind::Concat(es) => {
            let parts: Vec<String> = es.iter().map(expr).collect();
            format!("{{{}}}", parts.join(", "))
        }
        ExprKind::Repeat(n, inner) => match &inner.kind {
            ExprKind::Concat(es) => {
                let parts: Vec<String> = es.iter().map(expr).collect();
                format!("{{{n}{{{}}}}}", parts.join(", "))
            }
            _ => format!("{{{n}{{{}}}}}", expr(inner)),
        },
    }
}
