// SPDX-License-Identifier: Apache-2.0

//! Abstract syntax tree for the supported SystemVerilog subset.
//!
//! Every node carries the [`SourceSite`] of its first token. Parameter values
//! and declared ranges are resolved to integers while parsing, so widths are
//! statically known in the tree.

use crate::site::SourceSite;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ast {
    pub modules: Vec<ModuleDecl>,
}

impl Ast {
    pub fn module(&self, name: &str) -> Option<&ModuleDecl> {
        self.modules.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetKind {
    Reg,
    Wire,
    Logic,
}

impl NetKind {
    pub fn keyword(self) -> &'static str {
        match self {
            NetKind::Reg => "reg",
            NetKind::Wire => "wire",
            NetKind::Logic => "logic",
        }
    }
}

/// A descending `[msb:lsb]` range. Scalars use `msb == lsb == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Range {
    pub msb: i64,
    pub lsb: i64,
}

impl Range {
    pub const SCALAR: Range = Range { msb: 0, lsb: 0 };

    pub fn width(&self) -> u32 {
        (self.msb - self.lsb + 1) as u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleDecl {
    pub name: String,
    pub site: SourceSite,
    pub params: Vec<ParamDecl>,
    pub ports: Vec<PortDecl>,
    pub decls: Vec<NetDecl>,
    pub items: Vec<ModuleItem>,
}

impl ModuleDecl {
    pub fn port(&self, name: &str) -> Option<&PortDecl> {
        self.ports.iter().find(|p| p.name == name)
    }

    /// Range of a port or declared net.
    pub fn signal_range(&self, name: &str) -> Option<Range> {
        self.ports
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.range)
            .or_else(|| self.decls.iter().find(|d| d.name == name).map(|d| d.range))
    }

    pub fn param(&self, name: &str) -> Option<&ParamDecl> {
        self.params.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    pub value: u64,
    pub local: bool,
    pub site: SourceSite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortDecl {
    pub name: String,
    pub direction: Direction,
    pub kind: NetKind,
    pub range: Range,
    pub site: SourceSite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetDecl {
    pub name: String,
    pub kind: NetKind,
    pub range: Range,
    pub site: SourceSite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlwaysKind {
    /// `always`
    Plain,
    /// `always_ff`
    Ff,
    /// `always_comb`
    Comb,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sensitivity {
    Posedge { clock: String, site: SourceSite },
    Star,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModuleItem {
    Assign {
        lhs: LValue,
        rhs: Expr,
        site: SourceSite,
    },
    Always {
        kind: AlwaysKind,
        sensitivity: Sensitivity,
        body: Stmt,
        site: SourceSite,
    },
    Instance(Instance),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub module: String,
    pub name: String,
    pub connections: Vec<PortConnection>,
    pub site: SourceSite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortConnection {
    /// `None` for positional connections.
    pub port: Option<String>,
    /// `None` for an explicitly unconnected port `.p()`.
    pub expr: Option<Expr>,
    pub site: SourceSite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Select {
    Bit(i64),
    Part(i64, i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LValue {
    pub name: String,
    pub select: Option<Select>,
    pub site: SourceSite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub site: SourceSite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Block(Vec<Stmt>),
    Assign {
        lhs: LValue,
        rhs: Expr,
        blocking: bool,
    },
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    Case {
        selector: Expr,
        items: Vec<CaseItem>,
        default: Option<Box<Stmt>>,
    },
    Null,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseItem {
    pub labels: Vec<Expr>,
    pub body: Stmt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum UnaryOp {
    /// `~`
    Not,
    /// `!`
    LogNot,
    /// unary `-`
    Neg,
    /// reduction `&`
    RedAnd,
    /// reduction `|`
    RedOr,
    /// reduction `^`
    RedXor,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Not => "~",
            UnaryOp::LogNot => "!",
            UnaryOp::Neg => "-",
            UnaryOp::RedAnd => "&",
            UnaryOp::RedOr => "|",
            UnaryOp::RedXor => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum BinaryOp {
    And,
    Or,
    Xor,
    Add,
    Sub,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Shl,
    Shr,
    LogAnd,
    LogOr,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::And => "&",
            BinaryOp::Or => "|",
            BinaryOp::Xor => "^",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::LogAnd => "&&",
            BinaryOp::LogOr => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::LogOr => 1,
            BinaryOp::LogAnd => 2,
            BinaryOp::Or => 3,
            BinaryOp::Xor => 4,
            BinaryOp::And => 5,
            BinaryOp::Eq | BinaryOp::Ne => 6,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 7,
            BinaryOp::Shl | BinaryOp::Shr => 8,
            BinaryOp::Add | BinaryOp::Sub => 9,
        }
    }

    /// Operators whose result is a single bit regardless of operand widths.
    pub fn is_boolean(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq
                | BinaryOp::Ne
                | BinaryOp::Lt
                | BinaryOp::Le
                | BinaryOp::Gt
                | BinaryOp::Ge
                | BinaryOp::LogAnd
                | BinaryOp::LogOr
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub site: SourceSite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Ident(String),
    /// `width == None` marks an unsized (32-bit) literal.
    Literal {
        width: Option<u32>,
        value: u64,
    },
    /// `'0` / `'1`: fills the context width.
    Fill(bool),
    Index {
        name: String,
        index: Box<Expr>,
    },
    Slice {
        name: String,
        msb: i64,
        lsb: i64,
    },
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Concat(Vec<Expr>),
    Repeat(u32, Box<Expr>),
}

impl Expr {
    /// Visits every identifier referenced by this expression (including the
    /// base names of selects).
    pub fn for_each_ident<'a>(&'a self, f: &mut impl FnMut(&'a str, &'a SourceSite)) {
        match &self.kind {
            ExprKind::Ident(n) => f(n, &self.site),
            ExprKind::Literal { .. } | ExprKind::Fill(_) => {}
            ExprKind::Index { name, index } => {
                f(name, &self.site);
                index.for_each_ident(f);
            }
            ExprKind::Slice { name, .. } => f(name, &self.site),
            ExprKind::Unary(_, e) | ExprKind::Repeat(_, e) => e.for_each_ident(f),
            ExprKind::Binary(_, a, b) => {
                a.for_each_ident(f);
                b.for_each_ident(f);
            }
            ExprKind::Ternary(c, a, b) => {
                c.for_each_ident(f);
                a.for_each_ident(f);
                b.for_each_ident(f);
            }
            ExprKind::Concat(es) => es.iter().for_each(|e| e.for_each_ident(f)),
        }
    }
}

/// Resets every [`SourceSite`] in the tree to the default value, so that two
/// trees can be compared structurally.
pub fn clear_sites(ast: &mut Ast) {
    fn expr(e: &mut Expr) {
        e.site = SourceSite::default();
        match &mut e.kind {
            ExprKind::Ident(_)
            | ExprKind::Literal { .. }
            | ExprKind::Fill(_)
            | ExprKind::Slice { .. } => {}
            ExprKind::Index { index, .. } => expr(index),
            ExprKind::Unary(_, a) | ExprKind::Repeat(_, a) => expr(a),
            ExprKind::Binary(_, a, b) => {
                expr(a);
                expr(b);
            }
            ExprKind::Ternary(c, a, b) => {
                expr(c);
                expr(a);
                expr(b);
            }
            ExprKind::Concat(es) => es.iter_mut().for_each(expr),
        }
    }
    fn lvalue(l: &mut LValue) {
        l.site = SourceSite::default();
    }
    fn stmt(s: &mut Stmt) {
        s.site = SourceSite::default();
        match &mut s.kind {
            StmtKind::Block(b) => b.iter_mut().for_each(stmt),
            StmtKind::Assign { lhs, rhs, .. } => {
                lvalue(lhs);
                expr(rhs);
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                expr(cond);
                stmt(then_branch);
                if let Some(e) = else_branch {
                    stmt(e);
                }
            }
            StmtKind::Case {
                selector,
                items,
                default,
            } => {
                expr(selector);
                for it in items {
                    it.labels.iter_mut().for_each(expr);
                    stmt(&mut it.body);
                }
                if let Some(d) = default {
                    stmt(d);
                }
            }
            StmtKind::Null => {}
        }
    }
    for m in &mut ast.modules {
        m.site = SourceSite::default();
        m.params
            .iter_mut()
            .for_each(|p| p.site = SourceSite::default());
        m.ports.iter_mut().for_each(|p| p.site = SourceSite::default());
        m.decls.iter_mut().for_each(|d| d.site = SourceSite::default());
        for item in &mut m.items {
            match item {
                ModuleItem::Assign { lhs, rhs, site } => {
                    *site = SourceSite::default();
                    lvalue(lhs);
                    expr(rhs);
                }
                ModuleItem::Always {
                    sensitivity,
                    body,
                    site,
                    ..
                } => {
                    *site = SourceSite::default();
                    if let Sensitivity::Posedge { site, .. } = sensitivity {
                        *site = SourceSite::default();
                    }
                    stmt(body);
                }
                ModuleItem::Instance(inst) => {
                    inst.site = SourceSite::default();
                    for c in &mut inst.connections {
                        c.site = SourceSite::default();
                        if let Some(e) = &mut c.expr {
                            expr(e);
                        }
                    }
                }
            }
        }
    }
}
