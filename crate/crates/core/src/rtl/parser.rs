// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for the supported SystemVerilog subset.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::{Lexer, Tok, Token};
use super::FrontendError;
use crate::site::SourceSite;

const RESERVED: &[&str] = &[
    "module",
    "endmodule",
    "input",
    "output",
    "inout",
    "wire",
    "reg",
    "logic",
    "assign",
    "always",
    "always_ff",
    "always_comb",
    "always_latch",
    "begin",
    "end",
    "if",
    "else",
    "case",
    "casez",
    "casex",
    "endcase",
    "default",
    "posedge",
    "negedge",
    "parameter",
    "localparam",
    "generate",
    "endgenerate",
    "function",
    "endfunction",
    "task",
    "endtask",
    "initial",
    "for",
    "while",
    "repeat",
    "forever",
    "interface",
    "endinterface",
    "integer",
    "int",
    "genvar",
    "or",
    "signed",
    "unsigned",
];

/// Item-level keywords outside the supported subset.
const UNSUPPORTED_ITEMS: &[&str] = &[
    "inout",
    "generate",
    "genvar",
    "function",
    "task",
    "initial",
    "final",
    "always_latch",
    "interface",
    "integer",
    "int",
    "typedef",
    "struct",
    "enum",
    "assert",
    "property",
    "for",
    "specify",
    "package",
    "import",
];

pub(crate) struct Parser<'a> {
    file: &'a str,
    toks: Vec<Token>,
    pos: usize,
    params: HashMap<String, u64>,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(file: &'a str, text: &str) -> Result<Self, FrontendError> {
        Ok(Parser {
            file,
            toks: Lexer::new(file, text).tokenize()?,
            pos: 0,
            params: HashMap::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, off: usize) -> &Tok {
        let i = (self.pos + off).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn site(&self) -> SourceSite {
        let t = &self.toks[self.pos];
        SourceSite::new(self.file, t.line, t.col)
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn err_expected(&self, expected: &str) -> FrontendError {
        FrontendError::Syntax {
            site: self.site(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn unsupported(&self, construct: impl Into<String>) -> FrontendError {
        FrontendError::Unsupported {
            site: self.site(),
            construct: construct.into(),
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), FrontendError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err_expected(&format!("`{p}`")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), FrontendError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err_expected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.err_expected("identifier")),
        }
    }

    pub(crate) fn parse_file(mut self) -> Result<Vec<ModuleDecl>, FrontendError> {
        let mut modules = Vec::new();
        while *self.peek() != Tok::Eof {
            if self.is_kw("module") {
                modules.push(self.module()?);
            } else if matches!(self.peek(), Tok::Ident(s) if ["interface", "package", "program", "class"].contains(&s.as_str()))
            {
                let Tok::Ident(s) = self.peek().clone() else {
                    unreachable!()
                };
                return Err(self.unsupported(s));
            } else {
                return Err(self.err_expected("`module`"));
            }
        }
        Ok(modules)
    }

    fn module(&mut self) -> Result<ModuleDecl, FrontendError> {
        self.params.clear();
        let site = self.site();
        self.expect_kw("module")?;
        let name = self.ident()?;
        let mut m = ModuleDecl {
            name,
            site,
            params: Vec::new(),
            ports: Vec::new(),
            decls: Vec::new(),
            items: Vec::new(),
        };
        if self.eat_punct("#") {
            self.expect_punct("(")?;
            loop {
                self.eat_kw("parameter");
                self.param_assignment(&mut m, false)?;
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(")")?;
        }
        // Header names in declaration order; directions come from the body
        // for non-ANSI headers.
        let mut header_names: Vec<(String, SourceSite)> = Vec::new();
        let mut ansi = false;
        if self.eat_punct("(") {
            if !self.is_punct(")") {
                if self.is_kw("input") || self.is_kw("output") || self.is_kw("inout") {
                    ansi = true;
                    self.ansi_ports(&mut m)?;
                } else {
                    loop {
                        let s = self.site();
                        header_names.push((self.ident()?, s));
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
            }
            self.expect_punct(")")?;
        }
        self.expect_punct(";")?;

        let mut pending: HashMap<String, (Direction, NetKind, Range, SourceSite)> = HashMap::new();
        while !self.is_kw("endmodule") {
            if *self.peek() == Tok::Eof {
                return Err(self.err_expected("`endmodule`"));
            }
            self.item(&mut m, ansi, &mut pending)?;
        }
        self.advance();
        if self.eat_punct(":") {
            self.ident()?;
        }
        for (n, s) in header_names {
            let Some((direction, kind, range, psite)) = pending.remove(&n) else {
                return Err(FrontendError::Syntax {
                    site: s,
                    expected: format!("a direction declaration for port `{n}`"),
                    found: "none".into(),
                });
            };
            // `output q; reg q;` merges into one port of kind reg.
            let mut kind = kind;
            let mut range = range;
            if let Some(i) = m.decls.iter().position(|d| d.name == n) {
                let d = m.decls.remove(i);
                kind = d.kind;
                if range == Range::SCALAR {
                    range = d.range;
                }
            }
            m.ports.push(PortDecl {
                name: n,
                direction,
                kind,
                range,
                site: psite,
            });
        }
        if let Some((n, (_, _, _, s))) = pending.into_iter().next() {
            return Err(FrontendError::Syntax {
                site: s,
                expected: "a port listed in the module header".into(),
                found: format!("`{n}`"),
            });
        }
        check_duplicates(&m)?;
        Ok(m)
    }

    fn direction(&mut self) -> Result<Direction, FrontendError> {
        if self.eat_kw("input") {
            Ok(Direction::Input)
        } else if self.eat_kw("output") {
            Ok(Direction::Output)
        } else if self.is_kw("inout") {
            Err(self.unsupported("inout port"))
        } else {
            Err(self.err_expected("port direction"))
        }
    }

    fn net_kind(&mut self) -> Option<NetKind> {
        if self.eat_kw("reg") {
            Some(NetKind::Reg)
        } else if self.eat_kw("logic") {
            Some(NetKind::Logic)
        } else if self.eat_kw("wire") {
            if self.eat_kw("logic") {
                return Some(NetKind::Wire);
            }
            Some(NetKind::Wire)
        } else {
            None
        }
    }

    fn check_signedness(&self) -> Result<(), FrontendError> {
        if self.is_kw("signed") || self.is_kw("unsigned") {
            return Err(self.unsupported("signedness qualifier"));
        }
        Ok(())
    }

    fn ansi_ports(&mut self, m: &mut ModuleDecl) -> Result<(), FrontendError> {
        let mut direction = Direction::Input;
        let mut kind = NetKind::Wire;
        let mut range = Range::SCALAR;
        loop {
            let site = self.site();
            if self.is_kw("input") || self.is_kw("output") || self.is_kw("inout") {
                direction = self.direction()?;
                kind = self.net_kind().unwrap_or(NetKind::Wire);
                self.check_signedness()?;
                range = self.opt_range()?;
            }
            let name = self.ident()?;
            if self.is_punct("[") {
                return Err(self.unsupported("unpacked array"));
            }
            m.ports.push(PortDecl {
                name,
                direction,
                kind,
                range,
                site,
            });
            if !self.eat_punct(",") {
                return Ok(());
            }
        }
    }

    fn opt_range(&mut self) -> Result<Range, FrontendError> {
        if !self.is_punct("[") {
            return Ok(Range::SCALAR);
        }
        let site = self.site();
        self.advance();
        let msb = self.const_expr()?;
        self.expect_punct(":")?;
        let lsb = self.const_expr()?;
        self.expect_punct("]")?;
        if msb < lsb {
            return Err(FrontendError::Unsupported {
                site,
                construct: "ascending range".into(),
            });
        }
        let r = Range { msb, lsb };
        if lsb < 0 || r.width() > crate::bits::MAX_WIDTH {
            return Err(FrontendError::Unsupported {
                site,
                construct: format!("range [{msb}:{lsb}] (widths are limited to 1..=64 bits)"),
            });
        }
        Ok(r)
    }

    fn const_expr(&mut self) -> Result<i64, FrontendError> {
        let e = self.expr()?;
        self.const_eval(&e)
    }

    fn const_eval(&self, e: &Expr) -> Result<i64, FrontendError> {
        let not_const = || FrontendError::Unsupported {
            site: e.site.clone(),
            construct: "non-constant expression in constant context".into(),
        };
        Ok(match &e.kind {
            ExprKind::Literal { value, .. } => *value as i64,
            ExprKind::Ident(n) => match self.params.get(n) {
                Some(v) => *v as i64,
                None => {
                    return Err(FrontendError::Unresolved {
                        site: e.site.clone(),
                        name: n.clone(),
                    })
                }
            },
            ExprKind::Unary(UnaryOp::Neg, a) => -self.const_eval(a)?,
            ExprKind::Unary(UnaryOp::Not, a) => !self.const_eval(a)?,
            ExprKind::Unary(UnaryOp::LogNot, a) => (self.const_eval(a)? == 0) as i64,
            ExprKind::Binary(op, a, b) => {
                let (a, b) = (self.const_eval(a)?, self.const_eval(b)?);
                match op {
                    BinaryOp::Add => a.wrapping_add(b),
                    BinaryOp::Sub => a.wrapping_sub(b),
                    BinaryOp::And => a & b,
                    BinaryOp::Or => a | b,
                    BinaryOp::Xor => a ^ b,
                    BinaryOp::Shl => a.checked_shl(b as u32).unwrap_or(0),
                    BinaryOp::Shr => a.checked_shr(b as u32).unwrap_or(0),
                    BinaryOp::Eq => (a == b) as i64,
                    BinaryOp::Ne => (a != b) as i64,
                    BinaryOp::Lt => (a < b) as i64,
                    BinaryOp::Le => (a <= b) as i64,
                    BinaryOp::Gt => (a > b) as i64,
                    BinaryOp::Ge => (a >= b) as i64,
                    BinaryOp::LogAnd => (a != 0 && b != 0) as i64,
                    BinaryOp::LogOr => (a != 0 || b != 0) as i64,
                }
            }
            ExprKind::Ternary(c, a, b) => {
                if self.const_eval(c)? != 0 {
                    self.const_eval(a)?
                } else {
                    self.const_eval(b)?
                }
            }
            _ => return Err(not_const()),
        })
    }

    fn param_assignment(&mut self, m: &mut ModuleDecl, local: bool) -> Result<(), FrontendError> {
        if self.eat_kw("int") || self.eat_kw("integer") {
        } else if self.net_kind().is_some() {
            self.opt_range()?;
        }
        let site = self.site();
        let name = self.ident()?;
        self.expect_punct("=")?;
        let value = self.const_expr()?;
        if value < 0 {
            return Err(FrontendError::Unsupported {
                site,
                construct: "negative parameter value".into(),
            });
        }
        self.params.insert(name.clone(), value as u64);
        m.params.push(ParamDecl {
            name,
            value: value as u64,
            local,
            site,
        });
        Ok(())
    }

    fn item(
        &mut self,
        m: &mut ModuleDecl,
        ansi: bool,
        pending: &mut HashMap<String, (Direction, NetKind, Range, SourceSite)>,
    ) -> Result<(), FrontendError> {
        let site = self.site();
        let Tok::Ident(word) = self.peek().clone() else {
            if self.eat_punct(";") {
                return Ok(());
            }
            return Err(self.err_expected("module item"));
        };
        match word.as_str() {
            "input" | "output" | "inout" => {
                if ansi {
                    return Err(FrontendError::Syntax {
                        site,
                        expected: "module item".into(),
                        found: "port declaration in a module with an ANSI header".into(),
                    });
                }
                let direction = self.direction()?;
                let kind = self.net_kind().unwrap_or(NetKind::Wire);
                self.check_signedness()?;
                let range = self.opt_range()?;
                loop {
                    let s = self.site();
                    let n = self.ident()?;
                    pending.insert(n, (direction, kind, range, s));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")
            }
            "reg" | "wire" | "logic" => {
                let kind = self.net_kind().expect("checked keyword");
                self.check_signedness()?;
                let range = self.opt_range()?;
                loop {
                    let s = self.site();
                    let name = self.ident()?;
                    if self.is_punct("[") {
                        return Err(self.unsupported("unpacked array"));
                    }
                    if let Some(p) = pending.get_mut(&name) {
                        // `output [3:0] q; reg [3:0] q;`
                        p.1 = kind;
                    } else {
                        m.decls.push(NetDecl {
                            name: name.clone(),
                            kind,
                            range,
                            site: s.clone(),
                        });
                    }
                    if self.eat_punct("=") {
                        let rhs = self.expr()?;
                        m.items.push(ModuleItem::Assign {
                            lhs: LValue {
                                name,
                                select: None,
                                site: s.clone(),
                            },
                            rhs,
                            site: s,
                        });
                    }
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")
            }
            "parameter" | "localparam" => {
                self.advance();
                loop {
                    self.param_assignment(m, word == "localparam")?;
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")
            }
            "assign" => {
                self.advance();
                loop {
                    let s = self.site();
                    let lhs = self.lvalue()?;
                    self.expect_punct("=")?;
                    let rhs = self.expr()?;
                    m.items.push(ModuleItem::Assign { lhs, rhs, site: s });
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")
            }
            "always" | "always_ff" | "always_comb" => {
                self.advance();
                let kind = match word.as_str() {
                    "always" => AlwaysKind::Plain,
                    "always_ff" => AlwaysKind::Ff,
                    _ => AlwaysKind::Comb,
                };
                let sensitivity = if kind == AlwaysKind::Comb {
                    Sensitivity::Star
                } else {
                    self.sensitivity(kind)?
                };
                let body = self.stmt()?;
                m.items.push(ModuleItem::Always {
                    kind,
                    sensitivity,
                    body,
                    site,
                });
                Ok(())
            }
            w if UNSUPPORTED_ITEMS.contains(&w) => Err(self.unsupported(w.to_string())),
            w if RESERVED.contains(&w) => Err(self.err_expected("module item")),
            _ => {
                let inst = self.instance()?;
                m.items.push(ModuleItem::Instance(inst));
                Ok(())
            }
        }
    }

    fn sensitivity(&mut self, kind: AlwaysKind) -> Result<Sensitivity, FrontendError> {
        self.expect_punct("@")?;
        if self.eat_punct("*") {
            if kind == AlwaysKind::Ff {
                return Err(self.err_expected("`posedge` clock"));
            }
            return Ok(Sensitivity::Star);
        }
        self.expect_punct("(")?;
        let sens = if self.eat_punct("*") {
            if kind == AlwaysKind::Ff {
                return Err(self.err_expected("`posedge` clock"));
            }
            Sensitivity::Star
        } else if self.eat_kw("posedge") {
            let site = self.site();
            let clock = self.ident()?;
            if self.is_kw("or") || self.is_punct(",") {
                return Err(self.unsupported("multiple edge events in sensitivity list"));
            }
            Sensitivity::Posedge { clock, site }
        } else if self.is_kw("negedge") {
            return Err(self.unsupported("negedge sensitivity"));
        } else {
            return Err(self.unsupported("explicit sensitivity list (use @(*) or @(posedge clk))"));
        };
        self.expect_punct(")")?;
        Ok(sens)
    }

    fn instance(&mut self) -> Result<Instance, FrontendError> {
        let site = self.site();
        let module = self.ident()?;
        if self.is_punct("#") {
            return Err(self.unsupported("instance parameter override"));
        }
        let name = self.ident()?;
        if self.is_punct("[") {
            return Err(self.unsupported("instance array"));
        }
        self.expect_punct("(")?;
        let mut connections = Vec::new();
        if !self.is_punct(")") {
            loop {
                let csite = self.site();
                if self.eat_punct(".") {
                    if self.is_punct("*") {
                        return Err(self.unsupported("wildcard port connection"));
                    }
                    let port = self.ident()?;
                    let expr = if self.eat_punct("(") {
                        let e = if self.is_punct(")") {
                            None
                        } else {
                            Some(self.expr()?)
                        };
                        self.expect_punct(")")?;
                        e
                    } else {
                        return Err(self.unsupported("implicit named port connection"));
                    };
                    connections.push(PortConnection {
                        port: Some(port),
                        expr,
                        site: csite,
                    });
                } else {
                    let expr = self.expr()?;
                    connections.push(PortConnection {
                        port: None,
                        expr: Some(expr),
                        site: csite,
                    });
                }
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        self.expect_punct(";")?;
        Ok(Instance {
            module,
            name,
            connections,
            site,
        })
    }

    fn lvalue(&mut self) -> Result<LValue, FrontendError> {
        let site = self.site();
        if self.is_punct("{") {
            return Err(self.unsupported("concatenation on assignment target"));
        }
        let name = self.ident()?;
        let select = if self.eat_punct("[") {
            let first = self.expr()?;
            let first = self.const_eval(&first).map_err(|_| FrontendError::Unsupported {
                site: first.site.clone(),
                construct: "variable bit-select on assignment target".into(),
            })?;
            let sel = if self.eat_punct(":") {
                let lsb = self.const_expr()?;
                Select::Part(first, lsb)
            } else if self.is_punct("+:") || self.is_punct("-:") {
                return Err(self.unsupported("indexed part-select"));
            } else {
                Select::Bit(first)
            };
            self.expect_punct("]")?;
            Some(sel)
        } else {
            None
        };
        Ok(LValue { name, select, site })
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        let site = self.site();
        if self.eat_punct(";") {
            return Ok(Stmt {
                kind: StmtKind::Null,
                site,
            });
        }
        if self.is_punct("#") {
            return Err(self.unsupported("delay control"));
        }
        if self.is_punct("$") {
            return Err(self.unsupported("system task"));
        }
        let Tok::Ident(word) = self.peek().clone() else {
            return Err(self.err_expected("statement"));
        };
        match word.as_str() {
            "begin" => {
                self.advance();
                if self.eat_punct(":") {
                    self.ident()?;
                }
                let mut body = Vec::new();
                while !self.is_kw("end") {
                    if *self.peek() == Tok::Eof {
                        return Err(self.err_expected("`end`"));
                    }
                    body.push(self.stmt()?);
                }
                self.advance();
                if self.eat_punct(":") {
                    self.ident()?;
                }
                Ok(Stmt {
                    kind: StmtKind::Block(body),
                    site,
                })
            }
            "if" => {
                self.advance();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let then_branch = Box::new(self.stmt()?);
                let else_branch = if self.eat_kw("else") {
                    Some(Box::new(self.stmt()?))
                } else {
                    None
                };
                Ok(Stmt {
                    kind: StmtKind::If {
                        cond,
                        then_branch,
                        else_branch,
                    },
                    site,
                })
            }
            "unique" | "priority" | "unique0" => Err(self.unsupported(format!("`{word}` qualifier"))),
            "casez" | "casex" => Err(self.unsupported(word)),
            "case" => {
                self.advance();
                self.expect_punct("(")?;
                let selector = self.expr()?;
                self.expect_punct(")")?;
                let mut items = Vec::new();
                let mut default = None;
                while !self.is_kw("endcase") {
                    if *self.peek() == Tok::Eof {
                        return Err(self.err_expected("`endcase`"));
                    }
                    if self.eat_kw("default") {
                        self.eat_punct(":");
                        if default.is_some() {
                            return Err(FrontendError::Syntax {
                                site: self.site(),
                                expected: "at most one `default` item".into(),
                                found: "a second `default`".into(),
                            });
                        }
                        default = Some(Box::new(self.stmt()?));
                        continue;
                    }
                    let mut labels = vec![self.expr()?];
                    while self.eat_punct(",") {
                        labels.push(self.expr()?);
                    }
                    self.expect_punct(":")?;
                    let body = self.stmt()?;
                    items.push(CaseItem { labels, body });
                }
                self.advance();
                Ok(Stmt {
                    kind: StmtKind::Case {
                        selector,
                        items,
                        default,
                    },
                    site,
                })
            }
            "for" | "while" | "repeat" | "forever" | "wait" | "fork" | "disable" | "return" => {
                Err(self.unsupported(format!("`{word}` statement")))
            }
            _ => {
                let lhs = self.lvalue()?;
                let blocking = if self.eat_punct("=") {
                    true
                } else if self.eat_punct("<=") {
                    false
                } else {
                    return Err(self.err_expected("`=` or `<=`"));
                };
                let rhs = self.expr()?;
                self.expect_punct(";")?;
                Ok(Stmt {
                    kind: StmtKind::Assign { lhs, rhs, blocking },
                    site,
                })
            }
        }
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, FrontendError> {
        let cond = self.binary(1)?;
        if self.is_punct("?") {
            let site = cond.site.clone();
            self.advance();
            let a = self.expr()?;
            self.expect_punct(":")?;
            let b = self.expr()?;
            return Ok(Expr {
                kind: ExprKind::Ternary(Box::new(cond), Box::new(a), Box::new(b)),
                site,
            });
        }
        Ok(cond)
    }

    fn binary_op(&self) -> Result<Option<BinaryOp>, FrontendError> {
        let Tok::Punct(p) = self.peek() else {
            return Ok(None);
        };
        Ok(Some(match *p {
            "&" => BinaryOp::And,
            "|" => BinaryOp::Or,
            "^" => BinaryOp::Xor,
            "+" => BinaryOp::Add,
            "-" => BinaryOp::Sub,
            "==" => BinaryOp::Eq,
            "!=" => BinaryOp::Ne,
            "<" => BinaryOp::Lt,
            "<=" => BinaryOp::Le,
            ">" => BinaryOp::Gt,
            ">=" => BinaryOp::Ge,
            "<<" => BinaryOp::Shl,
            ">>" => BinaryOp::Shr,
            "&&" => BinaryOp::LogAnd,
            "||" => BinaryOp::LogOr,
            "*" | "/" | "%" | "**" | "===" | "!==" | "<<<" | ">>>" | "~^" | "^~" => {
                return Err(self.unsupported(format!("operator `{p}`")))
            }
            _ => return Ok(None),
        }))
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op()? {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(prec + 1)?;
            let site = lhs.site.clone();
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                site,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        let site = self.site();
        let op = match self.peek() {
            Tok::Punct("~") => Some(UnaryOp::Not),
            Tok::Punct("!") => Some(UnaryOp::LogNot),
            Tok::Punct("-") => Some(UnaryOp::Neg),
            Tok::Punct("&") => Some(UnaryOp::RedAnd),
            Tok::Punct("|") => Some(UnaryOp::RedOr),
            Tok::Punct("^") => Some(UnaryOp::RedXor),
            Tok::Punct("+") => {
                self.advance();
                return self.unary();
            }
            Tok::Punct(p @ ("~&" | "~|" | "~^" | "^~")) => {
                return Err(self.unsupported(format!("reduction operator `{p}`")))
            }
            _ => None,
        };
        if let Some(op) = op {
            self.advance();
            let e = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Unary(op, Box::new(e)),
                site,
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let site = self.site();
        match self.peek().clone() {
            Tok::Number { width, value } => {
                self.advance();
                Ok(Expr {
                    kind: ExprKind::Literal { width, value },
                    site,
                })
            }
            Tok::Fill(one) => {
                self.advance();
                Ok(Expr {
                    kind: ExprKind::Fill(one),
                    site,
                })
            }
            Tok::Punct("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Punct("{") => {
                self.advance();
                let first = self.expr()?;
                if self.is_punct("{") {
                    let count = self.const_eval(&first)?;
                    if count <= 0 {
                        return Err(FrontendError::Unsupported {
                            site,
                            construct: "non-positive replication count".into(),
                        });
                    }
                    self.advance();
                    let mut parts = vec![self.expr()?];
                    while self.eat_punct(",") {
                        parts.push(self.expr()?);
                    }
                    self.expect_punct("}")?;
                    self.expect_punct("}")?;
                    let inner = if parts.len() == 1 {
                        parts.pop().unwrap()
                    } else {
                        Expr {
                            kind: ExprKind::Concat(parts),
                            site: site.clone(),
                        }
                    };
                    return Ok(Expr {
                        kind: ExprKind::Repeat(count as u32, Box::new(inner)),
                        site,
                    });
                }
                let mut parts = vec![first];
                while self.eat_punct(",") {
                    parts.push(self.expr()?);
                }
                self.expect_punct("}")?;
                Ok(Expr {
                    kind: ExprKind::Concat(parts),
                    site,
                })
            }
            Tok::Punct("$") => Err(self.unsupported("system function")),
            Tok::Ident(_) => {
                let name = self.ident()?;
                if matches!(self.peek_at(0), Tok::Punct("(")) {
                    return Err(FrontendError::Unsupported {
                        site,
                        construct: "function call".into(),
                    });
                }
                if self.is_punct(".") {
                    return Err(self.unsupported("hierarchical reference"));
                }
                if !self.eat_punct("[") {
                    return Ok(Expr {
                        kind: ExprKind::Ident(name),
                        site,
                    });
                }
                let first = self.expr()?;
                if self.is_punct("+:") || self.is_punct("-:") {
                    return Err(self.unsupported("indexed part-select"));
                }
                let kind = if self.eat_punct(":") {
                    let msb = self.const_eval(&first)?;
                    let lsb = self.const_expr()?;
                    ExprKind::Slice { name, msb, lsb }
                } else {
                    ExprKind::Index {
                        name,
                        index: Box::new(first),
                    }
                };
                self.expect_punct("]")?;
                if self.is_punct("[") {
                    return Err(self.unsupported("multi-dimensional select"));
                }
                Ok(Expr { kind, site })
            }
            _ => Err(self.err_expected("expression")),
        }
    }
}

fn check_duplicates(m: &ModuleDecl) -> Result<(), FrontendError> {
    let mut seen = HashSet::new();
    let names = m
        .params
        .iter()
        .map(|p| (&p.name, &p.site))
        .chain(m.ports.iter().map(|p| (&p.name, &p.site)))
        .chain(m.decls.iter().map(|d| (&d.name, &d.site)))
        .chain(m.items.iter().filter_map(|i| match i {
            ModuleItem::Instance(inst) => Some((&inst.name, &inst.site)),
            _ => None,
        }));
    for (n, s) in names {
        if !seen.insert(n.as_str()) {
            return Err(FrontendError::Syntax {
                site: s.clone(),
                expected: "a unique name".into(),
                found: format!("redeclaration of `{n}`"),
            });
        }
    }
    Ok(())
}

/// Checks that every identifier used in `m` resolves to a port, net or
/// parameter, that assignment targets are nets, and that selects are in range.
pub(crate) fn resolve_module(m: &ModuleDecl) -> Result<(), FrontendError> {
    let is_signal = |n: &str| m.port(n).is_some() || m.decls.iter().any(|d| d.name == n);
    let check_expr = |e: &Expr| -> Result<(), FrontendError> {
        let mut err = None;
        e.for_each_ident(&mut |n, site| {
            if err.is_none() && !is_signal(n) && m.param(n).is_none() {
                err = Some(FrontendError::Unresolved {
                    site: site.clone(),
                    name: n.to_string(),
                });
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        check_selects(m, e)
    };
    let check_lvalue = |l: &LValue| -> Result<(), FrontendError> {
        let Some(range) = m.signal_range(&l.name) else {
            return Err(FrontendError::Unresolved {
                site: l.site.clone(),
                name: l.name.clone(),
            });
        };
        let ok = match l.select {
            None => true,
            Some(Select::Bit(i)) => i >= range.lsb && i <= range.msb,
            Some(Select::Part(hi, lo)) => hi >= lo && lo >= range.lsb && hi <= range.msb,
        };
        if !ok {
            return Err(FrontendError::Unsupported {
                site: l.site.clone(),
                construct: format!("out-of-range select on `{}`", l.name),
            });
        }
        Ok(())
    };
    fn walk(
        s: &Stmt,
        ce: &dyn Fn(&Expr) -> Result<(), FrontendError>,
        cl: &dyn Fn(&LValue) -> Result<(), FrontendError>,
    ) -> Result<(), FrontendError> {
        match &s.kind {
            StmtKind::Block(b) => b.iter().try_for_each(|s| walk(s, ce, cl)),
            StmtKind::Assign { lhs, rhs, .. } => {
                cl(lhs)?;
                ce(rhs)
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                ce(cond)?;
                walk(then_branch, ce, cl)?;
                else_branch.as_ref().map_or(Ok(()), |e| walk(e, ce, cl))
            }
            StmtKind::Case {
                selector,
                items,
                default,
            } => {
                ce(selector)?;
                for it in items {
                    it.labels.iter().try_for_each(ce)?;
                    walk(&it.body, ce, cl)?;
                }
                default.as_ref().map_or(Ok(()), |d| walk(d, ce, cl))
            }
            StmtKind::Null => Ok(()),
        }
    }
    for item in &m.items {
        match item {
            ModuleItem::Assign { lhs, rhs, .. } => {
                check_lvalue(lhs)?;
                check_expr(rhs)?;
            }
            ModuleItem::Always {
                sensitivity, body, ..
            } => {
                if let Sensitivity::Posedge { clock, site } = sensitivity {
                    if !is_signal(clock) {
                        return Err(FrontendError::Unresolved {
                            site: site.clone(),
                            name: clock.clone(),
                        });
                    }
                }
                walk(body, &check_expr, &check_lvalue)?;
            }
            ModuleItem::Instance(inst) => {
                for c in &inst.connections {
                    if let Some(e) = &c.expr {
                        check_expr(e)?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_selects(m: &ModuleDecl, e: &Expr) -> Result<(), FrontendError> {
    let mut err = None;
    visit_exprs(e, &mut |e| {
        if err.is_some() {
            return;
        }
        let bad = match &e.kind {
            ExprKind::Slice { name, msb, lsb } => match m.signal_range(name) {
                Some(r) => !(msb >= lsb && *lsb >= r.lsb && *msb <= r.msb),
                None => true,
            },
            ExprKind::Index { name, .. } => m.signal_range(name).is_none(),
            _ => false,
        };
        if bad {
            err = Some(FrontendError::Unsupported {
                site: e.site.clone(),
                construct: "out-of-range or parameter select".into(),
            });
        }
    });
    err.map_or(Ok(()), Err)
}

pub(crate) fn visit_exprs<'a>(e: &'a Expr, f: &mut impl FnMut(&'a Expr)) {
    f(e);
    match &e.kind {
        ExprKind::Index { index, .. } => visit_exprs(index, f),
        ExprKind::Unary(_, a) | ExprKind::Repeat(_, a) => visit_exprs(a, f),
        ExprKind::Binary(_, a, b) => {
            visit_exprs(a, f);
            visit_exprs(b, f);
        }
        ExprKind::Ternary(c, a, b) => {
            visit_exprs(c, f);
            visit_exprs(a, f);
            visit_exprs(b, f);
        }
        ExprKind::Concat(es) => es.iter().for_each(|x| visit_exprs(x, f)),
        _ => {}
    }
}
