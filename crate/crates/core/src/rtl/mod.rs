// SPDX-License-Identifier: Apache-2.0

//! RTL frontend: tokenizer, parser, pretty-printer and single-level
//! elaboration into a flat [`ElaboratedDesign`].

pub mod ast;
mod elaborate;
pub mod ir;
mod lexer;
mod parser;
pub mod printer;

use std::collections::HashMap;

use thiserror::Error;

use crate::site::SourceSite;

pub use elaborate::{elaborate, ElaborationError};
pub use ir::{ElaboratedDesign, SignalId, SignalInfo};

/// The RTL files making up a design plus the name of its top module.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub files: Vec<(String, String)>,
    pub top_module: String,
}

impl SourceUnit {
    pub fn single(path: impl Into<String>, text: impl Into<String>, top: impl Into<String>) -> Self {
        SourceUnit {
            files: vec![(path.into(), text.into())],
            top_module: top.into(),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("{site}: syntax error: expected {expected}, found {found}")]
    Syntax {
        site: SourceSite,
        expected: String,
        found: String,
    },
    #[error("{site}: unsupported construct: {construct}")]
    Unsupported { site: SourceSite, construct: String },
    #[error("{site}: unresolved identifier `{name}`")]
    Unresolved { site: SourceSite, name: String },
    #[error("{site}: module `{name}` is declared more than once")]
    DuplicateModule { site: SourceSite, name: String },
}

impl FrontendError {
    pub fn site(&self) -> &SourceSite {
        match self {
            FrontendError::Syntax { site, .. }
            | FrontendError::Unsupported { site, .. }
            | FrontendError::Unresolved { site, .. }
            | FrontendError::DuplicateModule { site, .. } => site,
        }
    }
}

/// Parses every file of `src` into one [`ast::Ast`].
///
/// Identifiers are resolved per module. Modules instantiated by the top
/// module must not instantiate further modules.
pub fn parse_rtl(src: &SourceUnit) -> Result<ast::Ast, FrontendError> {
    let mut modules = Vec::new();
    let mut seen: HashMap<String, ()> = HashMap::new();
    for (path, text) in &src.files {
        for m in parser::Parser::new(path, text)?.parse_file()? {
            if seen.insert(m.name.clone(), ()).is_some() {
                return Err(FrontendError::DuplicateModule {
                    site: m.site.clone(),
                    name: m.name.clone(),
                });
            }
            modules.push(m);
        }
    }
    for m in &modules {
        parser::resolve_module(m)?;
    }
    let ast = ast::Ast { modules };
    if let Some(top) = ast.module(&src.top_module) {
        for item in &top.items {
            let ast::ModuleItem::Instance(inst) = item else {
                continue;
            };
            let Some(child) = ast.module(&inst.module) else {
                continue;
            };
            for ci in &child.items {
                if let ast::ModuleItem::Instance(nested) = ci {
                    return Err(FrontendError::Unsupported {
                        site: nested.site.clone(),
                        construct: "hierarchical instantiation deeper than one level".into(),
                    });
                }
            }
        }
    }
    Ok(ast)
}

/// Parses a single snippet of RTL text (file name `path`) without a
/// designated top module.
pub fn parse_str(path: &str, text: &str) -> Result<ast::Ast, FrontendError> {
    parse_rtl(&SourceUnit::single(path, text, ""))
}

#[cfg(test)]
mod tests {
    use super::ast::*;
    use super::*;

    #[test]
    fn minimal_module() {
        let ast = parse_str("m.sv", "module m(input a, output b); assign b = a; endmodule").unwrap();
        assert_eq!(ast.modules.len(), 1);
        let m = &ast.modules[0];
        assert_eq!(m.ports.len(), 2);
        assert_eq!(m.ports[0].direction, Direction::Input);
        assert_eq!(m.ports[1].direction, Direction::Output);
        let assigns = m
            .items
            .iter()
            .filter(|i| matches!(i, ModuleItem::Assign { .. }))
            .count();
        assert_eq!(assigns, 1);
    }

    #[test]
    fn undeclared_clock_is_unresolved() {
        let err = parse_str(
            "m.sv",
            "module m; logic [7:0] r; always @(posedge clk) r <= r + 1; endmodule",
        )
        .unwrap_err();
        match err {
            FrontendError::Unresolved { name, site } => {
                assert_eq!(name, "clk");
                assert_eq!(site.to_string(), "m.sv:1:43");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn error_message_format() {
        let err = parse_str("x.v", "module m;\n  assign = 1;\nendmodule").unwrap_err();
        assert!(err.to_string().starts_with("x.v:2:10: syntax error"), "{err}");
    }

    #[test]
    fn unsupported_constructs() {
        for src in [
            "module m; generate endgenerate endmodule",
            "module m; function f; endfunction endmodule",
            "module m(input a); interface endmodule",
            "module m(input clk, input r, output reg q); always @(posedge clk or negedge r) q <= 1; endmodule",
            "module m(input a, output b); assign b = a * a; endmodule",
            "module m(input [1:0] a, output b); assign b = a[0] === 1'b1; endmodule",
            "module m(input a, output b); initial b = 0; endmodule",
            "module m(input [3:0] a, input i, output reg q); always @(*) q = 0; always @(*) begin for (;;) q = 1; end endmodule",
        ] {
            let err = parse_str("u.sv", src).unwrap_err();
            assert!(matches!(err, FrontendError::Unsupported { .. }), "{src}: {err:?}");
        }
    }

    #[test]
    fn nested_instantiation_rejected() {
        let src = "module leaf(input a, output b); assign b = a; endmodule
module mid(input a, output b); leaf l(.a(a), .b(b)); endmodule
module top(input a, output b); mid u(.a(a), .b(b)); endmodule";
        let err = parse_rtl(&SourceUnit::single("h.sv", src, "top")).unwrap_err();
        assert!(matches!(err, FrontendError::Unsupported { .. }));
        assert!(parse_rtl(&SourceUnit::single("h.sv", src, "mid")).is_ok());
    }

    #[test]
    fn duplicate_module() {
        let unit = SourceUnit {
            files: vec![
                ("a.sv".into(), "module m; endmodule".into()),
                ("b.sv".into(), "module m; endmodule".into()),
            ],
            top_module: "m".into(),
        };
        assert!(matches!(
            parse_rtl(&unit),
            Err(FrontendError::DuplicateModule { .. })
        ));
    }

    #[test]
    fn non_ansi_ports_and_params() {
        let src = "module m(a, q);
  parameter W = 4;
  localparam H = W - 1;
  input [H:0] a;
  output q;
  reg q;
  wire [W-1:0] n = ~a;
  always @(*) q = &n;
endmodule";
        let ast = parse_str("n.sv", src).unwrap();
        let m = &ast.modules[0];
        assert_eq!(m.ports[0].range.width(), 4);
        assert_eq!(m.ports[1].kind, NetKind::Reg);
        assert_eq!(m.decls.len(), 1);
        assert_eq!(m.decls[0].range, Range { msb: 3, lsb: 0 });
        assert_eq!(m.params[1].value, 3);
        assert_eq!(m.items.len(), 2);
    }

    #[test]
    fn deterministic_parse() {
        let src = "module m(input clk, input [3:0] d, output reg [3:0] q);
  always @(posedge clk) if (d[0]) q <= d; else q <= {d[1:0], 2'b01};
endmodule";
        assert_eq!(parse_str("d.sv", src).unwrap(), parse_str("d.sv", src).unwrap());
    }

    #[test]
    fn print_roundtrip() {
        let src = "module sub(input [3:0] x, output [3:0] y); assign y = x + 4'd1; endmodule
module m(input clk, input en, input [1:0] s, input [3:0] a, output reg [3:0] q, output [3:0] z);
  logic [3:0] t;
  always @(*) begin
    t = '0;
    case (s)
      2'd0, 2'd1: t = a ^ {2{a[1:0]}};
      2'd2: if (en) t = a >> 1; else t = -a;
      default: t = en ? a : ~a;
    endcase
  end
  always_ff @(posedge clk) if (en && !(s == 2'd3)) q <= t;
  sub u(.x(q), .y(z));
endmodule";
        let unit = SourceUnit::single("r.sv", src, "m");
        let mut first = parse_rtl(&unit).unwrap();
        let printed = first.to_string();
        let mut second = parse_rtl(&SourceUnit::single("r.sv", printed.clone(), "m")).unwrap();
        ast::clear_sites(&mut first);
        ast::clear_sites(&mut second);
        assert_eq!(first, second, "printed:\n{printed}");
    }
}
