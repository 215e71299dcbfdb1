// SPDX-License-Identifier: Apache-2.0

//! Tokenizer for the supported SystemVerilog subset.

use super::FrontendError;
use crate::site::SourceSite;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// An integer literal. `width` is `None` for unsized literals.
    Number {
        width: Option<u32>,
        value: u64,
    },
    /// `'0` / `'1` fill literals.
    Fill(bool),
    Punct(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number { .. } => "number".to_string(),
            Tok::Fill(_) => "fill literal".to_string(),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of file".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

// Longest first so that maximal munch works with a linear scan.
const PUNCTS: &[&str] = &[
    "===", "!==", "<<<", ">>>", "**", "<=", ">=", "==", "!=", "<<", ">>", "&&", "||", "~&", "~|",
    "~^", "^~", "+:", "-:", "(", ")", "[", "]", "{", "}", ";", ",", ":", ".", "#", "@", "*", "=",
    "<", ">", "!", "~", "&", "|", "^", "+", "-", "?", "/", "%", "$",
];

pub struct Lexer<'a> {
    file: &'a str,
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    pub fn new(file: &'a str, text: &str) -> Self {
        Lexer {
            file,
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn site(&self, line: u32, col: u32) -> SourceSite {
        SourceSite::new(self.file, line, col)
    }

    fn peek(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, FrontendError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia()?;
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek(0) else {
                out.push(Token {
                    tok: Tok::Eof,
                    line,
                    col,
                });
                return Ok(out);
            };
            let tok = if c.is_ascii_alphabetic() || c == '_' {
                let mut s = String::new();
                while let Some(c) = self.peek(0) {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            } else if c.is_ascii_digit() || c == '\'' {
                self.number(line, col)?
            } else if c == '`' {
                self.directive(line, col)?;
                continue;
            } else {
                let rest: String = self.chars[self.pos..(self.pos + 3).min(self.chars.len())]
                    .iter()
                    .collect();
                let Some(p) = PUNCTS.iter().find(|p| rest.starts_with(**p)) else {
                    return Err(FrontendError::Syntax {
                        site: self.site(line, col),
                        expected: "a token".into(),
                        found: format!("character `{c}`"),
                    });
                };
                for _ in 0..p.len() {
                    self.bump();
                }
                Tok::Punct(p)
            };
            out.push(Token { tok, line, col });
        }
    }

    fn skip_trivia(&mut self) -> Result<(), FrontendError> {
        loop {
            match (self.peek(0), self.peek(1)) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while let Some(c) = self.peek(0) {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some('/'), Some('*')) => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(0), self.peek(1)) {
                            (Some('*'), Some('/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => {
                                return Err(FrontendError::Syntax {
                                    site: self.site(line, col),
                                    expected: "`*/`".into(),
                                    found: "end of file inside comment".into(),
                                })
                            }
                        }
                    }
                }
                (Some('('), Some('*')) if self.peek(2) != Some(')') => {
                    return Err(FrontendError::Unsupported {
                        site: self.site(self.line, self.col),
                        construct: "attribute instance".into(),
                    });
                }
                _ => return Ok(()),
            }
        }
    }

    fn directive(&mut self, line: u32, col: u32) -> Result<(), FrontendError> {
        self.bump();
        let mut name = String::new();
        while let Some(c) = self.peek(0) {
            if c.is_ascii_alphanumeric() || c == '_' {
                name.push(c);
                self.bump();
            } else {
                break;
            }
        }
        match name.as_str() {
            "timescale" | "default_nettype" | "resetall" => {
                while let Some(c) = self.peek(0) {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
                Ok(())
            }
            _ => Err(FrontendError::Unsupported {
                site: self.site(line, col),
                construct: format!("compiler directive `{name}"),
            }),
        }
    }

    fn number(&mut self, line: u32, col: u32) -> Result<Tok, FrontendError> {
        let mut size_digits = String::new();
        while let Some(c) = self.peek(0) {
            if c.is_ascii_digit() || c == '_' {
                if c != '_' {
                    size_digits.push(c);
                }
                self.bump();
            } else {
                break;
            }
        }
        if self.peek(0) != Some('\'') {
            let value = parse_digits(&size_digits, 10).ok_or_else(|| self.overflow(line, col))?;
            return Ok(Tok::Number { width: None, value });
        }
        self.bump();
        let width = if size_digits.is_empty() {
            None
        } else {
            let w: u32 = size_digits.parse().map_err(|_| self.overflow(line, col))?;
            if w == 0 || w > crate::bits::MAX_WIDTH {
                return Err(FrontendError::Unsupported {
                    site: self.site(line, col),
                    construct: format!("literal width {w} (supported: 1..=64)"),
                });
            }
            Some(w)
        };
        let mut base_char = self.peek(0).map(|c| c.to_ascii_lowercase());
        if base_char == Some('s') {
            return Err(FrontendError::Unsupported {
                site: self.site(line, col),
                construct: "signed literal".into(),
            });
        }
        if width.is_none() && matches!(base_char, Some('0') | Some('1')) {
            let one = base_char == Some('1');
            self.bump();
            return Ok(Tok::Fill(one));
        }
        let radix = match base_char.take() {
            Some('b') => 2,
            Some('o') => 8,
            Some('d') => 10,
            Some('h') => 16,
            _ => {
                return Err(FrontendError::Syntax {
                    site: self.site(self.line, self.col),
                    expected: "literal base (b, o, d, h)".into(),
                    found: self
                        .peek(0)
                        .map(|c| format!("`{c}`"))
                        .unwrap_or_else(|| "end of file".into()),
                })
            }
        };
        self.bump();
        while matches!(self.peek(0), Some(' ') | Some('\t')) {
            self.bump();
        }
        let mut digits = String::new();
        while let Some(c) = self.peek(0) {
            if c.is_ascii_alphanumeric() || c == '_' || c == '?' {
                if matches!(c.to_ascii_lowercase(), 'x' | 'z' | '?') {
                    return Err(FrontendError::Unsupported {
                        site: self.site(line, col),
                        construct: "four-state literal digit".into(),
                    });
                }
                if c != '_' {
                    digits.push(c);
                }
                self.bump();
            } else {
                break;
            }
        }
        if digits.is_empty() {
            return Err(FrontendError::Syntax {
                site: self.site(self.line, self.col),
                expected: "literal digits".into(),
                found: "nothing".into(),
            });
        }
        let value = parse_digits(&digits, radix).ok_or_else(|| FrontendError::Syntax {
            site: self.site(line, col),
            expected: format!("base-{radix} digits"),
            found: format!("`{digits}`"),
        })?;
        let value = match width {
            Some(w) => value & crate::bits::mask(w),
            None => value,
        };
        Ok(Tok::Number { width, value })
    }

    fn overflow(&self, line: u32, col: u32) -> FrontendError {
        FrontendError::Unsupported {
            site: self.site(line, col),
            construct: "integer literal wider than 64 bits".into(),
        }
    }
}

fn parse_digits(digits: &str, radix: u32) -> Option<u64> {
    if digits.is_empty() {
        return None;
    }
    let mut v: u64 = 0;
    for c in digits.chars() {
        let d = c.to_digit(radix)? as u64;
        v = v.checked_mul(radix as u64)?.checked_add(d)?;
    }
    Some(v)
}
