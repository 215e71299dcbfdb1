// SPDX-License-Identifier: Apache-2.0

//! Value change dump reader and writer.
//!
//! Hierarchical names use `/` separators internally and map to nested
//! `$scope module` sections in the file. Taint waveforms name their
//! variables `<signal>__taint`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::bits::to_binary;
use crate::graph::Time;
use crate::sim::SimTrace;

pub const TAINT_SUFFIX: &str = "__taint";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveVar {
    pub name: String,
    pub width: u32,
    /// `(time, value)` pairs, strictly increasing in time, consecutive values
    /// distinct.
    pub changes: Vec<(Time, u64)>,
}

impl WaveVar {
    pub fn at(&self, t: Time) -> u64 {
        let i = self.changes.partition_point(|c| c.0 <= t);
        if i == 0 {
            0
        } else {
            self.changes[i - 1].1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Waveform {
    pub timescale: String,
    /// The trace covers `[0, end)`.
    pub end: Time,
    pub vars: Vec<WaveVar>,
}

impl Waveform {
    pub fn var(&self, name: &str) -> Option<&WaveVar> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn index(&self) -> HashMap<&str, usize> {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VcdError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown identifier code `{id}`")]
    UnknownId { line: usize, id: String },
}

/// Splits a simulation trace into a functional and a taint waveform.
pub fn from_trace(trace: &SimTrace, timescale: &str) -> (Waveform, Waveform) {
    let mut func = Vec::new();
    let mut taint = Vec::new();
    for s in &trace.signals {
        let mut fv: Vec<(Time, u64)> = Vec::new();
        let mut tv: Vec<(Time, u64)> = Vec::new();
        for c in &s.changes {
            if fv.last().is_none_or(|l| l.1 != c.val) {
                fv.push((c.t, c.val));
            }
            if tv.last().is_none_or(|l| l.1 != c.val_taint) {
                tv.push((c.t, c.val_taint));
            }
        }
        func.push(WaveVar {
            name: s.name.clone(),
            width: s.width,
            changes: fv,
        });
        taint.push(WaveVar {
            name: format!("{}{TAINT_SUFFIX}", s.name),
            width: s.width,
            changes: tv,
        });
    }
    let mk = |vars| Waveform {
        timescale: timescale.to_string(),
        end: trace.end,
        vars,
    };
    (mk(func), mk(taint))
}

fn id_code(mut i: usize) -> String {
    let mut s = String::new();
    loop {
        s.push((b'!' + (i % 94) as u8) as char);
        i /= 94;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    s
}

#[derive(Default)]
struct ScopeTree {
    vars: Vec<(String, usize)>,
    children: BTreeMap<String, ScopeTree>,
    order: Vec<String>,
}

impl ScopeTree {
    fn insert(&mut self, path: &[&str], leaf: &str, idx: usize) {
        match path.split_first() {
            None => self.vars.push((leaf.to_string(), idx)),
            Some((head, rest)) => {
                if !self.children.contains_key(*head) {
                    self.order.push(head.to_string());
                }
                self.children
                    .entry(head.to_string())
                    .or_default()
                    .insert(rest, leaf, idx);
            }
        }
    }

    fn write(&self, out: &mut String, wave: &Waveform) {
        for (leaf, idx) in &self.vars {
            let v = &wave.vars[*idx];
            let _ = writeln!(out, "$var wire {} {} {} $end", v.width, id_code(*idx), leaf);
        }
        for name in &self.order {
            let _ = writeln!(out, "$scope module {name} $end");
            self.children[name].write(out, wave);
            let _ = writeln!(out, "$upscope $end");
        }
    }
}

fn value_text(v: u64, width: u32, id: &str) -> String {
    if width == 1 {
        format!("{}{id}", v & 1)
    } else {
        format!("b{} {id}", to_binary(v, width))
    }
}

/// Renders the waveform as VCD text. A final timestamp marks the end of the
/// trace.
pub fn write_vcd(w: &Waveform) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "$version hyperflow $end");
    let _ = writeln!(out, "$timescale {} $end", w.timescale);
    let mut root = ScopeTree::default();
    for (i, v) in w.vars.iter().enumerate() {
        let parts: Vec<&str> = v.name.split('/').collect();
        let (leaf, path) = parts.split_last().expect("non-empty name");
        root.insert(path, leaf, i);
    }
    root.write(&mut out, w);
    let _ = writeln!(out, "$enddefinitions $end");
    let ids: Vec<String> = (0..w.vars.len()).map(id_code).collect();
    let mut by_time: BTreeMap<Time, Vec<(usize, u64)>> = BTreeMap::new();
    for (i, v) in w.vars.iter().enumerate() {
        for &(t, val) in &v.changes {
            if t > 0 {
                by_time.entry(t).or_default().push((i, val));
            }
        }
    }
    let _ = writeln!(out, "#0");
    let _ = writeln!(out, "$dumpvars");
    for (i, v) in w.vars.iter().enumerate() {
        let init = v.changes.first().filter(|c| c.0 == 0).map_or(0, |c| c.1);
        let _ = writeln!(out, "{}", value_text(init, v.width, &ids[i]));
    }
    let _ = writeln!(out, "$end");
    for (t, changes) in &by_time {
        let _ = writeln!(out, "#{t}");
        for (i, val) in changes {
            let _ = writeln!(out, "{}", value_text(*val, w.vars[*i].width, &ids[*i]));
        }
    }
    if by_time.keys().next_back().is_none_or(|last| *last < w.end) && w.end > 0 {
        let _ = writeln!(out, "#{}", w.end);
    }
    out
}

pub fn read_vcd(path: &Path) -> Result<Waveform, VcdError> {
    let text = std::fs::read_to_string(path).map_err(|e| VcdError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_vcd(&text)
}

struct Words<'a> {
    words: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Words<'a> {
    fn new(text: &'a str) -> Self {
        let words = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |w| (i + 1, w)))
            .collect();
        Words { words, pos: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let w = self.words.get(self.pos).copied();
        self.pos += 1;
        w
    }

    fn line(&self) -> usize {
        self.words
            .get(self.pos.saturating_sub(1))
            .map_or(1, |w| w.0)
    }

    /// Collects words up to the closing `$end`.
    fn until_end(&mut self) -> Result<Vec<&'a str>, VcdError> {
        let start = self.line();
        let mut out = Vec::new();
        loop {
            match self.next() {
                Some((_, "$end")) => return Ok(out),
                Some((_, w)) => out.push(w),
                None => {
                    return Err(VcdError::Syntax {
                        line: start,
                        message: "missing `$end`".into(),
                    })
                }
            }
        }
    }
}

fn bits_value(digits: &str, width: u32, line: usize) -> Result<u64, VcdError> {
    if digits.len() as u32 > width {
        return Err(VcdError::Syntax {
            line,
            message: format!("vector `{digits}` is wider than its {width}-bit variable"),
        });
    }
    let mut v = 0u64;
    for c in digits.chars() {
        let bit = match c {
            '0' | 'x' | 'X' | 'z' | 'Z' => 0,
            '1' => 1,
            _ => {
                return Err(VcdError::Syntax {
                    line,
                    message: format!("invalid vector digit `{c}`"),
                })
            }
        };
        v = (v << 1) | bit;
    }
    Ok(v)
}

/// Parses VCD text. Four-state digits map to 0; real variables are rejected.
pub fn parse_vcd(text: &str) -> Result<Waveform, VcdError> {
    let mut w = Words::new(text);
    let mut timescale = String::from("1ns");
    let mut scopes: Vec<String> = Vec::new();
    let mut vars: Vec<WaveVar> = Vec::new();
    let mut ids: HashMap<String, Vec<usize>> = HashMap::new();
    // Header.
    loop {
        let Some((line, word)) = w.next() else {
            return Err(VcdError::Syntax {
                line: w.line(),
                message: "missing `$enddefinitions`".into(),
            });
        };
        match word {
            "$date" | "$version" | "$comment" => {
                w.until_end()?;
            }
            "$timescale" => timescale = w.until_end()?.concat(),
            "$scope" => {
                let args = w.until_end()?;
                let name = args.get(1).ok_or_else(|| VcdError::Syntax {
                    line,
                    message: "`$scope` needs a type and a name".into(),
                })?;
                scopes.push(name.to_string());
            }
            "$upscope" => {
                w.until_end()?;
                if scopes.pop().is_none() {
                    return Err(VcdError::Syntax {
                        line,
                        message: "`$upscope` without open scope".into(),
                    });
                }
            }
            "$var" => {
                let args = w.until_end()?;
                if args.len() < 4 {
                    return Err(VcdError::Syntax {
                        line,
                        message: "`$var` needs type, width, id and name".into(),
                    });
                }
                if args[0] == "real" {
                    return Err(VcdError::Syntax {
                        line,
                        message: "real variables are not supported".into(),
                    });
                }
                let width: u32 = args[1].parse().map_err(|_| VcdError::Syntax {
                    line,
                    message: format!("invalid width `{}`", args[1]),
                })?;
                if width == 0 || width > 64 {
                    return Err(VcdError::Syntax {
                        line,
                        message: format!("width {width} is outside 1..=64"),
                    });
                }
                let mut name = scopes.clone();
                name.push(args[3].to_string());
                ids.entry(args[2].to_string()).or_default().push(vars.len());
                vars.push(WaveVar {
                    name: name.join("/"),
                    width,
                    changes: Vec::new(),
                });
            }
            "$enddefinitions" => {
                w.until_end()?;
                break;
            }
            other => {
                return Err(VcdError::Syntax {
                    line,
                    message: format!("unexpected `{other}` in header"),
                })
            }
        }
    }
    // Value changes.
    let mut now: Time = 0;
    let mut last_time: Option<Time> = None;
    let mut changes_at_last = false;
    let record = |vars: &mut Vec<WaveVar>, idx: &[usize], value: u64, now: Time| {
        for &i in idx {
            let ch = &mut vars[i].changes;
            match ch.last_mut() {
                Some(l) if l.0 == now => l.1 = value,
                Some(l) if l.1 == value => {}
                _ => ch.push((now, value)),
            }
            // Drop an entry that reverted to its predecessor within one step.
            let n = ch.len();
            if n >= 2 && ch[n - 1].1 == ch[n - 2].1 {
                ch.pop();
            }
        }
    };
    while let Some((line, word)) = w.next() {
        if let Some(t) = word.strip_prefix('#') {
            let t: Time = t.parse().map_err(|_| VcdError::Syntax {
                line,
                message: format!("invalid timestamp `{word}`"),
            })?;
            if last_time.is_some_and(|l| t < l) {
                return Err(VcdError::Syntax {
                    line,
                    message: format!("timestamp {t} goes backwards"),
                });
            }
            if last_time != Some(t) {
                changes_at_last = false;
            }
            now = t;
            last_time = Some(t);
            continue;
        }
        match word {
            "$dumpvars" | "$dumpall" | "$dumpon" | "$dumpoff" | "$end" => continue,
            "$comment" => {
                w.until_end()?;
                continue;
            }
            _ => {}
        }
        let first = word.chars().next().unwrap_or(' ');
        let (value_digits, id, vector) = match first {
            'b' | 'B' => {
                let (_, id) = w.next().ok_or_else(|| VcdError::Syntax {
                    line,
                    message: "vector change without identifier".into(),
                })?;
                (&word[1..], id, true)
            }
            'r' | 'R' => {
                return Err(VcdError::Syntax {
                    line,
                    message: "real value changes are not supported".into(),
                })
            }
            '0' | '1' | 'x' | 'X' | 'z' | 'Z' => (&word[..1], &word[1..], false),
            _ => {
                return Err(VcdError::Syntax {
                    line,
                    message: format!("unexpected `{word}`"),
                })
            }
        };
        if id.is_empty() {
            return Err(VcdError::Syntax {
                line,
                message: "value change without identifier".into(),
            });
        }
        let idx = ids.get(id).ok_or_else(|| VcdError::UnknownId {
            line,
            id: id.to_string(),
        })?;
        let width = vars[idx[0]].width;
        let value = if vector {
            bits_value(value_digits, width, line)?
        } else {
            bits_value(value_digits, width.max(1), line)?
        };
        record(&mut vars, idx, value, now);
        changes_at_last = true;
    }
    let end = match last_time {
        None => 0,
        Some(t) if changes_at_last => t + 1,
        Some(t) => t,
    };
    Ok(Waveform {
        timescale,
        end,
        vars,
    })
}
