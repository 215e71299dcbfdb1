// SPDX-License-Identifier: Apache-2.0

//! Random micro-designs with their own tiny AST, printed as RTL text and
//! interpreted directly so results can be checked against the simulator.

use std::fmt::Write as _;

use hyperflow::sim::{ClockSpec, Drive, Stimulus};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Un {
    Not,
    Neg,
    LogNot,
    RedAnd,
    RedOr,
    RedXor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bin {
    And,
    Or,
    Xor,
    Add,
    Sub,
    Eq,
    Ne,
    Lt,
    Ge,
    Shl,
    Shr,
    LogAnd,
    LogOr,
}

#[derive(Debug, Clone)]
pub enum GExpr {
    Const(u32, u64),
    Sig(usize),
    Slice(usize, u32, u32),
    Index(usize, Box<GExpr>),
    Un(Un, Box<GExpr>),
    Bin(Bin, Box<GExpr>, Box<GExpr>),
    Tern(Box<GExpr>, Box<GExpr>, Box<GExpr>),
    Concat(Vec<GExpr>),
    Repeat(u32, Box<GExpr>),
}

#[derive(Debug, Clone)]
pub enum GStmt {
    Assign(GExpr),
    If(GExpr, Vec<GStmt>, Vec<GStmt>),
    Case(GExpr, Vec<(u64, Vec<GStmt>)>, Vec<GStmt>),
}

#[derive(Debug, Clone)]
pub enum Driver {
    Assign(GExpr),
    Comb(Vec<GStmt>),
    Seq(Vec<GStmt>),
}

#[derive(Debug, Clone)]
pub struct GSignal {
    pub name: String,
    pub width: u32,
    pub input: bool,
    pub output: bool,
    /// `None` for inputs.
    pub driver: Option<Driver>,
}

/// Signal 0 is always the clock `clk`.
#[derive(Debug, Clone)]
pub struct GenDesign {
    pub signals: Vec<GSignal>,
}

fn mask(w: u32) -> u64 {
    if w >= 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

impl GenDesign {
    pub fn data_inputs(&self) -> Vec<usize> {
        (1..self.signals.len()).filter(|&i| self.signals[i].input).collect()
    }

    pub fn width(&self, e: &GExpr) -> u32 {
        match e {
            GExpr::Const(w, _) | GExpr::Slice(_, _, w) => *w,
            GExpr::Sig(s) => self.signals[*s].width,
            GExpr::Index(..) => 1,
            GExpr::Un(Un::Not | Un::Neg, a) => self.width(a),
            GExpr::Un(..) => 1,
            GExpr::Bin(op, a, b) => match op {
                Bin::Eq | Bin::Ne | Bin::Lt | Bin::Ge | Bin::LogAnd | Bin::LogOr => 1,
                Bin::Shl | Bin::Shr => self.width(a),
                _ => self.width(a).max(self.width(b)),
            },
            GExpr::Tern(_, a, b) => self.width(a).max(self.width(b)),
            GExpr::Concat(es) => es.iter().map(|e| self.width(e)).sum(),
            GExpr::Repeat(n, e) => n * self.width(e),
        }
    }

    /// Value of `e` extended to a context of `ctx` bits.
    pub fn eval(&self, e: &GExpr, ctx: u32, vals: &[u64]) -> u64 {
        let m = mask(ctx);
        let truth = |x: &GExpr| self.eval(x, self.width(x), vals) != 0;
        match e {
            GExpr::Const(_, v) => v & m,
            GExpr::Sig(s) => vals[*s] & m,
            GExpr::Slice(s, lo, w) => (vals[*s] >> lo) & mask(*w) & m,
            GExpr::Index(s, i) => {
                let iv = self.eval(i, self.width(i), vals);
                if iv < self.signals[*s].width as u64 {
                    (vals[*s] >> iv) & 1 & m
                } else {
                    0
                }
            }
            GExpr::Un(op, a) => match op {
                Un::Not => !self.eval(a, ctx, vals) & m,
                Un::Neg => self.eval(a, ctx, vals).wrapping_neg() & m,
                _ => {
                    let w = self.width(a);
                    let v = self.eval(a, w, vals);
                    let r = match op {
                        Un::LogNot => v == 0,
                        Un::RedAnd => v == mask(w),
                        Un::RedOr => v != 0,
                        _ => v.count_ones() % 2 == 1,
                    };
                    r as u64 & m
                }
            },
            GExpr::Bin(op, a, b) => match op {
                Bin::And | Bin::Or | Bin::Xor | Bin::Add | Bin::Sub => {
                    let (x, y) = (self.eval(a, ctx, vals), self.eval(b, ctx, vals));
                    let r = match op {
                        Bin::And => x & y,
                        Bin::Or => x | y,
                        Bin::Xor => x ^ y,
                        Bin::Add => x.wrapping_add(y),
                        _ => x.wrapping_sub(y),
                    };
                    r & m
                }
                Bin::Eq | Bin::Ne | Bin::Lt | Bin::Ge => {
                    let w = self.width(a).max(self.width(b));
                    let (x, y) = (self.eval(a, w, vals), self.eval(b, w, vals));
                    let r = match op {
                        Bin::Eq => x == y,
                        Bin::Ne => x != y,
                        Bin::Lt => x < y,
                        _ => x >= y,
                    };
                    r as u64 & m
                }
                Bin::LogAnd => (truth(a) && truth(b)) as u64 & m,
                Bin::LogOr => (truth(a) || truth(b)) as u64 & m,
                Bin::Shl | Bin::Shr => {
                    let x = self.eval(a, ctx, vals);
                    let n = self.eval(b, self.width(b), vals);
                    let r = if n >= 64 {
                        0
                    } else if *op == Bin::Shl {
                        x << n
                    } else {
                        x >> n
                    };
                    r & m
                }
            },
            GExpr::Tern(c, a, b) => {
                if truth(c) {
                    self.eval(a, ctx, vals)
                } else {
                    self.eval(b, ctx, vals)
                }
            }
            GExpr::Concat(es) => {
                let mut acc = 0u64;
                for x in es {
                    let w = self.width(x);
                    acc = (acc << w) | self.eval(x, w, vals);
                }
                acc & m
            }
            GExpr::Repeat(n, x) => {
                let w = self.width(x);
                let v = self.eval(x, w, vals);
                let mut acc = 0u64;
                for _ in 0..*n {
                    acc = (acc << w) | v;
                }
                acc & m
            }
        }
    }

    fn assign_value(&self, target: usize, rhs: &GExpr, vals: &[u64]) -> u64 {
        let tw = self.signals[target].width;
        let ctx = tw.max(self.width(rhs));
        self.eval(rhs, ctx, vals) & mask(tw)
    }

    /// Executes statements for `target`, reading `read` and returning the
    /// last value written, if any. Combinational blocks never read their own
    /// target and clocked blocks read the previous state, so one read
    /// snapshot serves both.
    fn exec(&self, target: usize, stmts: &[GStmt], read: &[u64], out: &mut Option<u64>) {
        for s in stmts {
            match s {
                GStmt::Assign(e) => *out = Some(self.assign_value(target, e, read)),
                GStmt::If(c, t, f) => {
                    let branch = if self.eval(c, self.width(c), read) != 0 { t } else { f };
                    self.exec(target, branch, read, out);
                }
                GStmt::Case(sel, arms, default) => {
                    let w = self.width(sel);
                    let v = self.eval(sel, w, read);
                    let arm = arms.iter().find(|(l, _)| *l == v).map_or(default, |(_, b)| b);
                    self.exec(target, arm, read, out);
                }
            }
        }
    }

    /// Cycle-by-cycle reference run: `out[t][i]` is the value of signal `i`
    /// after step `t`.
    pub fn interpret(&self, stim: &Stimulus) -> Vec<Vec<u64>> {
        let n = self.signals.len();
        let period = stim.clock.as_ref().map_or(2, |c| c.period);
        let mut state = vec![0u64; n];
        let mut rows = Vec::new();
        for t in 0..stim.duration {
            let clk = ((t % period) >= period / 2) as u64;
            let rising = state[0] == 0 && clk == 1;
            let mut next = state.clone();
            if rising {
                for (i, s) in self.signals.iter().enumerate() {
                    if let Some(Driver::Seq(stmts)) = &s.driver {
                        let mut out = None;
                        self.exec(i, stmts, &state, &mut out);
                        if let Some(v) = out {
                            next[i] = v;
                        }
                    }
                }
            }
            next[0] = clk;
            for d in stim.drives.iter().filter(|d| d.t == t) {
                let i = self.signals.iter().position(|s| s.name == d.signal).expect("driven input");
                next[i] = d.value;
            }
            for (i, s) in self.signals.iter().enumerate() {
                match &s.driver {
                    Some(Driver::Assign(e)) => next[i] = self.assign_value(i, e, &next),
                    Some(Driver::Comb(stmts)) => {
                        let mut out = None;
                        self.exec(i, stmts, &next, &mut out);
                        next[i] = out.expect("combinational blocks always assign");
                    }
                    _ => {}
                }
            }
            state = next;
            rows.push(state.clone());
        }
        rows
    }

    pub fn to_source(&self, module: &str) -> String {
        let mut ports = Vec::new();
        let mut locals = String::new();
        for s in &self.signals {
            let range = if s.width > 1 {
                format!("[{}:0] ", s.width - 1)
            } else {
                String::new()
            };
            if s.input {
                ports.push(format!("input {range}{}", s.name));
            } else if s.output {
                ports.push(format!("output logic {range}{}", s.name));
            } else {
                let _ = writeln!(locals, "  logic {range}{};", s.name);
            }
        }
        let mut out = format!("module {module}({});\n{locals}", ports.join(", "));
        for s in &self.signals {
            match &s.driver {
                Some(Driver::Assign(e)) => {
                    let _ = writeln!(out, "  assign {} = {};", s.name, self.print(e));
                }
                Some(Driver::Comb(stmts)) => {
                    out.push_str("  always @(*) begin\n");
                    self.print_stmts(&mut out, &s.name, "=", stmts, 2);
                    out.push_str("  end\n");
                }
                Some(Driver::Seq(stmts)) => {
                    out.push_str("  always @(posedge clk) begin\n");
                    self.print_stmts(&mut out, &s.name, "<=", stmts, 2);
                    out.push_str("  end\n");
                }
                None => {}
            }
        }
        out.push_str("endmodule\n");
        out
    }

    fn print_stmts(&self, out: &mut String, target: &str, op: &str, stmts: &[GStmt], depth: usize) {
        let pad = "  ".repeat(depth);
        for s in stmts {
            match s {
                GStmt::Assign(e) => {
                    let _ = writeln!(out, "{pad}{target} {op} {};", self.print(e));
                }
                GStmt::If(c, t, f) => {
                    let _ = writeln!(out, "{pad}if ({}) begin", self.print(c));
                    self.print_stmts(out, target, op, t, depth + 1);
                    if f.is_empty() {
                        let _ = writeln!(out, "{pad}end");
                    } else {
                        let _ = writeln!(out, "{pad}end else begin");
                        self.print_stmts(out, target, op, f, depth + 1);
                        let _ = writeln!(out, "{pad}end");
                    }
                }
                GStmt::Case(sel, arms, default) => {
                    let w = self.width(sel);
                    let _ = writeln!(out, "{pad}case ({})", self.print(sel));
                    for (label, body) in arms {
                        let _ = writeln!(out, "{pad}  {w}'d{label}: begin");
                        self.print_stmts(out, target, op, body, depth + 2);
                        let _ = writeln!(out, "{pad}  end");
                    }
                    let _ = writeln!(out, "{pad}  default: begin");
                    self.print_stmts(out, target, op, default, depth + 2);
                    let _ = writeln!(out, "{pad}  end");
                    let _ = writeln!(out, "{pad}endcase");
                }
            }
        }
    }

    pub fn print(&self, e: &GExpr) -> String {
        let name = |s: &usize| self.signals[*s].name.clone();
        match e {
            GExpr::Const(w, v) => format!("{w}'d{v}"),
            GExpr::Sig(s) => name(s),
            GExpr::Slice(s, lo, w) => {
                if *w == 1 {
                    format!("{}[{lo}]", name(s))
                } else {
                    format!("{}[{}:{lo}]", name(s), lo + w - 1)
                }
            }
            GExpr::Index(s, i) => format!("{}[{}]", name(s), self.print(i)),
            GExpr::Un(op, a) => {
                let sym = match op {
                    Un::Not => "~",
                    Un::Neg => "-",
                    Un::LogNot => "!",
                    Un::RedAnd => "&",
                    Un::RedOr => "|",
                    Un::RedXor => "^",
                };
                format!("({sym}({}))", self.print(a))
            }
            GExpr::Bin(op, a, b) => {
                let sym = match op {
                    Bin::And => "&",
                    Bin::Or => "|",
                    Bin::Xor => "^",
                    Bin::Add => "+",
                    Bin::Sub => "-",
                    Bin::Eq => "==",
                    Bin::Ne => "!=",
                    Bin::Lt => "<",
                    Bin::Ge => ">=",
                    Bin::Shl => "<<",
                    Bin::Shr => ">>",
                    Bin::LogAnd => "&&",
                    Bin::LogOr => "||",
                };
                format!("({} {sym} {})", self.print(a), self.print(b))
            }
            GExpr::Tern(c, a, b) => format!("({} ? {} : {})", self.print(c), self.print(a), self.print(b)),
            GExpr::Concat(es) => {
                let parts: Vec<String> = es.iter().map(|x| self.print(x)).collect();
                format!("{{{}}}", parts.join(", "))
            }
            GExpr::Repeat(n, x) => format!("{{{n}{{{}}}}}", self.print(x)),
        }
    }
}

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    widths: Vec<u32>,
}

impl Gen<'_> {
    fn leaf(&mut self, readable: &[usize]) -> GExpr {
        let s = *readable.choose(self.rng).expect("something to read");
        let w = self.widths[s];
        match self.rng.random_range(0..10) {
            0..=5 => GExpr::Sig(s),
            6 if w > 1 => {
                let width = self.rng.random_range(1..w);
                let lo = self.rng.random_range(0..=w - width);
                GExpr::Slice(s, lo, width)
            }
            7 if w > 1 => {
                let idx = *readable.choose(self.rng).unwrap();
                GExpr::Index(s, Box::new(GExpr::Sig(idx)))
            }
            _ => {
                let cw = self.rng.random_range(1..=4);
                GExpr::Const(cw, self.rng.random_range(0..=mask(cw)))
            }
        }
    }

    fn expr(&mut self, readable: &[usize], depth: u32) -> GExpr {
        if depth == 0 || self.rng.random_bool(0.3) {
            return self.leaf(readable);
        }
        let d = depth - 1;
        match self.rng.random_range(0..12) {
            0 => {
                let op = *[Un::Not, Un::Neg, Un::LogNot, Un::RedAnd, Un::RedOr, Un::RedXor]
                    .choose(self.rng)
                    .unwrap();
                GExpr::Un(op, Box::new(self.expr(readable, d)))
            }
            1..=6 => {
                let op = *[
                    Bin::And,
                    Bin::Or,
                    Bin::Xor,
                    Bin::Add,
                    Bin::Sub,
                    Bin::Eq,
                    Bin::Ne,
                    Bin::Lt,
                    Bin::Ge,
                    Bin::LogAnd,
                    Bin::LogOr,
                ]
                .choose(self.rng)
                .unwrap();
                GExpr::Bin(op, Box::new(self.expr(readable, d)), Box::new(self.expr(readable, d)))
            }
            7 => {
                let op = if self.rng.random_bool(0.5) { Bin::Shl } else { Bin::Shr };
                GExpr::Bin(op, Box::new(self.expr(readable, d)), Box::new(self.leaf(readable)))
            }
            8 | 9 => GExpr::Tern(
                Box::new(self.expr(readable, d)),
                Box::new(self.expr(readable, d)),
                Box::new(self.expr(readable, d)),
            ),
            10 => {
                let n = self.rng.random_range(2..=3);
                GExpr::Concat((0..n).map(|_| self.leaf(readable)).collect())
            }
            _ => GExpr::Repeat(self.rng.random_range(1..=3), Box::new(self.leaf(readable))),
        }
    }

    fn stmts(&mut self, readable: &[usize], depth: u32) -> Vec<GStmt> {
        if depth == 0 || self.rng.random_bool(0.4) {
            return vec![GStmt::Assign(self.expr(readable, 2))];
        }
        if self.rng.random_bool(0.6) {
            let c = self.expr(readable, 1);
            let t = self.stmts(readable, depth - 1);
            let f = if self.rng.random_bool(0.5) {
                self.stmts(readable, depth - 1)
            } else {
                Vec::new()
            };
            vec![GStmt::If(c, t, f)]
        } else {
            let sel = self.leaf(readable);
            let w = match &sel {
                GExpr::Const(w, _) | GExpr::Slice(_, _, w) => *w,
                GExpr::Sig(s) => self.widths[*s],
                _ => 1,
            };
            let n = self.rng.random_range(1..=3);
            let mut labels: Vec<u64> = (0..=mask(w).min(7)).collect();
            labels.shuffle(self.rng);
            let arms = labels
                .into_iter()
                .take(n)
                .map(|l| (l, self.stmts(readable, depth - 1)))
                .collect();
            let default = if self.rng.random_bool(0.5) {
                self.stmts(readable, depth - 1)
            } else {
                Vec::new()
            };
            vec![GStmt::Case(sel, arms, default)]
        }
    }
}

/// A design with at most six signals (clock included), widths 1 to 4.
pub fn random_design(rng: &mut ChaCha8Rng) -> GenDesign {
    let n_in = rng.random_range(1..=2);
    let n_drv = rng.random_range(1..=(5 - n_in));
    let mut signals = vec![GSignal {
        name: "clk".into(),
        width: 1,
        input: true,
        output: false,
        driver: None,
    }];
    for i in 0..n_in {
        signals.push(GSignal {
            name: format!("i{i}"),
            width: rng.random_range(1..=4),
            input: true,
            output: false,
            driver: None,
        });
    }
    let first = signals.len();
    let mut seq = Vec::new();
    for j in 0..n_drv {
        seq.push(rng.random_bool(0.5));
        signals.push(GSignal {
            name: format!("s{j}"),
            width: rng.random_range(1..=4),
            input: false,
            output: rng.random_bool(0.5),
            driver: None,
        });
    }
    let widths: Vec<u32> = signals.iter().map(|s| s.width).collect();
    let mut g = Gen { rng, widths };
    for j in 0..n_drv {
        let me = first + j;
        let driver = if seq[j] {
            let readable: Vec<usize> = (1..signals.len()).collect();
            Driver::Seq(g.stmts(&readable, 2))
        } else {
            // Inputs, registers and earlier combinational signals.
            let readable: Vec<usize> = (1..signals.len())
                .filter(|&i| i < first || seq[i - first] || i < me)
                .collect();
            if g.rng.random_bool(0.5) {
                Driver::Assign(g.expr(&readable, 3))
            } else {
                let mut body = vec![GStmt::Assign(g.expr(&readable, 2))];
                body.extend(g.stmts(&readable, 2));
                Driver::Comb(body)
            }
        };
        signals[me].driver = Some(driver);
    }
    GenDesign { signals }
}

/// Random drives for every data input over a short run.
pub fn random_stimulus(d: &GenDesign, rng: &mut ChaCha8Rng) -> Stimulus {
    let duration = rng.random_range(12..=40);
    let mut drives = Vec::new();
    for i in d.data_inputs() {
        let s = &d.signals[i];
        let mut times = vec![0];
        for _ in 0..rng.random_range(0..6) {
            times.push(rng.random_range(1..duration));
        }
        times.sort_unstable();
        times.dedup();
        for t in times {
            drives.push(Drive {
                t,
                signal: s.name.clone(),
                value: rng.random_range(0..=mask(s.width)),
            });
        }
    }
    drives.sort_by_key(|d| d.t);
    Stimulus {
        clock: Some(ClockSpec {
            signal: "clk".into(),
            period: *[2, 3, 4].choose(rng).unwrap(),
        }),
        drives,
        duration,
    }
}

/// Same drive times with fresh values for `input`.
pub fn perturb(stim: &Stimulus, input: &str, width: u32, rng: &mut ChaCha8Rng) -> Stimulus {
    let mut out = stim.clone();
    for d in out.drives.iter_mut().filter(|d| d.signal == input) {
        d.value = rng.random_range(0..=mask(width));
    }
    out
}
