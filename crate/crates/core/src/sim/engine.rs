// SPDX-License-Identifier: Apache-2.0

//! Event-driven two-state scheduler with a taint shadow state.

use std::collections::{HashMap, VecDeque};

use super::eval::{eval, Env, TaintMode};
use super::{SimError, SimTrace, TraceSignal};
use crate::bits::{field_mask, mask};
use crate::graph::{Time, VertexSample};
use crate::rtl::ast::Direction;
use crate::rtl::ir::{ElaboratedDesign, Expr, Lhs, Process, SignalId, Stmt};

/// A pending write. `value == None` only raises taint on `mask`.
#[derive(Debug, Clone, Copy)]
struct Update {
    sig: SignalId,
    mask: u64,
    value: Option<u64>,
    taint: u64,
}

struct State {
    val: Vec<u64>,
    taint: Vec<u64>,
    width: Vec<u32>,
    source: Vec<bool>,
    seeded: Vec<bool>,
}

impl State {
    fn forced(&self, s: SignalId, t: u64) -> u64 {
        if self.source[s.index()] && self.seeded[s.index()] {
            mask(self.width[s.index()])
        } else {
            t
        }
    }

    fn apply(&mut self, u: &Update) -> bool {
        let i = u.sig.index();
        let (v0, t0) = (self.val[i], self.taint[i]);
        let (v, t) = match u.value {
            Some(v) => ((v0 & !u.mask) | (v & u.mask), (t0 & !u.mask) | (u.taint & u.mask)),
            None => (v0, t0 | (u.taint & u.mask)),
        };
        let t = self.forced(u.sig, t);
        self.val[i] = v;
        self.taint[i] = t;
        (v, t) != (v0, t0)
    }
}

impl Env for State {
    fn get(&self, s: SignalId) -> (u64, u64) {
        (self.val[s.index()], self.taint[s.index()])
    }
    fn width(&self, s: SignalId) -> u32 {
        self.width[s.index()]
    }
}

/// Block-local view: blocking writes are visible to later statements of
/// the same process.
struct Exec<'a> {
    state: &'a State,
    mode: TaintMode,
    overlay: HashMap<SignalId, (u64, u64)>,
    blocking: Vec<Update>,
    nba: Vec<Update>,
}

impl Env for Exec<'_> {
    fn get(&self, s: SignalId) -> (u64, u64) {
        self.overlay.get(&s).copied().unwrap_or_else(|| self.state.get(s))
    }
    fn width(&self, s: SignalId) -> u32 {
        self.state.width(s)
    }
}

impl<'a> Exec<'a> {
    fn new(state: &'a State, mode: TaintMode) -> Self {
        Exec {
            state,
            mode,
            overlay: HashMap::new(),
            blocking: Vec::new(),
            nba: Vec::new(),
        }
    }

    fn push(&mut self, u: Update, blocking: bool) {
        if blocking {
            let (v0, t0) = self.get(u.sig);
            let (v, t) = match u.value {
                Some(v) => ((v0 & !u.mask) | (v & u.mask), (t0 & !u.mask) | (u.taint & u.mask)),
                None => (v0, t0 | (u.taint & u.mask)),
            };
            self.overlay.insert(u.sig, (v, self.state.forced(u.sig, t)));
            self.blocking.push(u);
        } else {
            self.nba.push(u);
        }
    }

    fn eval(&self, e: &Expr, ctx: u32) -> (u64, u64) {
        eval(e, ctx, self, self.mode)
    }

    fn self_width(&self, e: &Expr) -> u32 {
        e.self_width(&|s| self.state.width(s))
    }

    fn assign(&mut self, lhs: &Lhs, rhs: &Expr, blocking: bool, pc: bool) {
        let ctx = self.self_width(rhs).max(lhs.width);
        let (v, t) = self.eval(rhs, ctx);
        let w = mask(lhs.width);
        let t = if pc { w } else { t & w };
        let u = Update {
            sig: lhs.signal,
            mask: field_mask(lhs.lo, lhs.width),
            value: Some((v & w) << lhs.lo),
            taint: t << lhs.lo,
        };
        self.push(u, blocking);
    }

    /// Raises taint on every target statically assigned in `s`.
    fn taint_targets(&mut self, s: &Stmt) {
        match s {
            Stmt::Block(b) => b.iter().for_each(|x| self.taint_targets(x)),
            Stmt::Assign { lhs, blocking, .. } => {
                let m = field_mask(lhs.lo, lhs.width);
                let u = Update {
                    sig: lhs.signal,
                    mask: m,
                    value: None,
                    taint: m,
                };
                self.push(u, *blocking);
            }
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => {
                self.taint_targets(then_branch);
                if let Some(e) = else_branch {
                    self.taint_targets(e);
                }
            }
            Stmt::Case { items, default, .. } => {
                for (_, b) in items {
                    self.taint_targets(b);
                }
                if let Some(d) = default {
                    self.taint_targets(d);
                }
            }
            Stmt::Nop => {}
        }
    }

    fn exec(&mut self, s: &Stmt, pc: bool) {
        match s {
            Stmt::Block(b) => b.iter().for_each(|x| self.exec(x, pc)),
            Stmt::Assign {
                lhs, rhs, blocking, ..
            } => self.assign(lhs, rhs, *blocking, pc),
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let (cv, ct) = self.eval(cond, self.self_width(cond));
                let tainted = pc || ct != 0;
                let (taken, other) = if cv != 0 {
                    (Some(&**then_branch), else_branch.as_deref())
                } else {
                    (else_branch.as_deref(), Some(&**then_branch))
                };
                if let Some(t) = taken {
                    self.exec(t, tainted);
                }
                if tainted {
                    if let Some(o) = other {
                        self.taint_targets(o);
                    }
                }
            }
            Stmt::Case {
                selector,
                items,
                default,
            } => {
                let sw = self.self_width(selector);
                let mut taken = None;
                let mut tainted = pc;
                for (i, (labels, _)) in items.iter().enumerate() {
                    for l in labels {
                        let w = sw.max(self.self_width(l));
                        let (sv, st) = self.eval(selector, w);
                        let (lv, lt) = self.eval(l, w);
                        tainted |= (st | lt) != 0;
                        if taken.is_none() && sv == lv {
                            taken = Some(i);
                        }
                    }
                }
                match taken {
                    Some(i) => self.exec(&items[i].1, tainted),
                    None => {
                        if let Some(d) = default {
                            self.exec(d, tainted);
                        }
                    }
                }
                if tainted {
                    for (i, (_, body)) in items.iter().enumerate() {
                        if Some(i) != taken {
                            self.taint_targets(body);
                        }
                    }
                    if let (Some(_), Some(d)) = (taken, default) {
                        self.taint_targets(d);
                    }
                }
            }
            Stmt::Nop => {}
        }
    }

    fn finish(self) -> Vec<Update> {
        let mut out = self.blocking;
        out.extend(self.nba);
        out
    }
}

pub(crate) struct Engine<'a> {
    design: &'a ElaboratedDesign,
    mode: TaintMode,
    state: State,
    /// signal -> combinational processes reading it
    fanout: Vec<Vec<usize>>,
    comb: Vec<usize>,
    clocked: Vec<usize>,
    limit: usize,
    queued: Vec<bool>,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(design: &'a ElaboratedDesign, sources: &[SignalId], mode: TaintMode) -> Self {
        let n = design.signals.len();
        let width: Vec<u32> = design.signals.iter().map(|s| s.width).collect();
        let mut source = vec![false; n];
        let mut seeded = vec![false; n];
        let mut taint = vec![0; n];
        for s in sources {
            source[s.index()] = true;
            if design.signal(*s).direction != Some(Direction::Input) {
                seeded[s.index()] = true;
                taint[s.index()] = mask(width[s.index()]);
            }
        }
        let mut fanout = vec![Vec::new(); n];
        let mut comb = Vec::new();
        let mut clocked = Vec::new();
        for (i, p) in design.processes.iter().enumerate() {
            match p {
                Process::Clocked { .. } => clocked.push(i),
                _ => {
                    comb.push(i);
                    for s in p.reads() {
                        fanout[s.index()].push(i);
                    }
                }
            }
        }
        Engine {
            design,
            mode,
            state: State {
                val: vec![0; n],
                taint,
                width,
                source,
                seeded,
            },
            fanout,
            comb,
            clocked,
            limit: (n * n).max(64),
            queued: vec![false; design.processes.len()],
        }
    }

    fn run_comb(&self, pi: usize) -> Vec<Update> {
        let mut x = Exec::new(&self.state, self.mode);
        match &self.design.processes[pi] {
            Process::Assign { lhs, rhs, .. } => x.assign(lhs, rhs, true, false),
            Process::Comb { body, .. } => x.exec(body, false),
            Process::Clocked { .. } => unreachable!(),
        }
        x.finish()
    }

    fn settle(&mut self, t: Time, mut queue: VecDeque<usize>) -> Result<(), SimError> {
        let mut evaluations = 0usize;
        while let Some(pi) = queue.pop_front() {
            self.queued[pi] = false;
            evaluations += 1;
            if evaluations > self.limit {
                return Err(SimError::NonConvergence {
                    t,
                    evaluations: self.limit,
                });
            }
            for u in self.run_comb(pi) {
                if self.state.apply(&u) {
                    for &q in &self.fanout[u.sig.index()] {
                        if !self.queued[q] {
                            self.queued[q] = true;
                            queue.push_back(q);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn enqueue_fanout(&mut self, sigs: &[SignalId], queue: &mut VecDeque<usize>) {
        for s in sigs {
            for &q in &self.fanout[s.index()] {
                if !self.queued[q] {
                    self.queued[q] = true;
                    queue.push_back(q);
                }
            }
        }
    }

    /// Evaluates every combinational process once and settles.
    pub(crate) fn initialize(&mut self) -> Result<(), SimError> {
        let queue: VecDeque<usize> = self.comb.iter().copied().collect();
        for &q in &queue {
            self.queued[q] = true;
        }
        self.settle(0, queue)
    }

    /// Advances to time `t`: clocked processes fire on rising clock inputs
    /// against the previous state, then `inputs` (new input values) and the
    /// clocked updates are committed and combinational logic settles.
    pub(crate) fn step(&mut self, t: Time, inputs: &[(SignalId, u64)]) -> Result<(), SimError> {
        let mut updates = Vec::new();
        for &pi in &self.clocked {
            let Process::Clocked { clock, body, .. } = &self.design.processes[pi] else {
                unreachable!()
            };
            let old = self.state.val[clock.index()] & 1;
            let new = inputs
                .iter()
                .find(|(s, _)| s == clock)
                .map_or(old, |(_, v)| v & 1);
            let edge = old == 0 && new == 1;
            let ci = clock.index();
            let driven = inputs.iter().any(|(s, _)| s == clock);
            let ctaint = self.state.taint[ci] != 0
                || (self.state.source[ci] && (self.state.seeded[ci] || driven));
            let mut x = Exec::new(&self.state, self.mode);
            if edge {
                x.exec(body, ctaint);
            } else if ctaint {
                x.taint_targets(body);
            }
            updates.extend(x.finish());
        }
        let mut changed = Vec::new();
        for &(s, v) in inputs {
            self.state.seeded[s.index()] |= self.state.source[s.index()];
            let u = Update {
                sig: s,
                mask: mask(self.state.width[s.index()]),
                value: Some(v),
                taint: 0,
            };
            if self.state.apply(&u) {
                changed.push(s);
            }
        }
        for u in &updates {
            if self.state.apply(u) {
                changed.push(u.sig);
            }
        }
        let mut queue = VecDeque::new();
        self.enqueue_fanout(&changed, &mut queue);
        self.settle(t, queue)
    }

    pub(crate) fn snapshot(&self, s: SignalId) -> (u64, u64) {
        self.state.get(s)
    }
}

/// Runs the engine over `duration` steps with per-step input values.
pub(crate) fn run(
    design: &ElaboratedDesign,
    sources: &[SignalId],
    mode: TaintMode,
    duration: Time,
    inputs_at: &dyn Fn(Time) -> Vec<(SignalId, u64)>,
) -> Result<SimTrace, SimError> {
    let mut e = Engine::new(design, sources, mode);
    e.initialize()?;
    let mut signals: Vec<TraceSignal> = design
        .signals
        .iter()
        .map(|s| TraceSignal {
            name: s.name.clone(),
            width: s.width,
            changes: Vec::new(),
        })
        .collect();
    for t in 0..duration {
        e.step(t, &inputs_at(t))?;
        for (i, sig) in signals.iter_mut().enumerate() {
            let (v, tt) = e.snapshot(SignalId(i as u32));
            let same = sig
                .changes
                .last()
                .is_some_and(|c| c.val == v && c.val_taint == tt);
            if !same {
                sig.changes.push(VertexSample {
                    t,
                    val: v,
                    val_taint: tt,
                });
            }
        }
    }
    Ok(SimTrace {
        signals,
        end: duration,
    })
}
