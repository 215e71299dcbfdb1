// SPDX-License-Identifier: Apache-2.0

//! Reference IFT simulator: two-state functional values plus per-bit taint
//! labels, driven by a [`Stimulus`].
//!
//! Time steps are integers. A generated clock with period `p` is high when
//! `t % p >= p / 2`, so with the default period 2 rising edges fall on odd
//! steps. At each step, clocked processes whose clock rises read the state of
//! the previous step; their writes, the step's input drives and all
//! combinational consequences are visible in the state recorded for the step.

mod engine;
mod eval;
pub mod stimulus;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{Time, VertexSample};
use crate::property::IftProperty;
use crate::rtl::ast::Direction;
use crate::rtl::ir::{ElaboratedDesign, SignalId};

pub use eval::TaintMode;
pub use stimulus::{parse_value, ClockSpec, Drive, Stimulus, StimulusError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("stimulus references unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("`{0}` is not a top-level input and cannot be driven")]
    NotAnInput(String),
    #[error("clock `{0}` must be a 1-bit input")]
    BadClock(String),
    #[error("value {value} does not fit the {width} bits of `{name}`")]
    ValueTooWide { name: String, value: u64, width: u32 },
    #[error("conflicting drives of `{name}` at t={t}")]
    DriveConflict { t: Time, name: String },
    #[error("combinational logic did not settle at t={t} within {evaluations} process evaluations")]
    NonConvergence { t: Time, evaluations: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSignal {
    pub name: String,
    pub width: u32,
    /// Change list starting at t = 0; consecutive entries differ.
    pub changes: Vec<VertexSample>,
}

impl TraceSignal {
    pub fn at(&self, t: Time) -> (u64, u64) {
        let i = self.changes.partition_point(|c| c.t <= t);
        if i == 0 {
            (0, 0)
        } else {
            (self.changes[i - 1].val, self.changes[i - 1].val_taint)
        }
    }
}

/// Functional values and taint for every signal, indexed by [`SignalId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTrace {
    pub signals: Vec<TraceSignal>,
    /// Number of simulated steps; the trace covers `[0, end)`.
    pub end: Time,
}

impl SimTrace {
    pub fn at(&self, s: SignalId, t: Time) -> (u64, u64) {
        self.signals[s.index()].at(t)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimOptions {
    pub mode: TaintMode,
}

/// Input values applied at each step, resolved from a stimulus.
struct Schedule {
    by_time: BTreeMap<Time, Vec<(SignalId, u64)>>,
    clock: Option<(SignalId, Time)>,
}

impl Schedule {
    fn new(design: &ElaboratedDesign, stim: &Stimulus) -> Result<Schedule, SimError> {
        let input = |name: &str| -> Result<SignalId, SimError> {
            let id = design
                .lookup(name)
                .ok_or_else(|| SimError::UnknownSignal(name.to_string()))?;
            if design.signal(id).direction != Some(Direction::Input) {
                return Err(SimError::NotAnInput(design.signal(id).name.clone()));
            }
            Ok(id)
        };
        let clock = match &stim.clock {
            Some(c) => {
                let id = input(&c.signal)?;
                if design.width(id) != 1 {
                    return Err(SimError::BadClock(c.signal.clone()));
                }
                Some((id, c.period))
            }
            None => None,
        };
        let mut by_time: BTreeMap<Time, Vec<(SignalId, u64)>> = BTreeMap::new();
        for d in &stim.drives {
            let id = input(&d.signal)?;
            let info = design.signal(id);
            if info.width < 64 && d.value >> info.width != 0 {
                return Err(SimError::ValueTooWide {
                    name: info.name.clone(),
                    value: d.value,
                    width: info.width,
                });
            }
            if clock.is_some_and(|(c, _)| c == id) {
                return Err(SimError::DriveConflict {
                    t: d.t,
                    name: info.name.clone(),
                });
            }
            let slot = by_time.entry(d.t).or_default();
            match slot.iter().find(|(s, _)| *s == id) {
                Some((_, v)) if *v != d.value => {
                    return Err(SimError::DriveConflict {
                        t: d.t,
                        name: info.name.clone(),
                    })
                }
                Some(_) => {}
                None => slot.push((id, d.value)),
            }
        }
        Ok(Schedule { by_time, clock })
    }

    fn inputs_at(&self, t: Time) -> Vec<(SignalId, u64)> {
        let mut v = self.by_time.get(&t).cloned().unwrap_or_default();
        if let Some((c, p)) = self.clock {
            v.push((c, ((t % p) >= p / 2) as u64));
        }
        v
    }
}

/// Simulates with conservative taint propagation.
pub fn simulate(
    design: &ElaboratedDesign,
    prop: &IftProperty,
    stim: &Stimulus,
) -> Result<SimTrace, SimError> {
    simulate_with(design, prop, stim, SimOptions::default())
}

pub fn simulate_with(
    design: &ElaboratedDesign,
    prop: &IftProperty,
    stim: &Stimulus,
    opts: SimOptions,
) -> Result<SimTrace, SimError> {
    let sched = Schedule::new(design, stim)?;
    let sources: Vec<SignalId> = prop.sources.iter().copied().collect();
    engine::run(design, &sources, opts.mode, stim.duration, &|t| sched.inputs_at(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub t: Time,
    pub signal: SignalId,
    pub bit: u32,
}

/// Reports the first arrival of taint at every bit of every sink.
pub fn check_property(trace: &SimTrace, prop: &IftProperty) -> Vec<Violation> {
    let mut out = Vec::new();
    for &s in &prop.sinks {
        let mut seen = 0u64;
        for c in &trace.signals[s.index()].changes {
            let fresh = c.val_taint & !seen;
            for bit in 0..64 {
                if (fresh >> bit) & 1 == 1 {
                    out.push(Violation {
                        t: c.t,
                        signal: s,
                        bit,
                    });
                }
            }
            seen |= c.val_taint;
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::property::Objective;
    use crate::rtl::{elaborate, parse_rtl, SourceUnit};
    use std::collections::BTreeSet;

    fn design(src: &str) -> ElaboratedDesign {
        let ast = parse_rtl(&SourceUnit::single("s.sv", src, "m")).unwrap();
        elaborate(&ast, "m").unwrap()
    }

    fn prop(d: &ElaboratedDesign, source: &str) -> IftProperty {
        let s = d.lookup(source).unwrap();
        IftProperty {
            objective: Objective::Confidentiality,
            sources: BTreeSet::from([s]),
            sinks: d.ids().filter(|x| *x != s).collect(),
        }
    }

    fn stim(text: &str) -> Stimulus {
        Stimulus::parse("t.stim", text).unwrap()
    }

    #[test]
    fn identity_propagation() {
        let d = design("module m(input [3:0] a, output [3:0] b); assign b = a; endmodule");
        let tr = simulate(&d, &prop(&d, "a"), &stim("at 5 drive a = 1\nrun 10\n")).unwrap();
        let b = d.lookup("b").unwrap();
        assert_eq!(tr.at(b, 4), (0, 0));
        assert_eq!(tr.at(b, 5), (1, 0b1111));
        assert_eq!(tr.signals[b.index()].changes.len(), 2);
        assert_eq!(tr.signals[b.index()].changes[0].t, 0);
    }

    #[test]
    fn disabled_register_stays_clean() {
        let d = design(
            "module m(input clk, input en, input [3:0] d, output reg [3:0] q); always @(posedge clk) if (en) q <= d; endmodule",
        );
        let s = stim("clock clk period 2\nat 0 drive d = 9\nat 0 drive en = 0\nrun 20\n");
        let tr = simulate(&d, &prop(&d, "d"), &s).unwrap();
        let q = d.lookup("q").unwrap();
        assert!(tr.signals[q.index()].changes.iter().all(|c| c.val_taint == 0 && c.val == 0));
    }

    #[test]
    fn register_captures_on_odd_steps() {
        let d = design(
            "module m(input clk, input en, input [3:0] d, output reg [3:0] q); always @(posedge clk) if (en) q <= d; endmodule",
        );
        let s = stim("clock clk period 2\nat 0 drive en = 1\nat 2 drive d = 9\nrun 8\n");
        let tr = simulate(&d, &prop(&d, "d"), &s).unwrap();
        let q = d.lookup("q").unwrap();
        let clk = d.lookup("clk").unwrap();
        assert_eq!(tr.at(clk, 0).0, 0);
        assert_eq!(tr.at(clk, 1).0, 1);
        assert_eq!(tr.at(q, 2), (0, 0));
        // posedge at t=3 samples d from t=2
        assert_eq!(tr.at(q, 3), (9, 0b1111));
    }

    #[test]
    fn tainted_guard_taints_held_register() {
        let d = design(
            "module m(input clk, input en, input [3:0] d, output reg [3:0] q); always @(posedge clk) if (en) q <= d; endmodule",
        );
        let s = stim("clock clk period 2\nat 0 drive en = 0\nat 0 drive d = 3\nrun 6\n");
        let tr = simulate(&d, &prop(&d, "en"), &s).unwrap();
        let q = d.lookup("q").unwrap();
        assert_eq!(tr.at(q, 0), (0, 0));
        assert_eq!(tr.at(q, 1), (0, 0b1111));
    }

    #[test]
    fn ternary_selector_precise_vs_conservative() {
        let d = design(
            "module m(input sel, input [2:0] a, input [2:0] b, output [2:0] y); assign y = sel ? a : b; endmodule",
        );
        let s = stim("at 0 drive sel = 1\nat 0 drive a = 5\nat 0 drive b = 4\nat 1 drive b = 5\nrun 3\n");
        let y = d.lookup("y").unwrap();
        let p = prop(&d, "sel");
        let c = simulate(&d, &p, &s).unwrap();
        assert_eq!(c.at(y, 0), (5, 0b111));
        let pr = simulate_with(&d, &p, &s, SimOptions { mode: TaintMode::Precise }).unwrap();
        assert_eq!(pr.at(y, 0), (5, 0b001));
        assert_eq!(pr.at(y, 1), (5, 0));
    }

    #[test]
    fn netlist_constant_source_seeded_at_zero() {
        let d = design(
            "module m(output [7:0] o); wire [7:0] key; assign key = 8'hA5; assign o = key ^ 8'h0F; endmodule",
        );
        let tr = simulate(&d, &prop(&d, "key"), &stim("run 4\n")).unwrap();
        let o = d.lookup("o").unwrap();
        assert_eq!(tr.at(o, 0), (0xAA, 0xFF));
    }

    #[test]
    fn violations_first_arrival() {
        let d = design(
            "module m(input clk, input [3:0] key, input en, output reg [3:0] out); always @(posedge clk) if (en) out <= key ^ 4'd3; endmodule",
        );
        let s = stim("clock clk period 2\nat 0 drive key = 7\nat 10 drive en = 1\nrun 20\n");
        let p = prop(&d, "key");
        let tr = simulate(&d, &p, &s).unwrap();
        let out = d.lookup("out").unwrap();
        let v: Vec<Violation> = check_property(&tr, &p)
            .into_iter()
            .filter(|v| v.signal == out)
            .collect();
        assert_eq!(v.len(), 4);
        assert!(v.iter().all(|x| x.t == 11));
        let quiet = stim("clock clk period 2\nat 0 drive key = 7\nrun 20\n");
        let tr = simulate(&d, &p, &quiet).unwrap();
        assert!(check_property(&tr, &p).iter().all(|v| v.signal != out));
    }

    #[test]
    fn stimulus_errors() {
        let d = design("module m(input [1:0] a, output b); assign b = a[0]; endmodule");
        let p = prop(&d, "a");
        assert!(matches!(
            simulate(&d, &p, &stim("at 0 drive b = 1\nrun 2\n")),
            Err(SimError::NotAnInput(_))
        ));
        assert!(matches!(
            simulate(&d, &p, &stim("at 0 drive a = 4\nrun 2\n")),
            Err(SimError::ValueTooWide { .. })
        ));
        assert!(matches!(
            simulate(&d, &p, &stim("at 0 drive a = 1\nat 0 drive a = 2\nrun 2\n")),
            Err(SimError::DriveConflict { .. })
        ));
        assert!(matches!(
            simulate(&d, &p, &stim("at 0 drive q = 1\nrun 2\n")),
            Err(SimError::UnknownSignal(_))
        ));
    }

    #[test]
    fn comb_loop_does_not_converge() {
        let d = design(
            "module m(input a, output reg y); reg z; always @(*) z = ~y; always @(*) y = z ^ a; endmodule",
        );
        let p = prop(&d, "a");
        assert!(matches!(
            simulate(&d, &p, &stim("run 2\n")),
            Err(SimError::NonConvergence { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let d = design(
            "module m(input clk, input [3:0] a, output reg [3:0] q); always @(posedge clk) q <= q + a; endmodule",
        );
        let s = stim("clock clk period 2\nat 0 drive a = 3\nrun 30\n");
        let p = prop(&d, "a");
        assert_eq!(simulate(&d, &p, &s).unwrap(), simulate(&d, &p, &s).unwrap());
    }
}
