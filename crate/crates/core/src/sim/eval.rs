// SPDX-License-Identifier: Apache-2.0

//! Joint evaluation of functional values and taint labels.

use crate::bits::{mask, shl, shr};
use crate::rtl::ast::{BinaryOp, UnaryOp};
use crate::rtl::ir::{Expr, SignalId};

/// Read access to the current value and taint of every signal.
pub(crate) trait Env {
    fn get(&self, s: SignalId) -> (u64, u64);
    fn width(&self, s: SignalId) -> u32;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TaintMode {
    /// Any tainted condition bit taints the whole selected result.
    #[default]
    Conservative,
    /// Ternaries with a tainted selector only taint bits where the two
    /// candidates may differ.
    Precise,
}

fn any(t: u64) -> u64 {
    (t != 0) as u64
}

/// Evaluates `e` in a context of `ctx` bits. Returns `(value, taint)`, both
/// masked to `ctx` bits.
pub(crate) fn eval(e: &Expr, ctx: u32, env: &dyn Env, mode: TaintMode) -> (u64, u64) {
    let m = mask(ctx);
    let widths = |s: SignalId| env.width(s);
    let sw = |x: &Expr| x.self_width(&widths);
    match e {
        Expr::Const { value, .. } => (value & m, 0),
        Expr::Fill(one) => (if *one { m } else { 0 }, 0),
        Expr::Signal(s) => {
            let (v, t) = env.get(*s);
            (v & m, t & m)
        }
        Expr::Slice { base, lo, width } => {
            let (v, t) = env.get(*base);
            let fm = mask(*width) & m;
            ((v >> lo) & fm, (t >> lo) & fm)
        }
        Expr::Index {
            base,
            index,
            offset,
        } => {
            let (iv, it) = eval(index, sw(index), env, mode);
            let (v, t) = env.get(*base);
            let i = iv as i64 - offset;
            let (bv, bt) = if i < 0 || i >= env.width(*base) as i64 {
                (0, 0)
            } else {
                ((v >> i) & 1, (t >> i) & 1)
            };
            (bv & m, if it != 0 { 1 & m } else { bt & m })
        }
        Expr::Unary(op, a) => match op {
            UnaryOp::Not => {
                let (v, t) = eval(a, ctx, env, mode);
                (!v & m, t)
            }
            UnaryOp::Neg => {
                let (v, t) = eval(a, ctx, env, mode);
                (v.wrapping_neg() & m, if t != 0 { m } else { 0 })
            }
            _ => {
                let w = sw(a);
                let (v, t) = eval(a, w, env, mode);
                let r = match op {
                    UnaryOp::LogNot => (v == 0) as u64,
                    UnaryOp::RedAnd => (v == mask(w)) as u64,
                    UnaryOp::RedOr => (v != 0) as u64,
                    _ => (v.count_ones() & 1) as u64,
                };
                (r & m, any(t) & m)
            }
        },
        Expr::Binary(op, a, b) => match op {
            BinaryOp::And | BinaryOp::Or | BinaryOp::Xor => {
                let (av, at) = eval(a, ctx, env, mode);
                let (bv, bt) = eval(b, ctx, env, mode);
                let v = match op {
                    BinaryOp::And => av & bv,
                    BinaryOp::Or => av | bv,
                    _ => av ^ bv,
                };
                (v, at | bt)
            }
            BinaryOp::Add | BinaryOp::Sub => {
                let (av, at) = eval(a, ctx, env, mode);
                let (bv, bt) = eval(b, ctx, env, mode);
                let v = if *op == BinaryOp::Add {
                    av.wrapping_add(bv)
                } else {
                    av.wrapping_sub(bv)
                };
                (v & m, if at | bt != 0 { m } else { 0 })
            }
            BinaryOp::Shl | BinaryOp::Shr => {
                let (av, at) = eval(a, ctx, env, mode);
                let (sv, st) = eval(b, sw(b), env, mode);
                let (v, t) = if *op == BinaryOp::Shl {
                    (shl(av, sv) & m, shl(at, sv) & m)
                } else {
                    (shr(av, sv), shr(at, sv))
                };
                if st != 0 {
                    (v, m)
                } else {
                    (v, t)
                }
            }
            BinaryOp::LogAnd | BinaryOp::LogOr => {
                let (av, at) = eval(a, sw(a), env, mode);
                let (bv, bt) = eval(b, sw(b), env, mode);
                let r = if *op == BinaryOp::LogAnd {
                    av != 0 && bv != 0
                } else {
                    av != 0 || bv != 0
                };
                (r as u64 & m, any(at | bt) & m)
            }
            cmp => {
                let w = sw(a).max(sw(b));
                let (av, at) = eval(a, w, env, mode);
                let (bv, bt) = eval(b, w, env, mode);
                let r = match cmp {
                    BinaryOp::Eq => av == bv,
                    BinaryOp::Ne => av != bv,
                    BinaryOp::Lt => av < bv,
                    BinaryOp::Le => av <= bv,
                    BinaryOp::Gt => av > bv,
                    _ => av >= bv,
                };
                (r as u64 & m, any(at | bt) & m)
            }
        },
        Expr::Ternary(c, a, b) => {
            let (cv, ct) = eval(c, sw(c), env, mode);
            let (av, at) = eval(a, ctx, env, mode);
            let (bv, bt) = eval(b, ctx, env, mode);
            let (v, t) = if cv != 0 { (av, at) } else { (bv, bt) };
            if ct == 0 {
                return (v, t);
            }
            match mode {
                TaintMode::Conservative => (v, m),
                TaintMode::Precise => (v, t | ((av ^ bv) | at | bt)),
            }
        }
        Expr::Concat(es) => {
            let (mut v, mut t) = (0u64, 0u64);
            for x in es {
                let w = sw(x);
                let (xv, xt) = eval(x, w, env, mode);
                v = shl(v, w as u64) | xv;
                t = shl(t, w as u64) | xt;
            }
            (v & m, t & m)
        }
        Expr::Repeat(n, x) => {
            let w = sw(x);
            let (xv, xt) = eval(x, w, env, mode);
            let (mut v, mut t) = (0u64, 0u64);
            for _ in 0..*n {
                v = shl(v, w as u64) | xv;
                t = shl(t, w as u64) | xt;
            }
            (v & m, t & m)
        }
    }
}
