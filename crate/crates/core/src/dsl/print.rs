use std::fmt;

use super::{Command, Expr, ProgramCode};

fn fmt_operand(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Bin(..) => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Reg(r) => f.write_str(r),
            Expr::MyRank => f.write_str("myrank"),
            Expr::NumProcs => f.write_str("nprocs"),
            Expr::Bin(op, l, r) => {
                fmt_operand(l, f)?;
                write!(f, " {} ", op.symbol())?;
                fmt_operand(r, f)
            }
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Load { reg, addr } => write!(f, "{reg} := mem[{addr}]"),
            Command::Store { addr, value } => write!(f, "mem[{addr}] := {value}"),
            Command::Assign { reg, value } => write!(f, "{reg} := {value}"),
            Command::Assume(e) => write!(f, "assume({e})"),
            Command::Read {
                local,
                rank,
                remote,
                queue,
            } => write!(f, "read({local}, {rank}, {remote}, {queue})"),
            Command::Write {
                local,
                rank,
                remote,
                queue,
            } => write!(f, "write({local}, {rank}, {remote}, {queue})"),
            Command::Barrier => f.write_str("barrier"),
        }
    }
}

/// Canonical text: one `Lk: command; goto Lj;` line per transition. States
/// without outgoing transitions become `Lk: goto Lk;`, or `Lk: skip;` on
/// the last line. Parsing the output gives back the same automaton up to
/// unreachable states.
impl fmt::Display for ProgramCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.registers.is_empty() {
            writeln!(f, "regs {};", self.registers.join(", "))?;
        }
        // entry state first so that its label binds to the initial state
        let order: Vec<usize> = std::iter::once(self.initial)
            .chain((0..self.state_count).filter(|&s| s != self.initial))
            .collect();
        let name = |s: usize| {
            if s == self.initial {
                0
            } else if s < self.initial {
                s + 1
            } else {
                s
            }
        };
        for (i, &s) in order.iter().enumerate() {
            let mut any = false;
            for t in self.outgoing(s) {
                writeln!(f, "L{}: {}; goto L{};", name(s), t.command, name(t.target))?;
                any = true;
            }
            // a dead end must not fall through into the next line
            if !any && i + 1 < order.len() {
                writeln!(f, "L{0}: goto L{0};", name(s))?;
            } else if !any && order.len() > 1 {
                writeln!(f, "L{}: skip;", name(s))?;
            }
        }
        Ok(())
    }
}
