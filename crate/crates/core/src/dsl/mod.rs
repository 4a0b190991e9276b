//! Program code: expressions, commands, the control automaton over commands,
//! and the instance configuration it is analysed under.
//!
//! Programs are written in a small line-oriented language (see `docs/dsl.md`
//! in the repository root) and compiled into a [`ProgramCode`], a finite
//! automaton whose transitions carry [`Command`]s. Every control state is
//! final.

mod parser;
mod print;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use parser::{parse_program, ParseError};

/// Values, addresses and queue identifiers all live in the same finite domain.
pub type Value = u32;

/// Index of a control state of a [`ProgramCode`].
pub type StateId = usize;

/// Largest supported domain size; memory cells are stored as bytes.
pub const MAX_DOMAIN: u32 = 256;

/// Source position (1-based). `0:0` marks synthesized items.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Self { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Mod,
    Eq,
    Ne,
    Lt,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Applies the operator in `Z/domain`. Comparisons and connectives
    /// yield 1 or 0; `x % 0` is 0.
    pub fn apply(self, lhs: Value, rhs: Value, domain: u32) -> Value {
        let d = u64::from(domain.max(1));
        let (a, b) = (u64::from(lhs) % d, u64::from(rhs) % d);
        let v = match self {
            BinOp::Add => (a + b) % d,
            BinOp::Sub => (a + d - b) % d,
            BinOp::Mul => (a * b) % d,
            BinOp::Mod => {
                if b == 0 {
                    0
                } else {
                    a % b
                }
            }
            BinOp::Eq => u64::from(a == b),
            BinOp::Ne => u64::from(a != b),
            BinOp::Lt => u64::from(a < b),
            BinOp::And => u64::from(a != 0 && b != 0),
            BinOp::Or => u64::from(a != 0 || b != 0),
        };
        (v % d) as Value
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Const(Value),
    Reg(String),
    MyRank,
    NumProcs,
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    /// Calls `f` on every node, parents before children.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        if let Expr::Bin(_, l, r) = self {
            l.walk(f);
            r.walk(f);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Command {
    /// `reg := mem[addr]`
    Load {
        reg: String,
        addr: Expr,
    },
    /// `mem[addr] := value`
    Store {
        addr: Expr,
        value: Expr,
    },
    /// `reg := value`
    Assign {
        reg: String,
        value: Expr,
    },
    Assume(Expr),
    /// Copy `remote` on node `rank` into the local cell `local`.
    Read {
        local: Expr,
        rank: Expr,
        remote: Expr,
        queue: Expr,
    },
    /// Copy the local cell `local` into `remote` on node `rank`.
    Write {
        local: Expr,
        rank: Expr,
        remote: Expr,
        queue: Expr,
    },
    Barrier,
}

impl Command {
    pub fn exprs(&self) -> Vec<&Expr> {
        match self {
            Command::Load { addr, .. } => vec![addr],
            Command::Store { addr, value } => vec![addr, value],
            Command::Assign { value, .. } => vec![value],
            Command::Assume(e) => vec![e],
            Command::Read {
                local,
                rank,
                remote,
                queue,
            }
            | Command::Write {
                local,
                rank,
                remote,
                queue,
            } => {
                vec![local, rank, remote, queue]
            }
            Command::Barrier => vec![],
        }
    }

    /// Register written by the command, if any.
    pub fn target_register(&self) -> Option<&str> {
        match self {
            Command::Load { reg, .. } | Command::Assign { reg, .. } => Some(reg),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub source: StateId,
    pub command: Command,
    pub target: StateId,
    pub span: Span,
}

/// The control automaton `(Q, CMD, I, q0, Q)`: all states are final.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramCode {
    pub state_count: usize,
    pub initial: StateId,
    pub transitions: Vec<Transition>,
    pub registers: Vec<String>,
}

impl Default for ProgramCode {
    fn default() -> Self {
        Self::empty()
    }
}

impl ProgramCode {
    /// One control state, no transitions.
    pub fn empty() -> Self {
        Self {
            state_count: 1,
            initial: 0,
            transitions: Vec::new(),
            registers: Vec::new(),
        }
    }

    pub fn outgoing(&self, state: StateId) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.source == state)
    }

    /// Largest constant mentioned anywhere in the code.
    pub fn max_constant(&self) -> Option<Value> {
        let mut max = None;
        for t in &self.transitions {
            for e in t.command.exprs() {
                e.walk(&mut |n| {
                    if let Expr::Const(v) = n {
                        max = Some(max.map_or(*v, |m: Value| m.max(*v)));
                    }
                });
            }
        }
        max
    }

    /// Structural checks independent of the instance: transition endpoints
    /// and the initial state lie in the state set.
    pub fn is_well_formed(&self) -> bool {
        self.initial < self.state_count
            && self
                .transitions
                .iter()
                .all(|t| t.source < self.state_count && t.target < self.state_count)
    }

    /// Copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> ProgramCode {
        let mut c = self.clone();
        for t in &mut c.transitions {
            t.span = Span::default();
        }
        c
    }

    pub fn uses_remote_or_barrier(&self) -> bool {
        self.transitions.iter().any(|t| {
            matches!(
                t.command,
                Command::Read { .. } | Command::Write { .. } | Command::Barrier
            )
        })
    }
}

/// A program together with its node count and value domain `{0, .., domain-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub code: ProgramCode,
    pub nodes: u32,
    pub domain: u32,
}

impl Instance {
    pub fn new(code: ProgramCode, nodes: u32, domain: u32) -> Self {
        Self {
            code,
            nodes,
            domain,
        }
    }

    /// Picks the smallest domain that holds every constant, the value 1 and
    /// every rank.
    pub fn with_default_domain(code: ProgramCode, nodes: u32) -> Self {
        let domain = default_domain(&code, nodes);
        Self {
            code,
            nodes,
            domain,
        }
    }

    /// Number of queue identifiers (queues share the value domain).
    pub fn queue_count(&self) -> usize {
        self.domain as usize
    }
}

pub fn default_domain(code: &ProgramCode, nodes: u32) -> u32 {
    let by_const = code.max_constant().map_or(0, |c| c.saturating_add(1));
    2.max(nodes.saturating_add(1)).max(by_const).min(MAX_DOMAIN)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    /// `file:line:col: message`
    pub fn render(&self, file: &str) -> String {
        format!("{}:{}: {}", file, self.span, self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// Checks an instance: node count and domain bounds, constants inside the
/// domain, registers declared. Empty result means the instance is usable.
pub fn validate(inst: &Instance) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let origin = Span::default();
    if inst.nodes == 0 {
        out.push(Diagnostic {
            span: origin,
            message: "node count must be at least 1".into(),
        });
    }
    if inst.domain == 0 || inst.domain > MAX_DOMAIN {
        out.push(Diagnostic {
            span: origin,
            message: format!(
                "domain size must be in 1..={MAX_DOMAIN}, got {}",
                inst.domain
            ),
        });
    }
    if !inst.code.is_well_formed() {
        out.push(Diagnostic {
            span: origin,
            message: "transition endpoint outside the state set".into(),
        });
    }
    let declared: BTreeSet<&str> = inst.code.registers.iter().map(String::as_str).collect();
    for t in &inst.code.transitions {
        if let Some(reg) = t.command.target_register() {
            if !declared.contains(reg) {
                out.push(Diagnostic {
                    span: t.span,
                    message: format!("undeclared register `{reg}`"),
                });
            }
        }
        for e in t.command.exprs() {
            e.walk(&mut |n| match n {
                Expr::Const(v) if *v >= inst.domain => out.push(Diagnostic {
                    span: t.span,
                    message: format!(
                        "constant {v} outside domain 0..{}",
                        inst.domain.saturating_sub(1)
                    ),
                }),
                Expr::Reg(r) if !declared.contains(r.as_str()) => out.push(Diagnostic {
                    span: t.span,
                    message: format!("undeclared register `{r}`"),
                }),
                _ => {}
            });
        }
    }
    out
}
