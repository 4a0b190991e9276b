//! The state-space automaton of a program: configurations, the transition
//! rules, schedule-driven runs and bounded enumeration of computations.

mod explore;
mod text;

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, BinOp, Command, Diagnostic, Expr, Instance, StateId, Value};

pub use explore::{independent, Exhausted, Visit};
pub use text::{
    computation_from_json, computation_to_json, format_computation, format_event,
    parse_computation, EventJson, TextError,
};

/// Process rank, `1..=N`.
pub type Rank = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EventKind {
    Load,
    Store,
    Assign,
    Assume,
    Read,
    Write,
    PopA,
    PopB,
    Barrier,
}

impl EventKind {
    pub const ALL: [EventKind; 9] = [
        EventKind::Load,
        EventKind::Store,
        EventKind::Assign,
        EventKind::Assume,
        EventKind::Read,
        EventKind::Write,
        EventKind::PopA,
        EventKind::PopB,
        EventKind::Barrier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::Load => "load",
            EventKind::Store => "store",
            EventKind::Assign => "assign",
            EventKind::Assume => "assume",
            EventKind::Read => "read",
            EventKind::Write => "write",
            EventKind::PopA => "popA",
            EventKind::PopB => "popB",
            EventKind::Barrier => "barrier",
        }
    }

    pub fn is_pop(self) -> bool {
        matches!(self, EventKind::PopA | EventKind::PopB)
    }

    pub fn is_issue(self) -> bool {
        matches!(self, EventKind::Read | EventKind::Write)
    }

    /// Writes of a cell: `store` and `popB`.
    pub fn is_write(self) -> bool {
        matches!(self, EventKind::Store | EventKind::PopB)
    }

    pub fn uses_queue(self) -> bool {
        self.is_issue() || self.is_pop()
    }
}

/// A memory cell `(rank, address)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub rank: Rank,
    pub addr: Value,
}

impl Cell {
    pub fn new(rank: Rank, addr: Value) -> Self {
        Self { rank, addr }
    }
}

/// A letter of the computation alphabet. `queue` is set exactly for
/// read, write, popA and popB.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub rank: Rank,
    pub addr: Option<Cell>,
    pub queue: Option<Value>,
}

impl Event {
    pub fn new(kind: EventKind, rank: Rank, addr: Option<Cell>, queue: Option<Value>) -> Self {
        Self {
            kind,
            rank,
            addr,
            queue,
        }
    }

    pub fn local(kind: EventKind, rank: Rank) -> Self {
        Self::new(kind, rank, None, None)
    }

    pub fn barrier(rank: Rank) -> Self {
        Self::local(EventKind::Barrier, rank)
    }

    pub fn is_pop(&self) -> bool {
        self.kind.is_pop()
    }
}

pub type Computation = Vec<Event>;

/// Per-event sequence annotation: the index of an issue/popA/popB among
/// the events of the same kind class on its `(rank, queue)`, and the block
/// index of a barrier.
pub fn sequence_numbers(events: &[Event]) -> Vec<Option<u32>> {
    use std::collections::HashMap;
    let mut counters: HashMap<(u8, Rank, Value), u32> = HashMap::new();
    let mut barriers: HashMap<Rank, u32> = HashMap::new();
    events
        .iter()
        .map(|e| {
            let class = match e.kind {
                EventKind::Read | EventKind::Write => 0,
                EventKind::PopA => 1,
                EventKind::PopB => 2,
                EventKind::Barrier => {
                    let c = barriers.entry(e.rank).or_insert(0);
                    *c += 1;
                    return Some(*c - 1);
                }
                _ => return None,
            };
            let c = counters
                .entry((class, e.rank, e.queue.unwrap_or(0)))
                .or_insert(0);
            *c += 1;
            Some(*c - 1)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Request {
    pub src: Cell,
    pub dst: Cell,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transfer {
    pub dst: Cell,
    pub value: Value,
}

/// A configuration `(pc, mem, qA, qB)`. Vectors are indexed by `rank - 1`;
/// each rank's memory holds its registers followed by its addresses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MachineState {
    pub pc: Vec<StateId>,
    pub mem: Vec<Vec<Value>>,
    pub qa: Vec<Vec<VecDeque<Request>>>,
    pub qb: Vec<Vec<VecDeque<Transfer>>>,
}

impl MachineState {
    /// Final iff every queue is empty.
    pub fn is_final(&self) -> bool {
        self.qa.iter().all(|qs| qs.iter().all(VecDeque::is_empty))
            && self.qb.iter().all(|qs| qs.iter().all(VecDeque::is_empty))
    }
}

/// Which rule instance produced a step.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StepRule {
    /// A non-barrier program transition (index into the program's transitions).
    Local {
        rank: Rank,
        transition: usize,
    },
    PopA {
        rank: Rank,
        queue: Value,
    },
    PopB {
        rank: Rank,
        queue: Value,
    },
    /// One barrier transition per rank.
    Barrier {
        transitions: Vec<usize>,
    },
}

#[derive(Clone, Debug)]
pub struct Step {
    pub rule: StepRule,
    pub events: Vec<Event>,
    pub next: MachineState,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("invalid instance: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

/// Expressions with registers resolved to memory slots.
#[derive(Clone, Debug)]
pub(crate) enum CExpr {
    Const(Value),
    Slot(usize),
    MyRank,
    NumProcs,
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
}

#[derive(Clone, Debug)]
pub(crate) enum CCommand {
    Load {
        reg: usize,
        addr: CExpr,
    },
    Store {
        addr: CExpr,
        value: CExpr,
    },
    Assign {
        reg: usize,
        value: CExpr,
    },
    Assume(CExpr),
    Read {
        local: CExpr,
        rank: CExpr,
        remote: CExpr,
        queue: CExpr,
    },
    Write {
        local: CExpr,
        rank: CExpr,
        remote: CExpr,
        queue: CExpr,
    },
    Barrier,
}

/// Outcome of executing one command of one process on a memory snapshot.
#[derive(Clone, Debug)]
pub(crate) enum Effect {
    Local {
        event: Event,
        write: Option<(usize, Value)>,
    },
    Issue {
        event: Event,
        queue: Value,
        request: Request,
    },
    Barrier,
}

/// A validated instance compiled for execution.
#[derive(Clone, Debug)]
pub struct Machine {
    inst: Instance,
    registers: usize,
    commands: Vec<CCommand>,
    // outgoing transition indices per control state
    outgoing: Vec<Vec<usize>>,
}

impl Machine {
    pub fn new(inst: &Instance) -> Result<Machine, SemanticsError> {
        let diags = dsl::validate(inst);
        if !diags.is_empty() {
            return Err(SemanticsError::Invalid(diags));
        }
        let code = &inst.code;
        let slot = |name: &str| {
            code.registers
                .iter()
                .position(|r| r == name)
                .expect("validated register")
        };
        let compile = |e: &Expr| compile_expr(e, &slot);
        let commands = code
            .transitions
            .iter()
            .map(|t| match &t.command {
                Command::Load { reg, addr } => CCommand::Load {
                    reg: slot(reg),
                    addr: compile(addr),
                },
                Command::Store { addr, value } => CCommand::Store {
                    addr: compile(addr),
                    value: compile(value),
                },
                Command::Assign { reg, value } => CCommand::Assign {
                    reg: slot(reg),
                    value: compile(value),
                },
                Command::Assume(e) => CCommand::Assume(compile(e)),
                Command::Read {
                    local,
                    rank,
                    remote,
                    queue,
                } => CCommand::Read {
                    local: compile(local),
                    rank: compile(rank),
                    remote: compile(remote),
                    queue: compile(queue),
                },
                Command::Write {
                    local,
                    rank,
                    remote,
                    queue,
                } => CCommand::Write {
                    local: compile(local),
                    rank: compile(rank),
                    remote: compile(remote),
                    queue: compile(queue),
                },
                Command::Barrier => CCommand::Barrier,
            })
            .collect();
        let mut outgoing = vec![Vec::new(); code.state_count];
        for (i, t) in code.transitions.iter().enumerate() {
            outgoing[t.source].push(i);
        }
        Ok(Machine {
            inst: inst.clone(),
            registers: code.registers.len(),
            commands,
            outgoing,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.inst
    }

    pub fn nodes(&self) -> u32 {
        self.inst.nodes
    }

    pub fn domain(&self) -> u32 {
        self.inst.domain
    }

    pub fn queue_count(&self) -> usize {
        self.inst.queue_count()
    }

    /// Memory slot of address `addr`.
    pub(crate) fn addr_slot(&self, addr: Value) -> usize {
        self.registers + addr as usize
    }

    pub(crate) fn outgoing(&self, state: StateId) -> &[usize] {
        &self.outgoing[state]
    }

    pub(crate) fn target(&self, transition: usize) -> StateId {
        self.inst.code.transitions[transition].target
    }

    pub(crate) fn is_barrier(&self, transition: usize) -> bool {
        matches!(self.commands[transition], CCommand::Barrier)
    }

    pub fn initial_state(&self) -> MachineState {
        let n = self.inst.nodes as usize;
        let q = self.queue_count();
        let slots = self.registers + self.inst.domain as usize;
        MachineState {
            pc: vec![self.inst.code.initial; n],
            mem: vec![vec![0; slots]; n],
            qa: vec![vec![VecDeque::new(); q]; n],
            qb: vec![vec![VecDeque::new(); q]; n],
        }
    }

    fn eval(&self, e: &CExpr, mem: &[Value], rank: Rank) -> Value {
        let d = self.inst.domain;
        match e {
            CExpr::Const(v) => v % d,
            CExpr::Slot(s) => mem[*s],
            CExpr::MyRank => rank % d,
            CExpr::NumProcs => self.inst.nodes % d,
            CExpr::Bin(op, l, r) => op.apply(self.eval(l, mem, rank), self.eval(r, mem, rank), d),
        }
    }

    fn valid_rank(&self, v: Value) -> Option<Rank> {
        (1..=self.inst.nodes).contains(&v).then_some(v)
    }

    /// Executes transition `t` of process `rank` against that process's
    /// memory. `None` if the command is disabled (failing assume, rank
    /// outside `1..=N`).
    pub(crate) fn effect(&self, t: usize, rank: Rank, mem: &[Value]) -> Option<Effect> {
        let ev = |e: &CExpr| self.eval(e, mem, rank);
        Some(match &self.commands[t] {
            CCommand::Load { reg, addr } => {
                let a = ev(addr);
                let v = mem[self.addr_slot(a)];
                Effect::Local {
                    event: Event::new(EventKind::Load, rank, Some(Cell::new(rank, a)), None),
                    write: Some((*reg, v)),
                }
            }
            CCommand::Store { addr, value } => {
                let a = ev(addr);
                Effect::Local {
                    event: Event::new(EventKind::Store, rank, Some(Cell::new(rank, a)), None),
                    write: Some((self.addr_slot(a), ev(value))),
                }
            }
            CCommand::Assign { reg, value } => Effect::Local {
                event: Event::local(EventKind::Assign, rank),
                write: Some((*reg, ev(value))),
            },
            CCommand::Assume(e) => {
                if ev(e) == 0 {
                    return None;
                }
                Effect::Local {
                    event: Event::local(EventKind::Assume, rank),
                    write: None,
                }
            }
            CCommand::Read {
                local,
                rank: rr,
                remote,
                queue,
            } => {
                let other = self.valid_rank(ev(rr))?;
                let q = ev(queue);
                Effect::Issue {
                    event: Event::new(EventKind::Read, rank, None, Some(q)),
                    queue: q,
                    request: Request {
                        src: Cell::new(other, ev(remote)),
                        dst: Cell::new(rank, ev(local)),
                    },
                }
            }
            CCommand::Write {
                local,
                rank: rr,
                remote,
                queue,
            } => {
                let other = self.valid_rank(ev(rr))?;
                let q = ev(queue);
                Effect::Issue {
                    event: Event::new(EventKind::Write, rank, None, Some(q)),
                    queue: q,
                    request: Request {
                        src: Cell::new(rank, ev(local)),
                        dst: Cell::new(other, ev(remote)),
                    },
                }
            }
            CCommand::Barrier => Effect::Barrier,
        })
    }

    pub(crate) fn read_cell(&self, mem: &[Vec<Value>], cell: Cell) -> Value {
        mem[(cell.rank - 1) as usize][self.addr_slot(cell.addr)]
    }

    pub(crate) fn write_cell(&self, mem: &mut [Vec<Value>], cell: Cell, v: Value) {
        let slot = self.addr_slot(cell.addr);
        mem[(cell.rank - 1) as usize][slot] = v;
    }

    /// Barrier transitions available to each rank; empty unless every rank
    /// has at least one.
    pub(crate) fn barrier_choices(&self, pc: &[StateId]) -> Vec<Vec<usize>> {
        let per_rank: Vec<Vec<usize>> = pc
            .iter()
            .map(|&q| {
                self.outgoing[q]
                    .iter()
                    .copied()
                    .filter(|&t| self.is_barrier(t))
                    .collect()
            })
            .collect();
        if per_rank.iter().any(Vec::is_empty) {
            return Vec::new();
        }
        let mut combos = vec![Vec::new()];
        for options in &per_rank {
            combos = combos
                .into_iter()
                .flat_map(|c: Vec<usize>| {
                    options.iter().map(move |&t| {
                        let mut c = c.clone();
                        c.push(t);
                        c
                    })
                })
                .collect();
        }
        combos
    }

    /// All steps enabled in `s`, in a fixed order: local transitions by
    /// rank, then popA and popB by rank and queue, then barriers.
    pub fn enabled_steps(&self, s: &MachineState) -> Vec<Step> {
        let mut out = Vec::new();
        for (ri, &q) in s.pc.iter().enumerate() {
            let rank = ri as Rank + 1;
            for &t in &self.outgoing[q] {
                let Some(effect) = self.effect(t, rank, &s.mem[ri]) else {
                    continue;
                };
                let mut next = s.clone();
                next.pc[ri] = self.target(t);
                let event = match effect {
                    Effect::Barrier => continue,
                    Effect::Local { event, write } => {
                        if let Some((slot, v)) = write {
                            next.mem[ri][slot] = v;
                        }
                        event
                    }
                    Effect::Issue {
                        event,
                        queue,
                        request,
                    } => {
                        next.qa[ri][queue as usize].push_back(request);
                        event
                    }
                };
                out.push(Step {
                    rule: StepRule::Local {
                        rank,
                        transition: t,
                    },
                    events: vec![event],
                    next,
                });
            }
        }
        for ri in 0..s.pc.len() {
            let rank = ri as Rank + 1;
            for (qi, queue) in s.qa[ri].iter().enumerate() {
                if let Some(&req) = queue.front() {
                    let mut next = s.clone();
                    next.qa[ri][qi].pop_front();
                    let value = self.read_cell(&s.mem, req.src);
                    next.qb[ri][qi].push_back(Transfer {
                        dst: req.dst,
                        value,
                    });
                    out.push(Step {
                        rule: StepRule::PopA {
                            rank,
                            queue: qi as Value,
                        },
                        events: vec![Event::new(
                            EventKind::PopA,
                            rank,
                            Some(req.src),
                            Some(qi as Value),
                        )],
                        next,
                    });
                }
            }
            for (qi, queue) in s.qb[ri].iter().enumerate() {
                if let Some(&tr) = queue.front() {
                    let mut next = s.clone();
                    next.qb[ri][qi].pop_front();
                    self.write_cell(&mut next.mem, tr.dst, tr.value);
                    out.push(Step {
                        rule: StepRule::PopB {
                            rank,
                            queue: qi as Value,
                        },
                        events: vec![Event::new(
                            EventKind::PopB,
                            rank,
                            Some(tr.dst),
                            Some(qi as Value),
                        )],
                        next,
                    });
                }
            }
        }
        for combo in self.barrier_choices(&s.pc) {
            let mut next = s.clone();
            for (ri, &t) in combo.iter().enumerate() {
                next.pc[ri] = self.target(t);
            }
            let events = (1..=self.inst.nodes).map(Event::barrier).collect();
            out.push(Step {
                rule: StepRule::Barrier { transitions: combo },
                events,
                next,
            });
        }
        out
    }

    /// Drives the machine by a schedule. A random schedule picks uniformly
    /// among enabled steps for up to `max_steps` steps and then drains the
    /// queues, so its run always ends accepting.
    pub fn run_schedule(&self, schedule: &Schedule) -> Result<Run, ScheduleError> {
        let mut state = self.initial_state();
        let mut computation = Vec::new();
        let mut choices = Vec::new();
        match schedule {
            Schedule::Choices(list) => {
                for (step, &choice) in list.iter().enumerate() {
                    let mut steps = self.enabled_steps(&state);
                    if choice >= steps.len() {
                        return Err(ScheduleError::OutOfRange {
                            step,
                            choice,
                            available: steps.len(),
                            prefix: computation,
                        });
                    }
                    let taken = steps.swap_remove(choice);
                    computation.extend(taken.events);
                    choices.push(choice);
                    state = taken.next;
                }
            }
            Schedule::Random { seed, max_steps } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for _ in 0..*max_steps {
                    let mut steps = self.enabled_steps(&state);
                    if steps.is_empty() {
                        break;
                    }
                    let choice = rng.gen_range(0..steps.len());
                    let taken = steps.swap_remove(choice);
                    computation.extend(taken.events);
                    choices.push(choice);
                    state = taken.next;
                }
                while !state.is_final() {
                    let mut steps = self.enabled_steps(&state);
                    let choice = steps
                        .iter()
                        .position(|s| {
                            matches!(s.rule, StepRule::PopA { .. } | StepRule::PopB { .. })
                        })
                        .expect("a pop is enabled while queues are non-empty");
                    let taken = steps.swap_remove(choice);
                    computation.extend(taken.events);
                    choices.push(choice);
                    state = taken.next;
                }
            }
        }
        Ok(Run {
            accepting: state.is_final(),
            computation,
            choices,
            state,
        })
    }
}

fn compile_expr(e: &Expr, slot: &impl Fn(&str) -> usize) -> CExpr {
    match e {
        Expr::Const(v) => CExpr::Const(*v),
        Expr::Reg(r) => CExpr::Slot(slot(r)),
        Expr::MyRank => CExpr::MyRank,
        Expr::NumProcs => CExpr::NumProcs,
        Expr::Bin(op, l, r) => CExpr::Bin(
            *op,
            Box::new(compile_expr(l, slot)),
            Box::new(compile_expr(r, slot)),
        ),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schedule {
    /// Index into [`Machine::enabled_steps`] at every step.
    Choices(Vec<usize>),
    Random {
        seed: u64,
        max_steps: usize,
    },
}

#[derive(Clone, Debug)]
pub struct Run {
    pub computation: Computation,
    pub accepting: bool,
    pub choices: Vec<usize>,
    pub state: MachineState,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("step {step}: choice {choice} out of range, {available} steps enabled")]
    OutOfRange {
        step: usize,
        choice: usize,
        available: usize,
        prefix: Computation,
    },
}
