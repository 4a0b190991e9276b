//! Random small programs and the semantic property checks run over them.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use pgasrob::dsl::{BinOp, Command, Expr, Instance, ProgramCode, Span, Transition};
use pgasrob::semantics::{Computation, EventKind, Machine, MachineState, StepRule, Transfer};
use pgasrob::traces::cancel_last;

const REG: &str = "r";

fn value(rng: &mut ChaCha8Rng, domain: u32) -> Expr {
    Expr::Const(rng.gen_range(0..domain) as _)
}

fn command(rng: &mut ChaCha8Rng, domain: u32) -> Command {
    let target = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.5) {
            Expr::Const(1)
        } else {
            Expr::MyRank
        }
    };
    match rng.gen_range(0..12) {
        0 | 1 => Command::Load {
            reg: REG.into(),
            addr: value(rng, domain),
        },
        2 | 3 => {
            let v = if rng.gen_bool(0.3) {
                Expr::Reg(REG.into())
            } else {
                value(rng, domain)
            };
            Command::Store {
                addr: value(rng, domain),
                value: v,
            }
        }
        4 => Command::Assign {
            reg: REG.into(),
            value: value(rng, domain),
        },
        5 => Command::Assume(Expr::bin(
            BinOp::Eq,
            Expr::Reg(REG.into()),
            value(rng, domain),
        )),
        6..=7 => Command::Read {
            local: value(rng, domain),
            rank: target(rng),
            remote: value(rng, domain),
            queue: value(rng, domain),
        },
        8..=10 => Command::Write {
            local: value(rng, domain),
            rank: target(rng),
            remote: value(rng, domain),
            queue: value(rng, domain),
        },
        _ => Command::Barrier,
    }
}

/// At most `max_states` control states, `max_transitions` transitions and
/// two transitions out of each state, over one register. Remote targets
/// are `1` or `myrank`: with a domain of 2 no other rank is expressible.
pub fn random_program(
    rng: &mut ChaCha8Rng,
    max_states: usize,
    max_transitions: usize,
    domain: u32,
) -> ProgramCode {
    let state_count = rng.gen_range(1..=max_states);
    let count = rng.gen_range(1..=max_transitions.min(2 * state_count));
    let mut out_degree = vec![0; state_count];
    let mut transitions = Vec::new();
    while transitions.len() < count {
        let source = rng.gen_range(0..state_count);
        if out_degree[source] == 2 {
            continue;
        }
        out_degree[source] += 1;
        transitions.push(Transition {
            source,
            command: command(rng, domain),
            target: rng.gen_range(0..state_count),
            span: Span::default(),
        });
    }
    ProgramCode {
        state_count,
        initial: 0,
        transitions,
        registers: vec![REG.into()],
    }
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let nodes = if rng.gen_bool(0.8) { 2 } else { 1 };
    Instance::new(random_program(rng, 4, 5, 2), nodes, 2)
}

/// Walks every reachable state up to `depth` steps and checks that each
/// step moves the queues first in, first out. Returns the first problem.
pub fn fifo_violation(m: &Machine, depth: usize) -> Option<String> {
    let mut seen = std::collections::HashSet::new();
    let mut frontier = vec![m.initial_state()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for s in &frontier {
            for step in m.enabled_steps(s) {
                if let Some(p) = fifo_step(m, s, &step.rule, &step.next, &step.events) {
                    return Some(p);
                }
                if seen.insert(step.next.clone()) {
                    next.push(step.next);
                }
            }
        }
        frontier = next;
    }
    None
}

fn fifo_step(
    m: &Machine,
    s: &MachineState,
    rule: &StepRule,
    t: &MachineState,
    events: &[pgasrob::Event],
) -> Option<String> {
    let e = events[0];
    let (ri, qi) = match (rule, e.queue) {
        (_, Some(q)) => (e.rank as usize - 1, q as usize),
        _ => return None,
    };
    let (qa, qb, na, nb) = (&s.qa[ri][qi], &s.qb[ri][qi], &t.qa[ri][qi], &t.qb[ri][qi]);
    let ok = match e.kind {
        EventKind::Read | EventKind::Write => {
            na.len() == qa.len() + 1 && na.iter().zip(qa).all(|(a, b)| a == b) && nb == qb
        }
        EventKind::PopA => {
            let front = *qa.front()?;
            let value = s.mem[front.src.rank as usize - 1]
                [m.instance().code.registers.len() + front.src.addr as usize];
            e.addr == Some(front.src)
                && na.iter().eq(qa.iter().skip(1))
                && nb.len() == qb.len() + 1
                && nb.back()
                    == Some(&Transfer {
                        dst: front.dst,
                        value,
                    })
        }
        EventKind::PopB => {
            let front = *qb.front()?;
            let slot = m.instance().code.registers.len() + front.dst.addr as usize;
            e.addr == Some(front.dst)
                && nb.iter().eq(qb.iter().skip(1))
                && na == qa
                && t.mem[front.dst.rank as usize - 1][slot] == front.value
        }
        _ => true,
    };
    (!ok).then(|| format!("{:?} broke queue order", e))
}

/// From every state reachable in `depth` steps, pops alone reach a final
/// state.
pub fn closure_violation(m: &Machine, depth: usize) -> Option<String> {
    let mut seen = std::collections::HashSet::new();
    let mut frontier = vec![m.initial_state()];
    for _ in 0..=depth {
        let mut next = Vec::new();
        for s in &frontier {
            let mut cur = s.clone();
            let pending: usize = cur.qa.iter().flatten().map(|q| 2 * q.len()).sum::<usize>()
                + cur.qb.iter().flatten().map(|q| q.len()).sum::<usize>();
            for _ in 0..pending {
                if cur.is_final() {
                    break;
                }
                match m
                    .enabled_steps(&cur)
                    .into_iter()
                    .find(|st| matches!(st.rule, StepRule::PopA { .. } | StepRule::PopB { .. }))
                {
                    Some(st) => cur = st.next,
                    None => break,
                }
            }
            if !cur.is_final() {
                return Some(format!("queues of {s:?} cannot be emptied"));
            }
            for step in m.enabled_steps(s) {
                if seen.insert(step.next.clone()) {
                    next.push(step.next);
                }
            }
        }
        frontier = next;
    }
    None
}

/// Every accepted computation: pops never outrun their issues per queue,
/// and removing the last non-pop event with its identity class leaves an
/// accepted computation.
pub fn computation_violation(m: &Machine, comps: &[Computation]) -> Option<String> {
    for c in comps {
        let mut counts = std::collections::HashMap::new();
        for e in c {
            if let Some(q) = e.queue {
                let n = counts.entry((e.rank, q)).or_insert([0usize; 3]);
                match e.kind {
                    EventKind::PopA => n[1] += 1,
                    EventKind::PopB => n[2] += 1,
                    _ => n[0] += 1,
                }
                if n[2] > n[1] || n[1] > n[0] {
                    return Some(format!("pop before its issue in {c:?}"));
                }
            }
        }
        if counts.values().any(|n| n[0] != n[2]) {
            return Some(format!("accepted with pending requests: {c:?}"));
        }
        if !c.is_empty() {
            match cancel_last(c) {
                Ok(Some(shorter)) if m.accepts(&shorter) => {}
                other => return Some(format!("cancellation failed on {c:?}: {other:?}")),
            }
        }
    }
    None
}
