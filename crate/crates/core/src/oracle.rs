//! Bounded brute force: enumerate accepted computations up to a length and
//! look for a happens-before cycle. Ground truth for the decision procedure
//! on small programs; never a proof of robustness for programs with loops.

use serde::{Deserialize, Serialize};

use crate::dsl::Instance;
use crate::robustness::VerdictJson;
use crate::semantics::{
    computation_to_json, independent, Computation, Event, EventKind, Exhausted, Machine,
    SemanticsError, Visit,
};
use crate::traces::{extract_cyc_cycle, happens_before, normal_form_cuts, CycCycle};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleVerdict {
    ViolationFound {
        computation: Computation,
        hb_cycle: CycCycle,
    },
    NoViolationWithin {
        bound: usize,
    },
    Exhausted {
        cap: usize,
    },
}

impl OracleVerdict {
    pub fn is_violation(&self) -> bool {
        matches!(self, OracleVerdict::ViolationFound { .. })
    }

    pub fn to_json(&self) -> VerdictJson {
        let mut j = VerdictJson {
            verdict: String::new(),
            cycle_type: None,
            computation: None,
            hb_cycle: None,
            bound: None,
        };
        match self {
            OracleVerdict::ViolationFound {
                computation,
                hb_cycle,
            } => {
                j.verdict = "violation_found".into();
                j.cycle_type = Some(hb_cycle.ranks());
                j.computation = Some(computation_to_json(computation));
                j.hb_cycle = Some(hb_cycle.segments.clone());
            }
            OracleVerdict::NoViolationWithin { bound } => {
                j.verdict = "no_violation_within".into();
                j.bound = Some(*bound);
            }
            OracleVerdict::Exhausted { cap } => {
                j.verdict = "exhausted".into();
                j.bound = Some(*cap);
            }
        }
        j
    }
}

/// Shortest violating accepted computation of length at most `bound`.
/// Among equally short ones, the first in step-choice order.
pub fn oracle_check(
    inst: &Instance,
    bound: usize,
    cap: Option<usize>,
) -> Result<OracleVerdict, SemanticsError> {
    run(inst, bound, cap, false)
}

/// Like [`oracle_check`], but only computations that can be cut into
/// normal form count.
pub fn oracle_normal_form_check(
    inst: &Instance,
    bound: usize,
    cap: Option<usize>,
) -> Result<OracleVerdict, SemanticsError> {
    run(inst, bound, cap, true)
}

fn run(
    inst: &Instance,
    bound: usize,
    cap: Option<usize>,
    normal_form: bool,
) -> Result<OracleVerdict, SemanticsError> {
    let machine = Machine::new(inst)?;
    let mut best: Option<(Computation, CycCycle)> = None;
    let mut exhausted = None;
    let walk = machine.explore_traces(bound, cap, |prefix, accepted| {
        if best.as_ref().is_some_and(|(b, _)| prefix.len() >= b.len()) {
            return Visit::Prune;
        }
        if !accepted {
            return Visit::Continue;
        }
        let Some(cycle) = violation(prefix) else {
            return Visit::Continue;
        };
        if !normal_form {
            best = Some((prefix.to_vec(), cycle));
            return Visit::Prune;
        }
        // the walk visits one order per class of commuting reorderings,
        // and being in normal form depends on the order
        match normal_form_member(&machine, prefix, cap) {
            Ok(Some(c)) => {
                let cycle = extract_cyc_cycle(&c)
                    .ok()
                    .flatten()
                    .expect("reordering keeps the cycle");
                best = Some((c, cycle));
                Visit::Prune
            }
            Ok(None) => Visit::Continue,
            Err(e) => {
                exhausted = Some(e);
                Visit::Stop
            }
        }
    });
    match walk.err().or(exhausted) {
        Some(Exhausted { cap }) => Ok(OracleVerdict::Exhausted { cap }),
        None => Ok(match best {
            Some((computation, hb_cycle)) => OracleVerdict::ViolationFound {
                computation,
                hb_cycle,
            },
            None => OracleVerdict::NoViolationWithin { bound },
        }),
    }
}

fn violation(events: &[Event]) -> Option<CycCycle> {
    // accepted computations always have matched pops
    let hb = happens_before(events).ok()?;
    if !hb.is_violating() {
        return None;
    }
    extract_cyc_cycle(events).ok().flatten()
}

/// A reordering of `events` by commuting independent steps that is in
/// normal form. Tries at most `cap` complete orders.
fn normal_form_member(
    m: &Machine,
    events: &[Event],
    cap: Option<usize>,
) -> Result<Option<Computation>, Exhausted> {
    // barrier blocks move as one step
    let mut steps: Vec<&[Event]> = Vec::new();
    let mut i = 0;
    while i < events.len() {
        let n = if events[i].kind == EventKind::Barrier {
            m.nodes() as usize
        } else {
            1
        };
        steps.push(&events[i..(i + n).min(events.len())]);
        i += n;
    }
    let before: Vec<Vec<usize>> = (0..steps.len())
        .map(|j| {
            (0..j)
                .filter(|&i| !independent(steps[i], steps[j]))
                .collect()
        })
        .collect();
    let mut search = Linearize {
        steps: &steps,
        before: &before,
        placed: vec![false; steps.len()],
        order: Vec::new(),
        tried: 0,
        cap,
    };
    search.next(m)
}

struct Linearize<'a> {
    steps: &'a [&'a [Event]],
    before: &'a [Vec<usize>],
    placed: Vec<bool>,
    order: Vec<Event>,
    tried: usize,
    cap: Option<usize>,
}

impl Linearize<'_> {
    fn next(&mut self, m: &Machine) -> Result<Option<Computation>, Exhausted> {
        if self.placed.iter().all(|&p| p) {
            self.tried += 1;
            if let Some(cap) = self.cap.filter(|&c| self.tried > c) {
                return Err(Exhausted { cap });
            }
            let ok =
                normal_form_cuts(&self.order).ok().flatten().is_some() && m.accepts(&self.order);
            return Ok(ok.then(|| self.order.clone()));
        }
        let mut tried_here: Vec<&[Event]> = Vec::new();
        for j in 0..self.steps.len() {
            let step = self.steps[j];
            if self.placed[j]
                || !self.before[j].iter().all(|&i| self.placed[i])
                || tried_here.contains(&step)
            {
                continue;
            }
            tried_here.push(step);
            self.placed[j] = true;
            let depth = self.order.len();
            self.order.extend_from_slice(step);
            let found = self.next(m)?;
            self.order.truncate(depth);
            self.placed[j] = false;
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}
