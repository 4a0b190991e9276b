use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::{Computation, Event, Machine, MachineState};

/// The exploration visited more nodes than allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("state cap of {cap} exceeded")]
pub struct Exhausted {
    pub cap: usize,
}

/// Visitor answer for one explored prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Visit {
    Continue,
    /// Do not extend this prefix.
    Prune,
    Stop,
}

impl Machine {
    /// Depth-first walk over the distinct event sequences of length at most
    /// `max_len` that the machine can produce. Each prefix is visited once,
    /// together with whether some run producing it ends in a final state.
    ///
    /// Sequences are visited in lexicographic order of the first schedule
    /// (list of step-choice indices) that produces them.
    pub fn explore<F>(
        &self,
        max_len: usize,
        cap: Option<usize>,
        mut visit: F,
    ) -> Result<(), Exhausted>
    where
        F: FnMut(&[Event], bool) -> Visit,
    {
        let mut prefix = Vec::new();
        let mut count = 0usize;
        let roots = vec![self.initial_state()];
        self.explore_node(&roots, &mut prefix, max_len, cap, &mut count, &mut visit)
            .map(|_| ())
    }

    fn explore_node<F>(
        &self,
        states: &[MachineState],
        prefix: &mut Vec<Event>,
        max_len: usize,
        cap: Option<usize>,
        count: &mut usize,
        visit: &mut F,
    ) -> Result<bool, Exhausted>
    where
        F: FnMut(&[Event], bool) -> Visit,
    {
        *count += 1;
        if let Some(cap) = cap {
            if *count > cap {
                return Err(Exhausted { cap });
            }
        }
        let accepted = states.iter().any(MachineState::is_final);
        match visit(prefix, accepted) {
            Visit::Stop => return Ok(true),
            Visit::Prune => return Ok(false),
            Visit::Continue => {}
        }
        for (events, next) in self.grouped_successors(states) {
            if prefix.len() + events.len() > max_len {
                continue;
            }
            let depth = prefix.len();
            prefix.extend_from_slice(&events);
            let stop = self.explore_node(&next, prefix, max_len, cap, count, visit)?;
            prefix.truncate(depth);
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Like [`Machine::explore`], but visits one member of each class of
    /// sequences equal up to swapping adjacent independent blocks (sleep
    /// sets). Such swaps preserve the happens-before relation and the
    /// reached states, and the member visited is the first in step-choice
    /// order.
    pub fn explore_traces<F>(
        &self,
        max_len: usize,
        cap: Option<usize>,
        mut visit: F,
    ) -> Result<(), Exhausted>
    where
        F: FnMut(&[Event], bool) -> Visit,
    {
        let mut prefix = Vec::new();
        let mut count = 0usize;
        let roots = vec![self.initial_state()];
        self.trace_node(
            &roots,
            &[],
            &mut prefix,
            max_len,
            cap,
            &mut count,
            &mut visit,
        )
        .map(|_| ())
    }

    #[allow(clippy::too_many_arguments)]
    fn trace_node<F>(
        &self,
        states: &[MachineState],
        sleep: &[Vec<Event>],
        prefix: &mut Vec<Event>,
        max_len: usize,
        cap: Option<usize>,
        count: &mut usize,
        visit: &mut F,
    ) -> Result<bool, Exhausted>
    where
        F: FnMut(&[Event], bool) -> Visit,
    {
        *count += 1;
        if let Some(cap) = cap {
            if *count > cap {
                return Err(Exhausted { cap });
            }
        }
        let accepted = states.iter().any(MachineState::is_final);
        match visit(prefix, accepted) {
            Visit::Stop => return Ok(true),
            Visit::Prune => return Ok(false),
            Visit::Continue => {}
        }
        let mut done: Vec<Vec<Event>> = Vec::new();
        for (events, next) in self.grouped_successors(states) {
            if prefix.len() + events.len() > max_len || sleep.contains(&events) {
                continue;
            }
            let child: Vec<Vec<Event>> = sleep
                .iter()
                .chain(&done)
                .filter(|b| independent(b, &events))
                .cloned()
                .collect();
            let depth = prefix.len();
            prefix.extend_from_slice(&events);
            let stop = self.trace_node(&next, &child, prefix, max_len, cap, count, visit)?;
            prefix.truncate(depth);
            if stop {
                return Ok(true);
            }
            done.push(events);
        }
        Ok(false)
    }

    /// Successors of a set of states grouped by emitted events, ordered by
    /// first occurrence. Within a group states keep discovery order.
    fn grouped_successors(&self, states: &[MachineState]) -> Vec<(Vec<Event>, Vec<MachineState>)> {
        let mut groups: Vec<(Vec<Event>, Vec<MachineState>, HashSet<MachineState>)> = Vec::new();
        let mut index: HashMap<Vec<Event>, usize> = HashMap::new();
        for s in states {
            for step in self.enabled_steps(s) {
                let i = *index.entry(step.events.clone()).or_insert_with(|| {
                    groups.push((step.events.clone(), Vec::new(), HashSet::new()));
                    groups.len() - 1
                });
                let g = &mut groups[i];
                if g.2.insert(step.next.clone()) {
                    g.1.push(step.next);
                }
            }
        }
        groups.into_iter().map(|(e, s, _)| (e, s)).collect()
    }

    /// Accepted computations of length at most `max_len`, without
    /// duplicates, in lexicographic order of their first schedule.
    pub fn enumerate_computations(&self, max_len: usize) -> Vec<Computation> {
        let mut out = Vec::new();
        self.explore(max_len, None, |prefix, accepted| {
            if accepted {
                out.push(prefix.to_vec());
            }
            Visit::Continue
        })
        .expect("no cap");
        out
    }

    /// States reachable by producing exactly `events` from the initial state.
    pub fn replay(&self, events: &[Event]) -> Vec<MachineState> {
        let mut states = vec![self.initial_state()];
        let mut pos = 0;
        while pos < events.len() && !states.is_empty() {
            let mut next = Vec::new();
            let mut seen = HashSet::new();
            let mut advance = None;
            for s in &states {
                for step in self.enabled_steps(s) {
                    let n = step.events.len();
                    if events[pos..].starts_with(&step.events) {
                        // all steps that match at this position emit the same
                        // number of events: a block is either one event or a
                        // whole barrier round
                        advance = Some(n);
                        if seen.insert(step.next.clone()) {
                            next.push(step.next);
                        }
                    }
                }
            }
            states = next;
            match advance {
                Some(n) => pos += n,
                None => return Vec::new(),
            }
        }
        states
    }

    /// Whether `events` is an accepted computation.
    pub fn accepts(&self, events: &[Event]) -> bool {
        self.replay(events).iter().any(MachineState::is_final)
    }
}

/// Blocks that commute: no two events of the same rank in program order,
/// none on the same queue, no conflicting accesses.
pub fn independent(a: &[Event], b: &[Event]) -> bool {
    a.iter().all(|e| {
        b.iter().all(|f| {
            let po = e.rank == f.rank && !e.is_pop() && !f.is_pop();
            let queue = e.rank == f.rank && e.queue.is_some() && e.queue == f.queue;
            let cf =
                e.addr.is_some() && e.addr == f.addr && (e.kind.is_write() || f.kind.is_write());
            !(po || queue || cf)
        })
    })
}

#[cfg(test)]
mod tests {
    use crate::corpus;
    use crate::dsl::{parse_program, Instance};
    use crate::semantics::{Event, EventKind, Machine};

    fn machine(src: &str, n: u32) -> Machine {
        Machine::new(&Instance::with_default_domain(
            parse_program(src).unwrap(),
            n,
        ))
        .unwrap()
    }

    #[test]
    fn onetoone_has_nothing_accepted_at_length_two_but_the_empty_word() {
        let m = machine(corpus::ONETOONE, 2);
        let all = m.enumerate_computations(2);
        // stores only: prefixes of length <= 2 with empty queues
        assert!(all
            .iter()
            .all(|c| c.iter().all(|e| e.kind == EventKind::Store)));
        assert!(all.contains(&vec![]));
    }

    #[test]
    fn empty_program_only_has_the_empty_computation() {
        let m = machine(corpus::EMPTY, 2);
        assert_eq!(m.enumerate_computations(5), vec![Vec::<Event>::new()]);
    }

    #[test]
    fn enumeration_has_no_duplicates_and_replays() {
        let m = machine(corpus::ONETOONE_BARE, 2);
        let all = m.enumerate_computations(8);
        let set: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(set.len(), all.len());
        for c in &all {
            assert!(m.accepts(c));
        }
    }
}
