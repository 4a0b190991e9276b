//! The 4-headed automaton generating normal-form computations, and its
//! extension that marks where a cycle enters and leaves each process.

use serde::{Deserialize, Serialize};

use crate::dsl::{Instance, StateId, Value};
use crate::mha::{Label, LazyMha};
use crate::semantics::{Effect, Event, EventKind, Machine, Rank, SemanticsError};

/// Number of parts a normal-form computation is cut into.
pub const PARTS: u8 = 4;

/// How the part counters of a queue are advanced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuessMode {
    /// Separate ε-moves increment the counters of any queue at any time.
    Literal,
    /// Counters move only when a command issues into the queue, to the
    /// parts that command's pops are emitted to. Same language, no
    /// branching on queues that are never used.
    #[default]
    AtIssue,
}

/// `(pc, mem, pA, pB)` plus the emissions still owed by the rule being
/// applied. States with owed emissions are the auxiliary ones.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WsState {
    pub pc: Vec<StateId>,
    pub mem: Vec<Vec<Value>>,
    pub pa: Vec<Vec<u8>>,
    pub pb: Vec<Vec<u8>>,
    pub pending: Vec<(u8, Event)>,
}

impl WsState {
    pub fn is_aux(&self) -> bool {
        !self.pending.is_empty()
    }
}

/// `W(P, N)`, explored on the fly.
#[derive(Clone, Debug)]
pub struct WsAutomaton {
    machine: Machine,
    mode: GuessMode,
}

pub fn build_ws_language(inst: &Instance, mode: GuessMode) -> Result<WsAutomaton, SemanticsError> {
    Ok(WsAutomaton {
        machine: Machine::new(inst)?,
        mode,
    })
}

impl WsAutomaton {
    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    pub fn initial_state(&self) -> WsState {
        let s = self.machine.initial_state();
        let n = s.pc.len();
        let q = self.machine.queue_count();
        WsState {
            pc: s.pc,
            mem: s.mem,
            pa: vec![vec![1; q]; n],
            pb: vec![vec![1; q]; n],
            pending: Vec::new(),
        }
    }

    /// Successors of a state: the next owed emission for auxiliary states,
    /// otherwise one entry per rule instance.
    pub fn ws_step(&self, s: &WsState) -> Vec<(Label<Event>, WsState)> {
        if let Some(&(head, e)) = s.pending.first() {
            let mut next = s.clone();
            next.pending.remove(0);
            return vec![(Label::Read(head as usize, e), next)];
        }
        let m = &self.machine;
        let mut out = Vec::new();
        if self.mode == GuessMode::Literal {
            for (ri, qs) in s.pa.iter().enumerate() {
                for qi in 0..qs.len() {
                    if s.pa[ri][qi] < s.pb[ri][qi] {
                        let mut next = s.clone();
                        next.pa[ri][qi] += 1;
                        out.push((Label::Eps, next));
                    }
                    if s.pb[ri][qi] < PARTS {
                        let mut next = s.clone();
                        next.pb[ri][qi] += 1;
                        out.push((Label::Eps, next));
                    }
                }
            }
        }
        for (ri, &q) in s.pc.iter().enumerate() {
            let rank = ri as Rank + 1;
            for &t in m.outgoing(q) {
                let Some(effect) = m.effect(t, rank, &s.mem[ri]) else {
                    continue;
                };
                match effect {
                    Effect::Barrier => {}
                    Effect::Local { event, write } => {
                        let mut next = s.clone();
                        next.pc[ri] = m.target(t);
                        if let Some((slot, v)) = write {
                            next.mem[ri][slot] = v;
                        }
                        out.push((Label::Read(1, event), next));
                    }
                    Effect::Issue {
                        event,
                        queue,
                        request,
                    } => {
                        let qi = queue as usize;
                        let parts: Vec<(u8, u8)> = match self.mode {
                            GuessMode::Literal => vec![(s.pa[ri][qi], s.pb[ri][qi])],
                            GuessMode::AtIssue => {
                                let (pa, pb) = (s.pa[ri][qi], s.pb[ri][qi]);
                                (pb..=PARTS)
                                    .flat_map(|n| (pa..=n).map(move |a| (a, n)))
                                    .collect()
                            }
                        };
                        for (pa, pb) in parts {
                            let mut next = s.clone();
                            next.pc[ri] = m.target(t);
                            next.pa[ri][qi] = pa;
                            next.pb[ri][qi] = pb;
                            if pb == 1 {
                                let v = m.read_cell(&s.mem, request.src);
                                m.write_cell(&mut next.mem, request.dst, v);
                            }
                            next.pending = vec![
                                (
                                    pa,
                                    Event::new(
                                        EventKind::PopA,
                                        rank,
                                        Some(request.src),
                                        Some(queue),
                                    ),
                                ),
                                (
                                    pb,
                                    Event::new(
                                        EventKind::PopB,
                                        rank,
                                        Some(request.dst),
                                        Some(queue),
                                    ),
                                ),
                            ];
                            out.push((Label::Read(1, event), next));
                        }
                    }
                }
            }
        }
        for combo in m.barrier_choices(&s.pc) {
            let mut next = s.clone();
            for (ri, &t) in combo.iter().enumerate() {
                next.pc[ri] = m.target(t);
            }
            next.pending = (2..=m.nodes()).map(|r| (1, Event::barrier(r))).collect();
            out.push((Label::Read(1, Event::barrier(1)), next));
        }
        out
    }
}

impl LazyMha for WsAutomaton {
    type State = WsState;
    type Letter = Event;

    fn heads(&self) -> usize {
        PARTS as usize
    }
    fn initial_states(&self) -> Vec<WsState> {
        vec![self.initial_state()]
    }
    fn is_final(&self, s: &WsState) -> bool {
        !s.is_aux()
    }
    fn successors(&self, s: &WsState) -> Vec<(Label<Event>, WsState)> {
        self.ws_step(s)
    }
}

/// An event with its cycle markings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Marked {
    pub event: Event,
    pub enter: bool,
    pub leave: bool,
}

impl Marked {
    pub fn plain(event: Event) -> Self {
        Marked {
            event,
            enter: false,
            leave: false,
        }
    }
}

/// Per-rank guess status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mu {
    Unset,
    Entered,
    Left,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MarkedState {
    pub ws: WsState,
    pub mu: Vec<Mu>,
    /// The previous letter was a popA marked `leave` whose popB must be
    /// marked `enter`.
    pub owe_enter: bool,
    /// Some mark is not a barrier both entered and left. Otherwise the
    /// marks could only describe a cycle of same-round barriers.
    pub strict: bool,
}

/// `W'(P, N)`: like [`WsAutomaton`], with each emitted event additionally
/// marked. Only ranks in `markable` are ever marked.
#[derive(Clone, Debug)]
pub struct MarkedAutomaton {
    ws: WsAutomaton,
    markable: Vec<bool>,
}

pub fn build_marked_language(
    inst: &Instance,
    mode: GuessMode,
) -> Result<MarkedAutomaton, SemanticsError> {
    let ws = build_ws_language(inst, mode)?;
    let n = ws.machine.nodes() as usize;
    Ok(MarkedAutomaton {
        ws,
        markable: vec![true; n],
    })
}

impl MarkedAutomaton {
    /// Restricts marking to the given ranks. The hb automata of a cycle
    /// type ignore marks on other ranks, so this does not change which
    /// computations are found.
    pub fn restricted_to(mut self, ranks: &[Rank]) -> Self {
        for (i, m) in self.markable.iter_mut().enumerate() {
            *m = ranks.contains(&(i as Rank + 1));
        }
        self
    }

    pub fn ws(&self) -> &WsAutomaton {
        &self.ws
    }
}

impl LazyMha for MarkedAutomaton {
    type State = MarkedState;
    type Letter = Marked;

    fn heads(&self) -> usize {
        PARTS as usize
    }

    fn initial_states(&self) -> Vec<MarkedState> {
        let n = self.markable.len();
        vec![MarkedState {
            ws: self.ws.initial_state(),
            mu: vec![Mu::Unset; n],
            owe_enter: false,
            strict: false,
        }]
    }

    fn is_final(&self, s: &MarkedState) -> bool {
        s.strict && !s.ws.is_aux() && !s.owe_enter && s.mu.iter().all(|&m| m != Mu::Entered)
    }

    fn successors(&self, s: &MarkedState) -> Vec<(Label<Marked>, MarkedState)> {
        let mut out = Vec::new();
        for (l, ws) in self.ws.ws_step(&s.ws) {
            let (head, e) = match l {
                Label::Eps => {
                    out.push((
                        Label::Eps,
                        MarkedState {
                            ws,
                            mu: s.mu.clone(),
                            owe_enter: s.owe_enter,
                            strict: s.strict,
                        },
                    ));
                    continue;
                }
                Label::Read(h, e) => (h, e),
            };
            let ri = e.rank as usize - 1;
            let mut push = |enter: bool, leave: bool, mu: Mu, owe_enter: bool| {
                let mut m = s.mu.clone();
                m[ri] = mu;
                let strict = s.strict
                    || ((enter || leave) && !(enter && leave && e.kind == EventKind::Barrier));
                out.push((
                    Label::Read(
                        head,
                        Marked {
                            event: e,
                            enter,
                            leave,
                        },
                    ),
                    MarkedState {
                        ws: ws.clone(),
                        mu: m,
                        owe_enter,
                        strict,
                    },
                ));
            };
            if s.owe_enter {
                // second half of a popA/popB pair
                push(true, false, s.mu[ri], false);
                continue;
            }
            push(false, false, s.mu[ri], false);
            if !self.markable[ri] {
                continue;
            }
            let addressed = e.addr.is_some() || e.kind == EventKind::Barrier;
            match s.mu[ri] {
                Mu::Unset => {
                    if addressed {
                        push(true, false, Mu::Entered, false);
                        push(true, true, Mu::Left, false);
                    }
                    if e.kind == EventKind::PopA {
                        push(false, true, Mu::Left, true);
                    }
                }
                Mu::Entered if addressed => push(false, true, Mu::Left, false),
                _ => {}
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::dsl::parse_program;
    use crate::mha::{accepts, words_up_to};
    use crate::semantics::Cell;

    fn inst(src: &str, n: u32) -> Instance {
        Instance::with_default_domain(parse_program(src).unwrap(), n)
    }

    fn w(rank: Rank) -> Event {
        Event::new(EventKind::Write, rank, None, Some(0))
    }
    fn pop(kind: EventKind, rank: Rank, cell: (Rank, Value)) -> Event {
        Event::new(kind, rank, Some(Cell::new(cell.0, cell.1)), Some(0))
    }

    fn tau_nf() -> Vec<Event> {
        vec![
            w(1),
            pop(EventKind::PopA, 1, (1, 0)),
            w(2),
            pop(EventKind::PopA, 2, (2, 0)),
            Event::barrier(1),
            Event::barrier(2),
            Event::new(EventKind::Load, 1, Some(Cell::new(1, 1)), None),
            pop(EventKind::PopB, 1, (2, 1)),
            pop(EventKind::PopB, 2, (1, 1)),
        ]
    }

    fn tau() -> Vec<Event> {
        let t = tau_nf();
        vec![t[0], t[2], t[3], t[1], t[4], t[5], t[6], t[8], t[7]]
    }

    #[test]
    fn write_rule_emits_to_guessed_parts() {
        let a = build_ws_language(&inst(corpus::ONETOONE, 2), GuessMode::AtIssue).unwrap();
        let mut s = a.initial_state();
        // both stores of rank 1
        for _ in 0..2 {
            let (_, next) = a
                .ws_step(&s)
                .into_iter()
                .find(|(l, _)| matches!(l, Label::Read(1, e) if e.rank == 1))
                .unwrap();
            s = next;
        }
        let issues: Vec<_> = a
            .ws_step(&s)
            .into_iter()
            .filter(|(l, _)| matches!(l, Label::Read(1, e) if e.kind == EventKind::Write))
            .collect();
        assert_eq!(issues.len(), 10);
        let (_, aux) = issues
            .iter()
            .find(|(_, n)| n.pa[0][0] == 2 && n.pb[0][0] == 4)
            .unwrap();
        assert_eq!(
            aux.pending.iter().map(|p| p.0).collect::<Vec<_>>(),
            vec![2, 4]
        );
        let (l1, aux2) = a.ws_step(aux).remove(0);
        assert_eq!(l1, Label::Read(2, pop(EventKind::PopA, 1, (1, 0))));
        let (l2, done) = a.ws_step(&aux2).remove(0);
        assert_eq!(l2, Label::Read(4, pop(EventKind::PopB, 1, (2, 1))));
        assert!(!done.is_aux());
    }

    #[test]
    fn literal_guesses_respect_preconditions() {
        let a = build_ws_language(&inst(corpus::ONETOONE, 2), GuessMode::Literal).unwrap();
        let s = a.initial_state();
        let eps: Vec<_> = a
            .ws_step(&s)
            .into_iter()
            .filter(|(l, _)| *l == Label::Eps)
            .collect();
        // pA = pB: only the pB counters can move, one per rank and queue
        assert_eq!(eps.len(), 2 * 3);
        assert!(eps.iter().all(|(_, n)| n.pa == s.pa));
    }

    #[test]
    fn read_to_part_one_updates_memory() {
        let src = "regs r; mem[0] := 1; read(1, myrank, 0, 0); r := mem[1]; assume(r == 1);";
        let a = build_ws_language(&inst(src, 1), GuessMode::AtIssue).unwrap();
        let words = words_up_to(&a, 6);
        assert!(words.iter().any(|w| w.len() == 5));
    }

    #[test]
    fn onetoone_normal_form_only() {
        let i = inst(corpus::ONETOONE_BARE, 2);
        let a = build_ws_language(&i, GuessMode::AtIssue).unwrap();
        assert!(accepts(&a, &tau_nf()));
        assert!(!accepts(&a, &tau()));
        let empty = build_ws_language(&inst(corpus::EMPTY, 2), GuessMode::AtIssue).unwrap();
        assert_eq!(
            words_up_to(&empty, 4).into_iter().collect::<Vec<_>>(),
            vec![Vec::<Event>::new()]
        );
    }

    #[test]
    fn guess_modes_have_the_same_language() {
        // literal guessing branches on every queue of every rank, so keep
        // the domain (and with it the number of queues) at 2
        let progs = [
            ("regs r; write(0, 1, 1, 0); barrier; r := mem[1];", 2, 8),
            (
                "regs r; mem[0] := 1; read(1, 1, 0, 0); write(1, 1, 0, 1); r := mem[0];",
                1,
                9,
            ),
        ];
        for (src, n, len) in progs {
            let i = Instance::new(parse_program(src).unwrap(), n, 2);
            let lit = build_ws_language(&i, GuessMode::Literal).unwrap();
            let at = build_ws_language(&i, GuessMode::AtIssue).unwrap();
            assert_eq!(words_up_to(&lit, len), words_up_to(&at, len), "{src}");
        }
    }

    #[test]
    fn marked_word_of_the_example() {
        let i = inst(corpus::ONETOONE_BARE, 2);
        let m = build_marked_language(&i, GuessMode::AtIssue).unwrap();
        let t = tau_nf();
        let mut word: Vec<Marked> = t.iter().copied().map(Marked::plain).collect();
        word[4].enter = true;
        word[5].leave = true;
        word[6].leave = true;
        word[8].enter = true;
        assert!(accepts(&m, &word));
        // a second enter on rank 1
        let mut bad = word.clone();
        bad[7].enter = true;
        assert!(!accepts(&m, &bad));
        // enter without leave
        let mut open = word.clone();
        open[6].leave = false;
        assert!(!accepts(&m, &open));
        let only2 = build_marked_language(&i, GuessMode::AtIssue)
            .unwrap()
            .restricted_to(&[2]);
        assert!(!accepts(&only2, &word));
    }

    #[test]
    fn popa_leave_popb_enter_pair() {
        let i = inst(corpus::ONETOONE_BARE, 2);
        let m = build_marked_language(&i, GuessMode::AtIssue).unwrap();
        let mut word: Vec<Marked> = tau_nf().into_iter().map(Marked::plain).collect();
        // rank 1: popA in part 1 leaves, its popB in part 2 would need to follow
        // immediately in the run, which it does
        word[1].leave = true;
        word[7].enter = true;
        assert!(accepts(&m, &word));
    }
}
